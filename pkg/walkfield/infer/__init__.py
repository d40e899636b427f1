# -*- coding: utf-8 -*-
"""MCMC engines: Gaussian response models and the multinomial-probit genetics model."""
