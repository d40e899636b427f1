# -*- coding: utf-8 -*-
"""Spatial covariance models built from random walks on graphs."""

__version__ = "0.1.0"
