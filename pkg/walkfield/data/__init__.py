# -*- coding: utf-8 -*-
"""File formats and the Columbus fixture."""
