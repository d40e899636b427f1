# -*- coding: utf-8 -*-
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats


class PriorSpec(BaseModel):
    """Hyperparameters shared by the Gaussian and genetics models."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    regression_sd: float = Field(100.0, gt=0)
    re_sd_scale: float = Field(100.0, gt=0)
    tau2_shape: float = Field(0.01, gt=0)
    tau2_scale: float = Field(0.01, gt=0)
    rate_beta_sd: float = Field(10.0, gt=0)
    mu_lk_sd: float = Field(10.0, gt=0)

    def log_half_normal(self, sigma: float) -> float:
        if sigma <= 0:
            return -math.inf
        return float(stats.halfnorm.logpdf(sigma, scale=self.re_sd_scale))

    def log_inverse_gamma(self, tau2: float) -> float:
        return float(stats.invgamma.logpdf(tau2, self.tau2_shape, scale=self.tau2_scale))

    def log_rate_beta(self, beta: np.ndarray) -> float:
        return float(stats.norm.logpdf(np.asarray(beta), scale=self.rate_beta_sd).sum())
