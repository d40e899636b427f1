# -*- coding: utf-8 -*-
import numpy as np
from scipy.stats import truncnorm


def sample_truncated_normal(mean, lower, upper, rng: np.random.Generator, sd=1.0) -> np.ndarray:
    """N(mean, sd^2) restricted to (lower, upper), elementwise; bounds may be infinite.

    scipy's truncnorm switches to log-space tail sampling far from the mode,
    so deep one-sided truncations stay accurate. Results are clipped into the
    bounds to absorb the last ulp.
    """
    mean, lower, upper, sd = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (mean, lower, upper, sd)))
    if np.any(lower >= upper):
        raise ValueError("truncation interval is empty")
    a = (lower - mean) / sd
    b = (upper - mean) / sd
    x = truncnorm.rvs(a, b, loc=mean, scale=sd, size=mean.shape, random_state=rng)
    return np.clip(x, np.nextafter(lower, np.inf), np.nextafter(upper, -np.inf))
