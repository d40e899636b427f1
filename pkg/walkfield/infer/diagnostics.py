# -*- coding: utf-8 -*-
import numpy as np
import pandas as pd

from walkfield.errors import DataError
from walkfield.infer.samples import PosteriorSamples

MIN_DRAWS = 200
FLAG_THRESHOLD = 0.2


class DiagnosticError(DataError):
    pass


def split_half_diagnostic(samples: PosteriorSamples, threshold: float = FLAG_THRESHOLD) -> pd.DataFrame:
    """First half against second half of the retained draws, per parameter.

    A parameter is flagged when the half means differ by more than
    ``threshold`` pooled standard deviations.
    """
    n = samples.n_draws
    if n < MIN_DRAWS:
        raise DiagnosticError(f"split-half check needs at least {MIN_DRAWS} draws, got {n}")
    half = n // 2
    first, second = samples.draws[:half], samples.draws[half:2 * half]
    m1, m2 = first.mean(axis=0), second.mean(axis=0)
    pooled = np.sqrt(0.5 * (first.var(axis=0, ddof=1) + second.var(axis=0, ddof=1)))
    diff = np.abs(m1 - m2)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(pooled > 0, diff / pooled, np.where(diff > 0, np.inf, 0.0))
    q1 = np.quantile(first, [0.025, 0.975], axis=0)
    q2 = np.quantile(second, [0.025, 0.975], axis=0)
    return pd.DataFrame({
        "parameter": list(samples.names),
        "mean_first": m1,
        "mean_second": m2,
        "q025_first": q1[0],
        "q025_second": q2[0],
        "q975_first": q1[1],
        "q975_second": q2[1],
        "pooled_sd": pooled,
        "standardized_gap": z,
        "flagged": z > threshold,
    })
