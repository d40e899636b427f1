# -*- coding: utf-8 -*-
import numpy as np
import pytest
from scipy.stats import truncnorm

from walkfield.infer.truncnorm import sample_truncated_normal
from walkfield.utils.rng import stream


def test_draws_stay_inside_bounds():
    x = sample_truncated_normal(np.zeros(5000), 1.0, 2.0, stream(1))
    assert np.all((x > 1.0) & (x < 2.0))


def test_deep_tail_is_finite():
    x = sample_truncated_normal(np.zeros(2000), 8.0, np.inf, stream(2))
    assert np.all(np.isfinite(x))
    assert np.all(x > 8.0)
    assert x.mean() == pytest.approx(truncnorm.mean(8.0, np.inf), abs=0.01)


def test_mean_matches_scipy():
    n = 50_000
    x = sample_truncated_normal(np.full(n, 0.5), -1.0, np.inf, stream(3), sd=2.0)
    a, b = (-1.0 - 0.5) / 2.0, np.inf
    expected = truncnorm.mean(a, b, loc=0.5, scale=2.0)
    se = truncnorm.std(a, b, loc=0.5, scale=2.0) / np.sqrt(n)
    assert abs(x.mean() - expected) < 4 * se


def test_elementwise_bounds():
    lower = np.array([-5.0, -np.inf, 2.5])
    upper = np.array([-4.0, 0.0, 3.0])
    x = sample_truncated_normal(np.zeros(3), lower, upper, stream(4))
    assert np.all(x > lower) and np.all(x < upper)


def test_empty_interval():
    with pytest.raises(ValueError, match="empty"):
        sample_truncated_normal(0.0, 1.0, 1.0, stream(5))
