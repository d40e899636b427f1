# -*- coding: utf-8 -*-
import numpy as np
import pytest

from walkfield.errors import DataError
from walkfield.infer.dic import MIN_DRAWS, compute_dic, likelihood_for
from walkfield.infer.gaussian import GaussianLikelihood, GaussianModelSpec, fit_gaussian
from walkfield.infer.genetics import MODEL_NAME as GENETICS_MODEL
from walkfield.infer.samples import PosteriorSamples, SamplerConfig, SamplerMeta
from walkfield.networks import lattice_graph
from walkfield.utils.rng import stream


class _Flat:
    def __init__(self, value):
        self.value = value
        self.seen = None

    def log_likelihood(self, point):
        self.seen = point
        return self.value


def _toy(n, model="Toy", extra=None):
    rng = stream(n)
    return PosteriorSamples(("a", "b"), rng.normal(size=(n, 2)), rng.normal(-10.0, 1.0, size=n),
                            SamplerMeta(model, 0, 2 * n, n, 1), extra or {})


def test_dic_formula():
    s = _toy(150)
    flat = _Flat(-9.0)
    out = compute_dic(s, flat)
    dbar = -2.0 * s.loglik.mean()
    assert out.dbar == pytest.approx(dbar)
    assert out.d_at_mean == pytest.approx(18.0)
    assert out.p_d == pytest.approx(dbar - 18.0)
    assert out.dic == pytest.approx(2 * dbar - 18.0)
    assert flat.seen == pytest.approx(s.posterior_mean())
    assert set(out.to_dict()) == {"dbar", "d_at_mean", "p_d", "dic"}


def test_dic_needs_enough_draws():
    with pytest.raises(DataError, match=str(MIN_DRAWS)):
        compute_dic(_toy(MIN_DRAWS - 1), _Flat(0.0))


def test_likelihood_is_rebuilt_from_the_run():
    with pytest.raises(DataError, match="Gaussian"):
        likelihood_for(_toy(120, "SpatialRandomEffect"))
    with pytest.raises(DataError, match="genotype"):
        likelihood_for(_toy(120, GENETICS_MODEL))


def test_dic_on_a_gaussian_fit():
    graph = lattice_graph(3, 3)
    rng = stream(12)
    h = rng.normal(size=9)
    c = 1.0 + h + rng.normal(scale=0.5, size=9)
    s = fit_gaussian(GaussianModelSpec(c, h, graph), SamplerConfig(iterations=400, burn_in=200, seed=3))
    assert isinstance(likelihood_for(s), GaussianLikelihood)
    out = compute_dic(s)
    assert np.isfinite(out.dic)
    assert out.dic == pytest.approx(2 * out.dbar - out.d_at_mean)
