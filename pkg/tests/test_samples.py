# -*- coding: utf-8 -*-
import numpy as np
import pytest
from pydantic import ValidationError

from walkfield.errors import DataError
from walkfield.infer.samples import (PosteriorSamples, SamplerConfig, SamplerError, SamplerMeta, read_samples,
                                     run_chains, summarize, write_samples)
from walkfield.utils.rng import stream

NAMES = ("mu", "tau", "eta[0]", "eta[1]")


def _samples(n=50, seed=0, chain=0, acceptance=0.4):
    rng = stream(seed, chain)
    meta = SamplerMeta("Toy", seed, 2 * n, n, 1, chain, (("sigma", acceptance),))
    return PosteriorSamples(NAMES, rng.normal(size=(n, 4)), rng.normal(size=n), meta, {"note": [1, 2]})


def fake_fit(spec, config, chain=0):
    rng = stream(config.seed, chain)
    n = config.retained
    meta = SamplerMeta(spec, config.seed, config.iterations, config.burn_in, config.thin, chain, (("x", 0.5),))
    return PosteriorSamples(("a", "b"), rng.normal(size=(n, 2)), rng.normal(size=n), meta)


# -- sampler configuration ----------------------------------------------------

def test_retained_draws_and_keeps():
    cfg = SamplerConfig(iterations=10, burn_in=4, thin=3, seed=1)
    assert cfg.retained == 2
    assert [it for it in range(10) if cfg.keeps(it)] == [4, 7]


def test_burn_in_must_leave_draws():
    with pytest.raises(ValidationError, match="burn_in"):
        SamplerConfig(iterations=10, burn_in=10, seed=1)
    with pytest.raises(ValidationError):
        SamplerConfig(iterations=10, burn_in=0, thin=0, seed=1)


# -- containers ---------------------------------------------------------------

def test_shape_and_name_checks():
    meta = SamplerMeta("Toy", 0, 2, 1, 1)
    with pytest.raises(DataError):
        PosteriorSamples(("a",), np.zeros((3, 2)), np.zeros(3), meta)
    with pytest.raises(DataError):
        PosteriorSamples(("a",), np.zeros((3, 1)), np.zeros(2), meta)
    with pytest.raises(DataError, match="duplicate"):
        PosteriorSamples(("a", "a"), np.zeros((3, 2)), np.zeros(3), meta)


def test_non_finite_draws_fail_the_run():
    draws = np.zeros((3, 1))
    draws[1, 0] = np.nan
    with pytest.raises(SamplerError, match="non-finite"):
        PosteriorSamples(("a",), draws, np.zeros(3), SamplerMeta("Toy", 0, 2, 1, 1))


def test_columns_and_blocks():
    s = _samples()
    assert s.column("tau").shape == (50,)
    assert s.block("eta").shape == (50, 2)
    with pytest.raises(DataError, match="'beta'"):
        s.column("beta")


def test_write_then_read(tmp_path):
    s = _samples()
    write_samples(s, tmp_path)
    again = read_samples(tmp_path)
    assert again.names == s.names
    assert again.draws.tobytes() == s.draws.tobytes()
    assert again.loglik.tobytes() == s.loglik.tobytes()
    assert again.meta == s.meta
    assert again.extra == {"note": [1, 2]}


def test_reload_is_bit_exact_for_awkward_floats(tmp_path):
    values = np.array([0.1 + 0.2, 1 / 3, 2 / 3, 1e-300, 1.2345678901234567e200, 9007199254740993.0, 0.7,
                       np.nextafter(1.0, 2.0)])
    draws = np.column_stack([values, values * np.pi, np.sqrt(np.abs(values)), -values / 7])
    meta = SamplerMeta("Toy", 0, 16, 8, 1, 0, ())
    write_samples(PosteriorSamples(NAMES, draws, values * np.e, meta), tmp_path)
    again = read_samples(tmp_path)
    assert again.draws.tobytes() == draws.tobytes()
    assert again.loglik.tobytes() == (values * np.e).tobytes()


def test_read_missing_run(tmp_path):
    with pytest.raises(DataError, match="missing"):
        read_samples(tmp_path)


def test_concat_averages_acceptance():
    joined = PosteriorSamples.concat([_samples(chain=0, acceptance=0.2), _samples(chain=1, acceptance=0.4)])
    assert joined.n_draws == 100
    assert joined.meta.chain == -1
    assert dict(joined.meta.acceptance)["sigma"] == pytest.approx(0.3)
    with pytest.raises(DataError):
        PosteriorSamples.concat([])


def test_summarize():
    s = _samples(n=400)
    out = summarize(s)
    assert out["draws"] == 400
    assert set(out["parameters"]) == set(NAMES)
    mu = out["parameters"]["mu"]
    assert mu["q025"] < mu["q50"] < mu["q975"]
    assert mu["mean"] == pytest.approx(s.column("mu").mean())


# -- chains -------------------------------------------------------------------

def test_chains_are_independent_and_reproducible():
    cfg = SamplerConfig(iterations=30, burn_in=10, seed=8)
    serial = run_chains(fake_fit, "Toy", cfg, chains=3, workers=1)
    assert [c.meta.chain for c in serial] == [0, 1, 2]
    assert not np.array_equal(serial[0].draws, serial[1].draws)
    again = run_chains(fake_fit, "Toy", cfg, chains=3, workers=1)
    assert all(a.draws.tobytes() == b.draws.tobytes() for a, b in zip(serial, again))


def test_chain_count_checked():
    with pytest.raises(DataError):
        run_chains(fake_fit, "Toy", SamplerConfig(iterations=3, burn_in=1, seed=1), chains=0)
