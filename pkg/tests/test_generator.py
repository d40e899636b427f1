# -*- coding: utf-8 -*-
import logging
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from walkfield.errors import ConfigError, DataError
from walkfield.generator import (GeneratorMatrix, RateError, RateModel, RateParams, build_generator,
                                 check_irreducible, edge_rates_loglinear, relabel, stationary_distribution, to_sar)
from walkfield.graph import EdgeCovariates, GraphError, SpatialGraph
from walkfield.networks import random_generator, random_irreducible_graph
from walkfield.utils.rng import stream

from conftest import generator


def _covariate_graph(m, seed, density=0.4):
    rng = stream(seed)
    edges = []
    for i in range(m):
        for j in range(m):
            if i != j and rng.random() < density:
                cov = EdgeCovariates(float(rng.uniform(0.5, 3.0)), int(rng.integers(2)), int(rng.integers(2)),
                                     (("slope", float(rng.normal())),))
                edges.append((i, j, cov))
    return SpatialGraph.build([f"n{i}" for i in range(m)], edges)


# -- edge rates ---------------------------------------------------------------

def test_unit_edge_rate_is_one():
    g = SpatialGraph.build(["a", "b"], [(0, 1, EdgeCovariates(1.0))])
    assert edge_rates_loglinear(g, RateParams()) == {(0, 1): pytest.approx(1.0)}


def test_rate_combines_distance_and_indicators():
    g = SpatialGraph.build(["a", "b"], [(0, 1, EdgeCovariates(2.0, downstream=1))])
    rates = edge_rates_loglinear(g, RateParams(math.log(2), math.log(3), 0.0))
    assert rates[(0, 1)] == pytest.approx(3.0)


def test_rates_match_scalar_recomputation():
    g = _covariate_graph(7, seed=11)
    params = RateParams(0.3, -0.7, 1.1, (("slope", 0.25),))
    rates = edge_rates_loglinear(g, params)
    for e in g.edges:
        c = e.covariates
        expected = math.exp(0.3 - 0.7 * c.downstream + 1.1 * c.barrier + 0.25 * c.value("slope")) / c.distance
        assert rates[e.key] == pytest.approx(expected, rel=1e-14)


def test_missing_covariate_names_edge():
    g = SpatialGraph.build(["a", "b"], [(0, 1, EdgeCovariates(1.0))])
    with pytest.raises(ConfigError, match="a->b.*'slope'"):
        edge_rates_loglinear(g, RateParams(extras=(("slope", 1.0),)))


def test_linear_predictor_overflow_is_an_error():
    g = SpatialGraph.build(["a", "b"], [(0, 1, EdgeCovariates(1.0))])
    with pytest.raises(RateError, match="800"):
        edge_rates_loglinear(g, RateParams(800.0))


def test_rates_increase_with_intercept():
    g = _covariate_graph(6, seed=3)
    model = RateModel(g, ("slope",))
    low = model.rates(np.array([0.0, 0.5, -0.5, 0.1]))
    high = model.rates(np.array([0.2, 0.5, -0.5, 0.1]))
    assert np.all(high > low)


def test_indicator_effects_vanish_with_zero_coefficients():
    a = SpatialGraph.build(["a", "b"], [(0, 1, EdgeCovariates(1.5, 1, 1)), (1, 0, EdgeCovariates(1.5, 0, 0))])
    rates = edge_rates_loglinear(a, RateParams(0.4, 0.0, 0.0))
    assert rates[(0, 1)] == rates[(1, 0)]


def test_rate_params_vector_round_trip():
    p = RateParams.from_vector([1.0, 2.0, 3.0, 4.0], ["slope"])
    assert p.extras == (("slope", 4.0),)
    assert_array_equal(p.vector(), [1.0, 2.0, 3.0, 4.0])
    with pytest.raises(RateError):
        RateParams(float("nan"))


# -- generator ----------------------------------------------------------------

def test_two_node_generator():
    g = SpatialGraph.from_adjacency([[0, 1], [1, 0]])
    q = build_generator(g, {(0, 1): 2.0, (1, 0): 3.0})
    assert_array_equal(q.toarray(), [[2.0, -2.0], [-3.0, 3.0]])


def test_directed_three_cycle_generator():
    g = SpatialGraph.from_adjacency([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    q = build_generator(g, {(0, 1): 1.0, (1, 2): 1.0, (2, 0): 1.0})
    assert_array_equal(q.toarray(), [[1, -1, 0], [0, 1, -1], [-1, 0, 1]])


@pytest.mark.parametrize("seed", range(5))
def test_rows_sum_to_zero_and_signs(seed):
    q = random_generator(9, seed, density=0.4)
    a = q.toarray()
    assert_allclose(a.sum(axis=1), np.zeros(9), rtol=0, atol=1e-14)
    off = a - np.diag(np.diag(a))
    assert np.all(off <= 0)
    assert_allclose(np.diag(a), -off.sum(axis=1), rtol=1e-14)


def test_negative_rate_rejected():
    g = SpatialGraph.from_adjacency([[0, 1], [1, 0]])
    with pytest.raises(GraphError):
        build_generator(g, {(0, 1): -1.0, (1, 0): 1.0})


def test_rate_on_non_edge_rejected():
    g = SpatialGraph.from_adjacency([[0, 1], [0, 0]])
    with pytest.raises(GraphError, match="not an edge"):
        build_generator(g, {(1, 0): 1.0})


def test_zero_rates_dropped_with_warning(caplog):
    g = SpatialGraph.from_adjacency([[0, 1], [1, 0]])
    with caplog.at_level(logging.WARNING, logger="generator"):
        q = build_generator(g, {(0, 1): 1.0, (1, 0): 0.0})
    assert q.matrix.nnz == 2
    assert "dropped 1 zero-rate" in caplog.text
    assert "reducible" in caplog.text


def test_generator_is_deterministic():
    g = _covariate_graph(8, seed=5)
    params = RateParams(0.1, 0.2, -0.3, (("slope", 0.4),))
    a = build_generator(g, edge_rates_loglinear(g, params)).matrix
    b = build_generator(g, edge_rates_loglinear(g, params)).matrix
    assert_array_equal(a.indptr, b.indptr)
    assert_array_equal(a.indices, b.indices)
    assert a.data.tobytes() == b.data.tobytes()


def test_from_dense_validates():
    q = GeneratorMatrix.from_dense([[2.0, -2.0], [-3.0, 3.0]])
    assert_array_equal(q.toarray(), [[2.0, -2.0], [-3.0, 3.0]])
    with pytest.raises(DataError, match="sum to zero"):
        GeneratorMatrix.from_dense([[2.0, -1.0], [-3.0, 3.0]])
    with pytest.raises(DataError, match="<= 0"):
        GeneratorMatrix.from_dense([[-1.0, 1.0], [1.0, -1.0]])


# -- irreducibility -----------------------------------------------------------

def test_irreducible_two_node():
    assert check_irreducible(generator([0, 1], [1, 0], [1.0, 1.0]))
    assert not check_irreducible(generator([0], [1], [1.0], m=2))


@pytest.mark.parametrize("seed", range(20))
def test_irreducible_matches_reachability(seed):
    rng = stream(seed, 7)
    m = int(rng.integers(2, 9))
    adj = (rng.random((m, m)) < 0.3) & ~np.eye(m, dtype=bool)
    rows, cols = np.nonzero(adj)
    q = generator(rows, cols, np.ones(rows.size), m=m)
    reach = np.eye(m, dtype=bool)
    step = adj.astype(int)
    for _ in range(m):
        reach |= (reach.astype(int) @ step) > 0
    assert check_irreducible(q) == bool(reach.all())


# -- SAR form ------------------------------------------------------------------

def test_sar_unit_rates():
    sar = to_sar(generator([0, 1], [1, 0], [1.0, 1.0]))
    assert_array_equal(sar.B.toarray(), [[0, 1], [1, 0]])
    assert_array_equal(sar.lam, [1.0, 1.0])


def test_sar_asymmetric_rates():
    sar = to_sar(generator([0, 1], [1, 0], [2.0, 3.0]))
    assert_allclose(sar.B.toarray(), [[0, 1.5], [2 / 3, 0]])
    assert_allclose(sar.lam, [1 / 4, 1 / 9])


def test_sar_precision_equals_qq():
    for seed in range(200):
        m = int(stream(seed, 99).integers(2, 33))
        q = random_generator(m, seed, density=min(0.3, 4.0 / m))
        a = q.toarray()
        assert_allclose(to_sar(q).precision().toarray(), a @ a.T, rtol=0, atol=1e-10)


def test_sar_rejects_isolated_node():
    with pytest.raises(GraphError, match="node c"):
        to_sar(generator([0, 1], [1, 0], [1.0, 1.0], m=3), labels=["a", "b", "c"])


# -- stationary distribution and relabelling ---------------------------------

def test_stationary_distribution():
    q = random_generator(7, seed=4)
    p = stationary_distribution(q)
    assert p.sum() == pytest.approx(1.0)
    assert np.all(p > 0)
    assert_allclose(q.T @ p, np.zeros(7), atol=1e-12)


def test_relabel_permutes_precision():
    q = random_generator(6, seed=8)
    perm = [3, 0, 5, 1, 4, 2]
    a, b = q.toarray(), relabel(q, perm).toarray()
    assert_allclose(b, a[np.ix_(perm, perm)])
    with pytest.raises(DataError):
        relabel(q, [0, 0, 1, 2, 3, 4])


def test_random_graph_is_irreducible():
    for seed in range(10):
        g = random_irreducible_graph(12, seed, density=0.05)
        q = RateModel(g).generator(np.zeros(3))
        assert check_irreducible(q)
