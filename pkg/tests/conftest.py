# -*- coding: utf-8 -*-
import numpy as np
import pytest

from walkfield.generator import GeneratorMatrix
from walkfield.graph import EdgeCovariates, SpatialGraph


def generator(rows, cols, rates, m=None):
    m = m if m is not None else max(max(rows, default=0), max(cols, default=0)) + 1
    return GeneratorMatrix.from_rates(m, rows, cols, rates)


@pytest.fixture
def two_node():
    """Symmetric unit-rate walk on two nodes."""
    return generator([0, 1], [1, 0], [1.0, 1.0])


@pytest.fixture
def three_cycle():
    return generator([0, 1, 2], [1, 2, 0], [1.0, 1.0, 1.0])


@pytest.fixture
def path_graph():
    """0 - 1 - 2 - 3, unit distances both ways."""
    edges = []
    for i in range(3):
        edges += [(i, i + 1, EdgeCovariates(1.0)), (i + 1, i, EdgeCovariates(1.0))]
    return SpatialGraph.build(["a", "b", "c", "d"], edges)


def dense_constrained_covariance(p: np.ndarray, sigma: float = 1.0) -> np.ndarray:
    """Oracle: sigma^2 times the inverse of P on 1-perp, through an explicit contrast basis."""
    m = p.shape[0]
    basis = np.eye(m)[:, 1:] - np.eye(m)[:, [0]]
    v, _ = np.linalg.qr(basis)
    return sigma**2 * v @ np.linalg.inv(v.T @ p @ v) @ v.T
