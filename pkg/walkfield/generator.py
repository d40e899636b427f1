# -*- coding: utf-8 -*-
"""Edge rates and the infinitesimal generator of the random walk.

Sign convention: Q_ii = sum_k a_ik > 0 and Q_ij = -a_ij <= 0, so every row
sums to zero and the limit ODE reads dz/dt = -Q'z + (b - d). Most CTMC texts
use the negated matrix.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import connected_components

from walkfield.errors import DataError, NumericalError
from walkfield.graph import GraphError, SpatialGraph

log = logging.getLogger("generator")

# exp() overflows just above 709; anything past 700 is a modelling error
MAX_LINEAR_PREDICTOR = 700.0


class RateError(NumericalError):
    pass


class SingularSystemError(NumericalError):
    pass


@dataclass(frozen=True)
class RateParams:
    """beta0 intercept, beta1 downstream effect, beta2 barrier effect, extras by name."""

    beta0: float = 0.0
    beta1: float = 0.0
    beta2: float = 0.0
    extras: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.vector()):
            raise RateError(f"rate parameters must be finite: {self.vector().tolist()}")

    @property
    def extra_names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.extras)

    def vector(self) -> np.ndarray:
        return np.array([self.beta0, self.beta1, self.beta2, *(v for _, v in self.extras)], dtype=float)

    @classmethod
    def from_vector(cls, beta: Sequence[float], extra_names: Sequence[str] = ()) -> "RateParams":
        beta = [float(b) for b in beta]
        if len(beta) != 3 + len(extra_names):
            raise ValueError(f"expected {3 + len(extra_names)} coefficients, got {len(beta)}")
        return cls(beta[0], beta[1], beta[2], tuple(zip(extra_names, beta[3:])))


class RateModel:
    """Log-linear rate model bound to a graph: a_ij = exp(x_ij' beta) / d_ij.

    The design matrix is built once so repeated evaluation (one per MCMC
    proposal) is a single matrix-vector product.
    """

    def __init__(self, graph: SpatialGraph, extra_names: Sequence[str] = ()):
        self.graph = graph
        self.extra_names = tuple(extra_names)
        cov = graph.covariate_matrix(("downstream", "barrier", *self.extra_names))
        self.design = np.hstack([np.ones((len(graph.edges), 1)), cov])
        self.log_distance = np.log(graph.edge_distance)

    def linear_predictor(self, beta: np.ndarray) -> np.ndarray:
        return self.design @ np.asarray(beta, dtype=float)

    def rates(self, beta: np.ndarray) -> np.ndarray:
        eta = self.linear_predictor(beta)
        bad = np.flatnonzero(~np.isfinite(eta) | (np.abs(eta) > MAX_LINEAR_PREDICTOR))
        if bad.size:
            e = self.graph.edges[bad[0]]
            lab = self.graph.labels
            raise RateError(
                f"linear predictor {eta[bad[0]]:.6g} on edge {lab[e.src]}->{lab[e.dst]} "
                f"exceeds +/-{MAX_LINEAR_PREDICTOR:g}"
            )
        return np.exp(eta - self.log_distance)

    def generator(self, beta: np.ndarray) -> "GeneratorMatrix":
        return GeneratorMatrix.from_rates(
            self.graph.node_count, self.graph.edge_src, self.graph.edge_dst, self.rates(beta)
        )


def edge_rates_loglinear(graph: SpatialGraph, params: RateParams) -> Dict[Tuple[int, int], float]:
    """a_ij = (1/d_ij) exp{b0 + b1 u_ij + b2 v_ij + extras}, keyed by (i, j)."""
    model = RateModel(graph, params.extra_names)
    rates = model.rates(params.vector())
    return {e.key: float(r) for e, r in zip(graph.edges, rates)}


# ---------- generator ----------

@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Sparse generator in CSR form with sorted indices."""

    matrix: sp.csr_matrix

    def __post_init__(self):
        q = self.matrix
        if not sp.isspmatrix_csr(q) or q.shape[0] != q.shape[1]:
            raise DataError("generator must be a square CSR matrix")
        if not np.all(np.isfinite(q.data)):
            raise NumericalError("generator has non-finite entries")

    # ---------- constructors ----------

    @classmethod
    def from_rates(cls, m: int, rows, cols, rates) -> "GeneratorMatrix":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        rates = np.asarray(rates, dtype=float)
        if np.any(rates < 0) or not np.all(np.isfinite(rates)):
            raise GraphError("rates must be finite and non-negative")
        if np.any(rows == cols):
            raise GraphError("rates on the diagonal are not transitions")
        keep = rates > 0
        rows, cols, rates = rows[keep], cols[keep], rates[keep]
        diag = np.bincount(rows, weights=rates, minlength=m)
        r = np.concatenate([rows, np.arange(m)])
        c = np.concatenate([cols, np.arange(m)])
        v = np.concatenate([-rates, diag])
        order = np.lexsort((c, r))
        q = sp.coo_matrix((v[order], (r[order], c[order])), shape=(m, m)).tocsr()
        q.eliminate_zeros()
        q.sort_indices()
        return cls(q)

    @classmethod
    def from_dense(cls, a, tol: float = 1e-12) -> "GeneratorMatrix":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DataError("generator must be square")
        off = a - np.diag(np.diag(a))
        if np.any(off > 0):
            raise DataError("off-diagonal generator entries must be <= 0")
        scale = max(1.0, float(np.abs(a).max(initial=0.0)))
        if np.any(np.abs(a.sum(axis=1)) > tol * scale):
            raise DataError("generator rows must sum to zero")
        rows, cols = np.nonzero(off)
        return cls.from_rates(a.shape[0], rows, cols, -off[rows, cols])

    # ---------- views ----------

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def rate_coo(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(rows, cols, rates) of the positive off-diagonal rates in (row, col) order."""
        coo = self.matrix.tocoo()
        off = coo.row != coo.col
        return coo.row[off].astype(np.int64), coo.col[off].astype(np.int64), -coo.data[off]

    @cached_property
    def rate_matrix(self) -> sp.csr_matrix:
        r, c, v = self.rate_coo
        return sp.csr_matrix((v, (r, c)), shape=self.matrix.shape)

    @cached_property
    def out_rates(self) -> np.ndarray:
        return np.asarray(self.matrix.diagonal(), dtype=float)

    @cached_property
    def T(self) -> sp.csr_matrix:
        qt = self.matrix.T.tocsr()
        qt.sort_indices()
        return qt

    def max_rate(self) -> float:
        _, _, v = self.rate_coo
        return float(v.max(initial=0.0))

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def scaled(self, c: float) -> "GeneratorMatrix":
        r, cols, v = self.rate_coo
        return GeneratorMatrix.from_rates(self.dim, r, cols, v * float(c))


def build_generator(graph: SpatialGraph, rates: Mapping[Tuple[int, int], float]) -> GeneratorMatrix:
    """Q from per-edge rates; zero rates are dropped from the pattern."""
    edge_keys = {e.key for e in graph.edges}
    rows, cols, vals = [], [], []
    dropped = []
    for key in sorted(rates):
        if key not in edge_keys:
            raise GraphError(f"rate given for {key[0]}->{key[1]}, which is not an edge")
        a = float(rates[key])
        if not math.isfinite(a) or a < 0:
            raise GraphError(f"rate on edge {key[0]}->{key[1]} must be finite and >= 0, got {a!r}")
        if a == 0.0:
            dropped.append(key)
            continue
        rows.append(key[0])
        cols.append(key[1])
        vals.append(a)
    q = GeneratorMatrix.from_rates(graph.node_count, rows, cols, vals)
    if dropped:
        log.warning("dropped %d zero-rate edges: %s", len(dropped), dropped[:10])
        if not check_irreducible(q):
            log.warning("generator is reducible after dropping zero-rate edges")
    return q


def check_irreducible(q: GeneratorMatrix) -> bool:
    """True iff the digraph of strictly positive rates is strongly connected."""
    if q.dim == 1:
        return True
    n, _ = connected_components(q.rate_matrix, directed=True, connection="strong")
    return n == 1


def relabel(q: GeneratorMatrix, perm: Sequence[int]) -> GeneratorMatrix:
    """New node k is old node perm[k]."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(q.dim)):
        raise DataError("perm must be a permutation of 0..M-1")
    new_of_old = np.empty_like(perm)
    new_of_old[perm] = np.arange(q.dim)
    r, c, v = q.rate_coo
    return GeneratorMatrix.from_rates(q.dim, new_of_old[r], new_of_old[c], v)


# ---------- SAR form ----------

@dataclass(frozen=True, eq=False)
class SarFactors:
    """B with zero diagonal and the diagonal of Lambda."""

    B: sp.csr_matrix
    lam: np.ndarray

    def precision(self) -> sp.csr_matrix:
        m = self.B.shape[0]
        ib = sp.identity(m, format="csr") - self.B
        return (ib.T @ sp.diags(1.0 / self.lam) @ ib).tocsr()


def to_sar(q: GeneratorMatrix, labels: Optional[Sequence[str]] = None) -> SarFactors:
    """B_ij = a_ji / sum_k a_ik, Lambda_ii = 1 / (sum_k a_ik)^2."""
    out = q.out_rates
    isolated = np.flatnonzero(out <= 0)
    if isolated.size:
        i = int(isolated[0])
        name = labels[i] if labels is not None else str(i)
        raise GraphError(f"node {name} has no out-edge; the SAR form needs every out-rate > 0")
    b = (sp.diags(1.0 / out) @ q.rate_matrix.T).tocsr()
    b.sort_indices()
    return SarFactors(b, 1.0 / out**2)


# ---------- bordered systems ----------

def bordered_matrix(q_t: sp.spmatrix) -> sp.csc_matrix:
    """[[Q', 1], [1', 0]], the system behind every constrained solve."""
    m = q_t.shape[0]
    ones = np.ones((m, 1))
    return sp.bmat([[sp.csr_matrix(q_t), sp.csr_matrix(ones)],
                    [sp.csr_matrix(ones.T), None]], format="csc")


def stationary_distribution(q: GeneratorMatrix) -> np.ndarray:
    """p with Q'p = 0 and 1'p = 1."""
    m = q.dim
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    try:
        lu = spla.splu(bordered_matrix(q.T))
    except RuntimeError as e:
        raise SingularSystemError(f"stationary system is singular ({e}); check irreducibility") from None
    p = lu.solve(rhs)[:m]
    if not np.all(np.isfinite(p)):
        raise SingularSystemError("stationary system is singular; check irreducibility")
    return p
