# -*- coding: utf-8 -*-
"""The intrinsic random field pi ~ N(0, sigma^2 (QQ')^-) with 1'pi = 0.

pi is the stationary state of dz/dt = -Q'z + gamma driven by sum-zero white
noise, so Q'pi = gamma. Every solve here goes through the bordered system
[[Q', 1], [1', 0]], which is exact on the sum-zero subspace; no diagonal
jitter is ever added.

Normalising constant: the density lives on 1-perp and is normalised by
det(V'PV) for an orthonormal basis V of 1-perp, which equals
det(P + 11'/M) for singular P. When P1 = 0 (symmetric walks) this is the
pseudo-determinant of P; for directed walks the null vector of P is the
stationary distribution instead of 1 and the two differ.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import connected_components

from walkfield.config import settings
from walkfield.errors import DataError, NumericalError
from walkfield.generator import GeneratorMatrix, SingularSystemError, bordered_matrix
from walkfield.utils.rng import stream

log = logging.getLogger("field")

ZERO_EIG_RTOL = 1e-10
RESIDUAL_RTOL = 1e-10
REFINE_STEPS = 3


class ConstraintError(DataError):
    pass


class RankDeficiencyError(NumericalError):
    pass


def stationary_precision(q: GeneratorMatrix) -> sp.csr_matrix:
    """P = QQ', averaged with its transpose to remove roundoff asymmetry."""
    p = (q.matrix @ q.T).tocsr()
    p = ((p + p.T) * 0.5).tocsr()
    p.sort_indices()
    return p


def _is_strongly_connected(q_t: sp.spmatrix) -> bool:
    a = sp.csr_matrix(q_t, copy=True)
    a.setdiag(0)
    a.eliminate_zeros()
    a.data = np.where(a.data != 0, 1.0, 0.0)
    if a.shape[0] == 1:
        return True
    n, _ = connected_components(a, directed=True, connection="strong")
    return n == 1


class BorderedSolver:
    """Factorises [[Q', 1], [1', 0]] once; solves Q'pi = r - mean(r), 1'pi = 0."""

    def __init__(self, q_t: sp.spmatrix):
        q_t = sp.csr_matrix(q_t)
        if q_t.shape[0] != q_t.shape[1]:
            raise DataError("operator must be square")
        if not _is_strongly_connected(q_t):
            raise SingularSystemError("bordered system is singular: the generator is reducible; check irreducibility")
        self.q_t = q_t
        self.m = q_t.shape[0]
        self._a = bordered_matrix(q_t)
        try:
            self._lu = spla.splu(self._a)
        except RuntimeError as e:
            raise SingularSystemError(f"bordered system is singular ({e}); check irreducibility") from None

    def solve(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if r.shape[0] != self.m:
            raise DataError(f"right-hand side has length {r.shape[0]}, expected {self.m}")
        r_t = r - r.mean(axis=0)
        rhs = np.zeros((self.m + 1,) + r.shape[1:])
        rhs[: self.m] = r_t
        bound = RESIDUAL_RTOL * np.abs(r_t).max(initial=0.0)
        x = self._lu.solve(rhs)
        for _ in range(REFINE_STEPS):
            x += self._lu.solve(rhs - self._a @ x)
            if not np.all(np.isfinite(x)):
                raise SingularSystemError("constrained solve produced non-finite values; check irreducibility")
            resid = np.abs(self.q_t @ x[: self.m] - r_t).max(initial=0.0)
            if resid <= bound:
                return x[: self.m]
        raise SingularSystemError(f"constrained solve residual {resid:.3g} exceeds {bound:.3g} after "
                                  f"{REFINE_STEPS} refinement steps; check irreducibility")


def constrained_solve(q_t: Union[sp.spmatrix, np.ndarray, GeneratorMatrix], r) -> np.ndarray:
    """Unique pi with Q'pi = r - mean(r)1 and 1'pi = 0 (Bott-Duffin inverse of Q')."""
    if isinstance(q_t, GeneratorMatrix):
        q_t = q_t.T
    return BorderedSolver(q_t).solve(r)


# ---------- determinants ----------

def _dense(p) -> np.ndarray:
    m = p.shape[0]
    if m > settings.dense_max:
        raise NumericalError(f"M = {m} exceeds the dense limit {settings.dense_max} (WALKFIELD_DENSE_LIMIT)")
    return p.toarray() if sp.issparse(p) else np.asarray(p, dtype=float)


def log_pseudo_det(p) -> float:
    """Sum of logs of the M-1 nonzero eigenvalues of a PSD matrix with a one-dimensional null space."""
    eig = la.eigvalsh(_dense(p))
    top = float(eig.max(initial=0.0))
    small = np.abs(eig) <= ZERO_EIG_RTOL * max(top, 1e-300)
    if small.sum() > 1:
        raise RankDeficiencyError(
            f"{int(small.sum())} near-zero eigenvalues; the generator graph is reducible"
        )
    if np.any(eig[~small] < 0):
        raise NumericalError("matrix is not positive semidefinite")
    return float(np.log(eig[~small]).sum())


def log_constrained_det(p) -> float:
    """log det of P compressed to the sum-zero subspace, via log det(P + 11'/M)."""
    a = _dense(p)
    m = a.shape[0]
    try:
        c, lower = la.cho_factor(a + 1.0 / m, lower=True)
    except la.LinAlgError:
        raise RankDeficiencyError("precision is singular on the sum-zero subspace; the generator graph is reducible") from None
    d = np.diag(c)
    if d.min() <= math.sqrt(ZERO_EIG_RTOL) * d.max():
        raise RankDeficiencyError("precision is numerically singular on the sum-zero subspace")
    return float(2.0 * np.log(d).sum())


# ---------- the field ----------

@dataclass(frozen=True, eq=False)
class FieldSample:
    pi: np.ndarray
    seed: int


@dataclass(frozen=True, eq=False)
class IntrinsicField:
    generator: GeneratorMatrix
    sigma: float = 1.0
    precision: sp.csr_matrix = field(init=False, repr=False)
    log_det: float = field(init=False)
    solver: BorderedSolver = field(init=False, repr=False)

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DataError(f"sigma must be positive, got {self.sigma!r}")
        object.__setattr__(self, "solver", BorderedSolver(self.generator.T))
        p = stationary_precision(self.generator)
        object.__setattr__(self, "precision", p)
        ld = log_constrained_det(p)
        if not math.isfinite(ld):
            raise NumericalError("log determinant is not finite")
        object.__setattr__(self, "log_det", ld)

    @property
    def dim(self) -> int:
        return self.generator.dim


def sample_fields(fld: IntrinsicField, seed: int, size: int) -> np.ndarray:
    """size draws as rows; gamma ~ N(0, sigma^2 I) conditioned on 1'gamma = 0, then Q'pi = gamma."""
    rng = stream(seed)
    gamma = fld.sigma * rng.standard_normal((fld.dim, size))
    gamma -= gamma.mean(axis=0)
    return np.ascontiguousarray(fld.solver.solve(gamma).T)


def sample_field(fld: IntrinsicField, seed: int) -> FieldSample:
    return FieldSample(sample_fields(fld, seed, 1)[0], seed)


def log_density(pi, fld: IntrinsicField) -> float:
    pi = np.asarray(pi, dtype=float)
    m = fld.dim
    if pi.shape != (m,):
        raise DataError(f"field vector has shape {pi.shape}, expected ({m},)")
    total = float(pi.sum())
    if abs(total) > 1e-8:
        raise ConstraintError(f"field must sum to zero, sum is {total:.3g}")
    r = fld.generator.T @ pi
    quad = float(r @ r)
    if not math.isfinite(quad):
        raise NumericalError("quadratic form is not finite")
    s2 = fld.sigma**2
    return -0.5 * (m - 1) * math.log(2 * math.pi * s2) + 0.5 * fld.log_det - quad / (2 * s2)


def constrained_covariance(fld: IntrinsicField) -> np.ndarray:
    """sigma^2 V (V'PV)^-1 V' with V an orthonormal basis of 1-perp."""
    p = _dense(fld.precision)
    v = la.null_space(np.ones((1, fld.dim)))
    s = v.T @ p @ v
    return fld.sigma**2 * v @ la.solve(s, v.T, assume_a="pos")


def variogram(fld: IntrinsicField) -> np.ndarray:
    """E(pi_i - pi_j)^2 for every pair."""
    c = constrained_covariance(fld)
    d = np.diag(c)
    return d[:, None] + d[None, :] - 2 * c


def resistance_distance(q: GeneratorMatrix) -> np.ndarray:
    """Effective resistance between nodes of a symmetric walk with edge conductances a_ij."""
    lap = _dense(q.matrix)
    if not np.allclose(lap, lap.T, rtol=0, atol=1e-12 * max(1.0, np.abs(lap).max())):
        raise DataError("resistance distance needs symmetric rates")
    v = la.null_space(np.ones((1, q.dim)))
    g = v @ la.solve(v.T @ lap @ v, v.T, assume_a="pos")
    d = np.diag(g)
    return d[:, None] + d[None, :] - 2 * g


def sample_constrained_gaussian(precision: np.ndarray, linear: np.ndarray,
                                rng: np.random.Generator) -> np.ndarray:
    """Draw x ~ exp(-x'Ax/2 + b'x) restricted to 1'x = 0.

    On the subspace A and A + 11' agree, and A + 11' is positive definite for
    every precision used here. Sample the unconstrained Gaussian with that
    precision, then condition on the sum by kriging.
    """
    a = np.asarray(precision, dtype=float) + 1.0
    try:
        chol = la.cholesky(a, lower=True)
    except la.LinAlgError:
        raise NumericalError("full conditional precision is not positive definite") from None
    factor = (chol, True)
    x = la.cho_solve(factor, np.asarray(linear, dtype=float))
    x += la.solve_triangular(chol, rng.standard_normal(a.shape[0]), lower=True, trans="T")
    w = la.cho_solve(factor, np.ones(a.shape[0]))
    return x - w * (x.sum() / w.sum())
