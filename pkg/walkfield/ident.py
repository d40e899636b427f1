# -*- coding: utf-8 -*-
"""Can Q be recovered from QQ'?

QQ' fixes Q only up to Q -> QU with U orthogonal and U1 = 1, and such a W
is a generator whenever its off-diagonal entries stay non-positive. The
deterministic loop, where every node has a single exit and the exits form
one directed cycle, is never identifiable: the reversed cycle with the same
per-node exit rates gives the same QQ'.

``check_identifiable`` applies the row condition (some row with two or more
positive rates) and reports IdentifiableByTheorem when it holds. The
condition is necessary, not sufficient. On dense supports a small rotation
of the sum-zero subspace keeps every off-diagonal entry negative and gives a
distinct generator W with WW' = QQ'. On sparse supports (bidirectional
chains, lattices, stream trees) rotations push some zero entry positive and
no such W turns up. ``verify_unique`` searches for one.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm, null_space
from scipy.optimize import minimize
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from walkfield.errors import ConfigError, DataError
from walkfield.generator import GeneratorMatrix
from walkfield.utils.rng import check_seed, stream

log = logging.getLogger("ident")

NONZERO_RTOL = 1e-12
MATCH_TOL = 1e-8
DISTINCT_TOL = 1e-4
LOG_RATE_FLOOR = np.log(1e-30)


class IdentifiabilityError(ConfigError):
    pass


class Classification(str, Enum):
    IDENTIFIABLE = "IdentifiableByTheorem"
    LOOP = "DeterministicLoop"
    REDUCIBLE = "Reducible"


@dataclass(frozen=True)
class IdentifiabilityReport:
    classification: Classification
    witness_row: Optional[int] = None
    cycle_order: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        ident = self.classification is Classification.IDENTIFIABLE
        loop = self.classification is Classification.LOOP
        if (self.witness_row is not None) != ident or (self.cycle_order is not None) != loop:
            raise ValueError(f"inconsistent report for {self.classification.value}")

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "classification": self.classification.value,
            "witness_row": self.witness_row,
            "cycle_order": list(self.cycle_order) if self.cycle_order is not None else None,
        }
        if labels is not None:
            out["witness_label"] = labels[self.witness_row] if self.witness_row is not None else None
            out["cycle_labels"] = [labels[i] for i in self.cycle_order] if self.cycle_order is not None else None
        return out


def _significant(q: GeneratorMatrix) -> Tuple[np.ndarray, np.ndarray]:
    r, c, v = q.rate_coo
    keep = v > NONZERO_RTOL * q.max_rate()
    return r[keep], c[keep]


def check_identifiable(q: GeneratorMatrix) -> IdentifiabilityReport:
    m = q.dim
    rows, cols = _significant(q)
    if m > 1:
        adj = csr_matrix((np.ones(rows.size), (rows, cols)), shape=(m, m))
        n_comp, _ = connected_components(adj, directed=True, connection="strong")
        if n_comp != 1:
            return IdentifiabilityReport(Classification.REDUCIBLE)
    exits = np.bincount(rows, minlength=m)
    multi = np.flatnonzero(exits >= 2)
    if multi.size:
        return IdentifiabilityReport(Classification.IDENTIFIABLE, witness_row=int(multi[0]))
    # one exit per node and strongly connected: a single Hamiltonian cycle
    succ = dict(zip(rows.tolist(), cols.tolist()))
    order = [0]
    while len(order) < m:
        order.append(succ[order[-1]])
    return IdentifiabilityReport(Classification.LOOP, cycle_order=tuple(order))


def construct_confounded_pair(rates: Sequence[float]) -> Tuple[GeneratorMatrix, GeneratorMatrix]:
    """Forward cycle Q and backward cycle W with the same exit rates; QQ' = WW'."""
    r = np.asarray(rates, dtype=float).ravel()
    m = r.size
    if m < 3:
        raise IdentifiabilityError(f"need M >= 3 for a distinct confounder, got M = {m}")
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise DataError("cycle rates must be positive and finite")
    i = np.arange(m)
    q = GeneratorMatrix.from_rates(m, i, (i + 1) % m, r)
    w = GeneratorMatrix.from_rates(m, i, (i - 1) % m, r)
    return q, w


def rotate_generator(q: GeneratorMatrix, angle: float, seed: int) -> GeneratorMatrix:
    """W = QU with U a random rotation of the sum-zero subspace (U1 = 1), so WW' = QQ'.

    ``angle`` is the spectral norm of the skew generator of the rotation.
    Raises when W leaves the generator cone, which is what happens on sparse
    supports.
    """
    m = q.dim
    if m < 3:
        raise IdentifiabilityError(f"the sum-zero subspace has no rotations for M = {m}")
    if not np.isfinite(angle) or angle <= 0:
        raise DataError("rotation angle must be positive")
    check_seed(seed)
    v = null_space(np.ones((1, m)))
    a = stream(seed).normal(size=(m - 1, m - 1))
    s = a - a.T
    s *= angle / np.linalg.norm(s, 2)
    u = np.eye(m) + v @ (expm(s) - np.eye(m - 1)) @ v.T
    w = q.toarray() @ u
    off = w[~np.eye(m, dtype=bool)]
    if np.any(off > NONZERO_RTOL * q.max_rate()):
        raise IdentifiabilityError(f"rotation by {angle:g} gives a positive off-diagonal entry; not a generator")
    rows, cols = np.nonzero(~np.eye(m, dtype=bool) & (w < 0))
    return GeneratorMatrix.from_rates(m, rows, cols, -w[rows, cols])


# ---------- uniqueness search ----------

def _generator_from_log_rates(theta: np.ndarray, rows: np.ndarray, cols: np.ndarray, m: int) -> np.ndarray:
    w = np.zeros((m, m))
    w[rows, cols] = -np.exp(theta)
    w[np.arange(m), np.arange(m)] = -w.sum(axis=1)
    return w


def verify_unique(q: GeneratorMatrix, trials: int, seed: int,
                  initial: Optional[GeneratorMatrix] = None,
                  check_precondition: bool = True) -> bool:
    """Local search for some W != Q with WW' = QQ'. True when none is found.

    A search, not a proof. W ranges over every off-diagonal pattern through
    log-rates; restarts are random except that ``initial``, if given, seeds
    the first one.
    """
    if check_precondition:
        report = check_identifiable(q)
        if report.classification is not Classification.IDENTIFIABLE:
            raise IdentifiabilityError(
                f"verify_unique needs an identifiable generator, got {report.classification.value}"
            )
    check_seed(seed)
    m = q.dim
    target = q.toarray() @ q.toarray().T
    scale = max(float(np.abs(target).max()), 1e-300)
    top = q.max_rate()
    q_dense = q.toarray()
    rows, cols = np.nonzero(~np.eye(m, dtype=bool))
    hi = np.log(10.0 * max(top, 1e-300))

    def objective(theta: np.ndarray) -> float:
        w = _generator_from_log_rates(theta, rows, cols, m)
        return float(np.sum((w @ w.T - target) ** 2)) / scale**2

    starts = []
    if initial is not None:
        if initial.dim != m:
            raise DataError("planted generator has the wrong dimension")
        planted = -initial.toarray()[rows, cols]
        starts.append(np.maximum(np.log(np.maximum(planted, 1e-300)), LOG_RATE_FLOOR))
    for t in range(max(trials - len(starts), 0)):
        rng = stream(seed, t)
        starts.append(np.clip(np.log(top) + rng.normal(0.0, 1.5, size=rows.size), LOG_RATE_FLOOR, hi))

    bounds = [(LOG_RATE_FLOOR, hi)] * rows.size
    for k, x0 in enumerate(starts):
        res = minimize(objective, x0, method="Powell", bounds=bounds,
                       options={"xtol": 1e-10, "ftol": 1e-18, "maxfev": 50_000})
        w = _generator_from_log_rates(res.x, rows, cols, m)
        mismatch = float(np.abs(w @ w.T - target).max())
        distance = float(np.abs(w - q_dense).max())
        log.debug("restart %d: mismatch %.3g, distance %.3g", k, mismatch, distance)
        if mismatch <= MATCH_TOL * max(1.0, scale) and distance > DISTINCT_TOL * max(1.0, top):
            log.info("restart %d found a distinct generator with the same QQ'", k)
            return False
    return True
