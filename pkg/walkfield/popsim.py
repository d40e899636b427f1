# -*- coding: utf-8 -*-
"""Open population random walk: exact jump simulation and its large-N limit.

Transitions with scale N and counts n:
    birth  n + e_i        at rate N b_i
    death  n - e_i        at rate N d_i   (suppressed while n_i = 0)
    move   n - e_i + e_j  at rate n_i a_ij

The normalised density n/N converges to dz/dt = -Q'z + (b - d).
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from walkfield.config import settings
from walkfield.errors import DataError, NumericalError
from walkfield.generator import GeneratorMatrix
from walkfield.utils.files import write_csv
from walkfield.utils.rng import check_seed, stream

log = logging.getLogger("popsim")


class EventCapExceeded(NumericalError):
    def __init__(self, msg: str, partial: "PopulationTrajectory"):
        super().__init__(msg)
        self.partial = partial


class DivergenceError(NumericalError):
    def __init__(self, msg: str, time: float):
        super().__init__(msg)
        self.time = time


@dataclass(frozen=True, eq=False)
class DemographyRates:
    b: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float).ravel()
        d = np.asarray(self.d, dtype=float).ravel()
        if b.shape != d.shape:
            raise DataError("birth and death vectors must have the same length")
        for name, v in (("birth", b), ("death", d)):
            if not np.all(np.isfinite(v)) or np.any(v < 0):
                raise DataError(f"{name} rates must be finite and >= 0")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    @classmethod
    def zeros(cls, m: int) -> "DemographyRates":
        return cls(np.zeros(m), np.zeros(m))

    @property
    def dim(self) -> int:
        return self.b.shape[0]

    @property
    def net(self) -> np.ndarray:
        return self.b - self.d


@dataclass(frozen=True, eq=False)
class PopulationState:
    counts: np.ndarray
    scale: int
    time: float

    @property
    def density(self) -> np.ndarray:
        return self.counts / self.scale


@dataclass(frozen=True, eq=False)
class PopulationTrajectory:
    """Snapshots on a time grid. ``scale`` is None for ODE paths, whose values are densities."""

    times: np.ndarray
    values: np.ndarray
    scale: Optional[int] = None
    event_count: int = 0
    rng_seed: Optional[int] = None
    ended_early: bool = False

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size == 0 or t[0] != 0.0:
            raise DataError("trajectory must start at t = 0")
        if np.any(np.diff(t) <= 0):
            raise DataError("trajectory times must be strictly increasing")
        if len(self.values) != t.size:
            raise DataError("one state per snapshot time")
        object.__setattr__(self, "times", t)

    @property
    def density(self) -> np.ndarray:
        if self.scale is None:
            return self.values
        return self.values / self.scale

    def states(self) -> Iterator[PopulationState]:
        if self.scale is None:
            raise DataError("ODE trajectories carry densities, not counts")
        for t, n in zip(self.times, self.values):
            yield PopulationState(n, self.scale, float(t))

    def final(self) -> np.ndarray:
        return self.density[-1]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.density, columns=[f"node_{i}" for i in range(self.density.shape[1])])
        frame.insert(0, "t", self.times)
        return frame

    def to_csv(self, path: Path) -> None:
        write_csv(self.to_frame(), path)


def snapshot_grid(t_end: float, every: Optional[float] = None) -> np.ndarray:
    """0, every, 2*every, ... below t_end, then t_end itself."""
    if not (t_end > 0 and math.isfinite(t_end)):
        raise DataError(f"t_end must be positive, got {t_end!r}")
    if every is None:
        return np.array([0.0, float(t_end)])
    if not every > 0:
        raise DataError(f"snapshot interval must be positive, got {every!r}")
    n = int(math.ceil(t_end / every - 1e-9))
    grid = every * np.arange(n)
    return np.append(grid[grid < t_end * (1 - 1e-12)], float(t_end))


def _check_inputs(q: GeneratorMatrix, demo: DemographyRates, x0) -> np.ndarray:
    x0 = np.asarray(x0)
    if demo.dim != q.dim or x0.shape != (q.dim,):
        raise DataError(f"dimension mismatch: Q is {q.dim}x{q.dim}, demography {demo.dim}, initial state {x0.shape}")
    return x0


# ---------- exact simulation ----------

def simulate_population(q: GeneratorMatrix, demo: DemographyRates, n0: Sequence[int], N: int,
                        t_end: float, seed: int, snapshot_every: Optional[float] = None,
                        max_events: Optional[int] = None,
                        stream_key: Tuple[int, ...] = ()) -> PopulationTrajectory:
    """Gillespie direct method; snapshots carry the state in force at each grid time."""
    n = _check_inputs(q, demo, n0)
    if not np.all(n >= 0) or not np.all(n == np.rint(n)):
        raise DataError("initial counts must be non-negative integers")
    if int(N) < 1:
        raise DataError(f"scale N must be a positive integer, got {N!r}")
    check_seed(seed)
    N = int(N)
    n = n.astype(np.int64).copy()
    cap = settings.event_cap if max_events is None else int(max_events)
    rng = stream(seed, *stream_key)
    grid = snapshot_grid(t_end, snapshot_every)

    rm = q.rate_matrix
    indptr, indices = rm.indptr, rm.indices
    row_cum = [np.cumsum(rm.data[indptr[i]:indptr[i + 1]]) for i in range(q.dim)]
    out = q.out_rates
    birth = N * demo.b
    death = N * demo.d

    snaps: List[np.ndarray] = [n.copy()]
    k = 1
    t = 0.0
    events = 0
    ended_early = False

    def partial() -> PopulationTrajectory:
        return PopulationTrajectory(grid[:k], np.array(snaps), N, events, seed)

    while True:
        w = birth + np.where(n > 0, death, 0.0) + n * out
        cum = np.cumsum(w)
        total = float(cum[-1])
        if total <= 0.0:
            ended_early = True
            log.info("population absorbed at t=%.6g after %d events", t, events)
            t_next = math.inf
        else:
            t_next = t + rng.exponential(1.0 / total)
        while k < grid.size and grid[k] < t_next:
            snaps.append(n.copy())
            k += 1
        if t_next >= t_end:
            break

        u = rng.random() * total
        i = min(int(np.searchsorted(cum, u, side="right")), q.dim - 1)
        v = min(max(u - (cum[i] - w[i]), 0.0), np.nextafter(w[i], 0.0))
        if v < birth[i]:
            n[i] += 1
        elif v < birth[i] + (death[i] if n[i] > 0 else 0.0):
            n[i] -= 1
        else:
            v = (v - birth[i] - (death[i] if n[i] > 0 else 0.0)) / n[i]
            rc = row_cum[i]
            j = indices[indptr[i] + min(int(np.searchsorted(rc, v, side="right")), rc.size - 1)]
            n[i] -= 1
            n[j] += 1
        events += 1
        if events > cap:
            raise EventCapExceeded(
                f"event cap {cap} exceeded at t={t_next:.6g} (WALKFIELD_MAX_EVENTS)", partial()
            )
        t = t_next

    return PopulationTrajectory(grid, np.array(snaps), N, events, seed, ended_early)


# ---------- large-N limit ----------

def default_step(q: GeneratorMatrix) -> float:
    top = float(np.abs(q.out_rates).max(initial=0.0))
    return 0.01 if top == 0 else min(0.01, 0.1 / top)


def integrate_limit_ode(q: GeneratorMatrix, demo: DemographyRates, z0, t_end: float,
                        dt: Optional[float] = None,
                        snapshot_every: Optional[float] = None) -> PopulationTrajectory:
    """Classic fourth-order Runge-Kutta; the step before each grid time is shortened to land on it."""
    z = _check_inputs(q, demo, z0).astype(float).copy()
    dt = default_step(q) if dt is None else float(dt)
    if not dt > 0:
        raise DataError(f"dt must be positive, got {dt!r}")
    grid = snapshot_grid(t_end, snapshot_every)
    qt = q.T
    src = demo.net

    def f(x: np.ndarray) -> np.ndarray:
        return src - qt @ x

    snaps = [z.copy()]
    for g0, g1 in zip(grid[:-1], grid[1:]):
        steps = max(1, int(math.ceil((g1 - g0) / dt - 1e-9)))
        t = g0
        for s in range(steps):
            t_new = g1 if s == steps - 1 else g0 + (s + 1) * dt
            h = t_new - t
            k1 = f(z)
            k2 = f(z + 0.5 * h * k1)
            k3 = f(z + 0.5 * h * k2)
            k4 = f(z + h * k3)
            z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(z)):
                raise DivergenceError(f"limit ODE diverged at t={t_new:.6g}", t_new)
            t = t_new
        snaps.append(z.copy())
    return PopulationTrajectory(grid, np.array(snaps))


# ---------- convergence check ----------

@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    scales: Tuple[int, ...]
    gaps: np.ndarray  # scales x replicates
    medians: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "medians", np.median(self.gaps, axis=1))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"N": list(self.scales), "median_gap": self.medians})
        frame["q25"] = np.quantile(self.gaps, 0.25, axis=1)
        frame["q75"] = np.quantile(self.gaps, 0.75, axis=1)
        return frame


def _replicate_gap(task) -> float:
    q, demo, n0, N, t_end, seed, every, key, z_ode = task
    traj = simulate_population(q, demo, n0, N, t_end, seed, every, stream_key=key)
    return float(np.abs(traj.density - z_ode).max())


def convergence_gap(q: GeneratorMatrix, demo: DemographyRates, z0, t_end: float,
                    n_list: Sequence[int], replicates: int, seed: int,
                    snapshot_every: Optional[float] = None,
                    workers: Optional[int] = None) -> ConvergenceReport:
    """Median over replicates of sup_t ||n(t)/N - z(t)||_inf, per N."""
    z0 = _check_inputs(q, demo, z0).astype(float)
    scales = tuple(int(x) for x in n_list)
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise DataError("N list must be strictly increasing")
    if replicates < 1:
        raise DataError("need at least one replicate")
    check_seed(seed)
    every = t_end / 50 if snapshot_every is None else snapshot_every
    z_ode = integrate_limit_ode(q, demo, z0, t_end, snapshot_every=every).values

    tasks = [
        (q, demo, np.rint(N * z0).astype(np.int64), N, t_end, seed, every, (a, r), z_ode)
        for a, N in enumerate(scales)
        for r in range(replicates)
    ]
    workers = settings.pool_size if workers is None else int(workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            gaps = list(pool.map(_replicate_gap, tasks))
    else:
        gaps = [_replicate_gap(t) for t in tasks]
    report = ConvergenceReport(scales, np.array(gaps).reshape(len(scales), replicates))
    log.info("convergence medians: %s", dict(zip(scales, np.round(report.medians, 6).tolist())))
    return report
