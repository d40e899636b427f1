# -*- coding: utf-8 -*-
"""simulate-field, simulate-population and convergence."""
import logging
from pathlib import Path
from typing import List, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import Field, field_validator

from walkfield.errors import ConfigError
from walkfield.field import IntrinsicField, sample_fields
from walkfield.generator import GeneratorMatrix, check_irreducible, stationary_distribution
from walkfield.popsim import DemographyRates, convergence_gap, integrate_limit_ode, simulate_population
from walkfield.pipelines.common import CommandResult, GraphConfig, build_rates, load_graph_source, node_vector, \
    require_seed, split_list
from walkfield.utils.files import write_csv, write_json

log = logging.getLogger("pipelines.simulate")


# ---------- simulate-field ----------

class FieldConfig(GraphConfig):
    sigma: float = Field(1.0, gt=0)
    realizations: int = Field(4, ge=1)


def run_simulate_field(cfg: FieldConfig, out: Path) -> CommandResult:
    """Independent realizations of the intrinsic field, long format."""
    seed = require_seed(cfg, "simulate-field")
    result = CommandResult()
    gf = load_graph_source(cfg.graph, result)
    q = build_rates(gf, cfg.rate_params())
    fld = IntrinsicField(q, cfg.sigma)
    draws = sample_fields(fld, seed, cfg.realizations)
    m = q.dim
    frame = pd.DataFrame({
        "node_id": np.tile(np.arange(m), cfg.realizations),
        "label": gf.graph.labels * cfg.realizations,
        "realization": np.repeat(np.arange(cfg.realizations), m),
        "value": draws.ravel(),
    })
    result.outputs.append(write_csv(frame, out / "field.csv"))
    result.summary = {"nodes": m, "realizations": cfg.realizations, "log_det": fld.log_det}
    return result


# ---------- population process ----------

class DemographyConfig(GraphConfig):
    birth: List[float] = Field(default_factory=lambda: [0.0])
    death: List[float] = Field(default_factory=lambda: [0.0])
    z0: str = "uniform"
    t_end: float = Field(10.0, gt=0)
    snapshot_every: Optional[float] = Field(None, gt=0)

    @field_validator("birth", "death", mode="before")
    @classmethod
    def split_rate_lists(cls, value):
        return split_list(value)

    def demography(self, m: int) -> DemographyRates:
        return DemographyRates(node_vector(self.birth, m, "birth"), node_vector(self.death, m, "death"))

    def initial_density(self, q: GeneratorMatrix) -> np.ndarray:
        """uniform (1/M per node), stationary (equilibrium of the walk) or an explicit list."""
        key = self.z0.strip().lower()
        if key == "uniform":
            return np.full(q.dim, 1.0 / q.dim)
        if key == "stationary":
            if not check_irreducible(q):
                raise ConfigError("z0 = stationary needs an irreducible generator")
            return stationary_distribution(q)
        try:
            values = [float(v) for v in split_list(self.z0)]
        except ValueError:
            raise ConfigError(f"z0: expected uniform, stationary or numbers, got {self.z0!r}") from None
        return node_vector(values, q.dim, "z0")


class PopulationConfig(DemographyConfig):
    N: int = Field(1000, ge=1)
    mode: Literal["exact", "ode", "both"] = "both"
    dt: Optional[float] = Field(None, gt=0)


def run_simulate_population(cfg: PopulationConfig, out: Path) -> CommandResult:
    result = CommandResult()
    gf = load_graph_source(cfg.graph, result)
    q = build_rates(gf, cfg.rate_params())
    demo = cfg.demography(q.dim)
    z0 = cfg.initial_density(q)
    if cfg.mode in ("exact", "both"):
        seed = require_seed(cfg, "simulate-population")
        n0 = np.rint(cfg.N * z0).astype(np.int64)
        traj = simulate_population(q, demo, n0, cfg.N, cfg.t_end, seed, cfg.snapshot_every)
        path = out / "trajectory.csv"
        traj.to_csv(path)
        result.outputs.append(path)
        result.summary.update(events=traj.event_count, ended_early=traj.ended_early)
    if cfg.mode in ("ode", "both"):
        ode = integrate_limit_ode(q, demo, z0, cfg.t_end, cfg.dt, cfg.snapshot_every)
        path = out / "ode.csv"
        ode.to_csv(path)
        result.outputs.append(path)
        result.summary["ode_final_total"] = float(ode.final().sum())
    return result


class ConvergenceConfig(DemographyConfig):
    n_list: List[int] = Field(default_factory=lambda: [100, 1000, 10000])
    replicates: int = Field(20, ge=1)
    workers: Optional[int] = Field(None, ge=1)

    @field_validator("n_list", mode="before")
    @classmethod
    def split_n_list(cls, value):
        return split_list(value)


def run_convergence(cfg: ConvergenceConfig, out: Path) -> CommandResult:
    seed = require_seed(cfg, "convergence")
    result = CommandResult()
    gf = load_graph_source(cfg.graph, result)
    q = build_rates(gf, cfg.rate_params())
    report = convergence_gap(q, cfg.demography(q.dim), cfg.initial_density(q), cfg.t_end,
                             cfg.n_list, cfg.replicates, seed, cfg.snapshot_every, cfg.workers)
    result.outputs.append(write_csv(report.to_frame(), out / "convergence.csv"))
    result.outputs.append(write_json({"N": list(report.scales), "gaps": report.gaps}, out / "gaps.json"))
    result.summary = {"medians": dict(zip((str(n) for n in report.scales), report.medians.tolist()))}
    return result
