# -*- coding: utf-8 -*-
"""Posterior draws, their summaries and multi-chain runs."""
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from walkfield.config import settings
from walkfield.errors import DataError, NumericalError
from walkfield.utils.files import write_csv, write_json

log = logging.getLogger("infer.samples")

LOGLIK = "loglik"


class SamplerError(NumericalError):
    pass


class SamplerConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    iterations: int = Field(20_000, ge=1)
    burn_in: int = Field(5_000, ge=0)
    thin: int = Field(1, ge=1)
    seed: int = Field(..., ge=0, lt=2**64)

    @model_validator(mode="after")
    def _burn_in_below_iterations(self):
        if self.burn_in >= self.iterations:
            raise ValueError("burn_in must be smaller than iterations")
        return self

    @property
    def retained(self) -> int:
        return len(range(self.burn_in, self.iterations, self.thin))

    def keeps(self, it: int) -> bool:
        return it >= self.burn_in and (it - self.burn_in) % self.thin == 0


@dataclass(frozen=True)
class SamplerMeta:
    model: str
    seed: int
    iterations: int
    burn_in: int
    thin: int
    chain: int = 0
    acceptance: Tuple[Tuple[str, float], ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        out = {k: getattr(self, k) for k in ("model", "seed", "iterations", "burn_in", "thin", "chain")}
        out["acceptance"] = dict(self.acceptance)
        return out

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "SamplerMeta":
        acc = tuple(sorted((str(k), float(v)) for k, v in d.get("acceptance", {}).items()))
        return cls(d["model"], int(d["seed"]), int(d["iterations"]), int(d["burn_in"]), int(d["thin"]),
                   int(d.get("chain", 0)), acc)


@dataclass(frozen=True, eq=False)
class PosteriorSamples:
    names: Tuple[str, ...]
    draws: np.ndarray
    loglik: np.ndarray
    meta: SamplerMeta
    extra: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        draws = np.asarray(self.draws, dtype=float)
        loglik = np.asarray(self.loglik, dtype=float)
        if draws.ndim != 2 or draws.shape[1] != len(self.names):
            raise DataError(f"draws have shape {draws.shape}, expected (n, {len(self.names)})")
        if loglik.shape != (draws.shape[0],):
            raise DataError("one log-likelihood value per retained draw")
        if len(set(self.names)) != len(self.names):
            raise DataError("duplicate parameter names")
        if not np.all(np.isfinite(draws)) or not np.all(np.isfinite(loglik)):
            raise SamplerError(f"{self.meta.model}: non-finite draws in chain {self.meta.chain}")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "draws", draws)
        object.__setattr__(self, "loglik", loglik)

    @property
    def n_draws(self) -> int:
        return self.draws.shape[0]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(f"no parameter {name!r} in samples") from None

    def column(self, name: str) -> np.ndarray:
        return self.draws[:, self.index(name)]

    def block(self, prefix: str) -> np.ndarray:
        """Columns named ``prefix[...]`` in stored order."""
        cols = [i for i, n in enumerate(self.names) if n.startswith(prefix + "[")]
        return self.draws[:, cols]

    def posterior_mean(self) -> Dict[str, float]:
        return dict(zip(self.names, self.draws.mean(axis=0).tolist()))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.draws, columns=list(self.names))
        frame[LOGLIK] = self.loglik
        return frame

    @classmethod
    def concat(cls, chains: Sequence["PosteriorSamples"]) -> "PosteriorSamples":
        if not chains:
            raise DataError("nothing to concatenate")
        first = chains[0]
        if any(c.names != first.names for c in chains):
            raise DataError("chains have different parameters")
        acc: Dict[str, List[float]] = {}
        for c in chains:
            for k, v in c.meta.acceptance:
                acc.setdefault(k, []).append(v)
        meta = SamplerMeta(first.meta.model, first.meta.seed, first.meta.iterations, first.meta.burn_in,
                           first.meta.thin, -1, tuple(sorted((k, float(np.mean(v))) for k, v in acc.items())))
        return cls(first.names, np.vstack([c.draws for c in chains]),
                   np.concatenate([c.loglik for c in chains]), meta, dict(first.extra))


def write_samples(samples: PosteriorSamples, directory: Path) -> None:
    directory = Path(directory)
    write_csv(samples.to_frame(), directory / "samples.csv")
    write_json({"meta": samples.meta.to_dict(), "extra": samples.extra}, directory / "sampler.json")


def read_samples(directory: Path) -> PosteriorSamples:
    directory = Path(directory)
    csv, meta_path = directory / "samples.csv", directory / "sampler.json"
    for p in (csv, meta_path):
        if not p.is_file():
            raise DataError(f"missing {p}")
    frame = pd.read_csv(csv, float_precision="round_trip")
    if LOGLIK not in frame.columns:
        raise DataError(f"{csv}: no {LOGLIK} column")
    info = json.loads(meta_path.read_text(encoding="utf-8"))
    names = [c for c in frame.columns if c != LOGLIK]
    return PosteriorSamples(tuple(names), frame[names].to_numpy(dtype=float), frame[LOGLIK].to_numpy(dtype=float),
                            SamplerMeta.from_dict(info["meta"]), info.get("extra", {}))


def summarize(samples: PosteriorSamples) -> Dict[str, Any]:
    q = np.quantile(samples.draws, [0.025, 0.5, 0.975], axis=0)
    sd = samples.draws.std(axis=0, ddof=1) if samples.n_draws > 1 else np.zeros(len(samples.names))
    params = {
        name: {"mean": float(m), "sd": float(s), "q025": float(a), "q50": float(b), "q975": float(c)}
        for name, m, s, a, b, c in zip(samples.names, samples.draws.mean(axis=0), sd, *q)
    }
    return {"model": samples.meta.model, "draws": samples.n_draws,
            "acceptance": dict(samples.meta.acceptance), "parameters": params}


def _run_one(fit_fn: Callable, spec, config: SamplerConfig, chain: int) -> PosteriorSamples:
    return fit_fn(spec, config, chain=chain)


def run_chains(fit_fn: Callable, spec, config: SamplerConfig, chains: int = 1,
               workers: Optional[int] = None) -> List[PosteriorSamples]:
    """Independent chains; chain c draws from stream (seed, c) so results do not depend on workers."""
    if chains < 1:
        raise DataError("need at least one chain")
    workers = settings.pool_size if workers is None else int(workers)
    job = partial(_run_one, fit_fn, spec, config)
    if workers > 1 and chains > 1:
        with ProcessPoolExecutor(max_workers=min(workers, chains)) as pool:
            out = list(pool.map(job, range(chains)))
    else:
        out = [job(c) for c in range(chains)]
    log.info("%d chain(s) of %s finished", chains, out[0].meta.model)
    return out
