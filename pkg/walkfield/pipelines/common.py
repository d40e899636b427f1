# -*- coding: utf-8 -*-
"""Pieces shared by the command workflows: graph sources, list-valued keys, manifests."""
import platform
import time
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

import walkfield
from walkfield.config import RunConfig
from walkfield.data.columbus import columbus_graph_file, columbus_inputs
from walkfield.data.graphfile import CFG, EDGES, NODES, GraphFile, read_graph_dir
from walkfield.errors import ConfigError
from walkfield.generator import GeneratorMatrix, RateModel, RateParams
from walkfield.utils.files import sha256_file, write_csv, write_json

COLUMBUS = "columbus"
LABELS = "labels.csv"


@dataclass
class CommandResult:
    inputs: List[Path] = field(default_factory=list)
    outputs: List[Path] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    labels: Optional[List[str]] = None


def split_list(value):
    """Comma-separated text to a list; lists pass through."""
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    if isinstance(value, (int, float)):
        return [value]
    return value


class GraphConfig(RunConfig):
    """A graph directory, or ``columbus`` for the Columbus fixture, plus log-rate coefficients."""

    graph: str = COLUMBUS
    beta0: float = 0.0
    beta1: float = 0.0
    beta2: float = 0.0

    def rate_params(self) -> RateParams:
        return RateParams(self.beta0, self.beta1, self.beta2)


def load_graph_source(spec: str, result: CommandResult) -> GraphFile:
    if spec == COLUMBUS:
        gf = columbus_graph_file()
        result.inputs += columbus_inputs()
    else:
        path = Path(spec)
        gf = read_graph_dir(path)
        result.inputs += [p for p in (path / NODES, path / EDGES, path / CFG) if p.is_file()]
    result.labels = gf.graph.labels
    return gf


def build_rates(gf: GraphFile, params: RateParams) -> GeneratorMatrix:
    return RateModel(gf.graph, params.extra_names).generator(params.vector())


def node_vector(values: List[float], m: int, name: str) -> np.ndarray:
    """One value for every node, or exactly M values."""
    if len(values) == 1:
        return np.full(m, float(values[0]))
    if len(values) != m:
        raise ConfigError(f"{name}: expected 1 or {m} values, got {len(values)}")
    return np.asarray(values, dtype=float)


def require_seed(cfg: RunConfig, command: str) -> int:
    if cfg.seed is None:
        raise ConfigError(f"{command} is stochastic: set seed in the config or pass --seed")
    return cfg.seed


# ---------- manifest ----------

def package_versions() -> Dict[str, str]:
    out = {"python": platform.python_version(), "walkfield": walkfield.__version__}
    for dist in ("numpy", "scipy", "pandas", "pydantic"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = "unknown"
    return out


def write_manifest(out: Path, command: str, cfg: RunConfig, result: CommandResult,
                   started: float, config_path: Optional[Path] = None) -> Path:
    inputs = list(result.inputs) + ([config_path] if config_path is not None else [])
    manifest = {
        "command": command,
        "config": cfg.model_dump(mode="json"),
        "seed": cfg.seed,
        "inputs": {str(p): sha256_file(p) for p in sorted(set(inputs), key=str)},
        "outputs": sorted(str(Path(p).relative_to(out)) if Path(p).is_relative_to(out) else str(p)
                          for p in result.outputs),
        "versions": package_versions(),
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    return write_json(manifest, out / "manifest.json")


# ---------- node labels ----------

def write_label_map(labels: List[str], out: Path) -> Path:
    """Dense 0-based node index to the label it was loaded under."""
    return write_csv(pd.DataFrame({"node_id": np.arange(len(labels)), "label": labels}), out / LABELS)


def read_label_map(run: Path) -> Optional[List[str]]:
    path = Path(run) / LABELS
    if not path.is_file():
        return None
    frame = pd.read_csv(path, dtype={"label": str}, keep_default_na=False)
    return frame["label"].tolist()
