# -*- coding: utf-8 -*-
"""build and check-ident."""
import logging
from pathlib import Path
from typing import Literal, Optional

from walkfield.config import RunConfig
from walkfield.data.graphfile import GraphFile, load_gal, write_graph
from walkfield.errors import ConfigError
from walkfield.generator import check_irreducible
from walkfield.ident import check_identifiable, verify_unique
from walkfield.networks import cycle_graph, lattice_graph, stream_network
from walkfield.pipelines.common import CommandResult, GraphConfig, build_rates, load_graph_source, require_seed
from walkfield.utils.files import write_json

log = logging.getLogger("pipelines.graphs")


class BuildConfig(RunConfig):
    source: Literal["graph", "columbus", "gal", "stream", "lattice", "cycle"] = "columbus"
    graph: Optional[str] = None
    gal: Optional[str] = None
    nodes: Optional[str] = None
    stream_nodes: int = 30
    barriers: int = 2
    rows: int = 7
    cols: int = 7
    cycle_nodes: int = 3
    bidirectional: bool = False


def run_build(cfg: BuildConfig, out: Path) -> CommandResult:
    """Materialise a graph directory from any supported source and report on it."""
    result = CommandResult()
    if cfg.source == "graph":
        if not cfg.graph:
            raise ConfigError("source = graph needs graph = <directory>")
        gf = load_graph_source(cfg.graph, result)
    elif cfg.source == "columbus":
        gf = load_graph_source("columbus", result)
    elif cfg.source == "gal":
        if not cfg.gal:
            raise ConfigError("source = gal needs gal = <file>")
        gf = load_gal(Path(cfg.gal), Path(cfg.nodes) if cfg.nodes else None)
        result.inputs += [Path(cfg.gal)] + ([Path(cfg.nodes)] if cfg.nodes else [])
    elif cfg.source == "stream":
        gf = GraphFile(stream_network(cfg.stream_nodes, cfg.barriers, require_seed(cfg, "build")))
    elif cfg.source == "lattice":
        gf = GraphFile(lattice_graph(cfg.rows, cfg.cols))
    else:
        gf = GraphFile(cycle_graph(cfg.cycle_nodes, cfg.bidirectional))

    graph = gf.graph
    result.labels = graph.labels
    gdir = write_graph(graph, out / "graph", gf.attributes)
    q = build_rates(gf, GraphConfig().rate_params())
    summary = {
        "nodes": graph.node_count,
        "edges": len(graph.edges),
        "symmetric": graph.is_symmetric(),
        "irreducible": check_irreducible(q),
        "extra_covariates": graph.extra_names(),
        "labels": graph.labels,
    }
    result.outputs += [gdir / "nodes.csv", gdir / "edges.csv", gdir / "graph.cfg",
                       write_json(summary, out / "graph.json")]
    result.summary = {k: summary[k] for k in ("nodes", "edges", "irreducible")}
    return result


class CheckIdentConfig(GraphConfig):
    verify_trials: int = 0


def run_check_ident(cfg: CheckIdentConfig, out: Path) -> CommandResult:
    result = CommandResult()
    gf = load_graph_source(cfg.graph, result)
    q = build_rates(gf, cfg.rate_params())
    report = check_identifiable(q)
    payload = report.to_dict(gf.graph.labels)
    if cfg.verify_trials > 0:
        payload["verify_unique"] = verify_unique(q, cfg.verify_trials, require_seed(cfg, "check-ident"))
    result.outputs.append(write_json(payload, out / "ident.json"))
    result.summary = {"classification": payload["classification"]}
    return result
