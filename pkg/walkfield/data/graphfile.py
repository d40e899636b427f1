# -*- coding: utf-8 -*-
"""Graph directories and GAL contiguity files.

A graph directory holds

    nodes.csv   node_id[, x, y][, attribute columns...]
    edges.csv   from, to, distance[, downstream, barrier][, extra covariates...]
    graph.cfg   optional; ``symmetric = true`` expands each edge record both ways

Node ids are labels; they are mapped to 0-based indices in file order.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from walkfield.config import bind_config, read_run_config
from walkfield.graph import STANDARD_COVARIATES, Edge, EdgeCovariates, GraphError, Node, SpatialGraph
from walkfield.utils.files import write_csv

log = logging.getLogger("data.graphfile")

NODES = "nodes.csv"
EDGES = "edges.csv"
CFG = "graph.cfg"
COORDS = ("x", "y")
EDGE_BASE = ("from", "to", "distance")


class GraphFileConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    symmetric: bool = False


@dataclass(frozen=True, eq=False)
class GraphFile:
    graph: SpatialGraph
    attributes: pd.DataFrame = field(default_factory=pd.DataFrame)
    symmetric: bool = False


def _read_table(path: Path, required: Tuple[str, ...]) -> pd.DataFrame:
    if not path.is_file():
        raise GraphError(f"{path}: file not found")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise GraphError(f"{path}: cannot parse CSV ({e})") from None
    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise GraphError(f"{path}:1: missing column(s) {', '.join(missing)}")
    return frame


def _number(path: Path, line: int, column: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise GraphError(f"{path}:{line}: {column} {text!r} is not a number") from None
    if not np.isfinite(value):
        raise GraphError(f"{path}:{line}: {column} must be finite")
    return value


def read_graph_dir(directory: Path) -> GraphFile:
    directory = Path(directory)
    cfg = GraphFileConfig()
    if (directory / CFG).is_file():
        cfg = bind_config(GraphFileConfig, read_run_config(directory / CFG), source=str(directory / CFG))

    npath = directory / NODES
    nodes_df = _read_table(npath, ("node_id",))
    has_xy = all(c in nodes_df.columns for c in COORDS)
    index: Dict[str, int] = {}
    nodes: List[Node] = []
    for row, values in enumerate(nodes_df.itertuples(index=False, name=None), start=2):
        rec = dict(zip(nodes_df.columns, values))
        label = str(rec["node_id"]).strip()
        if not label:
            raise GraphError(f"{npath}:{row}: empty node_id")
        if label in index:
            raise GraphError(f"{npath}:{row}: duplicate node_id {label!r}")
        x = y = None
        if has_xy:
            x = _number(npath, row, "x", rec["x"])
            y = _number(npath, row, "y", rec["y"])
        index[label] = len(nodes)
        nodes.append(Node(len(nodes), label, x, y))

    epath = directory / EDGES
    edges_df = _read_table(epath, EDGE_BASE)
    extra_cols = [c for c in edges_df.columns if c not in EDGE_BASE and c not in STANDARD_COVARIATES]
    seen: Dict[Tuple[int, int], int] = {}
    edges: List[Edge] = []
    for row, values in enumerate(edges_df.itertuples(index=False, name=None), start=2):
        rec = dict(zip(edges_df.columns, values))
        ends = []
        for col in ("from", "to"):
            label = str(rec[col]).strip()
            if label not in index:
                raise GraphError(f"{epath}:{row}: {col} node {label!r} is not in {NODES}")
            ends.append(index[label])
        src, dst = ends
        if src == dst:
            raise GraphError(f"{epath}:{row}: self-edge at {rec['from']!r}")
        dist = _number(epath, row, "distance", rec["distance"])
        if dist <= 0:
            raise GraphError(f"{epath}:{row}: distance must be positive, got {dist:g}")
        flags = {}
        for col in STANDARD_COVARIATES:
            text = str(rec.get(col, "0")).strip() or "0"
            if text not in ("0", "1"):
                raise GraphError(f"{epath}:{row}: {col} must be 0 or 1, got {text!r}")
            flags[col] = int(text)
        extras = tuple((c, _number(epath, row, c, rec[c])) for c in extra_cols if str(rec[c]).strip())
        cov = EdgeCovariates(dist, flags["downstream"], flags["barrier"], extras)
        keys = [(src, dst), (dst, src)] if cfg.symmetric else [(src, dst)]
        for key in keys:
            if key in seen:
                raise GraphError(f"{epath}:{row}: duplicate edge {rec['from']}->{rec['to']} (first at line {seen[key]})")
            seen[key] = row
            edges.append(Edge(key[0], key[1], cov))

    attrs = nodes_df.drop(columns=["node_id", *(COORDS if has_xy else ())])
    attrs.index = pd.Index([n.label for n in nodes], name="node_id")
    graph = SpatialGraph(tuple(nodes), tuple(edges))
    log.info("loaded %s: %d nodes, %d directed edges", directory, graph.node_count, len(graph.edges))
    return GraphFile(graph, attrs, cfg.symmetric)


def load_graph(directory: Path) -> SpatialGraph:
    return read_graph_dir(directory).graph


def write_graph(graph: SpatialGraph, directory: Path, attributes: Optional[pd.DataFrame] = None) -> Path:
    """Directed records only, so load_graph(write_graph(g)) reproduces g exactly."""
    directory = Path(directory)
    nodes = pd.DataFrame({"node_id": graph.labels})
    if all(n.x is not None and n.y is not None for n in graph.nodes):
        nodes["x"] = [n.x for n in graph.nodes]
        nodes["y"] = [n.y for n in graph.nodes]
    if attributes is not None and len(attributes.columns):
        for col in attributes.columns:
            nodes[col] = attributes[col].to_numpy()
    write_csv(nodes, directory / NODES)

    lab = graph.labels
    extras = graph.extra_names()
    rows = []
    for e in graph.edges:
        c = e.covariates
        rec = {"from": lab[e.src], "to": lab[e.dst], "distance": c.distance,
               "downstream": c.downstream, "barrier": c.barrier}
        for name in extras:
            try:
                rec[name] = c.value(name)
            except KeyError:
                rec[name] = None
        rows.append(rec)
    edges = pd.DataFrame(rows, columns=[*EDGE_BASE, *STANDARD_COVARIATES, *extras])
    write_csv(edges, directory / EDGES)
    (directory / CFG).write_text("symmetric = false\n", encoding="utf-8")
    return directory


def load_gal(path: Path, attributes: Optional[Path] = None) -> GraphFile:
    """GeoDa/spdep ``.gal`` contiguity: a header, then ``id count`` / neighbour-id line pairs.

    The neighbour relation is symmetrised; every edge gets unit distance.
    ``attributes`` may name a nodes.csv whose node_id column matches the GAL ids
    and fixes the node order.
    """
    path = Path(path)
    if not path.is_file():
        raise GraphError(f"{path}: file not found")
    lines = [(i, ln.split()) for i, ln in enumerate(path.read_text(encoding="utf-8").splitlines(), 1) if ln.strip()]
    if not lines:
        raise GraphError(f"{path}: empty file")
    head = lines[0][1]
    try:
        n = int(head[1] if len(head) >= 2 else head[0])
    except (ValueError, IndexError):
        raise GraphError(f"{path}:{lines[0][0]}: cannot read the node count") from None
    body = iter(lines[1:])
    neighbours: Dict[str, List[str]] = {}
    order: List[str] = []
    for ln, rec in body:
        if len(rec) != 2 or not rec[1].isdigit():
            raise GraphError(f"{path}:{ln}: expected '<id> <count>'")
        count = int(rec[1])
        nb: List[str] = []
        if count:
            ln2, nb = next(body, (ln, []))
            if len(nb) != count:
                raise GraphError(f"{path}:{ln2}: {rec[0]} declares {count} neighbours, lists {len(nb)}")
        if rec[0] in neighbours:
            raise GraphError(f"{path}:{ln}: duplicate id {rec[0]!r}")
        neighbours[rec[0]] = nb
        order.append(rec[0])
    if len(order) != n:
        raise GraphError(f"{path}: header says {n} nodes, found {len(order)}")

    attrs = pd.DataFrame(index=pd.Index(order, name="node_id"))
    if attributes is not None:
        table = _read_table(Path(attributes), ("node_id",))
        labels = [str(v).strip() for v in table["node_id"]]
        if sorted(labels) != sorted(order):
            raise GraphError(f"{attributes}: node ids do not match {path}")
        order = labels
        attrs = table.drop(columns=["node_id"])
        attrs.index = pd.Index(labels, name="node_id")
    idx = {lab: i for i, lab in enumerate(order)}
    pairs = set()
    for a, nbs in neighbours.items():
        for b in nbs:
            if b not in idx:
                raise GraphError(f"{path}: neighbour {b!r} of {a!r} is not a declared id")
            if a != b:
                pairs.add((idx[a], idx[b]))
                pairs.add((idx[b], idx[a]))
    edges = [(i, j, EdgeCovariates(1.0)) for i, j in sorted(pairs)]
    return GraphFile(SpatialGraph.build(order, edges), attrs, True)
