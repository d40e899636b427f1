# -*- coding: utf-8 -*-
"""Spatial graphs: areal nodes joined by directed edges with covariates.

Nodes are addressed by dense 0-based indices; external labels are kept on
the nodes and travel with every output. All types are immutable.
"""
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from walkfield.errors import ConfigError, DataError

STANDARD_COVARIATES = ("downstream", "barrier")


class GraphError(DataError):
    pass


@dataclass(frozen=True)
class EdgeCovariates:
    distance: float
    downstream: int = 0
    barrier: int = 0
    extras: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self):
        d = float(self.distance)
        if not math.isfinite(d) or d <= 0:
            raise GraphError(f"edge distance must be positive and finite, got {self.distance!r}")
        for name in STANDARD_COVARIATES:
            if getattr(self, name) not in (0, 1):
                raise GraphError(f"{name} indicator must be 0 or 1, got {getattr(self, name)!r}")
        names = [n for n, _ in self.extras]
        if len(set(names)) != len(names):
            raise GraphError(f"duplicate extra covariate names: {names}")
        for n, v in self.extras:
            if n in STANDARD_COVARIATES or n == "distance":
                raise GraphError(f"extra covariate {n!r} shadows a standard covariate")
            if not math.isfinite(float(v)):
                raise GraphError(f"extra covariate {n!r} is not finite")
        object.__setattr__(self, "distance", d)
        object.__setattr__(self, "extras", tuple((str(n), float(v)) for n, v in self.extras))

    def value(self, name: str) -> float:
        if name in STANDARD_COVARIATES:
            return float(getattr(self, name))
        for n, v in self.extras:
            if n == name:
                return v
        raise KeyError(name)


@dataclass(frozen=True)
class Node:
    index: int
    label: str
    x: Optional[float] = None
    y: Optional[float] = None


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    covariates: EdgeCovariates

    @property
    def key(self) -> Tuple[int, int]:
        return (self.src, self.dst)


@dataclass(frozen=True)
class SpatialGraph:
    nodes: Tuple[Node, ...]
    edges: Tuple[Edge, ...] = field(default=())

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if not nodes:
            raise GraphError("graph needs at least one node")
        for expected, node in enumerate(nodes):
            if node.index != expected:
                raise GraphError(f"node indices must be 0..M-1 without gaps; found {node.index} at position {expected}")
        labels = [n.label for n in nodes]
        if len(set(labels)) != len(labels):
            raise GraphError("duplicate node labels")
        m = len(nodes)
        seen = set()
        for e in self.edges:
            if not (0 <= e.src < m and 0 <= e.dst < m):
                raise GraphError(f"edge {e.src}->{e.dst} has an endpoint outside 0..{m - 1}")
            if e.src == e.dst:
                raise GraphError(f"self-edge at node {e.src}")
            if e.key in seen:
                raise GraphError(f"duplicate edge {e.src}->{e.dst}")
            seen.add(e.key)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: e.key)))

    # ---------- construction ----------

    @classmethod
    def build(cls, labels: Sequence[str], edges: Iterable[Tuple[int, int, EdgeCovariates]],
              coords: Optional[Sequence[Tuple[float, float]]] = None) -> "SpatialGraph":
        nodes = []
        for i, label in enumerate(labels):
            x, y = coords[i] if coords is not None else (None, None)
            nodes.append(Node(i, str(label), x, y))
        return cls(tuple(nodes), tuple(Edge(int(s), int(d), c) for s, d, c in edges))

    @classmethod
    def from_adjacency(cls, adjacency, labels: Optional[Sequence[str]] = None) -> "SpatialGraph":
        """Unit-distance graph with an edge for every nonzero off-diagonal entry."""
        a = np.asarray(adjacency)
        m = a.shape[0]
        labels = labels if labels is not None else [str(i) for i in range(m)]
        edges = [(i, j, EdgeCovariates(1.0)) for i in range(m) for j in range(m) if i != j and a[i, j]]
        return cls.build(labels, edges)

    # ---------- queries ----------

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def labels(self) -> List[str]:
        return [n.label for n in self.nodes]

    def index_of(self, label: str) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise GraphError(f"unknown node label {label!r}") from None

    @cached_property
    def _label_index(self) -> Dict[str, int]:
        return {n.label: n.index for n in self.nodes}

    @cached_property
    def edge_src(self) -> np.ndarray:
        return np.array([e.src for e in self.edges], dtype=np.int64)

    @cached_property
    def edge_dst(self) -> np.ndarray:
        return np.array([e.dst for e in self.edges], dtype=np.int64)

    @cached_property
    def edge_distance(self) -> np.ndarray:
        return np.array([e.covariates.distance for e in self.edges], dtype=float)

    def covariate_matrix(self, names: Sequence[str]) -> np.ndarray:
        """Edge-by-covariate matrix; a missing covariate is a configuration error."""
        out = np.empty((len(self.edges), len(names)), dtype=float)
        for r, e in enumerate(self.edges):
            for c, name in enumerate(names):
                try:
                    out[r, c] = e.covariates.value(name)
                except KeyError:
                    raise ConfigError(
                        f"edge {self.nodes[e.src].label}->{self.nodes[e.dst].label} has no covariate {name!r}"
                    ) from None
        return out

    def extra_names(self) -> List[str]:
        names: List[str] = []
        for e in self.edges:
            for n, _ in e.covariates.extras:
                if n not in names:
                    names.append(n)
        return names

    def is_symmetric(self) -> bool:
        keys = {e.key for e in self.edges}
        return all((d, s) in keys for s, d in keys)

    def out_degree(self) -> np.ndarray:
        return np.bincount(self.edge_src, minlength=self.node_count)
