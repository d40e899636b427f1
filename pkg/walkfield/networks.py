# -*- coding: utf-8 -*-
"""Synthetic graphs: lattices, cycles, random digraphs and stream networks."""
from typing import List, Tuple

import numpy as np

from walkfield.generator import GeneratorMatrix
from walkfield.graph import EdgeCovariates, SpatialGraph
from walkfield.utils.rng import stream


def lattice_graph(rows: int, cols: int) -> SpatialGraph:
    """rows x cols grid, rook neighbours, unit distances, both directions."""
    if rows < 1 or cols < 1:
        raise ValueError("lattice needs positive dimensions")
    idx = lambda r, c: r * cols + c  # noqa: E731
    labels, coords, edges = [], [], []
    for r in range(rows):
        for c in range(cols):
            labels.append(f"r{r}c{c}")
            coords.append((float(c), float(r)))
            for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < rows and 0 <= cc < cols:
                    edges.append((idx(r, c), idx(rr, cc), EdgeCovariates(1.0)))
    return SpatialGraph.build(labels, edges, coords)


def cycle_graph(m: int, bidirectional: bool = False) -> SpatialGraph:
    edges = [(i, (i + 1) % m, EdgeCovariates(1.0)) for i in range(m)] if m > 1 else []
    # for m == 2 the forward cycle already runs both ways
    if bidirectional and m > 2:
        edges += [((i + 1) % m, i, EdgeCovariates(1.0)) for i in range(m)]
    return SpatialGraph.build([str(i) for i in range(m)], edges)


def random_irreducible_graph(m: int, seed: int, density: float = 0.3) -> SpatialGraph:
    """A random Hamiltonian cycle (guarantees strong connectivity) plus random chords."""
    rng = stream(seed)
    order = rng.permutation(m)
    keys = {(int(order[k]), int(order[(k + 1) % m])) for k in range(m)} if m > 1 else set()
    for i in range(m):
        for j in range(m):
            if i != j and rng.random() < density:
                keys.add((i, j))
    dist = rng.uniform(0.5, 2.0, size=len(keys))
    edges = [(i, j, EdgeCovariates(float(d))) for (i, j), d in zip(sorted(keys), dist)]
    return SpatialGraph.build([str(i) for i in range(m)], edges)


def random_generator(m: int, seed: int, density: float = 0.3, low: float = 0.2,
                     high: float = 2.0) -> GeneratorMatrix:
    g = random_irreducible_graph(m, seed, density)
    rates = stream(seed, 1).uniform(low, high, size=len(g.edges))
    return GeneratorMatrix.from_rates(m, g.edge_src, g.edge_dst, rates)


def stream_network(n_nodes: int = 30, n_barriers: int = 2, seed: int = 0) -> SpatialGraph:
    """Dendritic stream: a main stem with two tributaries.

    Node 0 is the mouth. Branch nodes have one downstream and one upstream
    neighbour; the two confluences have three neighbours. downstream = 1 on
    edges pointing toward the mouth, barrier = 1 on both directions of the
    links that cross a seasonal blockage (placed on the main stem).
    """
    if n_nodes < 8:
        raise ValueError("stream network needs at least 8 nodes")
    rng = stream(seed)
    n_main = int(np.ceil(0.6 * n_nodes))
    n_trib = n_nodes - n_main
    n_a = (n_trib + 1) // 2
    n_b = n_trib - n_a
    join_a, join_b = n_main // 3, (2 * n_main) // 3

    parent: List[int] = [-1] + list(range(n_main - 1))
    coords: List[Tuple[float, float]] = [(float(i), 0.0) for i in range(n_main)]
    for join, count, side in ((join_a, n_a, 1.0), (join_b, n_b, -1.0)):
        first = len(parent)
        for k in range(count):
            parent.append(join if k == 0 else first + k - 1)
            coords.append((join + 0.5 * (k + 1), side * (k + 1)))

    links = [(child, parent[child]) for child in range(1, n_nodes)]
    main_links = [k for k, (child, _) in enumerate(links) if child < n_main]
    barrier_links = set(rng.choice(main_links, size=min(n_barriers, len(main_links)), replace=False).tolist())
    dist = rng.uniform(0.5, 1.5, size=len(links))

    edges = []
    for k, (child, par) in enumerate(links):
        v = 1 if k in barrier_links else 0
        edges.append((child, par, EdgeCovariates(float(dist[k]), downstream=1, barrier=v)))
        edges.append((par, child, EdgeCovariates(float(dist[k]), downstream=0, barrier=v)))
    labels = [f"s{i:02d}" for i in range(n_nodes)]
    return SpatialGraph.build(labels, edges, coords)
