# -*- coding: utf-8 -*-
"""Genotype tables: one row per individual and locus.

    individual, node, locus, allele_1, allele_2

``node`` is a node label of the graph, ``locus`` counts from 1 and alleles
are categories 1..K. K per locus is the largest category seen unless given.
"""
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from walkfield.errors import DataError
from walkfield.graph import SpatialGraph
from walkfield.infer.genetics import GeneticsData
from walkfield.utils.files import write_csv

COLUMNS = ("individual", "node", "locus", "allele_1", "allele_2")


def load_genotypes(path: Path, graph: SpatialGraph, n_alleles: Optional[Sequence[int]] = None) -> GeneticsData:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: file not found")
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = [c for c in COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"{path}:1: missing column(s) {', '.join(missing)}")
    index = {lab: i for i, lab in enumerate(graph.labels)}
    individuals = list(dict.fromkeys(frame["individual"]))
    ind_row = {name: r for r, name in enumerate(individuals)}
    try:
        loci = frame["locus"].astype(int).to_numpy()
        alleles = frame[["allele_1", "allele_2"]].astype(int).to_numpy()
    except ValueError:
        raise DataError(f"{path}: locus and allele columns must be integers; missing alleles are not supported") from None
    n_loci = int(loci.max()) if len(frame) else 0
    if len(frame) and loci.min() < 1:
        raise DataError(f"{path}: loci are numbered from 1")
    table = np.zeros((len(individuals), n_loci, 2), dtype=np.int64)
    nodes = np.full(len(individuals), -1, dtype=np.int64)
    for line, (ind, node, locus, pair) in enumerate(zip(frame["individual"], frame["node"], loci, alleles), start=2):
        if node not in index:
            raise DataError(f"{path}:{line}: unknown node {node!r}")
        r = ind_row[ind]
        if nodes[r] not in (-1, index[node]):
            raise DataError(f"{path}:{line}: individual {ind!r} appears at two nodes")
        if table[r, locus - 1, 0]:
            raise DataError(f"{path}:{line}: individual {ind!r} has locus {locus} twice")
        nodes[r] = index[node]
        table[r, locus - 1] = pair
    if np.any(table == 0):
        raise DataError(f"{path}: some individuals lack a locus; complete genotypes are required")
    k = tuple(n_alleles) if n_alleles is not None else tuple(int(table[:, l].max()) for l in range(n_loci))
    return GeneticsData(nodes, table, k)


def write_genotypes(data: GeneticsData, graph: SpatialGraph, path: Path) -> Path:
    labels = graph.labels
    rows = [
        (f"i{i}", labels[data.nodes[i]], l + 1, int(data.alleles[i, l, 0]), int(data.alleles[i, l, 1]))
        for i in range(data.nodes.size)
        for l in range(data.loci)
    ]
    return write_csv(pd.DataFrame(rows, columns=list(COLUMNS)), path)
