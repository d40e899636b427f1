# -*- coding: utf-8 -*-
"""The Columbus, Ohio neighbourhood crime data (49 polygons, shared-edge contiguity).

Attributes ship in ``columbus/nodes.csv``. The contiguity is the published
``columbus.gal`` (GeoDa/PySAL, spdep ``col.gal.nb``), read from
``columbus/columbus.gal`` or from the path in WALKFIELD_COLUMBUS_GAL and
checked against the published region and link counts.
"""
import logging
from importlib import resources
from pathlib import Path
from typing import List, Tuple

import numpy as np
import pandas as pd

from walkfield.config import settings
from walkfield.data.graphfile import NODES, GraphFile, load_gal
from walkfield.errors import DataError
from walkfield.graph import SpatialGraph

log = logging.getLogger("data.columbus")

GAL = "columbus.gal"
REGIONS = 49
LINKS = 230


def fixture_dir() -> Path:
    return Path(str(resources.files("walkfield.data") / "columbus"))


def gal_path() -> Path:
    return Path(settings.columbus_gal) if settings.columbus_gal else fixture_dir() / GAL


def columbus_available() -> bool:
    return gal_path().is_file()


def columbus_inputs() -> List[Path]:
    return [fixture_dir() / NODES, gal_path()]


def columbus_attributes() -> pd.DataFrame:
    """CRIME and HOVAL indexed by POLYID, as text like every node table."""
    frame = pd.read_csv(fixture_dir() / NODES, dtype=str, keep_default_na=False)
    return frame.set_index("node_id")


def columbus_graph_file() -> GraphFile:
    path = gal_path()
    if not path.is_file():
        raise DataError(f"Columbus contiguity not found at {path}: copy the published {GAL} there "
                        f"or set WALKFIELD_COLUMBUS_GAL")
    gf = load_gal(path, fixture_dir() / NODES)
    links = len(gf.graph.edges)
    if gf.graph.node_count != REGIONS or links != LINKS:
        raise DataError(f"{path}: {gf.graph.node_count} regions and {links} directed links; the published "
                        f"Columbus contiguity has {REGIONS} and {LINKS}")
    log.debug("Columbus contiguity from %s", path)
    return gf


def columbus_fixture() -> Tuple[SpatialGraph, np.ndarray, np.ndarray]:
    """(graph, crime per thousand households, home value in thousands of dollars)."""
    gf = columbus_graph_file()
    crime = gf.attributes["CRIME"].astype(float).to_numpy()
    hoval = gf.attributes["HOVAL"].astype(float).to_numpy()
    return gf.graph, crime, hoval
