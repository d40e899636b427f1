# -*- coding: utf-8 -*-
import numpy as np
import pandas as pd
import pytest

from walkfield.config import settings
from walkfield.data.columbus import (columbus_attributes, columbus_available, columbus_fixture, columbus_graph_file,
                                    fixture_dir)
from walkfield.data.genotypes import load_genotypes, write_genotypes
from walkfield.data.graphfile import load_gal, load_graph, read_graph_dir, write_graph
from walkfield.errors import ConfigError, DataError
from walkfield.generator import RateModel, check_irreducible
from walkfield.graph import EdgeCovariates, GraphError, SpatialGraph
from walkfield.infer.genetics import GeneticsData
from walkfield.networks import lattice_graph, stream_network
from walkfield.utils.files import sha256_file


def _graph_dir(tmp_path, nodes, edges, cfg=None):
    (tmp_path / "nodes.csv").write_text(nodes, encoding="utf-8")
    (tmp_path / "edges.csv").write_text(edges, encoding="utf-8")
    if cfg is not None:
        (tmp_path / "graph.cfg").write_text(cfg, encoding="utf-8")
    return tmp_path


NODES = "node_id,POP\na,1\nb,2\nc,3\n"


# -- graph directories --------------------------------------------------------

def test_loads_directed_edges(tmp_path):
    d = _graph_dir(tmp_path, NODES, "from,to,distance,downstream,barrier\na,b,2.5,1,0\nb,c,1,0,1\n")
    gf = read_graph_dir(d)
    assert gf.graph.node_count == 3
    assert [e.key for e in gf.graph.edges] == [(0, 1), (1, 2)]
    assert gf.graph.edges[0].covariates == EdgeCovariates(2.5, 1, 0)
    assert gf.attributes.loc["c", "POP"] == "3"


def test_symmetric_expansion(tmp_path):
    d = _graph_dir(tmp_path, NODES, "from,to,distance\na,b,1\nb,c,1\n", "symmetric = true\n")
    g = load_graph(d)
    assert len(g.edges) == 4
    assert g.is_symmetric()


def test_optional_covariates_default_to_zero(tmp_path):
    d = _graph_dir(tmp_path, NODES, "from,to,distance,slope\na,b,1,0.5\nb,a,1,-0.5\n")
    g = load_graph(d)
    assert g.edges[0].covariates.downstream == 0
    assert g.edges[1].covariates.value("slope") == -0.5


@pytest.mark.parametrize("edges, message", [
    ("from,to,distance\na,z,1\n", r"edges.csv:2: to node 'z'"),
    ("from,to,distance\na,b,1\nb,c,0\n", r"edges.csv:3: distance must be positive"),
    ("from,to,distance\na,b,1\na,b,2\n", r"edges.csv:3: duplicate edge a->b \(first at line 2\)"),
    ("from,to,distance\na,a,1\n", r"edges.csv:2: self-edge"),
    ("from,to,distance,barrier\na,b,1,2\n", r"edges.csv:2: barrier must be 0 or 1"),
    ("from,to\na,b\n", r"edges.csv:1: missing column\(s\) distance"),
    ("from,to,distance\na,b,far\n", r"edges.csv:2: distance 'far' is not a number"),
])
def test_edge_errors_carry_file_and_line(tmp_path, edges, message):
    d = _graph_dir(tmp_path, NODES, edges)
    with pytest.raises(GraphError, match=message):
        read_graph_dir(d)


def test_symmetric_duplicate_detected(tmp_path):
    d = _graph_dir(tmp_path, NODES, "from,to,distance\na,b,1\nb,a,1\n", "symmetric = true\n")
    with pytest.raises(GraphError, match="edges.csv:3: duplicate edge"):
        read_graph_dir(d)


def test_node_errors(tmp_path):
    d = _graph_dir(tmp_path, "node_id\na\na\n", "from,to,distance\n")
    with pytest.raises(GraphError, match=r"nodes.csv:3: duplicate node_id 'a'"):
        read_graph_dir(d)


def test_unknown_graph_cfg_key(tmp_path):
    d = _graph_dir(tmp_path, NODES, "from,to,distance\n", "symetric = true\n")
    with pytest.raises(ConfigError, match="unknown key"):
        read_graph_dir(d)


def test_empty_edge_table_loads_but_is_reducible(tmp_path):
    g = load_graph(_graph_dir(tmp_path, NODES, "from,to,distance,downstream,barrier\n"))
    assert g.edges == ()
    assert not check_irreducible(RateModel(g).generator(np.zeros(3)))


@pytest.mark.parametrize("graph", [stream_network(12, 2, seed=4), lattice_graph(3, 3)])
def test_write_then_load_reproduces_graph(tmp_path, graph):
    write_graph(graph, tmp_path / "g")
    assert load_graph(tmp_path / "g") == graph


def test_round_trip_keeps_extras_and_attributes(tmp_path):
    g = SpatialGraph.build(["p", "q"], [(0, 1, EdgeCovariates(0.1 + 0.2, extras=(("slope", 1 / 3),))),
                                        (1, 0, EdgeCovariates(2.0, 1, 1))])
    attrs = pd.DataFrame({"CRIME": ["1.5", "2.5"]}, index=pd.Index(["p", "q"], name="node_id"))
    write_graph(g, tmp_path, attrs)
    gf = read_graph_dir(tmp_path)
    assert gf.graph == g
    assert gf.attributes["CRIME"].tolist() == ["1.5", "2.5"]


# -- GAL files ----------------------------------------------------------------

def test_load_gal(tmp_path):
    gal = tmp_path / "tiny.gal"
    gal.write_text("0 4 tiny POLY_ID\n1 2\n2 3\n2 1\n1\n3 0\n4 1\n1\n", encoding="utf-8")
    gf = load_gal(gal)
    g = gf.graph
    assert g.labels == ["1", "2", "3", "4"]
    assert sorted(e.key for e in g.edges) == [(0, 1), (0, 2), (0, 3), (1, 0), (2, 0), (3, 0)]
    assert gf.symmetric


def test_gal_count_mismatch(tmp_path):
    gal = tmp_path / "bad.gal"
    gal.write_text("3\n1 1\n2\n2 1\n1\n", encoding="utf-8")
    with pytest.raises(GraphError, match="header says 3"):
        load_gal(gal)


def test_gal_with_node_table_fixes_order(tmp_path):
    gal = tmp_path / "tiny.gal"
    gal.write_text("2\n1 1\n2\n2 1\n1\n", encoding="utf-8")
    nodes = tmp_path / "nodes.csv"
    nodes.write_text("node_id,CRIME\n2,5\n1,7\n", encoding="utf-8")
    gf = load_gal(gal, nodes)
    assert gf.graph.labels == ["2", "1"]
    assert gf.attributes.loc["1", "CRIME"] == "7"


# -- Columbus -----------------------------------------------------------------

needs_gal = pytest.mark.skipif(not columbus_available(), reason="published columbus.gal not installed")


def _chain_gal(path, m):
    lines = [str(m)]
    for i in range(1, m + 1):
        nbrs = [j for j in (i - 1, i + 1) if 1 <= j <= m]
        lines += [f"{i} {len(nbrs)}", " ".join(map(str, nbrs))]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_columbus_attributes():
    attrs = columbus_attributes()
    assert len(attrs) == 49
    crime = attrs["CRIME"].astype(float).to_numpy()
    hoval = attrs["HOVAL"].astype(float).to_numpy()
    assert np.polyfit(hoval, crime, 1)[0] < 0


def test_columbus_nodes_match_provenance():
    note = (fixture_dir() / "PROVENANCE.md").read_text(encoding="utf-8")
    assert sha256_file(fixture_dir() / "nodes.csv") in note


def test_missing_columbus_gal_is_a_data_error(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "columbus_gal", str(tmp_path / "none.gal"))
    assert not columbus_available()
    with pytest.raises(DataError, match="WALKFIELD_COLUMBUS_GAL"):
        columbus_graph_file()


def test_columbus_gal_with_wrong_link_count_is_rejected(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "columbus_gal", str(_chain_gal(tmp_path / "chain.gal", 49)))
    with pytest.raises(DataError, match="230"):
        columbus_graph_file()


@needs_gal
def test_columbus_fixture():
    graph, crime, hoval = columbus_fixture()
    assert graph.node_count == 49
    assert len(graph.edges) == 230
    assert graph.is_symmetric()
    assert crime.shape == hoval.shape == (49,)
    assert check_irreducible(RateModel(graph).generator(np.zeros(3)))


@needs_gal
def test_columbus_graph_file_flags_symmetry():
    assert columbus_graph_file().symmetric


# -- genotype tables ----------------------------------------------------------

def test_genotypes_round_trip(tmp_path):
    graph = lattice_graph(2, 2)
    data = GeneticsData(np.array([0, 3, 3]), np.array([[[1, 2], [3, 3]], [[2, 2], [1, 2]], [[1, 1], [2, 3]]]),
                        (2, 3))
    path = write_genotypes(data, graph, tmp_path / "geno.csv")
    again = load_genotypes(path, graph, n_alleles=(2, 3))
    np.testing.assert_array_equal(again.nodes, data.nodes)
    np.testing.assert_array_equal(again.alleles, data.alleles)
    assert again.n_alleles == (2, 3)


def test_genotypes_unknown_node(tmp_path):
    path = tmp_path / "geno.csv"
    path.write_text("individual,node,locus,allele_1,allele_2\ni1,nowhere,1,1,2\n", encoding="utf-8")
    with pytest.raises(DataError, match="geno.csv:2: unknown node 'nowhere'"):
        load_genotypes(path, lattice_graph(2, 2))


def test_genotypes_incomplete(tmp_path):
    path = tmp_path / "geno.csv"
    path.write_text("individual,node,locus,allele_1,allele_2\ni1,r0c0,1,1,2\ni2,r0c1,2,1,2\n",
                    encoding="utf-8")
    with pytest.raises(DataError, match="lack a locus"):
        load_genotypes(path, lattice_graph(2, 2))
