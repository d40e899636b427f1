# -*- coding: utf-8 -*-
import numpy as np
import pytest

from walkfield.ident import (Classification, IdentifiabilityError, IdentifiabilityReport, check_identifiable,
                             construct_confounded_pair, rotate_generator, verify_unique)
from walkfield.utils.rng import stream

from conftest import generator


def test_directed_cycle_is_a_loop(three_cycle):
    report = check_identifiable(three_cycle)
    assert report.classification is Classification.LOOP
    assert report.cycle_order == (0, 1, 2)
    assert report.to_dict(["a", "b", "c"])["cycle_labels"] == ["a", "b", "c"]


def test_two_exits_identify():
    q = generator([0, 0, 1, 2], [1, 2, 2, 0], [1.0, 2.0, 1.0, 1.0])
    report = check_identifiable(q)
    assert report.classification is Classification.IDENTIFIABLE
    assert report.witness_row == 0
    assert report.to_dict()["classification"] == "IdentifiableByTheorem"


def test_reducible_graph():
    assert check_identifiable(generator([0], [1], [1.0], m=2)).classification is Classification.REDUCIBLE


def test_single_node_is_a_trivial_loop():
    q = generator([], [], [], m=1)
    report = check_identifiable(q)
    assert report.classification is Classification.LOOP
    assert report.cycle_order == (0,)


def test_report_consistency():
    with pytest.raises(ValueError):
        IdentifiabilityReport(Classification.IDENTIFIABLE)
    with pytest.raises(ValueError):
        IdentifiabilityReport(Classification.REDUCIBLE, witness_row=1)


@pytest.mark.parametrize("m", range(3, 9))
def test_confounded_pair(m):
    r = stream(m).uniform(0.1, 5.0, size=m)
    q, w = construct_confounded_pair(r)
    qa, wa = q.toarray(), w.toarray()
    assert np.abs(qa @ qa.T - wa @ wa.T).max() < 1e-12 * r.max() ** 2
    assert not np.allclose(qa, wa)
    assert check_identifiable(q).classification is Classification.LOOP
    assert check_identifiable(w).classification is Classification.LOOP


def test_confounded_pair_needs_three_nodes():
    with pytest.raises(IdentifiabilityError):
        construct_confounded_pair([1.0, 2.0])


def _chain(m, seed):
    """Bidirectional chain 0 - 1 - ... - m-1 with random rates."""
    rates = stream(seed, 7).uniform(0.2, 2.0, size=2 * (m - 1))
    return generator(list(range(m - 1)) + list(range(1, m)), list(range(1, m)) + list(range(m - 1)), rates)


def _complete(m, seed):
    rows, cols = np.nonzero(~np.eye(m, dtype=bool))
    return generator(rows, cols, stream(seed, 9).uniform(0.5, 1.5, size=rows.size))


@pytest.mark.parametrize("m", [3, 4])
def test_verify_unique_on_a_bidirectional_chain(m):
    q = _chain(m, seed=m)
    assert check_identifiable(q).witness_row == 1
    assert verify_unique(q, trials=2, seed=3, initial=q)


def test_dense_generator_has_a_rotated_twin():
    q = _complete(4, seed=1)
    assert check_identifiable(q).classification is Classification.IDENTIFIABLE
    w = rotate_generator(q, 0.05, seed=2)
    qa, wa = q.toarray(), w.toarray()
    assert np.abs(qa @ qa.T - wa @ wa.T).max() < 1e-12 * max(1.0, np.abs(qa @ qa.T).max())
    assert np.abs(qa - wa).max() > 1e-3
    assert w.rate_coo[0].size == 12
    assert not verify_unique(q, trials=1, seed=0, initial=w)


def test_rotation_leaves_the_cone_on_a_chain():
    with pytest.raises(IdentifiabilityError, match="not a generator"):
        rotate_generator(_chain(3, seed=5), 0.05, seed=2)
    with pytest.raises(IdentifiabilityError):
        rotate_generator(_chain(2, seed=5), 0.05, seed=2)


def test_verify_unique_refuses_loops(three_cycle):
    with pytest.raises(IdentifiabilityError):
        verify_unique(three_cycle, trials=1, seed=0)


def test_verify_unique_finds_the_confounder():
    q, w = construct_confounded_pair([1.0, 2.0, 3.0])
    assert not verify_unique(q, trials=1, seed=0, initial=w, check_precondition=False)
