import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from otcd.model import (
    Cover,
    CoverTimeline,
    DynamicNetwork,
    assignment_of,
    cover_from_assignment,
    cover_from_memberships,
    cover_matrix_of,
    trace_norm_of_cover,
)


def test_assignment_examples():
    np.testing.assert_array_equal(assignment_of(Cover(3, ({0, 1},))), [[1], [1], [0]])
    U = assignment_of(Cover(4, ({0, 1, 2}, {1, 2, 3})))
    np.testing.assert_array_equal(U, [[1, 0], [1, 1], [1, 1], [0, 1]])


def test_cover_matrix_examples():
    np.testing.assert_array_equal(cover_matrix_of(Cover(2, ({0, 1},))), [[1, 1], [1, 1]])
    # duplicates are legal and counted twice
    np.testing.assert_array_equal(cover_matrix_of(Cover(2, ({0, 1}, {0, 1}))), [[2, 2], [2, 2]])


def test_trace_norm_examples():
    assert trace_norm_of_cover(Cover(10, (range(5), range(5, 10)))) == 10
    assert trace_norm_of_cover(Cover(3, ({0, 1}, {1, 2}))) == 4


def test_cover_from_memberships():
    c = cover_from_memberships(3, {0: {"a"}, 1: {"a"}})
    assert c.communities == (frozenset({0, 1}),)
    assert c.outliers == {2}
    empty = cover_from_memberships(2, {})
    assert len(empty) == 0 and empty.outliers == {0, 1}
    with pytest.raises(ValueError):
        cover_from_memberships(2, {5: {"a"}})


def test_cover_validation_and_canonical_order():
    with pytest.raises(ValueError):
        Cover(3, (set(),))
    with pytest.raises(ValueError):
        Cover(3, ({0, 3},))
    assert Cover(5, ({3, 4}, {0, 1})) == Cover(5, ({0, 1}, {3, 4}))
    assert Cover(5, ({0, 1, 2}, {0, 1})).communities[0] == {0, 1}


def test_memberships_view():
    c = Cover(4, ({0, 1}, {1, 2}))
    assert c.memberships() == {0: {0}, 1: {0, 1}, 2: {1}}


def test_cover_from_assignment_drops_empty_and_merges():
    U = np.array([[1, 0, 1], [1, 0, 1], [0, 0, 0]])
    assert len(cover_from_assignment(U)) == 2
    assert cover_from_assignment(U, merge_duplicates=True).communities == (frozenset({0, 1}),)


def test_timeline_validation():
    c = Cover(3, ({0, 1},))
    with pytest.raises(ValueError):
        CoverTimeline((c,), ((0, 1),))
    with pytest.raises(ValueError):
        CoverTimeline((c, Cover(4, ())))
    tl = CoverTimeline((c, c), ((3,), (3,)))
    assert tl.T == 2 and tl.n == 3
    assert tl.labeled(1) == [(3, frozenset({0, 1}))]
    with pytest.raises(ValueError):
        CoverTimeline((c,)).labeled(0)


def test_network_validation():
    with pytest.raises(ValueError):
        DynamicNetwork(0, [np.zeros((0, 0))])
    with pytest.raises(ValueError):
        DynamicNetwork(2, [])
    with pytest.raises(ValueError):
        DynamicNetwork(2, [np.array([[0, 1], [0, 0]])])
    with pytest.raises(ValueError):
        DynamicNetwork(2, [np.array([[0, 2], [2, 0]])])
    with pytest.raises(ValueError):
        DynamicNetwork(3, [np.zeros((2, 2))])


def test_network_drops_diagonal_and_counts():
    net = DynamicNetwork(3, [np.array([[1, 1, 0], [1, 0, 1], [0, 1, 0]])])
    assert net.edge_count(0) == 2 and net.total_edges == 2
    np.testing.assert_array_equal(net.degrees(0), [1, 2, 1])
    assert sp.isspmatrix_csr(net.snapshots[0])
    assert "T=1" in repr(net)


covers = st.integers(1, 12).flatmap(
    lambda n: st.lists(st.frozensets(st.integers(0, n - 1), min_size=1), max_size=5).map(lambda cs: Cover(n, tuple(cs)))
)


@given(covers)
def test_cover_matrix_psd_and_trace_identity(c):
    Y = cover_matrix_of(c).astype(float)
    np.testing.assert_array_equal(Y, Y.T)
    vals = np.linalg.eigvalsh(Y)
    assert vals.min() >= -1e-9
    assert abs(np.abs(vals).sum() - np.trace(Y)) < 1e-8
    assert np.trace(Y) == trace_norm_of_cover(c)
    assert np.all(np.diag(Y) == [len(c.memberships().get(i, ())) for i in range(c.n)])


@given(covers)
def test_memberships_roundtrip(c):
    assert cover_from_memberships(c.n, c.memberships()) == c
