import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unidim.errors import DomainError, WindowTooSmallError
from unidim.space import RootedSample, ball, diameter, dumps, graph_distances, loads


def path_graph(n):
    return RootedSample.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def test_closed_balls_and_empty_zero_ball():
    s = RootedSample.from_coords([0.0, 1.0, 2.0, 3.5])
    assert ball(s, 0, 0).points.size == 0
    assert list(ball(s, 0, 1.0).points) == [0, 1]
    assert list(ball(s, 1, 1.0).points) == [0, 1, 2]
    assert list(ball(s, 3, 1.5).points) == [2, 3]


def test_metrics_on_coordinates():
    c = np.array([[0.0, 0.0], [3.0, 4.0]])
    assert RootedSample.from_coords(c).dist(0, 1) == pytest.approx(5.0)
    assert RootedSample.from_coords(c, metric="l1").dist(0, 1) == pytest.approx(7.0)
    assert RootedSample.from_coords(c, metric="linf").dist(0, 1) == pytest.approx(4.0)


def test_graph_metric_uses_weighted_shortest_paths():
    s = RootedSample.from_edges(3, [(0, 1), (1, 2), (0, 2)], lengths=[1.0, 1.0, 5.0])
    assert s.dist(0, 2) == pytest.approx(2.0)
    assert graph_distances(s, 0, 1.5) == {0: 0.0, 1: 1.0}


def test_rejects_pseudo_metrics_and_bad_roots():
    with pytest.raises(DomainError):
        RootedSample.from_coords([0.0, 0.0])
    with pytest.raises(DomainError):
        RootedSample.from_coords([0.0, 1.0], root=2)
    with pytest.raises(DomainError):
        RootedSample.from_edges(2, [(0, 1)], lengths=[0.0])


def test_margin_marks_balls_that_may_be_clipped():
    s = RootedSample.from_coords([0.0, 1.0, 2.0], margin=[0.5, 1.0, 0.5])
    assert ball(s, 1, 1.0).interior
    assert not ball(s, 1, 1.5).interior
    assert s.interior(1, 1.0) and not s.interior(0, 1.0)


def test_diameter():
    s = path_graph(5)
    assert diameter(s, [0, 4]) == 4.0
    assert diameter(s, [2]) == 0.0
    with pytest.raises(DomainError):
        diameter(s, [])


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=12, unique=True), st.data())
def test_serialization_round_trip(xs, data):
    root = data.draw(st.integers(0, len(xs) - 1))
    s = RootedSample.from_coords(np.array(xs, dtype=float), root=root,
                                 marks={"w": np.arange(len(xs), dtype=float)})
    t = loads(dumps(s))
    assert t.root == s.root and t.size == s.size
    assert np.array_equal(t.coords, s.coords)
    assert np.array_equal(t.marks["w"], s.marks["w"])
    assert dumps(t) == dumps(s)


@given(st.integers(2, 10), st.data())
def test_relabel_preserves_distances(n, data):
    s = path_graph(n)
    perm = np.array(data.draw(st.permutations(range(n))))
    t = s.relabel(perm)
    assert t.root == perm[s.root]
    i, j = data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1))
    assert t.dist(perm[i], perm[j]) == pytest.approx(s.dist(i, j))


def test_load_rejects_garbage():
    with pytest.raises(DomainError):
        loads("nothing here\n")
