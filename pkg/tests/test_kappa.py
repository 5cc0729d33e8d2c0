import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unidim.kappa import is_r_embeddable, kappa, rooted_isometric
from unidim.space import RootedSample


def line(n, root=0):
    return RootedSample.from_coords(np.arange(n, dtype=float), root=root)


def brute_isometric(a, b):
    """Rooted isometry by trying every bijection."""
    if a.size != b.size:
        return False
    da, db = a.pairwise(range(a.size)), b.pairwise(range(b.size))
    for perm in itertools.permutations(range(b.size)):
        if perm[a.root] != b.root:
            continue
        p = np.array(perm)
        if np.allclose(da, db[np.ix_(p, p)]):
            return True
    return False


def test_identical_spaces_reach_the_tolerance_floor():
    assert kappa(line(5), line(5), tol=1e-3) == pytest.approx(1e-3)


def test_unlike_roots_are_far():
    # root degree 1 versus root degree 2 in the radius-1 ball
    assert kappa(line(5, root=0), line(5, root=2)) == 1.0


def test_line_segments_agree_up_to_their_length():
    # [0, 3] and [0, 6] rooted at 0 share every ball of radius < 3 + 1
    k = kappa(line(4), line(7), tol=1e-4)
    assert 1 / 4 - 2e-4 <= k <= 1 / 3 + 2e-4


def test_embedding_witness_respects_distortion():
    a = RootedSample.from_coords([0.0, 1.0, 2.05])
    b = RootedSample.from_coords([0.0, 1.0, 2.0])
    w = is_r_embeddable(a, b, 10.0)
    assert w is not None and w.mapping[0] == 0 and w.distortion <= 0.1
    assert is_r_embeddable(a, b, 30.0) is None


@given(st.integers(2, 6), st.data())
def test_isometry_matches_brute_force(n, data):
    pts = data.draw(st.lists(st.integers(0, 6), min_size=n, max_size=n, unique=True))
    a = RootedSample.from_coords(np.array(pts, dtype=float), root=data.draw(st.integers(0, n - 1)))
    pts2 = data.draw(st.lists(st.integers(0, 6), min_size=n, max_size=n, unique=True))
    b = RootedSample.from_coords(np.array(pts2, dtype=float), root=data.draw(st.integers(0, n - 1)))
    assert rooted_isometric(a, b) == brute_isometric(a, b)
