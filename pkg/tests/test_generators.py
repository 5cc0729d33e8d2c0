import itertools
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unidim.generators.canopy import (
    canopy_level_law, designed_law, generalized_canopy_window, geometric_law, sample_levels,
)
from unidim.generators.drainage import drainage_window, lazy_heights
from unidim.generators.egw import OffspringDistribution, egw_window
from unidim.generators.lattice import generators_for, sublattice_cover_radius, sublattice_multiplicity
from unidim.generators.selfsimilar import (
    cantor_digit, cantor_nested, koch_window, self_similar_window, sierpinski_ifs,
)
from unidim.generators.walks import JumpDistribution, walk_window, zeros_window
from unidim.space import ball


def _within(est, se, value, sigmas=4.0):
    return abs(est - value) <= sigmas * se + 1e-12


@pytest.mark.parametrize("k", [2, 4])
def test_sample_levels_follow_level_law(k, rng):
    p, tail = canopy_level_law(k, 12)
    assert tail == pytest.approx(float(k) ** -13)
    assert p.sum() == pytest.approx(1.0)
    n = 200_000
    counts = np.bincount(sample_levels(k, 12, rng, n), minlength=13)
    for m in range(4):
        est = counts[m] / n
        assert _within(est, np.sqrt(p[m] * (1 - p[m]) / n), p[m])


def test_lazy_heights_match_explicit_drainage_windows():
    # exact first two survival values of the lazy walk: 3/4 and 5/8
    lazy = lazy_heights(np.random.default_rng(1), 200_000, 50)
    assert _within(np.mean(lazy >= 1), np.sqrt(0.75 * 0.25 / 2e5), 0.75)
    assert _within(np.mean(lazy >= 2), np.sqrt(0.625 * 0.375 / 2e5), 0.625)
    hs = []
    for key in range(3000):
        w = drainage_window(key, 10, 2, 10)
        assert w.height_certain[w.root] or w.height[w.root] >= 3
        hs.append(w.height[w.root])
    hs = np.array(hs)
    for j, exact in ((1, 0.75), (2, 0.625)):
        se = np.sqrt(exact * (1 - exact) / len(hs))
        assert _within(np.mean(hs >= j), se, exact)


def test_drainage_parent_is_one_level_down():
    w = drainage_window(7, 6, 3, 3)
    has = w.parent >= 0
    assert np.all(w.level[w.parent[has]] == w.level[has] - 1)
    dx = np.abs(w.coords[w.parent[has], 0] - w.coords[has, 0])
    assert np.all(dx == 1)


def test_cantor_constructions_share_ball_statistics():
    radii = (1, 3, 9, 27)
    sizes = {}
    for name, fn in (("digit", cantor_digit), ("nested", cantor_nested)):
        rows = []
        for i in range(3000):
            s = fn(7, np.random.default_rng([i, 11]))
            assert all(s.interior(s.root, r) for r in radii)
            rows.append([len(ball(s, s.root, r)) for r in radii])
        sizes[name] = np.array(rows, dtype=float)
    a, b = sizes["digit"], sizes["nested"]
    se = np.sqrt(a.var(axis=0) / len(a) + b.var(axis=0) / len(b))
    assert np.all(np.abs(a.mean(axis=0) - b.mean(axis=0)) <= 4 * se + 1e-12)


def test_cantor_nested_points_are_signed_digit_sums():
    depth = 6
    s = cantor_nested(depth, np.random.default_rng(3))
    x = np.sort(s.coords[:, 0] - s.coords[s.root, 0]).astype(np.int64)
    assert s.size == 2 ** depth
    # every point is a sum of distinct terms ±2·3^j with one fixed sign per j
    gaps = np.diff(x)
    assert np.all(gaps >= 2) and np.all(x % 2 == 0)
    span = int(x.max() - x.min())
    assert span == 3 ** depth - 1


def test_egw_window_structure_and_spine_offspring():
    law = OffspringDistribution("geometric", 0.5)
    spine_kids = []
    for i in range(2000):
        w = egw_window(law, np.random.default_rng([i, 5]), up=3, depth=3)
        assert w.level[w.root] == 0
        a = w.parent[w.root]
        assert w.level[a] == 1
        has = w.parent >= 0
        assert np.all(w.level[w.parent[has]] == w.level[has] + 1)
        nk = w.n_children
        while a >= 0 and w.parent[a] >= 0:
            spine_kids.append(nk[a])
            a = w.parent[a]
    x = np.array(spine_kids, dtype=float)
    # size-biased geometric(1/2): E[X^2] / E[X] = 3
    assert _within(x.mean(), x.std() / np.sqrt(len(x)), 3.0)


def _bfs_word(n: int, gens: np.ndarray, half: int) -> dict:
    """Word distance to ``nZ^2`` inside the box ``[-half, half]^2``; ``n = 0`` means the origin alone."""
    dist = {}
    q = deque()
    sources = [(0, 0)] if n == 0 else itertools.product(range(-half, half + 1, n), repeat=2)
    for a, b in sources:
        dist[(a, b)] = 0
        q.append((a, b))
    while q:
        v = q.popleft()
        for g in gens:
            u = (v[0] + int(g[0]), v[1] + int(g[1]))
            if max(abs(u[0]), abs(u[1])) <= half and u not in dist:
                dist[u] = dist[v] + 1
                q.append(u)
    return dist


@pytest.mark.parametrize("name", ["standard", "hexagonal"])
@pytest.mark.parametrize("n", [2, 3, 4, 5, 7])
def test_sublattice_cover_radius_against_bfs(name, n):
    gens = generators_for(name, 2)
    half = 4 * n
    dist = _bfs_word(n, gens, half)
    cell = [dist[(a, b)] for a, b in itertools.product(range(n), repeat=2)]
    r = sublattice_cover_radius(n, name)
    assert r == max(cell)
    # multiplicity: brute-force count of centres within word distance r
    ball_pts = [v for v, d in _bfs_word(0, gens, 3 * n).items() if d <= r]
    best = 0
    for a, b in itertools.product(range(n), repeat=2):
        best = max(best, sum((a + x) % n == 0 and (b + y) % n == 0 for x, y in ball_pts))
    assert sublattice_multiplicity(n, r, name) == best


def _margin_consistent(small_xy, margin, big_xy, tol=1e-6):
    from scipy.spatial import cKDTree
    tb = cKDTree(big_xy)
    ts = cKDTree(small_xy)
    for i, x in enumerate(small_xy):
        if margin[i] <= tol:
            continue
        near = tb.query_ball_point(x, margin[i] - tol)
        for j in near:
            d, _ = ts.query(big_xy[j])
            if d > tol:
                return False
    return True


@settings(max_examples=15)
@given(st.lists(st.integers(0, 3), min_size=5, max_size=5), st.integers(0, 10**6))
def test_koch_margin_holds_in_deeper_window(choices, seed):
    depth = 4
    small = koch_window(depth, np.random.default_rng(seed), choices=choices[:depth - 1])
    big = koch_window(depth + 2, np.random.default_rng(seed), choices=choices)
    assert _margin_consistent(small.coords, small.margin, big.coords)


@settings(max_examples=15)
@given(st.lists(st.integers(0, 2), min_size=7, max_size=7))
def test_sierpinski_margin_holds_in_deeper_window(choices):
    ifs = sierpinski_ifs()
    rng = np.random.default_rng(0)
    small = self_similar_window(ifs, 5, rng, choices=choices[:5])
    big = self_similar_window(ifs, 7, rng, choices=choices)
    assert np.allclose(small.coords[small.root], big.coords[big.root])
    assert np.any(small.margin > 0)
    assert _margin_consistent(small.coords, small.margin, big.coords)


@pytest.mark.parametrize("law", [geometric_law(2.0, 40), designed_law(0.5, 0.75, 1.2, 1 << 10)])
def test_generalized_canopy_root_ball_is_complete(law, rng):
    for m in (0, 1, 2, 5, 9, law.nmax - 1):
        w = generalized_canopy_window(law, m, rng, width=5)
        assert w.level[w.root] == m
        assert w.margin[w.root] >= 1
        p = w.parent[w.root]
        assert p >= 0 and w.level[p] == m + 1


def test_walk_windows():
    rng = np.random.default_rng(4)
    s = walk_window(JumpDistribution("pareto", 0.5), rng, 50)
    x = s.coords[:, 0]
    assert s.size == 101 and x[s.root] == 0 and np.all(np.diff(x) > 0)
    z = zeros_window(rng, 1000)
    assert z.coords[z.root, 0] == 0
    assert np.all(z.coords[:, 0] % 2 == 0)
