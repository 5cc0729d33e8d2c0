import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unidim.coverings import (CoveringAssignment, audit_cover, brute_force_min_cover, cone_cover, content_estimate,
                              greedy_finite_tree_cover, interval_rule, lambda_r_bounds, regular_ball_size,
                              regular_tree_cover, regular_tree_window, residual_heights, root_radii,
                              shifted_lattice_cover)
from unidim.errors import InvalidRuleError
from unidim.generators import gen_cantor, gen_koch, gen_lattice, gen_srw_image
from unidim.generators.canopy import canopy_cone_selected, canopy_window
from unidim.generators.selfsimilar import cantor_block_rule, koch_block_rule
from unidim.generators.walks import JumpDistribution
from unidim.sampling import proportion
from unidim.trees import from_networkx


def nx_min_cover(g: nx.Graph, n: int) -> int:
    """Fewest radius-n balls covering a small graph, by exhaustive search."""
    d = dict(nx.all_pairs_shortest_path_length(g))
    nodes = list(g)
    for m in range(1, len(nodes) + 1):
        for comb in itertools.combinations(nodes, m):
            if all(any(d[c][v] <= n for c in comb) for v in nodes):
                return m
    return len(nodes)


def test_floor_violations_are_rejected():
    with pytest.raises(InvalidRuleError):
        CoveringAssignment(np.array([0.0, 0.5]), 1.0, "bad")


@pytest.mark.parametrize("m", [2, 3, 4])
def test_shifted_lattice_intensity_and_audit(m):
    S = gen_lattice(2, 1.0, 12, "linf", seed=1)
    rule = shifted_lattice_cover(2, 1.0, m, norm="linf", radius="tight")
    assert rule.exact_p == pytest.approx(m ** -2.0)
    b = lambda_r_bounds(S, rule, n=20_000, seed=4)
    assert b.p.covers(m ** -2.0)
    assert b.K == 4 and b.lo == pytest.approx(b.hi / 4)


def test_disjoint_lattice_cubes_tile():
    S = gen_lattice(2, 1.0, 12, "linf", seed=1)
    rule = shifted_lattice_cover(2, 1.0, 2, norm="linf", disjoint=True)
    a = rule.assign(S.draw(0), np.random.default_rng(0))
    au = audit_cover(S.draw(0), a)
    assert au.is_cover and au.K == 1


def test_interval_rule_is_three_bounded_on_walk_images():
    S = gen_srw_image(JumpDistribution("pareto", 0.5), 300, seed=2)
    rule = interval_rule(8.0)
    for i in range(3):
        s = S.draw(i)
        au = audit_cover(s, rule.assign(s, np.random.default_rng(i)))
        assert au.is_cover and au.K <= rule.K == 3


@pytest.mark.parametrize("k,r", [(3, 1), (3, 2), (3, 4), (4, 3), (5, 2)])
def test_regular_ball_size_matches_bfs(k, r):
    w = regular_tree_window(k, r + 1)
    assert regular_ball_size(k, r) == int(np.sum(w.level <= r))
    assert regular_ball_size(k, r) == 1 + k * ((k - 1) ** r - 1) // (k - 2)


@pytest.mark.parametrize("r", [1, 2])
def test_regular_tree_cover_is_disjoint(r):
    rule = regular_tree_cover(3, r)
    s = regular_tree_window(3, 3 * r + 2).to_sample()
    au = audit_cover(s, rule.assign(s, np.random.default_rng(r)))
    assert au.is_cover and au.K == 1
    assert rule.exact_p == pytest.approx(1 / regular_ball_size(3, r))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_cantor_blocks_batch_agrees_with_windows(m):
    rule = cantor_block_rule(m)
    S = gen_cantor(8, seed=3)
    windows = proportion([rule.root_value(S.draw(i), np.random.default_rng(i)) > 0 for i in range(3000)])
    batch = proportion(root_radii(S, rule, 20_000, seed=5) > 0)
    assert windows.covers(2.0 ** -m) and batch.covers(2.0 ** -m)
    s = S.draw(0)
    au = audit_cover(s, rule.assign(s, np.random.default_rng(0)))
    assert au.is_cover and au.K == 1


@pytest.mark.parametrize("m", [2, 3])
def test_koch_blocks_batch_agrees_with_windows(m):
    rule = koch_block_rule(m)
    S = gen_koch(5, seed=3)
    windows = proportion([rule.root_value(S.draw(i), np.random.default_rng(i)) > 0 for i in range(1500)])
    batch = proportion(root_radii(S, rule, 20_000, seed=5) > 0)
    p = 4.0 ** -(m - 1)
    assert windows.covers(p) and batch.covers(p)


@given(st.integers(2, 10), st.integers(1, 2), st.integers(0, 2 ** 16))
def test_greedy_tree_cover_is_minimum(n_vertices, n, seed):
    g = nx.random_labeled_tree(n_vertices, seed=seed) if hasattr(nx, "random_labeled_tree") \
        else nx.random_tree(n_vertices, seed=seed)
    tree = from_networkx(g)
    centers = greedy_finite_tree_cover(tree, n, np.random.default_rng(seed))
    want = nx_min_cover(g, n)
    assert len(centers) == want == brute_force_min_cover(tree, n)
    s = tree.to_sample()
    a = np.zeros(tree.size)
    a[centers] = n
    assert audit_cover(s, CoveringAssignment(a, n, "greedy")).is_cover


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_cone_selection_depends_on_level_only(n):
    w = canopy_window(2, 0, 9)
    _, sel = residual_heights(w, n)
    assert np.array_equal(sel, canopy_cone_selected(w.level, n))


def test_cone_cover_members_have_height_n():
    w = canopy_window(2, 0, 8)
    cov = cone_cover(w, 3)
    assert np.all(w.level[cov.centers] % 4 == 3)


def test_content_estimate_takes_the_cheapest_rule():
    S = gen_lattice(1, 1.0, 40, "linf", seed=0)
    fam = [shifted_lattice_cover(1, 1.0, m, norm="linf", disjoint=True) for m in (1, 2, 3)]
    c = content_estimate(S, fam, 1.0, 1.0, n=20_000)
    assert c.value == min(v.estimate for v in c.per_rule.values())
