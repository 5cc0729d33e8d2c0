"""End-to-end acceptance suite: one test and one printed PASS/FAIL line per criterion.

Heavy pipelines are cached so the cross-check criterion reuses their reports.
"""

import functools
import itertools
import math

import networkx as nx
import numpy as np
import pytest

from unidim import catalog as cat
from unidim import experiments as ex
from unidim.config import MTP_N
from unidim.coverings import greedy_finite_tree_cover
from unidim.estimators import (agree_check, cross_checks, decay_fit, hausdorff_measure_zero, minkowski_estimate,
                               subspace_measure_check)
from unidim.kappa import kappa
from unidim.sampling import Z95, finite_space_sampler, g_catalog, mtp_check_exact, mtp_check_statistical
from unidim.space import RootedSample
from unidim.trees import from_networkx

N = 100_000
CANTOR = math.log(2) / math.log(3)
KOCH = math.log(4) / math.log(3)
SIERPINSKI = math.log(3) / math.log(2)


@functools.lru_cache(maxsize=None)
def outcome(name: str, *args):
    return getattr(ex, name)(*args)


def five_points() -> RootedSample:
    return RootedSample.from_coords(np.array([[0, 0], [1, 0], [0, 2], [3, 1], [2, 3]], dtype=float))


def _bracket(rep, target, tol):
    """Hausdorff lower bound and growth upper bound both within ``tol`` of ``target`` and around it.

    The lower bound sits on an alpha grid and the upper bound carries a CI, so
    each side may miss ``target`` by its own resolution (grid step or 3 sigma).
    """
    lo, hi = rep.haus_lower, rep.haus_upper
    slack_hi = 3 * rep.haus_upper_ci / Z95
    ok = (abs(lo - target) <= tol and abs(hi - target) <= tol
          and lo <= target + 0.02 and hi + slack_hi >= target)
    return ok, f"H-lower {lo:.4f}, growth upper {hi:.4f} ± {rep.haus_upper_ci:.4f} vs {target:.4f} ± {tol}"


def test_c1_lattice_minkowski(verdict):
    bounds = ex.lattice_bounds(2, n=N)
    mink = minkowski_estimate(bounds)
    per_scale = [b.p.covers((2 * b.r) ** -2.0) for b in bounds]
    ok = 1.9 <= mink.point <= 2.1 and 1.9 <= mink.lower and mink.upper <= 2.1 and all(per_scale)
    verdict(ok, f"Z^2 Minkowski {mink.point:.4f} [{mink.lower:.4f}, {mink.upper:.4f}], "
                f"lambda vs n^-2 within 3 sigma at {sum(per_scale)}/{len(per_scale)} scales")


def test_c2_lattice_hausdorff_measure(verdict):
    parts = []
    ok = True
    for delta in (1.0, 2.0):
        m = outcome("lattice_measure", delta)
        good = m.kind == "finite" and abs(m.value - 2 / delta) <= 0.05 * 2 / delta
        ok &= good
        parts.append(f"delta={delta:g}: {m.value:.4f} vs {2 / delta:g}")
    verdict(ok, "; ".join(parts))


def test_c3_srw_zero_set(verdict):
    rep = outcome("srw_zeros_dim", N).report
    verdict(0.42 <= rep.mink_lower <= rep.mink_upper <= 0.58, f"zero set dimension {rep.mink_lower:.4f}")


def test_c4_drainage(verdict):
    out = outcome("drainage_dim", 10_000, 4000)
    rep, tab = out.report, out.extra["table"]
    dim_ok = 1.40 <= rep.mink_lower and rep.mink_upper <= 1.60
    cens_ok = tab.censored < 0.01
    verdict(dim_ok and cens_ok, f"drainage one-ended dimension [{rep.mink_lower:.4f}, {rep.mink_upper:.4f}] "
                                f"({'ok' if dim_ok else 'out of range'}), censored {tab.censored:.2%} "
                                f"({'ok' if cens_ok else 'not below 1%'})")


def test_c5_cantor(verdict):
    rep = outcome("cantor_dim", 12, N).report
    verdict(*_bracket(rep, CANTOR, 0.06))


def test_c6_koch(verdict):
    rep = outcome("koch_dim", 8, N).report
    verdict(*_bracket(rep, KOCH, 0.08))


def test_c7_self_similar(verdict):
    out = outcome("self_similar_dim")
    ok, detail = _bracket(out.report, SIERPINSKI, 0.08)
    mink = out.extra["minkowski"]
    mink_ok = abs(mink.point - SIERPINSKI) <= 0.08
    cc = ex.center_content()
    cc_ok = [c["content"].estimate <= c["bound"] + 3 * c["content"].se for c in cc]
    verdict(ok and mink_ok and all(cc_ok),
            f"{detail}; Minkowski {mink.point:.4f}; center content within bound at {sum(cc_ok)}/{len(cc_ok)} levels")


def test_c8_egw(verdict):
    out = outcome("egw_dim", N)
    rep, tab = out.report, out.extra["table"]
    grid = 2 ** np.arange(8, 13)
    flat = decay_fit(grid, grid * tab.p[grid], grid * tab.ci[grid], mode="growth")
    flat_ok = abs(flat.point) <= 3 * flat.ci / Z95
    ok = 1.85 <= rep.mink_lower and rep.mink_upper <= 2.15 and flat_ok
    verdict(ok, f"EGW [{rep.mink_lower:.4f}, {rep.mink_upper:.4f}]; exponent of n P(h>=n) over n=256..4096 "
                f"{flat.point:+.3f} ± {flat.ci:.3f}")


def test_c9_srw_image(verdict):
    a = outcome("srw_image_dim", 0.5, N).report.mink_upper
    b = outcome("srw_image_dim", 2.0, N).report.mink_upper
    verdict(abs(a - 0.5) <= 0.07 and abs(b - 1.0) <= 0.07, f"beta=0.5: {a:.4f}, beta=2: {b:.4f}")


def test_c10_subdivision(verdict):
    sub = outcome("subdivision_dim", 0.8, 0.5, N).report.mink_upper
    base = outcome("srw_image_dim", 0.8, N).report.mink_upper
    verdict(0.50 <= sub <= 0.70 and 0.72 <= base <= 0.88, f"subdivided {sub:.4f}, base {base:.4f}")


def test_c11_canopy(verdict):
    rep = outcome("canopy_dim", 4, "geometric", 2.0).report
    ok, detail = _bracket(rep, 2.0, 0.15)
    mink_ok = abs(rep.mink_lower - 2) <= 0.15 and abs(rep.mink_upper - 2) <= 0.15
    graph = outcome("canopy_dim", 4, "graph").report
    flag = math.isinf(graph.mink_upper) and math.isinf(graph.haus_upper)
    verdict(ok and mink_ok and flag, f"{detail}; Minkowski [{rep.mink_lower:.4f}, {rep.mink_upper:.4f}]; "
                                     f"graph metric flagged infinite: {flag}")


def test_c12_regular_tree(verdict):
    out = outcome("regular_tree_dim", 3, N)
    hits = [bool(b.p.covers(1.0 / size)) for b, size in zip(out.extra["bounds"], out.extra["ball"])]
    flag = math.isinf(out.report.mink_upper)
    verdict(all(hits) and flag, f"lambda_r = 1/|N_r| within 3 sigma at r=1,2,3: {hits}; infinite flag: {flag}")


def test_c13_zero_dimensional_measure(verdict):
    s = five_points()
    det = hausdorff_measure_zero(sampler=finite_space_sampler([s], [1.0]), reps=50)
    mix = ex.finite_measure(ex.mixture_sizes([2, 4], [0.5, 0.5], n=N))
    ok = det.value == 5.0 and abs(mix.value - 8 / 3) <= 0.02 * 8 / 3
    verdict(ok, f"5-point space {det.value:g}; mixture {{2,4}} {mix.value:.4f} vs {8 / 3:.4f}")


def _random_finite(rng) -> RootedSample:
    if rng.random() < 0.5:
        n = int(rng.integers(2, 13))
        pts = rng.choice(64, size=n, replace=False)
        xy = np.column_stack([pts % 8, pts // 8]).astype(float)
        return RootedSample.from_coords(xy, metric=["euclidean", "l1", "linf"][int(rng.integers(3))])
    g = nx.random_labeled_tree(int(rng.integers(2, 13)), seed=int(rng.integers(1 << 30)))
    return from_networkx(g).to_sample()


def test_c14_mass_transport(verdict):
    rng = np.random.default_rng(14)
    gs = [g_catalog()[k] for k in ("near1", "near2", "dist2", "nearest", "degree")]
    worst = 0.0
    for _ in range(50):
        s = _random_finite(rng)
        for g in gs:
            r = mtp_check_exact(s, g)
            worst = max(worst, abs(r.diff) / max(1.0, abs(r.out_mass)))
    exact_ok = worst <= 1e-12
    rejected = []
    for name, m in sorted(cat.MODELS.items()):
        reps = mtp_check_statistical(m.build(m.resolve({}), 0), cat.transport(m.g), MTP_N)
        rejected += [f"{name}/{r.name}" for r in reps if r.rejected]
    verdict(exact_ok and not rejected, f"exact: worst relative gap {worst:.1e} over 50 spaces x 5 g; "
                                       f"statistical (n={MTP_N}) on {len(cat.MODELS)} models, rejected {rejected}")


def _min_cover(g: nx.Graph, n: int) -> int:
    d = dict(nx.all_pairs_shortest_path_length(g))
    nodes = list(g)
    for m in range(1, len(nodes) + 1):
        for comb in itertools.combinations(nodes, m):
            if all(any(d[c][v] <= n for c in comb) for v in nodes):
                return m
    return len(nodes)


def test_c15_greedy_tree_cover(verdict):
    rng = np.random.default_rng(15)
    trees = [nx.empty_graph(1)] + [t for order in range(2, 10) for t in nx.nonisomorphic_trees(order)]
    bad = []
    for t in trees:
        # a random labelling and root: the answer must not depend on them
        perm = rng.permutation(t.number_of_nodes())
        g = nx.relabel_nodes(t, {v: int(perm[i]) for i, v in enumerate(t)})
        root = int(rng.integers(g.number_of_nodes()))
        for n in (1, 2):
            got = len(greedy_finite_tree_cover(from_networkx(g, root), n, rng))
            if got != _min_cover(g, n):
                bad.append((g.number_of_nodes(), n))
    verdict(not bad, f"{len(trees)} trees with <= 9 vertices, n in {{1, 2}}: mismatches {bad}")


def test_c16_cone_sandwich(verdict):
    rows = ex.cone_sandwich(2, (4, 8, 16), N)
    ok = True
    parts = []
    for r in rows:
        lam, lo, hi = r["lambda"], r["lower"], r["upper"]
        good = (lo.estimate <= lam.estimate + 3 * math.hypot(lo.se, lam.se)
                and lam.estimate <= hi.estimate + 3 * math.hypot(lam.se, hi.se))
        ok &= good
        parts.append(f"n={r['n']}: {lo.estimate:.5f} <= {lam.estimate:.5f} <= {hi.estimate:.5f}")
    verdict(ok, "; ".join(parts))


def _iso_oracle(a: RootedSample, b: RootedSample) -> bool:
    """Rooted isometry via networkx on complete graphs weighted by rounded distances."""
    def graph(s):
        d = np.round(s.pairwise(range(s.size)), 9)
        g = nx.complete_graph(s.size)
        nx.set_edge_attributes(g, {(i, j): d[i, j] for i, j in g.edges}, "d")
        nx.set_node_attributes(g, {i: i == s.root for i in range(s.size)}, "root")
        return g
    if a.size != b.size:
        return False
    return nx.is_isomorphic(graph(a), graph(b), node_match=lambda x, y: x["root"] == y["root"],
                            edge_match=lambda x, y: x["d"] == y["d"])


def _kappa_spaces(rng) -> list:
    spaces = []
    while len(spaces) < 14:
        n = int(rng.integers(1, 16))
        xy = np.unique(rng.integers(0, 5, size=(n, 2)), axis=0).astype(float)
        spaces.append(RootedSample.from_coords(xy, root=int(rng.integers(len(xy)))))
    # isometric copies: rotate, translate and relabel
    for s in spaces[:6]:
        perm = rng.permutation(s.size)
        xy = s.coords[perm] @ np.array([[0.0, -1.0], [1.0, 0.0]]) + rng.integers(-3, 4, size=2)
        spaces.append(RootedSample.from_coords(xy, root=int(np.flatnonzero(perm == s.root)[0])))
    return spaces


def test_c17_kappa_axioms(verdict):
    tol = 1e-3
    spaces = _kappa_spaces(np.random.default_rng(17))
    m = len(spaces)
    K = np.zeros((m, m))
    asym = 0
    for i in range(m):
        for j in range(m):
            K[i, j] = kappa(spaces[i], spaces[j], tol)
    asym = int(np.sum(K != K.T))
    tri = max(K[i, k] - K[i, j] - K[j, k] for i, j, k in itertools.product(range(m), repeat=3))
    ident = sum((K[i, j] <= tol * (1 + 1e-9)) != _iso_oracle(spaces[i], spaces[j])
                for i in range(m) for j in range(m))
    verdict(asym == 0 and tri <= 3 * tol and ident == 0,
            f"{m} spaces: asymmetric pairs {asym}, worst triangle excess {tri:.2e}, "
            f"identity mismatches vs isomorphism oracle {ident}")


def test_c18_cross_checks(verdict):
    reports = [
        outcome("lattice_dim", 2, N).report,
        outcome("srw_zeros_dim", N).report,
        outcome("drainage_dim", 10_000, 4000).report,
        outcome("cantor_dim", 12, N).report,
        outcome("koch_dim", 8, N).report,
        outcome("self_similar_dim").report,
        outcome("egw_dim", N).report,
        outcome("srw_image_dim", 0.5, N).report,
        outcome("srw_image_dim", 2.0, N).report,
        outcome("subdivision_dim", 0.8, 0.5, N).report,
        outcome("canopy_dim", 4, "geometric", 2.0).report,
        outcome("canopy_dim", 4, "graph").report,
        outcome("regular_tree_dim", 3, N).report,
        ex.finite_dim(five_points()).report,
    ]
    std = minkowski_estimate(ex.lattice_bounds(2, n=N, generators="standard"))
    hexa = ex.cayley_minkowski("hexagonal")
    std_exact = ex.cayley_minkowski("standard")
    invariance = [("cayley[standard MC vs hexagonal]", std.point, std.ci, hexa.point, hexa.ci),
                  ("cayley[standard vs hexagonal, exact intensities]", std_exact.point, std_exact.ci,
                   hexa.point, hexa.ci)]
    whole, sub = outcome("lattice_measure", 1.0), outcome("lattice_measure", 2.0)
    audit = cross_checks(reports, invariance, [(sub, whole, 0.5)])
    red = [c.name for c in audit.checks if not c.ok]
    verdict(not audit.red, f"{len(audit.checks)} checks ({len(reports)} orderings, "
                           f"Cayley {std.point:.4f} / {std_exact.point:.4f} vs {hexa.point:.4f}, "
                           f"2Z in Z {sub.value:.4f} vs {0.5 * whole.value:.4f}); red: {red}")
