"""Dimension pipelines per model: each returns a report and the tables behind it."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from unidim.coverings import (CoveringRule, LambdaBounds, lambda_r_bounds, regular_ball_size, regular_tree_cover,
                              regular_tree_window, shifted_lattice_cover)
from unidim.errors import DomainError
from unidim.estimators import (MIN_SCALES, DimensionReport, GrowthBound, Interval, MeasureEstimate, alpha_grid, content_curves,
                               decay_fit, exact_minkowski, exact_one_ended, growth_from_counts, growth_upper_bound,
                               hausdorff_lower_bound, hausdorff_measure_sweep, hausdorff_measure_zero,
                               line_process_dim, minkowski_estimate, octave_grid, one_ended_dim)
from unidim.generators import (JumpDistribution, OffspringDistribution, canopy_ball_size, canopy_level_cover,
                               canopy_survival, gen_canopy, gen_cantor, gen_koch, gen_lattice, gen_self_similar,
                               gw_heights, lazy_heights, return_times, sierpinski_ifs, subdivided_gaps,
                               survival_from_heights)
from unidim.generators.canopy import canopy_cone_selected, designed_law, sample_levels
from unidim.generators.lattice import sublattice_cover_radius, sublattice_multiplicity
from unidim.generators.selfsimilar import IFSSpec, cantor_block_rule, ifs_block_rule, koch_block_rule
from unidim.sampling import RootedSampler, proportion, replicate_rng
from unidim.space import RootedSample


@dataclass
class Table:
    columns: tuple
    rows: list

    def column(self, name: str) -> np.ndarray:
        return np.array([r[self.columns.index(name)] for r in self.rows], dtype=float)


@dataclass
class Outcome:
    report: DimensionReport
    tables: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


def fit_table(r, values, ci) -> Table:
    return Table(("scale", "value", "ci"), [(float(a), float(b), float(c)) for a, b, c in zip(r, values, ci)])


def bounds_table(bounds) -> Table:
    return Table(("r", "p_hat", "ci", "K", "lambda_lo", "lambda_hi"),
                 [(b.r, b.p.estimate, b.p.ci, b.K, b.lo, b.hi) for b in bounds])


def _content_table(scales, curves) -> Table:
    rows = []
    for a, vals in sorted(curves.items()):
        rows += [(a, float(s), v, c) for s, (v, c) in zip(scales, vals)]
    return Table(("alpha", "scale", "value", "ci"), rows)


def _growth_table(g: GrowthBound) -> Table:
    return Table(("scale", "max_count", "mean_count"),
                 [(float(r), float(a), float(b)) for r, a, b in zip(g.radii, g.max_counts, g.mean_counts)])


def _haus_upper(g: GrowthBound) -> tuple[float, float]:
    return (math.inf, 0.0) if g.superpoly else (g.exponent, g.ci)


# -- lattices ---------------------------------------------------------------------------


def lattice_bounds(k: int = 2, ns=(2, 4, 8, 16, 32, 64), n: int = 100_000, seed: int = 0,
                   generators: str | None = None) -> list[LambdaBounds]:
    """Covering-intensity bounds for the shifted sub-lattice family on ``Z^k``.

    Without ``generators`` the balls are linf balls of the tight radius ``n/2``
    (``K = 2^k``); with a Cayley generating set they are word-metric balls of
    the sub-lattice covering radius, with ``K`` counted exactly on one cell.
    """
    half = 12
    S = gen_lattice(k, 1.0, half, "linf", generators, seed)
    out = []
    for m in ns:
        if generators is None:
            rule = shifted_lattice_cover(k, 1.0, m, norm="linf", radius="tight")
        else:
            cr = sublattice_cover_radius(m, generators, k)
            rule = shifted_lattice_cover(k, 1.0, m, norm="cayley", cayley_radius=cr)
            rule.K = sublattice_multiplicity(m, cr, generators, k)
        # audits need balls of twice the radius inside the window
        audit = 1 if 2 * rule.scale + 1 <= half else 0
        out.append(lambda_r_bounds(S, rule, n=n, audit_reps=audit, seed=seed))
    return out


def cayley_minkowski(generators: str, k: int = 2, ns=tuple(3 * 2 ** j for j in range(3, 10))) -> Interval:
    """Minkowski fit from the exact sub-lattice intensities ``m^-k`` against word-metric cover radii.

    The hexagonal cover radius of ``mZ^2`` is ``floor(2m/3)``; spacings divisible
    by 3 keep that rounding out of the slope, and the scales reach far beyond
    what a Monte Carlo intensity could resolve.
    """
    rules = []
    for m in ns:
        cr = sublattice_cover_radius(m, generators, k)
        rules.append(shifted_lattice_cover(k, 1.0, m, norm="cayley", cayley_radius=cr))
    return exact_minkowski(rules)


def lattice_dim(k: int = 2, n: int = 100_000, seed: int = 0, generators: str | None = None) -> Outcome:
    bounds = lattice_bounds(k, n=n, seed=seed, generators=generators)
    mink = minkowski_estimate(bounds) if generators is None else cayley_minkowski(generators, k)
    # contents E[R^alpha] of the same family
    S = gen_lattice(k, 1.0, 12, "linf", generators, seed)
    rules = [shifted_lattice_cover(k, 1.0, m, norm="linf", radius="tight") for m in (2, 4, 8, 16, 32, 64)]
    curves = content_curves(S, rules, alpha_grid(max(0.0, k - 1.0), k + 0.5), n, seed)
    low = hausdorff_lower_bound([u.scale for u in rules], curves)
    # large radii on a wide window keep boundary effects out of the growth exponent
    big = gen_lattice(k, 1.0, 260 if k <= 2 else 12, "linf", generators, seed)
    radii = octave_grid(16, 256) if k <= 2 else octave_grid(1, 8)
    g = growth_upper_bound(big, radii, 1)
    hu, hci = _haus_upper(g)
    metric = "linf" if generators is None else f"word[{generators}]"
    rep = DimensionReport("lattice" if generators is None else "lattice-cayley", metric, mink.lower, mink.upper,
                          mink.ci, low.alpha, hu, hci)
    return Outcome(rep, {"lambda": bounds_table(bounds), "contents": _content_table([u.scale for u in rules], curves),
                         "growth": _growth_table(g)}, {"minkowski": mink, "growth": g, "lower": low})


def lattice_measure(delta: float, alpha: float = 1.0, Ms=(1, 2, 4, 8, 16, 32, 64), n: int = 100_000,
                    seed: int = 0) -> MeasureEstimate:
    """``meas^alpha(δZ)`` under linf from disjoint cube tilings with ``n = ceil(M/δ)``."""
    S = gen_lattice(1, delta, 200, "linf", seed=seed)

    def family(M):
        return [shifted_lattice_cover(1, delta, max(1, int(math.ceil(M / delta - 1e-12))), norm="linf", disjoint=True)]

    return hausdorff_measure_sweep(S, family, alpha, Ms, n=n, seed=seed)


# -- one-ended trees ---------------------------------------------------------------------


def _one_ended(name: str, metric: str, h, nmax: int, nmin: int, censored: float = 0.0) -> Outcome:
    tab = survival_from_heights(h, nmax, censored)
    iv = one_ended_dim(tab, nmin, nmax)
    fit = iv.fits["survival"]
    mass = iv.fits["mass"]
    rep = DimensionReport(name, metric, min(iv.point, 1 + fit.lower), max(iv.point, 1 + fit.upper), iv.ci,
                          None if mass is None else max(0.0, mass.point - mass.ci), None)
    grid = octave_grid(nmin, nmax).astype(int)
    ratio = (1 + fit.ratio_lower, 1 + fit.ratio_upper)
    return Outcome(rep, {"survival": fit_table(grid, tab.p[grid], tab.ci[grid])},
                   {"interval": iv, "table": tab, "ratio": ratio})


def egw_dim(n: int = 100_000, depth: int = 4096, seed: int = 0, law: OffspringDistribution | None = None,
            nmin: int = 16) -> Outcome:
    law = law or OffspringDistribution("geometric", 0.5)
    h = gw_heights(law, replicate_rng(seed, -1), n, depth)
    return _one_ended("egw", "graph", h, depth, nmin)


def drainage_dim(n: int = 10_000, nmax: int = 4000, seed: int = 0, nmin: int = 4) -> Outcome:
    h = lazy_heights(replicate_rng(seed, -1), n, nmax)
    top = 1 << int(math.floor(math.log2(nmax)))
    # roots whose descendants reach the top of the window have a censored height
    return _one_ended("drainage", "graph", h, top, nmin, float(np.mean(h >= nmax)))


def generalized_canopy_dim(alpha: float = 0.5, beta: float = 0.75, gamma: float = 1.2, n: int = 100_000,
                           nmax: int = 1 << 16, seed: int = 0) -> Outcome:
    law = designed_law(alpha, beta, gamma, nmax)
    h = law.sample(replicate_rng(seed, -1), n)
    out = _one_ended("generalized-canopy", "graph", h, nmax, 1)
    out.extra["law"] = law
    return out


def canopy_dim(k: int = 4, variant: str = "geometric", a: float = 2.0, n: int = 10_000_000, seed: int = 0,
               levels=range(5, 11), depth: int = 40) -> Outcome:
    """Level coverings and closed-form ball counts for the canopy tree.

    The graph variant has ``P(h >= n) = k^{-n}``; its super-polynomial flag
    is read from that exact curve since no sample resolves ``k^{-32}``.
    """
    if variant == "graph":
        grid = octave_grid(1, 32)
        iv = exact_one_ended(grid, canopy_survival(k, grid))
        rep = DimensionReport("canopy", "graph", math.inf if iv.superpoly else iv.lower,
                              math.inf if iv.superpoly else iv.upper, 0.0, None, math.inf)
        return Outcome(rep, {"survival": fit_table(grid, canopy_survival(k, grid), np.zeros(len(grid)))},
                       {"interval": iv})
    S = gen_canopy(k, variant, a, depth=depth, seed=seed)
    rules = [canopy_level_cover(k, m, variant, a, depth) for m in levels]
    bounds = [lambda_r_bounds(S, u, n=n, audit_reps=0, seed=seed) for u in rules]
    mink = minkowski_estimate(bounds)
    scales = [u.scale for u in rules]
    target = math.log(k) / math.log(a) if variant == "geometric" else 1.0
    curves = content_curves(S, rules, alpha_grid(max(0.0, target - 0.5), target + 0.3), n, seed)
    low = hausdorff_lower_bound(scales, curves)
    L = sample_levels(k, depth, replicate_rng(seed, -3), 2000)
    # large radii: the max over roots has settled once r exceeds the deepest sampled level's scale
    radii = octave_grid(2.0 ** 8, 2.0 ** 16)
    counts = np.array([[canopy_ball_size(k, int(l), r, variant, a) for r in radii] for l in L])
    g = growth_from_counts(radii, counts)
    hu, hci = _haus_upper(g)
    rep = DimensionReport("canopy", f"{variant}(a={a:g})", mink.lower, mink.upper, mink.ci, low.alpha, hu, hci)
    return Outcome(rep, {"lambda": bounds_table(bounds), "contents": _content_table(scales, curves),
                         "growth": _growth_table(g)}, {"minkowski": mink, "growth": g, "lower": low})


def cone_sandwich(k: int = 2, ns=(4, 8, 16), n: int = 100_000, seed: int = 0, depth: int = 40) -> list[dict]:
    """Cone-covering intensity of the canopy against the two level-residue bounds, on shared draws."""
    L = sample_levels(k, depth, replicate_rng(seed, -1), n)
    out = []
    for m in ns:
        sel = proportion(canopy_cone_selected(L, m))
        lo = proportion(L % (m + 1) == m)
        half = m // 2
        hi = proportion(L % half == half - 1)
        out.append({"n": m, "lambda": sel, "lower": lo, "upper": hi})
    return out


def regular_tree_dim(k: int = 3, n: int = 100_000, seed: int = 0) -> Outcome:
    S = RootedSampler("regular-tree", lambda rng: regular_tree_window(k, 8).to_sample(), seed, {"k": k})
    bounds = [lambda_r_bounds(S, regular_tree_cover(k, r), n=n, audit_reps=1, seed=seed) for r in (1, 2, 3)]
    # the disjoint rule's intensity is 1/|N_r(o)| in closed form, out to radii no sample reaches
    exact = exact_minkowski([regular_tree_cover(k, int(r)) for r in octave_grid(1, 32)])
    inf = math.inf if exact.superpoly else exact.upper
    rep = DimensionReport("regular-tree", "graph", math.inf if exact.superpoly else exact.lower, inf, 0.0, None,
                          math.inf)
    return Outcome(rep, {"lambda": bounds_table(bounds)}, {"bounds": bounds, "exact": exact,
                                                          "ball": [regular_ball_size(k, r) for r in (1, 2, 3)]})


# -- point processes on the line -----------------------------------------------------------

LINE_RADII = octave_grid(16, 1 << 16)


def _line(name: str, gaps, radii=LINE_RADII) -> Outcome:
    iv = line_process_dim(gaps=gaps, radii=radii)
    fit = iv.fits["curve"]
    g = np.asarray(gaps, dtype=float)
    vals = [np.minimum(g, r).mean() / r for r in radii]
    rep = DimensionReport(name, "euclidean", iv.point, iv.point, iv.ci, None, None)
    rep.notes.append(f"rolling proxies [{fit.lower:.4f}, {fit.upper:.4f}]")
    return Outcome(rep, {"curve": fit_table(radii, vals, np.zeros(len(radii)))}, {"interval": iv})


def srw_zeros_dim(n: int = 100_000, cap: int = 1 << 16, seed: int = 0) -> Outcome:
    return _line("srw-zeros", return_times(replicate_rng(seed, -1), n, cap), LINE_RADII[LINE_RADII <= cap])


def srw_image_dim(beta: float = 0.5, n: int = 100_000, seed: int = 0) -> Outcome:
    return _line("srw-image", JumpDistribution("pareto", beta).sample(replicate_rng(seed, -1), n))


def subdivision_dim(beta: float = 0.8, alpha: float = 0.5, n: int = 100_000, seed: int = 0) -> Outcome:
    jumps = JumpDistribution("pareto", beta)
    return _line("subdivision", subdivided_gaps(jumps, alpha, replicate_rng(seed, -2), n))


# -- self-similar sets -------------------------------------------------------------------------

MIN_HITS = 100


def _self_similar(name: str, S: RootedSampler, rules: list[CoveringRule], radii, reps: int, target: float,
                  n: int, seed: int, pool: str) -> Outcome:
    scales = [u.scale for u in rules]
    curves = content_curves(S, rules, alpha_grid(max(0.0, target - 0.3), target + 0.3), n, seed)
    low = hausdorff_lower_bound(scales, curves)
    g = growth_upper_bound(S, radii, reps, skip_small=True, pool=pool)
    hu, hci = _haus_upper(g)
    # every block rule is disjoint at the block level; the sampled intensity gives the Minkowski curve
    p = np.array([curves[min(curves)][i][0] for i in range(len(rules))]) / np.asarray(scales) ** min(curves)
    # scales whose intensity rests on a handful of covered roots only add noise to the rolling fits
    keep = p * n >= MIN_HITS
    if keep.sum() < MIN_SCALES:
        keep = np.sort(np.argsort(-p)[:MIN_SCALES])
    fit = decay_fit(np.asarray(scales)[keep], p[keep])
    rep = DimensionReport(name, "euclidean", fit.lower, fit.upper, fit.ci, low.alpha, hu, hci)
    return Outcome(rep, {"contents": _content_table(scales, curves), "growth": _growth_table(g)},
                   {"growth": g, "lower": low, "minkowski": fit})


def cantor_dim(depth: int = 12, n: int = 100_000, seed: int = 0, construction: str = "nested") -> Outcome:
    S = gen_cantor(depth, construction, seed)
    rules = [cantor_block_rule(m) for m in range(3, min(depth, 11) + 1)]
    return _self_similar("cantor", S, rules, octave_grid(4, 3 ** depth // 4), 30, math.log(2) / math.log(3), n, seed,
                         "interior")


def koch_dim(depth: int = 8, n: int = 100_000, seed: int = 0, reps: int = 200) -> Outcome:
    S = gen_koch(depth, seed)
    rules = [koch_block_rule(m) for m in range(2, depth + 1)]
    return _self_similar("koch", S, rules, octave_grid(4, 256), reps, math.log(4) / math.log(3), n, seed, "root")


def self_similar_dim(ifs: IFSSpec | None = None, depth: int = 10, n: int = 100_000, seed: int = 0,
                     reps: int = 20) -> Outcome:
    ifs = ifs or sierpinski_ifs()
    S = gen_self_similar(ifs, depth, seed=seed)
    rules = [ifs_block_rule(ifs, m, simple=True) for m in range(1, depth + 1)]
    # max ball counts approach their exponent from below; radii of a sixteenth of the window side and up
    side = ifs.ratio ** -depth
    radii = octave_grid(max(4.0, side / 64), max(64.0, side / 4))
    return _self_similar("self-similar", S, rules, radii, reps, ifs.dimension, n, seed, "interior")


def center_content(ifs: IFSSpec | None = None, depth: int = 7, reps: int = 2000, seed: int = 0,
                   ms=range(1, 7)) -> list[dict]:
    """``E[(1/w(o)) 1{R_m(o) > 0}]`` for the level-``m`` block rule on unbiased windows."""
    ifs = ifs or sierpinski_ifs()
    S = gen_self_similar(ifs, depth, seed=seed, unimodular=False)
    rules = [ifs_block_rule(ifs, m) for m in ms]
    vals = np.zeros((len(rules), reps))
    for i in range(reps):
        rng = S.rng(i)
        s = S.draw_fn(rng)
        w = float(s.marks["weight"][s.root])
        for j, u in enumerate(rules):
            vals[j, i] = (u.root_value(s, rng) > 0) / w
    from unidim.sampling import mean_ci

    return [{"m": m, "content": mean_ci(vals[j]), "bound": ifs.ratio ** (m * ifs.dimension)}
            for j, m in enumerate(ms)]


# -- finite spaces --------------------------------------------------------------------------


def finite_measure(sizes) -> MeasureEstimate:
    return hausdorff_measure_zero(sizes=sizes)


def mixture_sizes(values, probs, n: int = 100_000, seed: int = 0) -> np.ndarray:
    """``|D|`` for ``n`` draws of a finite mixture, sampled from the root's viewpoint.

    Rooting uniformly inside a space drawn with ``probs`` leaves the law of
    ``|D|`` equal to ``probs``.
    """
    rng = replicate_rng(seed, -1)
    return np.asarray(values)[rng.choice(len(values), size=n, p=np.asarray(probs, float) / np.sum(probs))]


def finite_dim(space: RootedSample) -> Outcome:
    m = hausdorff_measure_zero(sizes=[space.size])
    rep = DimensionReport("finite", space.metric, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, {0: m.value})
    return Outcome(rep, {}, {"measure": m})


__all__ = [
    "Outcome", "Table", "canopy_dim", "cantor_dim", "center_content", "cone_sandwich", "drainage_dim", "egw_dim",
    "finite_dim", "finite_measure", "generalized_canopy_dim", "koch_dim", "lattice_bounds", "lattice_dim",
    "lattice_measure", "mixture_sizes", "regular_tree_dim", "self_similar_dim", "srw_image_dim", "srw_zeros_dim",
    "subdivision_dim",
]
