"""Decay and growth exponents, and dimension and measure pipelines built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from unidim.coverings import ContentEstimate, CoveringRule, LambdaBounds, content_estimate, root_radii
from unidim.errors import DomainError, WindowTooSmallError
from unidim.generators.survival import SurvivalTable
from unidim.sampling import Z95, IntensityEstimate, RootedSampler, mean_ci
from unidim.space import TOL, ball
from unidim.trees import TreeWindow

SUPERPOLY = 8.0
OCTAVES = 3
MIN_SCALES = 5


@dataclass(frozen=True)
class DecayFit:
    """Exponent of a decaying (or growing) curve on a geometric grid.

    ``point`` is the weighted least-squares slope over the whole window;
    ``lower`` and ``upper`` are the smallest and largest slopes over rolling
    windows of ``OCTAVES`` octaves, finite-window stand-ins for the lim inf and
    lim sup. ``ratio_lower`` and ``ratio_upper`` bracket ``log f(r) / log r``
    over the upper half of the grid. ``superpoly`` flags an exponent beyond
    ``SUPERPOLY`` that still drifts upwards over the top octaves.
    """

    mode: str
    point: float
    ci: float
    lower: float
    upper: float
    ratio_lower: float
    ratio_upper: float
    superpoly: bool
    rmin: float
    rmax: float
    residual: float
    local: np.ndarray = field(repr=False)

    @property
    def value(self) -> float:
        return math.inf if self.superpoly else self.point

    def covers(self, x: float, sigmas: float = 1.0) -> bool:
        return abs(self.point - x) <= sigmas * self.ci + TOL


def _wls(x, y, w):
    """Slope, its standard error (known weights, inflated by lack of fit) and the RMS residual."""
    W = w.sum()
    xb, yb = (w * x).sum() / W, (w * y).sum() / W
    sxx = (w * (x - xb) ** 2).sum()
    if sxx <= 0:
        raise DomainError("scales must differ")
    b = (w * (x - xb) * (y - yb)).sum() / sxx
    res = y - (yb + b * (x - xb))
    dof = max(len(x) - 2, 1)
    chi2 = (w * res ** 2).sum() / dof
    se = math.sqrt(max(chi2, 1.0) / sxx) if np.isfinite(w).all() else 0.0
    return b, se, float(np.sqrt(np.mean(res ** 2)))


def decay_fit(r, values, ci=None, mode: str = "decay", window: int = OCTAVES,
              threshold: float = SUPERPOLY, weighted: bool = True) -> DecayFit:
    """Fit ``log value`` against ``log r``; exponents are reported with the sign of ``mode``.

    With ``weighted=False`` every scale counts equally and the CIs only feed
    the standard error, by linear propagation through the slope.
    """
    if mode not in ("decay", "growth"):
        raise DomainError("mode is decay or growth")
    r = np.asarray(r, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.shape != v.shape or r.ndim != 1:
        raise DomainError("scales and values must be matching vectors")
    if r.size < MIN_SCALES:
        raise DomainError(f"need at least {MIN_SCALES} scales")
    if np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise DomainError("scales must be positive and increasing")
    if np.any(~(v > 0)):
        raise DomainError("values must be positive for a log-log fit")
    sign = -1.0 if mode == "decay" else 1.0
    x, y = np.log(r), np.log(v)
    if ci is None:
        w = np.ones_like(x)
        exact = True
    else:
        c = np.asarray(ci, dtype=float)
        sd = np.maximum(c / Z95 / v, 1e-12)
        w = 1.0 / sd ** 2
        exact = bool(np.all(c == 0))
        if exact:
            w = np.ones_like(x)
    if not weighted and not exact:
        sd = np.maximum(np.asarray(ci, dtype=float) / Z95 / v, 1e-12)
        w = np.ones_like(x)
    b, se, rms = _wls(x, y, w)
    if exact:
        se = _plain_se(x, y)
    elif not weighted:
        lev = (x - x.mean()) / ((x - x.mean()) ** 2).sum()
        se = max(math.sqrt((lev ** 2 * sd ** 2).sum()), _plain_se(x, y))
    # rolling slopes over `window` octaves
    octs = x / math.log(2)
    local = []
    # half an octave of slack lets scales off the dyadic grid form windows
    for i in range(len(x)):
        j = np.flatnonzero(octs <= octs[i] + window + 0.5)
        j = j[j >= i]
        if octs[j[-1]] - octs[i] >= window - 0.5 and len(j) >= 2:
            local.append(sign * _wls(x[j], y[j], w[j])[0])
    local = np.array(local) if local else np.array([sign * b])
    top = x >= np.median(x)
    pos = top & (r > 1)
    ratios = sign * y[pos] / x[pos] if pos.any() else np.array([sign * b])
    # successive pairwise exponents over the top octaves decide the drift
    pair = sign * np.diff(y) / np.diff(x)
    tail = pair[octs[1:] >= octs[-1] - window + 1e-9]
    drift = tail.size >= 2 and bool(np.all(np.diff(tail) > 0))
    superpoly = bool(local[-1] > threshold and drift)
    return DecayFit(mode, float(sign * b), float(Z95 * se), float(local.min()), float(local.max()),
                    float(ratios.min()), float(ratios.max()), superpoly, float(r[0]), float(r[-1]), rms, local)


def _plain_se(x, y):
    n = len(x)
    if n <= 2:
        return 0.0
    b, a = np.polyfit(x, y, 1)
    res = y - (a + b * x)
    s2 = (res ** 2).sum() / (n - 2)
    return math.sqrt(s2 / ((x - x.mean()) ** 2).sum())


def octave_grid(rmin: float, rmax: float) -> np.ndarray:
    """Powers of two in ``[rmin, rmax]``."""
    lo = math.ceil(math.log2(rmin) - 1e-12)
    hi = math.floor(math.log2(rmax) + 1e-12)
    return 2.0 ** np.arange(lo, hi + 1)


# -- Minkowski ------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    """Finite-window dimension interval with the point estimate and its CI."""

    point: float
    ci: float
    lower: float
    upper: float
    superpoly: bool = False
    fits: dict = field(default_factory=dict, repr=False)

    @property
    def value(self) -> float:
        return math.inf if self.superpoly else self.point


def minkowski_estimate(bounds: Sequence[LambdaBounds]) -> Interval:
    """Decay of the upper and lower covering-intensity curves; ``K`` is constant so they share a slope."""
    if len({b.K for b in bounds}) > 1:
        raise DomainError("bounds must share K")
    r = np.array([b.r for b in bounds])
    hi = np.array([b.hi for b in bounds])
    ci = np.array([b.p.ci for b in bounds])
    fit_hi = decay_fit(r, hi, ci)
    fit_lo = decay_fit(r, hi / bounds[0].K, ci / bounds[0].K)
    return Interval(fit_hi.point, fit_hi.ci, min(fit_hi.lower, fit_lo.lower), max(fit_hi.upper, fit_lo.upper),
                    fit_hi.superpoly, {"hi": fit_hi, "lo": fit_lo})


def exact_minkowski(rules: Sequence[CoveringRule]) -> Interval:
    """Minkowski fit from closed-form covering intensities of disjoint rules."""
    r = np.array([u.scale for u in rules])
    p = np.array([u.exact_p for u in rules], dtype=float)
    fit = decay_fit(r, p)
    return Interval(fit.point, fit.ci, fit.lower, fit.upper, fit.superpoly, {"exact": fit})


# -- one-ended trees and line processes -----------------------------------------------


def one_ended_dim(table: SurvivalTable, nmin: int = 1, nmax: int | None = None) -> Interval:
    """``1 + decay(P(h(o) >= n))`` on the octave grid, with the Hausdorff lower bound in ``fits['mass']``.

    The point masses ``P(h = n)`` are averaged over each octave ``[n, 2n)``
    before fitting; for a non-increasing sequence this keeps its decay rate.
    """
    top = int(table.n[-1]) if nmax is None else nmax
    grid = octave_grid(nmin, top).astype(int)
    p = table.p[grid]
    if np.any(p <= 0):
        raise DomainError("survival reaches zero inside the fit window; shrink nmax")
    fit = decay_fit(grid, p, table.ci[grid])
    mg = grid[2 * grid <= top + 1]
    mass = (table.p[mg] - table.p[np.minimum(2 * mg, top)]) / mg
    mass_fit = None
    if mg.size >= MIN_SCALES and np.all(mass > 0):
        se = np.sqrt(np.maximum(mass * mg, 1e-300) / table.reps) / mg
        mass_fit = decay_fit(mg, mass, Z95 * se)
    return Interval(1 + fit.point, fit.ci, 1 + fit.lower, 1 + fit.upper, fit.superpoly,
                    {"survival": fit, "mass": mass_fit})


def exact_one_ended(n, survival) -> Interval:
    fit = decay_fit(n, survival)
    return Interval(1 + fit.point, fit.ci, 1 + fit.lower, 1 + fit.upper, fit.superpoly, {"survival": fit})


def gap_curve(gaps, radii) -> list[IntensityEstimate]:
    """``(1/r) ∫_0^r P(gap > s) ds = E[min(gap, r)] / r`` from gap samples, exactly for the empirical law."""
    g = np.asarray(gaps, dtype=float)
    return [mean_ci(np.minimum(g, r) / r) for r in radii]


def table_curve(s, survival, radii) -> np.ndarray:
    """The same average from a survival table ``P(gap > s)`` by the trapezoid rule."""
    s = np.asarray(s, dtype=float)
    f = np.asarray(survival, dtype=float)
    if s[0] != 0:
        raise DomainError("table must start at s = 0")
    out = []
    for r in radii:
        m = s <= r
        xs = np.r_[s[m], r] if s[m][-1] < r else s[m]
        ys = np.interp(xs, s, f)
        out.append(integrate.trapezoid(ys, xs) / r)
    return np.array(out)


def line_process_dim(gaps=None, radii=None, table=None) -> Interval:
    """Decay of ``(1/r) ∫_0^r P(Φ ∩ (0, s) = ∅) ds``, capped at 1."""
    if radii is None:
        raise DomainError("radii are required")
    radii = np.asarray(radii, dtype=float)
    if gaps is not None:
        est = gap_curve(gaps, radii)
        v = np.array([e.estimate for e in est])
        ci = np.array([e.ci for e in est])
        # heavy tails widen the relative CI with r; equal weights keep the large scales in play
        fit = decay_fit(radii, v, ci, weighted=False)
    elif table is not None:
        fit = decay_fit(radii, table_curve(*table, radii))
    else:
        raise DomainError("pass gap samples or a survival table")
    cap = lambda x: min(1.0, x)
    return Interval(cap(fit.point), fit.ci, cap(fit.lower), cap(fit.upper), False, {"curve": fit})


# -- growth ----------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthBound:
    exponent: float
    ci: float
    mean_exponent: float
    superpoly: bool
    radii: np.ndarray
    max_counts: np.ndarray
    mean_counts: np.ndarray
    fits: dict = field(default_factory=dict, repr=False)

    @property
    def value(self) -> float:
        return math.inf if self.superpoly else self.exponent


def growth_from_counts(radii, counts) -> GrowthBound:
    """Growth fits of the max and the mean of ``|N_r(o)|`` over replicates (rows)."""
    c = np.atleast_2d(np.asarray(counts, dtype=float))
    mx, mn = c.max(axis=0), c.mean(axis=0)
    fmax = decay_fit(radii, mx, mode="growth")
    fmean = decay_fit(radii, mn, mode="growth")
    return GrowthBound(fmax.point, fmax.ci, fmean.point, fmax.superpoly, np.asarray(radii, float), mx, mn,
                       {"max": fmax, "mean": fmean})


def ball_counts(sample, radii, center: int | None = None) -> np.ndarray:
    if isinstance(sample, TreeWindow):
        sample = sample.to_sample()
    o = sample.root if center is None else center
    if sample.margin[o] < max(radii) - TOL:
        raise WindowTooSmallError(f"margin {sample.margin[o]:g} below radius {max(radii):g}")
    d = sample.distances_from(o, max(radii) + TOL)
    return np.array([(d <= r + TOL).sum() for r in radii])


def interior_max_counts(sample, radii, limit: int = 256, rng=None) -> np.ndarray | None:
    """Largest ``|N_r(v)|`` over (up to ``limit``) points whose balls fit in the window."""
    if isinstance(sample, TreeWindow):
        sample = sample.to_sample()
    idx = np.flatnonzero(sample.margin >= max(radii) - TOL)
    if idx.size == 0:
        return None
    if idx.size > limit:
        idx = (rng or np.random.default_rng(0)).choice(idx, limit, replace=False)
    return np.max([ball_counts(sample, radii, int(v)) for v in idx], axis=0)


def growth_upper_bound(sampler: RootedSampler, radii, reps: int, start: int = 0,
                       skip_small: bool = False, pool: str = "root") -> GrowthBound:
    """Growth exponent of ``max |N_r(o)|``; windows too small for the largest radius raise unless skipped.

    ``pool='interior'`` takes the max over every point of a window whose ball
    fits (any point may serve as the root, so the a.s. bound must hold there
    too); the mean stays a root average over windows whose root ball fits.
    """
    if pool not in ("root", "interior"):
        raise DomainError("pool is root or interior")
    rows, mean_rows = [], []
    for i in range(start, start + reps):
        s = sampler.draw(i)
        try:
            mean_rows.append(ball_counts(s, radii))
        except WindowTooSmallError:
            if not skip_small and pool == "root":
                raise
        if pool == "interior":
            m = interior_max_counts(s, radii, rng=sampler.rng(-2 - i))
            if m is not None:
                rows.append(m)
    if pool == "root":
        rows = mean_rows
    if not rows:
        raise WindowTooSmallError("no replicate had an interior ball")
    g = growth_from_counts(radii, np.array(rows))
    if pool == "interior" and mean_rows:
        mean = decay_fit(radii, np.mean(mean_rows, axis=0), mode="growth")
        g = GrowthBound(g.exponent, g.ci, mean.point, g.superpoly, g.radii, g.max_counts,
                        np.mean(mean_rows, axis=0), {"max": g.fits["max"], "mean": mean})
    return g


# -- Hausdorff -------------------------------------------------------------------------


@dataclass(frozen=True)
class HausdorffLower:
    alpha: float
    slopes: dict
    cis: dict


def hausdorff_lower_bound(scales, contents: dict, step: float = 0.02) -> HausdorffLower:
    """Largest ``alpha`` whose content curve decreases with its CI strictly below zero.

    ``contents[alpha]`` lists ``(value, ci)`` per scale. A zero content counts
    as below any positive one.
    """
    slopes, cis = {}, {}
    best = 0.0
    for a in sorted(contents):
        vals = np.array([v for v, _ in contents[a]], dtype=float)
        ci = np.array([c for _, c in contents[a]], dtype=float)
        ok = vals > 0
        if ok.sum() < MIN_SCALES:
            continue
        fit = decay_fit(np.asarray(scales, float)[ok], vals[ok], ci[ok], mode="growth")
        slopes[a], cis[a] = fit.point, fit.ci
        if fit.point + fit.ci < 0:
            best = max(best, a)
    return HausdorffLower(best, slopes, cis)


def content_curves(sampler, rules: Sequence[CoveringRule], alphas, n: int = 100_000,
                   seed: int = 0) -> dict:
    """``{alpha: [(E[R^alpha], ci) per rule]}`` with one set of root radii per rule shared by every alpha."""
    out = {float(a): [] for a in alphas}
    for rule in rules:
        r = root_radii(sampler, rule, n, seed)
        for a in out:
            e = mean_ci(np.where(r > 0, r ** a, 0.0))
            out[a].append((e.estimate, e.ci))
    return out


def alpha_grid(lo: float, hi: float, step: float = 0.02) -> np.ndarray:
    return np.round(np.arange(lo, hi + step / 2, step), 10)


@dataclass(frozen=True)
class MeasureEstimate:
    """``meas^alpha`` with a CI; ``kind`` is finite, zero or infinite."""

    value: float
    ci: float
    kind: str
    contents: list
    M: np.ndarray
    monotone: bool


def hausdorff_measure_zero(sizes=None, sampler: RootedSampler | None = None, reps: int = 0) -> MeasureEstimate:
    """``(E[1/|D|])^{-1}`` for finite spaces; any infinite sample gives the infinite flag."""
    if sizes is None:
        if sampler is None:
            raise DomainError("pass sizes or a sampler")
        sizes = []
        for i in range(reps):
            s = sampler.draw(i)
            if not np.all(np.isinf(s.margin)):
                return MeasureEstimate(math.inf, 0.0, "infinite", [], np.array([]), True)
            sizes.append(s.size)
    sizes = np.asarray(sizes, dtype=float)
    if np.any(np.isinf(sizes)):
        return MeasureEstimate(math.inf, 0.0, "infinite", [], np.array([]), True)
    m = mean_ci(1.0 / sizes)
    # compensated sum: identical sizes give the size back exactly
    val = 1.0 / (math.fsum(1.0 / sizes) / len(sizes))
    return MeasureEstimate(val, m.ci * val * val, "finite", [m], np.array([]), True)


FLAT = 0.25


def hausdorff_measure_sweep(sampler, family: Callable[[float], Sequence[CoveringRule]], alpha: float,
                            Ms, n: int = 100_000, seed: int = 0, degree: int = 2) -> MeasureEstimate:
    """Contents ``H_{alpha,M}`` over ``M``, extrapolated to ``M = ∞``; the measure is the inverse.

    The extrapolation is a weighted polynomial of ``degree`` in ``1/F``, where
    ``F`` is the floor the winning rule actually attains (at least ``M``, and
    the natural variable for rules on a discrete scale grid). Contents whose
    log-log slope in ``M`` exceeds ``FLAT`` in size are read as blowing up
    (measure 0) or vanishing (measure infinite).
    """
    Ms = np.asarray(Ms, dtype=float)
    cs: list[ContentEstimate] = []
    floors = []
    for M in Ms:
        fam = list(family(M))
        c = content_estimate(sampler, fam, alpha, M, n, seed)
        cs.append(c)
        floors.append({u.name: u.floor for u in fam}[c.rule])
    v = np.array([c.value for c in cs])
    ci = np.array([c.ci for c in cs])
    # contents are nondecreasing in M up to noise
    monotone = bool(np.all(np.diff(v) >= -(ci[1:] + ci[:-1]) - TOL))
    if np.all(v > 0) and len(Ms) >= MIN_SCALES:
        fit = decay_fit(Ms, v, ci, mode="growth")
        if fit.point > FLAT:
            return MeasureEstimate(0.0, 0.0, "zero", cs, Ms, monotone)
        if fit.point < -FLAT:
            return MeasureEstimate(math.inf, 0.0, "infinite", cs, Ms, monotone)
    elif np.any(v <= 0):
        return MeasureEstimate(math.inf, 0.0, "infinite", cs, Ms, monotone)
    inv = 1.0 / np.asarray(floors, dtype=float)
    X = np.column_stack([inv ** j for j in range(degree + 1)])
    sd = np.maximum(ci / Z95, 1e-15)
    W = 1.0 / sd ** 2
    A = X.T @ (W[:, None] * X)
    coef = np.linalg.lstsq(A, X.T @ (W * v), rcond=None)[0]
    cov = np.linalg.pinv(A)
    c0, se0 = coef[0], math.sqrt(max(cov[0, 0], 0.0))
    if c0 <= 0:
        return MeasureEstimate(math.inf, 0.0, "infinite", cs, Ms, monotone)
    val = 1.0 / c0
    return MeasureEstimate(val, Z95 * se0 * val * val, "finite", cs, Ms, monotone)


# -- reports and cross-checks -----------------------------------------------------------


@dataclass
class DimensionReport:
    model: str
    metric: str
    mink_lower: float
    mink_upper: float
    mink_ci: float
    haus_lower: float | None = None
    haus_upper: float | None = None
    haus_upper_ci: float = 0.0
    measures: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        def f(x):
            if x is None:
                return None
            return "inf" if math.isinf(x) else round(float(x), 6)

        return {
            "model": self.model, "metric": self.metric,
            "minkowski": [f(self.mink_lower), f(self.mink_upper)], "minkowski_ci": f(self.mink_ci),
            "hausdorff": [f(self.haus_lower), f(self.haus_upper)], "hausdorff_upper_ci": f(self.haus_upper_ci),
            "measures": {str(k): f(v) for k, v in self.measures.items()}, "notes": list(self.notes),
        }


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class Audit:
    checks: list

    @property
    def red(self) -> bool:
        return any(not c.ok for c in self.checks)


def _le(a: float, b: float, slack: float) -> bool:
    if math.isinf(b):
        return True
    if math.isinf(a):
        return False
    return a <= b + slack


def ordering_check(rep: DimensionReport, sigmas: float = 3.0) -> Check:
    s = sigmas * (rep.mink_ci + rep.haus_upper_ci) / Z95
    ok = _le(rep.mink_lower, rep.mink_upper, s)
    if rep.haus_upper is not None:
        ok = ok and _le(rep.mink_upper, rep.haus_upper, s)
    return Check(f"ordering[{rep.model}/{rep.metric}]", ok,
                 f"{rep.mink_lower:.4g} <= {rep.mink_upper:.4g} <= {rep.haus_upper}")


def agree_check(name: str, a: float, a_ci: float, b: float, b_ci: float, sigmas: float = 3.0) -> Check:
    se = math.hypot(a_ci, b_ci) / Z95
    ok = abs(a - b) <= sigmas * se + TOL
    return Check(name, ok, f"{a:.5g} vs {b:.5g} (joint se {se:.3g})")


def subspace_measure_check(sub: MeasureEstimate, whole: MeasureEstimate, intensity: float,
                           rel: float = 0.05) -> Check:
    target = intensity * whole.value
    ok = sub.kind == whole.kind == "finite" and abs(sub.value - target) <= rel * target
    return Check("subspace-measure", ok, f"{sub.value:.5g} vs {intensity:g} * {whole.value:.5g}")


def cross_checks(reports: Sequence[DimensionReport], invariance: Sequence[tuple] = (),
                 measures: Sequence[tuple] = ()) -> Audit:
    """Ordering on every report, agreement for each ``(name, a, a_ci, b, b_ci)`` in ``invariance``,
    and the subspace identity for each ``(sub, whole, intensity)`` in ``measures``."""
    checks = [ordering_check(r) for r in reports]
    checks += [agree_check(*t) for t in invariance]
    checks += [subspace_measure_check(*t) for t in measures]
    return Audit(checks)
