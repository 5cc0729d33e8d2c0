"""Seeded samplers, uniform rooting, mass-transport checks, intensities and biasing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import stats

from unidim.errors import CapExceededError, DomainError, WindowTooSmallError
from unidim.space import TOL, RootedSample, ball

Z95 = 1.959963984540054


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for replicate ``index``; identical for identical inputs.

    Negative indices name auxiliary streams (``-1`` is the batch stream).
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed) % (1 << 64), int(index) % (1 << 64)]))


@dataclass
class RootedSampler:
    """A named generator of independent realizations.

    ``draw_fn(rng)`` returns one realization (usually a ``RootedSample`` or a
    ``TreeWindow``). ``batch_fn(rng, n)``, when present, returns ``n``
    realizations of a scalar statistic in one vectorized call.
    """

    name: str
    draw_fn: Callable[[np.random.Generator], Any]
    seed: int = 0
    params: dict = field(default_factory=dict)
    batch_fn: Callable[[np.random.Generator, int], Any] | None = None

    def rng(self, index: int) -> np.random.Generator:
        return replicate_rng(self.seed, index)

    def draw(self, index: int = 0):
        return self.draw_fn(self.rng(index))

    def draws(self, n: int, start: int = 0):
        for i in range(start, start + n):
            yield self.draw(i)

    def reseeded(self, seed: int) -> "RootedSampler":
        return RootedSampler(self.name, self.draw_fn, seed, dict(self.params), self.batch_fn)


@dataclass(frozen=True)
class IntensityEstimate:
    estimate: float
    ci: float
    n: int

    @property
    def se(self) -> float:
        return self.ci / Z95

    @property
    def interval(self) -> tuple[float, float]:
        return self.estimate - self.ci, self.estimate + self.ci

    def covers(self, value: float, sigmas: float = 3.0) -> bool:
        return abs(self.estimate - value) <= sigmas * self.se + TOL


def mean_ci(x) -> IntensityEstimate:
    """Sample mean with a 95% normal half-width."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n == 0:
        raise DomainError("no observations")
    sd = float(np.std(x, ddof=1)) if n > 1 else 0.0
    return IntensityEstimate(float(np.mean(x)), Z95 * sd / np.sqrt(n), n)


def proportion(hits) -> IntensityEstimate:
    """Indicator mean with a 95% half-width (Wilson-free normal band)."""
    h = np.asarray(hits, dtype=bool)
    n = len(h)
    if n == 0:
        raise DomainError("no observations")
    p = float(h.mean())
    return IntensityEstimate(p, Z95 * np.sqrt(p * (1 - p) / n), n)


def uniform_root(space: RootedSample, rng: np.random.Generator) -> RootedSample:
    if space.size == 0:
        raise DomainError("empty space")
    if not np.all(np.isinf(space.margin)):
        raise DomainError("uniform rooting needs a finite space with every point interior")
    return space.reroot(int(rng.integers(space.size)))


# -- transport functions --------------------------------------------------------


@dataclass(frozen=True)
class TransportFunction:
    """``g(sample, u, v) >= 0`` built from relabeling-invariant data.

    ``support`` bounds ``d(u, v)`` wherever ``g`` is nonzero and ``reach`` is the
    extra radius around ``u`` and ``v`` that ``g`` looks at.
    """

    name: str
    fn: Callable[[RootedSample, int, int], float]
    support: float
    reach: float = 0.0

    @property
    def radius(self) -> float:
        return self.support + self.reach

    def __call__(self, sample, u, v):
        return self.fn(sample, u, v)


def _nearest(sample: RootedSample, u: int, rho: float) -> np.ndarray:
    b = ball(sample, u, rho).points
    b = b[b != u]
    if b.size == 0:
        return b
    d = sample.distances_from(u, rho)[b]
    return b[np.abs(d - d.min()) <= TOL]


def _g_nearest(rho: float) -> TransportFunction:
    def fn(s, u, v):
        if u == v:
            return 0.0
        nn = _nearest(s, u, rho)
        return 1.0 / len(nn) if v in nn else 0.0
    return TransportFunction(f"nearest{rho:g}", fn, rho, rho)


def _g_degree(s, u, v):
    if s.dist(u, v) > 2 + TOL:
        return 0.0
    return float(len(ball(s, v, 1)))


def _g_up(s, u, v):
    # unit mass from each vertex to its parent; "depth" counts steps from the window top
    d = s.marks.get("depth")
    if d is None or u == v or s.edges is None:
        return 0.0
    return 1.0 if s._adjacency[u, v] > 0 and d[v] == d[u] - 1 else 0.0


def g_catalog() -> dict[str, TransportFunction]:
    return {
        "zero": TransportFunction("zero", lambda s, u, v: 0.0, 0.0),
        "self": TransportFunction("self", lambda s, u, v: float(u == v), 0.0),
        "near1": TransportFunction("near1", lambda s, u, v: float(s.dist(u, v) <= 1 + TOL), 1.0),
        "near2": TransportFunction("near2", lambda s, u, v: float(s.dist(u, v) <= 2 + TOL), 2.0),
        "dist2": TransportFunction("dist2", lambda s, u, v: s.dist(u, v) * (s.dist(u, v) <= 2 + TOL), 2.0),
        "nearest": _g_nearest(4.0),
        "degree": TransportFunction("degree", _g_degree, 2.0, 1.0),
        "up": TransportFunction("up", _g_up, 1.0, 0.0),
    }


@dataclass(frozen=True)
class MTPReport:
    name: str
    out_mass: float
    in_mass: float
    z: float
    threshold: float
    n: int

    @property
    def rejected(self) -> bool:
        return abs(self.z) > self.threshold

    @property
    def diff(self) -> float:
        return self.out_mass - self.in_mass


def transport_matrix(space: RootedSample, g: Callable) -> np.ndarray:
    n = space.size
    return np.array([[g(space, u, v) for v in range(n)] for u in range(n)], dtype=float)


def mtp_check_exact(space: RootedSample, g: Callable, atol: float = 1e-12) -> MTPReport:
    """Expected outgoing and incoming mass under the uniform root, by full double sum."""
    G = transport_matrix(space, g)
    if np.any(G < 0):
        raise DomainError("transport function must be nonnegative")
    out_m = float(G.sum(axis=1).mean())
    in_m = float(G.sum(axis=0).mean())
    scale = max(1.0, abs(out_m))
    ok = abs(out_m - in_m) <= atol * scale
    return MTPReport(getattr(g, "name", "g"), out_m, in_m, 0.0 if ok else np.inf, 0.0, space.size)


def root_masses(sample: RootedSample, g: TransportFunction) -> tuple[float, float]:
    """Outgoing and incoming mass at the root, truncated to the support ball."""
    o = sample.root
    if not sample.interior(o, g.radius):
        raise WindowTooSmallError(f"{g.name} needs radius {g.radius} around the root")
    nb = ball(sample, o, g.support).points if g.support > 0 else np.array([o])
    if o not in nb:
        nb = np.concatenate([[o], nb])
    out_m = sum(g(sample, o, int(v)) for v in nb)
    in_m = sum(g(sample, int(u), o) for u in nb)
    return float(out_m), float(in_m)


def mtp_check_statistical(sampler: RootedSampler, gs: Sequence[TransportFunction], n: int,
                          level: float = 0.999, start: int = 0, max_censored: float = 0.01) -> list[MTPReport]:
    """Paired z-test on outgoing minus incoming mass for each ``g``, Bonferroni across ``gs``.

    Draws whose root lacks an interior ball of the largest radius are dropped;
    more than ``max_censored`` of them raises ``WindowTooSmallError``.
    """
    outs = np.zeros((len(gs), n))
    ins = np.zeros((len(gs), n))
    keep = np.ones(n, dtype=bool)
    need = max(g.radius for g in gs)
    for i in range(n):
        s = sampler.draw(start + i)
        if hasattr(s, "to_sample"):
            s = s.to_sample()
        if not s.interior(s.root, need):
            keep[i] = False
            continue
        for j, g in enumerate(gs):
            outs[j, i], ins[j, i] = root_masses(s, g)
    if 1 - keep.mean() > max_censored:
        raise WindowTooSmallError(f"{1 - keep.mean():.1%} of roots lack a radius-{need:g} interior ball")
    outs, ins = outs[:, keep], ins[:, keep]
    m = int(keep.sum())
    thr = float(stats.norm.ppf(1 - (1 - level) / (2 * len(gs))))
    reports = []
    for j, g in enumerate(gs):
        d = outs[j] - ins[j]
        sd = float(np.std(d, ddof=1)) if m > 1 else 0.0
        if sd == 0.0:
            z = 0.0 if abs(d.mean()) <= TOL else np.inf
        else:
            z = float(d.mean() / (sd / np.sqrt(m)))
        reports.append(MTPReport(g.name, float(outs[j].mean()), float(ins[j].mean()), z, thr, m))
    return reports


def intensity(sampler: RootedSampler, membership: Callable[[Any], bool], n: int, start: int = 0) -> IntensityEstimate:
    """Monte-Carlo estimate of ``P(o in S)``."""
    return proportion([bool(membership(sampler.draw(start + i))) for i in range(n)])


def bias_sampler(sampler: RootedSampler, weight: Callable[[Any], float], cap: float,
                 max_tries: int = 1_000_000) -> RootedSampler:
    """Sampler for the law biased by ``weight``, by rejection with acceptance ``weight/cap``."""
    if not cap > 0:
        raise DomainError("cap must be positive")

    def draw(rng):
        for _ in range(max_tries):
            s = sampler.draw_fn(rng)
            w = float(weight(s))
            if w < 0:
                raise DomainError("negative bias weight")
            if w > cap * (1 + 1e-12):
                raise CapExceededError(f"weight {w} exceeds cap {cap}")
            if rng.random() * cap < w:
                return s
        raise DomainError("rejection sampler exhausted its tries")

    params = dict(sampler.params, bias_cap=cap)
    return RootedSampler(f"{sampler.name}|biased", draw, sampler.seed, params)


def finite_space_sampler(spaces: Sequence[RootedSample], probs: Sequence[float], seed: int = 0,
                         name: str = "finite-mixture") -> RootedSampler:
    """Pick a template by ``probs`` and root it uniformly."""
    p = np.asarray(probs, dtype=float)
    p = p / p.sum()

    def draw(rng):
        k = int(rng.choice(len(spaces), p=p))
        return uniform_root(spaces[k], rng)

    return RootedSampler(name, draw, seed, {"sizes": [s.size for s in spaces]})
