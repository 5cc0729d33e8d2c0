"""Canopy trees with three edge-length schemes, and generalized canopy trees."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from unidim.coverings import CoveringAssignment, CoveringRule
from unidim.errors import DomainError
from unidim.sampling import RootedSampler
from unidim.trees import TreeWindow

VARIANTS = ("graph", "geometric", "factorial")
MAX_WINDOW = 300_000
TAIL_WARN = 1e-6


def edge_length(variant: str, n: int, a: float = 2.0) -> float:
    """Length of an edge between levels ``n`` and ``n+1``."""
    if variant == "graph":
        return 1.0
    if variant == "geometric":
        if not a > 1:
            raise DomainError("geometric variant needs a > 1")
        return float(a) ** n
    if variant == "factorial":
        return float(math.factorial(n))
    raise DomainError(f"unknown canopy variant {variant!r}")


def level_offsets(variant: str, top: int, a: float = 2.0) -> np.ndarray:
    """``W[j]``: distance from a level-0 vertex up to its level-``j`` ancestor."""
    lens = [edge_length(variant, i, a) for i in range(top)]
    return np.concatenate([[0.0], np.cumsum(lens)])


def canopy_level_law(k: int, depth: int) -> tuple[np.ndarray, float]:
    """Root-level probabilities on ``0..depth`` renormalized, and the discarded tail mass."""
    if k < 2:
        raise DomainError("k must be at least 2")
    n = np.arange(depth + 1)
    p = (1 - 1 / k) * float(k) ** -n
    tail = float(k) ** -(depth + 1)
    return p / p.sum(), tail


def sample_levels(k: int, depth: int, rng: np.random.Generator, n: int) -> np.ndarray:
    """Levels from the law of ``canopy_level_law`` by inverting the truncated geometric CDF."""
    u = rng.random(n)
    # P(L <= m | L <= depth) = (1 - k^{-(m+1)}) / (1 - k^{-(depth+1)})
    top = 1.0 - float(k) ** -(depth + 1)
    m = np.ceil(np.log1p(-u * top) / -np.log(k) - 1.0 - 1e-12)
    return np.clip(m, 0, depth).astype(np.int64)


def canopy_survival(k: int, n) -> np.ndarray:
    """``P(h(o) >= n) = k^{-n}``: the height of a level-``m`` vertex is ``m``."""
    return float(k) ** -np.asarray(n, dtype=float)


def canopy_ball_size(k: int, level: int, r: float, variant: str = "graph", a: float = 2.0) -> int:
    """``|N_r(o)|`` for a root at ``level``, counted level by level (closed balls, ``N_0`` empty)."""
    if r < 0:
        raise DomainError("radius must be nonnegative")
    if r == 0:
        return 0
    total = 0
    j = level
    eps = 1e-9 * max(1.0, r)
    while True:
        W = level_offsets(variant, j + 1, a)
        up = W[j] - W[level]
        if up > r + eps:
            break
        budget = r - up
        total += 1
        # descendants of the level-j ancestor off the branch already counted
        for i in range(j - 1, -1, -1):
            if W[j] - W[i] > budget + eps:
                break
            branches = k if j == level else k - 1
            total += branches * k ** (j - 1 - i)
        j += 1
    return total


def canopy_window(k: int, level: int, up: int, variant: str = "graph", a: float = 2.0) -> TreeWindow:
    """All descendants of the root's ancestor ``up`` levels above, rooted at a level-``level`` vertex."""
    top = level + up
    size = sum(k ** j for j in range(top + 1))
    if size > MAX_WINDOW:
        raise DomainError(f"canopy window would have {size} vertices")
    parent = [-1]
    lev = [top]
    front = [0]
    for depth in range(1, top + 1):
        nxt = []
        for v in front:
            for _ in range(k):
                parent.append(v)
                lev.append(top - depth)
                nxt.append(len(parent) - 1)
        front = nxt
    parent = np.array(parent, dtype=np.int64)
    lev = np.array(lev, dtype=np.int64)
    root = int(np.flatnonzero(lev == level)[0])
    lengths = np.array([edge_length(variant, int(l), a) for l in lev])
    return TreeWindow(parent=parent, root=root, finite=False, lengths=lengths, level=lev)


def window_level_cap(k: int, up: int) -> int:
    """Highest root level whose window of ``up`` levels above fits in ``MAX_WINDOW`` vertices."""
    top = 0
    while sum(k ** j for j in range(top + 2)) <= MAX_WINDOW:
        top += 1
    if top < up:
        raise DomainError(f"no canopy window with {up} levels above the root fits for k = {k}")
    return top - up


def gen_canopy(k: int, variant: str = "graph", a: float = 2.0, depth: int = 30, up: int = 3,
               window_cap: int | None = None, seed: int = 0) -> RootedSampler:
    """Root level drawn with ``P(L=n) ∝ k^{-n}``; draws are tree windows around the root.

    Levels above ``window_cap`` (by default the largest that fits) are clipped
    for the explicit window only, a change of mass ``k^{-(cap+1)}``; the batch
    path returns root levels (which are the heights) without clipping.
    """
    window_cap = window_level_cap(k, up) if window_cap is None else window_cap
    p, tail = canopy_level_law(k, depth)
    if tail > TAIL_WARN:
        warnings.warn(f"canopy depth {depth} leaves tail mass {tail:.2e}", stacklevel=2)

    def draw(rng):
        L = int(rng.choice(len(p), p=p))
        return canopy_window(k, min(L, window_cap), up, variant, a)

    def batch(rng, n):
        return sample_levels(k, depth, rng, n)

    return RootedSampler("canopy", draw, seed,
                         {"k": k, "variant": variant, "a": a, "depth": depth, "tail_mass": tail,
                          "window_cap": window_cap, "clipped_mass": float(k) ** -(window_cap + 1)}, batch)


def canopy_level_cover(k: int, n: int, variant: str = "geometric", a: float = 2.0,
                       depth: int = 60) -> CoveringRule:
    """Balls of radius ``W[n]`` at every vertex of level at least ``n``.

    Each vertex below level ``n`` lies within ``W[n]`` of its level-``n``
    ancestor. For the geometric variant with ``a >= 2`` the balls are disjoint.
    """
    rad = float(level_offsets(variant, n, a)[n])
    if rad <= 0:
        raise DomainError("n must be positive")
    K = 1 if (variant == "geometric" and a >= 2) else None

    def assign(sample, rng):
        lev = sample.marks["level"][:, 0] if sample.marks["level"].ndim == 2 else sample.marks["level"]
        return CoveringAssignment(np.where(lev >= n, rad, 0.0), rad, name)

    def root_radius(tree, rng):
        return rad if int(tree.level[tree.root]) >= n else 0.0

    def batch(rng, m):
        return np.where(sample_levels(k, depth, rng, m) >= n, rad, 0.0)

    name = f"canopy-levels[{variant},n={n}]"
    return CoveringRule(name, rad, rad, K, assign, root_radius, batch, float(k) ** -n,
                        {"k": k, "n": n, "variant": variant, "a": a})


# -- generalized canopy ----------------------------------------------------------------


@dataclass(frozen=True)
class LevelLaw:
    """Root-level law ``p_n`` with survival ``q_n = sum_{i >= n} p_i``."""

    name: str
    q: Callable[[np.ndarray], np.ndarray]
    nmax: int

    def p(self, n) -> np.ndarray:
        n = np.asarray(n)
        return self.q(n) - self.q(n + 1)

    @property
    def tail(self) -> float:
        """Mass at or above ``nmax``, which sampling lumps into ``nmax``."""
        return float(self.q(np.array([self.nmax]))[0])

    @cached_property
    def _cdf(self) -> np.ndarray:
        return np.cumsum(self.p(np.arange(self.nmax)))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Inverse-CDF draws; exact below ``nmax`` with the tail folded into ``nmax``."""
        u = rng.random(size)
        return np.searchsorted(self._cdf, u, side="right")

    def nonincreasing(self) -> bool:
        pr = self.p(np.arange(self.nmax))
        return bool(np.all(np.diff(pr) <= 1e-15))


def geometric_law(k: float, nmax: int = 200) -> LevelLaw:
    return LevelLaw(f"geometric(1/{k:g})", lambda n: float(k) ** -np.asarray(n, dtype=float), nmax)


def designed_knots(alpha: float, beta: float, gamma: float, nmax: int, first: int = 4) -> list[int]:
    """Knots ``n_i`` (powers of two) of the piecewise-linear survival ``q``.

    ``q(n_i) = n_i^{-beta}``; the chord to the next knot must rise above
    ``x^{-alpha}`` somewhere in between and be flatter than ``-n_{i+1}^{-gamma}``.
    """
    if not 0 < alpha <= beta <= gamma:
        raise DomainError("need 0 < alpha <= beta <= gamma")
    knots = [0, first]
    while knots[-1] < nmax:
        a = knots[-1]
        b = 2 * a
        while True:
            x = np.arange(a + 1, b, dtype=float)
            qa, qb = a ** -beta, b ** -beta
            chord = qa + (x - a) * (qb - qa) / (b - a)
            slope = (qa - qb) / (b - a)
            if x.size and np.any(chord >= x ** -alpha) and slope <= b ** -gamma:
                break
            b *= 2
        knots.append(b)
    return knots


def designed_law(alpha: float, beta: float, gamma: float, nmax: int = 1 << 16) -> LevelLaw:
    knots = np.array(designed_knots(alpha, beta, gamma, nmax), dtype=float)
    vals = np.r_[1.0, knots[1:] ** -beta]

    def q(n):
        n = np.asarray(n, dtype=float)
        return np.interp(n, knots, vals, right=0.0)

    law = LevelLaw(f"designed({alpha:g},{beta:g},{gamma:g})", q, int(knots[-1]))
    return law


def generalized_canopy_window(law: LevelLaw, m: int, rng: np.random.Generator, width: float = 50.0,
                              below: int = 2) -> TreeWindow:
    """Levels ``m - below .. m + 1`` around a root at ``(0, m)``.

    Each point links to the closest point of the next level, ties to the right.
    The half-width is stretched to hold the root's children and parent, so the
    root's radius-1 ball is always complete. A vertex is complete when every
    point that could link to it lies in the window. Above ``law.nmax`` the
    level law is empty, so top-level points have no parent.
    """
    if not 0 <= m <= law.nmax:
        raise DomainError("root level outside the support of the law")
    lo, hi = max(0, m - below), min(m + 1, law.nmax)
    pr = law.p(np.arange(lo, hi + 1))
    if np.any(pr <= 0):
        raise DomainError("level probabilities must be positive")
    w = max(width, 0.5 / pr[m - lo], 0.5 / pr[-1]) * (1 + 1e-9)
    xs, ys = [], []
    for i, n in enumerate(range(lo, hi + 1)):
        s = 1.0 / pr[i]
        off = 0.0 if n == m else rng.random() * s
        x = off + s * np.arange(math.ceil((-w - off) / s), math.floor((w - off) / s) + 1)
        xs.append(x)
        ys.append(np.full(len(x), n))
    ids = np.cumsum([0] + [len(x) for x in xs])
    parent = np.full(ids[-1], -1, dtype=np.int64)
    complete = np.zeros(ids[-1], dtype=bool)
    for i, n in enumerate(range(lo, hi + 1)):
        x = xs[i]
        if n < hi and len(xs[i + 1]):
            nx = xs[i + 1]
            j = np.searchsorted(nx, x, side="left")
            left = np.clip(j - 1, 0, len(nx) - 1)
            right = np.clip(j, 0, len(nx) - 1)
            pick = np.where(np.abs(nx[right] - x) <= np.abs(x - nx[left]), right, left)
            ok = np.abs(x - nx[pick]) <= 0.5 / pr[i + 1] + 1e-9
            parent[ids[i]:ids[i + 1]] = np.where(ok, ids[i + 1] + pick, -1)
        # children come from the level below within half a spacing
        if n == 0:
            complete[ids[i]:ids[i + 1]] = True
        elif n > lo:
            complete[ids[i]:ids[i + 1]] = np.abs(x) + 0.5 / pr[i] <= w
    root = int(ids[m - lo] + np.argmin(np.abs(xs[m - lo])))
    level = np.concatenate(ys)
    coords = np.column_stack([np.concatenate(xs), level])
    return TreeWindow(parent=parent, root=root, finite=False, complete=complete, level=level, coords=coords)


def gen_generalized_canopy(law: LevelLaw, width: float = 50.0, seed: int = 0) -> RootedSampler:
    """Root level drawn from ``law``; draws are windows around the root, the batch path returns heights."""

    def draw(rng):
        return generalized_canopy_window(law, int(law.sample(rng, 1)[0]), rng, width)

    def batch(rng, n):
        return law.sample(rng, n)

    return RootedSampler("generalized-canopy", draw, seed,
                         {"law": law.name, "width": width, "tail_mass": law.tail}, batch)


def canopy_cone_selected(level, n: int) -> np.ndarray:
    """Whether a vertex at ``level`` is selected by the cone covering of height ``n``.

    All vertices of one level of a canopy tree have isomorphic descendant
    trees, so the residual heights depend on the level only:
    ``rho(0) = 0`` and ``rho(j) = 0`` if ``rho(j-1) == n`` else ``rho(j-1) + 1``.
    That is ``rho(j) = j mod (n+1)``.
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    return np.asarray(level) % (n + 1) == n
