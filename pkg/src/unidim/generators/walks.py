"""Point processes on the line: random-walk images, random-walk zeros and subdivisions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from unidim.errors import CapExceededError, DomainError
from unidim.sampling import RootedSampler
from unidim.space import RootedSample

JUMPS = ("pareto", "deterministic", "table")


@dataclass(frozen=True)
class JumpDistribution:
    """Law of a positive jump. ``pareto(beta)`` has ``P(S > x) = x^{-beta}`` for ``x >= 1``."""

    kind: str
    param: float = 1.0
    values: tuple = field(default_factory=tuple)
    probs: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in JUMPS:
            raise DomainError(f"unknown jump law {self.kind!r}")
        if self.kind in ("pareto", "deterministic") and not self.param > 0:
            raise DomainError("jump parameter must be positive")
        if self.kind == "table":
            v, p = np.asarray(self.values, float), np.asarray(self.probs, float)
            if v.shape != p.shape or v.size == 0 or np.any(v <= 0) or np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
                raise DomainError("table needs positive values with matching probabilities")

    @property
    def beta(self) -> float:
        """Tail exponent of ``P(S > r)``; infinite for bounded laws."""
        return float(self.param) if self.kind == "pareto" else math.inf

    @property
    def upper(self) -> float:
        if self.kind == "pareto":
            return math.inf
        if self.kind == "deterministic":
            return float(self.param)
        return float(max(self.values))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "pareto":
            # 1 - U avoids a zero base
            return (1.0 - rng.random(size)) ** (-1.0 / self.param)
        if self.kind == "deterministic":
            return np.full(size, float(self.param))
        return rng.choice(np.asarray(self.values, float), size=size, p=np.asarray(self.probs, float))

    def survival(self, x) -> np.ndarray:
        """``P(S > x)``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "pareto":
            return np.where(x < 1, 1.0, np.maximum(x, 1.0) ** -self.param)
        if self.kind == "deterministic":
            return (x < self.param).astype(float)
        v, p = np.asarray(self.values, float), np.asarray(self.probs, float)
        return (p[None, :] * (v[None, :] > x.reshape(-1, 1))).sum(axis=1).reshape(x.shape)


def line_sample(points: np.ndarray, root_value: float, lo: float, hi: float, marks=None) -> RootedSample:
    """Rooted sample on the line; margins are distances to the known range ``[lo, hi]``."""
    pts = np.asarray(points, dtype=float)
    order = np.argsort(pts, kind="stable")
    pts = pts[order]
    root = int(np.flatnonzero(np.abs(pts - root_value) < 1e-12)[0])
    margin = np.minimum(pts - lo, hi - pts)
    m = {k: np.asarray(v)[order] for k, v in (marks or {}).items()}
    return RootedSample.from_coords(pts - root_value, root=root, metric="euclidean", margin=margin, marks=m)


def walk_window(jumps: JumpDistribution, rng: np.random.Generator, steps: int) -> RootedSample:
    """``{S_n : |n| <= steps}`` for a two-sided walk with ``S_0 = 0`` and positive jumps."""
    if jumps.kind == "table" and np.any(np.asarray(jumps.values) <= 0) or steps < 1:
        raise DomainError("image windows need positive jumps and steps >= 1")
    right = np.cumsum(jumps.sample(rng, steps))
    left = -np.cumsum(jumps.sample(rng, steps))
    pts = np.concatenate([left[::-1], [0.0], right])
    return line_sample(pts, 0.0, pts[0], pts[-1])


def gen_srw_image(jumps: JumpDistribution, steps: int = 200, seed: int = 0) -> RootedSampler:
    """Image of a two-sided walk with i.i.d. positive jumps; the batch path returns right gaps ``S_1``."""
    return RootedSampler("srw-image", lambda rng: walk_window(jumps, rng, steps), seed,
                         {"jumps": jumps.kind, "param": jumps.param, "steps": steps},
                         lambda rng, n: jumps.sample(rng, n))


# -- zeros of the simple random walk ---------------------------------------------------


def return_time_survival(t) -> np.ndarray:
    """``P(T > t)`` for the first return time of the simple walk: ``C(2k,k)/4^k`` with ``k = floor(t/2)``."""
    k = np.floor(np.asarray(t, dtype=float) / 2)
    return np.exp(gammaln(2 * k + 1) - 2 * gammaln(k + 1) - 2 * k * np.log(2))


def return_times(rng: np.random.Generator, n: int, cap: int) -> np.ndarray:
    """First return times of ``n`` simple walks; ``cap + 1`` marks walks still away at ``cap``."""
    t = np.full(n, cap + 1, dtype=np.int64)
    pos = np.where(rng.random(n) < 0.5, -1, 1).astype(np.int64)
    idx = np.arange(n)
    step = 1
    while idx.size and step < cap:
        step += 1
        pos += np.where(rng.random(idx.size) < 0.5, -1, 1)
        back = pos == 0
        t[idx[back]] = step
        idx = idx[~back]
        pos = pos[~back]
    return t


def zeros_window(rng: np.random.Generator, steps: int, min_zeros: int = 3, tries: int = 8) -> RootedSample:
    """Zero set of a two-sided ``±1`` walk through 0, over times ``[-steps, steps]``."""
    for _ in range(tries):
        right = np.cumsum(np.where(rng.random(steps) < 0.5, -1, 1))
        left = np.cumsum(np.where(rng.random(steps) < 0.5, -1, 1))
        z = np.concatenate([-(np.flatnonzero(left == 0)[::-1] + 1), [0], np.flatnonzero(right == 0) + 1])
        if np.sum(z > 0) >= min_zeros and np.sum(z < 0) >= min_zeros:
            return line_sample(z.astype(float), 0.0, -steps, steps)
        steps *= 2
    raise DomainError("walk did not return often enough; raise steps")


def gen_srw_zeros(steps: int = 4096, cap: int = 1 << 16, seed: int = 0) -> RootedSampler:
    """Draws are zero-set windows; the batch path returns right gaps censored above ``cap``."""
    return RootedSampler("srw-zeros", lambda rng: zeros_window(rng, steps), seed,
                         {"steps": steps, "cap": cap}, lambda rng, n: return_times(rng, n, cap))


# -- subdivision -----------------------------------------------------------------------


def pieces(s: np.ndarray, alpha: float) -> np.ndarray:
    """``ceil(s^alpha)``: the number of equal parts a gap of length ``s`` is split into."""
    return np.maximum(np.ceil(np.asarray(s, dtype=float) ** alpha - 1e-12), 1).astype(np.int64)


def biased_gaps(jumps: JumpDistribution, alpha: float, rng: np.random.Generator, n: int,
                cap: float | None = None, max_rounds: int = 10_000) -> np.ndarray:
    """``n`` draws of ``S`` from the law biased by ``ceil(S^alpha)``.

    Pareto laws use a two-stage exact scheme: draw from the law biased by
    ``S^alpha + 1`` (a mixture of two Pareto laws), then accept with
    ``ceil(S^alpha)/(S^alpha + 1)``, which lies in ``[1/2, 1]``. Other laws use
    plain rejection against ``cap``, which must bound ``ceil(S^alpha)``.
    """
    out = np.empty(0)
    for _ in range(max_rounds):
        m = 2 * (n - out.size) + 16
        if jumps.kind == "pareto":
            b = jumps.param
            if not alpha < b:
                raise DomainError("need alpha < beta for a finite bias mean")
            w_heavy = b / (b - alpha)
            heavy = rng.random(m) < w_heavy / (w_heavy + 1)
            expo = np.where(heavy, b - alpha, b)
            s = (1.0 - rng.random(m)) ** (-1.0 / expo)
            accept = rng.random(m) * (s ** alpha + 1) < pieces(s, alpha)
        else:
            if cap is None:
                raise DomainError("rejection biasing needs a cap")
            s = jumps.sample(rng, m)
            w = pieces(s, alpha)
            if np.any(w > cap):
                raise CapExceededError(f"bias weight {w.max()} exceeds cap {cap}")
            accept = rng.random(m) * cap < w
        out = np.concatenate([out, s[accept]])
        if out.size >= n:
            return out[:n]
    raise DomainError("biased sampler exhausted its rounds")


def subdivided_gaps(jumps: JumpDistribution, alpha: float, rng: np.random.Generator, n: int,
                    cap: float | None = None) -> np.ndarray:
    """Right gap of the subdivided process at its root: ``S/ceil(S^alpha)`` with ``S`` biased."""
    s = biased_gaps(jumps, alpha, rng, n, cap)
    return s / pieces(s, alpha)


def subdivision_window(jumps: JumpDistribution, alpha: float, rng: np.random.Generator, steps: int,
                       cap: float | None = None) -> RootedSample:
    """Window of the subdivided process rooted uniformly in the biased gap ``[0, S_1)``.

    Mark ``original`` flags the points of the base process.
    """
    s1 = biased_gaps(jumps, alpha, rng, 1, cap)[0]
    gaps = np.concatenate([jumps.sample(rng, steps), [s1], jumps.sample(rng, steps)])
    base = np.concatenate([[0.0], np.cumsum(gaps)])
    base -= base[steps]
    pts, orig = [], []
    for a, g in zip(base[:-1], gaps):
        c = int(pieces(g, alpha))
        pts.append(a + g * np.arange(c) / c)
        orig.append(np.arange(c) == 0)
    pts.append([base[-1]])
    orig.append([True])
    pts = np.concatenate(pts)
    orig = np.concatenate(orig)
    c1 = int(pieces(s1, alpha))
    shift = s1 * int(rng.integers(c1)) / c1
    return line_sample(pts, shift, pts[0], pts[-1], {"original": orig.astype(float)})


def gen_subdivision(jumps: JumpDistribution, alpha: float, steps: int = 200, cap: float | None = None,
                    seed: int = 0) -> RootedSampler:
    if not 0 <= alpha < 1:
        raise DomainError("alpha must lie in [0, 1)")
    return RootedSampler("subdivision", lambda rng: subdivision_window(jumps, alpha, rng, steps, cap), seed,
                         {"jumps": jumps.kind, "beta": jumps.beta, "alpha": alpha, "steps": steps, "cap": cap},
                         lambda rng, n: subdivided_gaps(jumps, alpha, rng, n, cap))
