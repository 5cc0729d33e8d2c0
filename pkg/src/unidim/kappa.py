"""r-embeddings and the kappa distance between finite rooted samples."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from unidim.errors import DomainError, WindowTooSmallError
from unidim.space import TOL, RootedSample, ball

MAX_BALL = 20


@dataclass(frozen=True)
class EmbeddingWitness:
    mapping: dict[int, int]
    distortion: float
    r: float


def _ball_points(s: RootedSample, r: float) -> np.ndarray:
    b = ball(s, s.root, r) if r > 0 else None
    if b is None or len(b) == 0:
        return np.array([s.root])
    if not b.interior:
        raise WindowTooSmallError(f"ball of radius {r} around the root leaves the window")
    return b.points


def is_r_embeddable(a: RootedSample, b: RootedSample, r: float) -> EmbeddingWitness | None:
    """Search for an injective ``f`` on ``N_r(o_a)`` with ``f(o_a)=o_b`` and distortion <= 1/r."""
    if not r > 0:
        raise DomainError("r must be positive")
    eps = 1.0 / r + TOL
    xs = _ball_points(a, r)
    if len(xs) > MAX_BALL:
        raise DomainError(f"ball has {len(xs)} points; the search is capped at {MAX_BALL}")
    # images are confined to N_{r+1/r}(o_b)
    ys = _ball_points(b, r + 1.0 / r)
    xs = np.concatenate([[a.root], xs[xs != a.root]])
    ys = np.concatenate([[b.root], ys[ys != b.root]])
    da = a.pairwise(xs)
    db = b.pairwise(ys)
    nx, ny = len(xs), len(ys)
    if nx > ny:
        return None
    # compatibility with the root pair prunes every domain up front
    dom = np.abs(da[:, :1] - db[None, 0, :]) <= eps
    dom[0] = False
    dom[0, 0] = True
    dom[1:, 0] = False
    # most constrained first: by distance from the root, outermost last
    order = [0] + sorted(range(1, nx), key=lambda i: (dom[i].sum(), -da[0, i]))
    assign = np.full(nx, -1)
    used = np.zeros(ny, dtype=bool)
    assign[0] = 0
    used[0] = True

    def search(k: int, dom: np.ndarray) -> bool:
        if k == nx:
            return True
        i = order[k]
        for j in np.flatnonzero(dom[i] & ~used):
            assign[i] = j
            used[j] = True
            nd = dom & (np.abs(da[:, i:i + 1] - db[None, j, :]) <= eps)
            rest = order[k + 1:]
            if all((nd[t] & ~used).any() for t in rest) and search(k + 1, nd):
                return True
            used[j] = False
            assign[i] = -1
        return False

    if nx > 1 and not search(1, dom):
        return None
    img = db[np.ix_(assign, assign)]
    distortion = float(np.max(np.abs(da - img))) if nx > 1 else 0.0
    mapping = {int(xs[i]): int(ys[assign[i]]) for i in range(nx)}
    return EmbeddingWitness(mapping, distortion, float(r))


def is_r_similar(a: RootedSample, b: RootedSample, r: float) -> bool:
    return is_r_embeddable(a, b, r) is not None and is_r_embeddable(b, a, r) is not None


def kappa(a: RootedSample, b: RootedSample, tol: float = 1e-3, return_witness: bool = False):
    """``1 ∧ 1/r*`` with ``r*`` the supremum of radii at which the samples are mutually embeddable.

    Bisection runs on ``eps = 1/r`` over ``[tol, 1]``. The value is exactly 1 when
    the samples are not 1-similar, and ``tol`` when they are ``1/tol``-similar.
    """
    if not tol >= 1e-9:
        raise DomainError("tol must be at least 1e-9")
    if not is_r_similar(a, b, 1.0):
        return (1.0, None) if return_witness else 1.0
    hi, lo = 1.0, tol
    if is_r_similar(a, b, 1.0 / lo):
        hi = lo
    else:
        while hi - lo > tol:
            mid = 0.5 * (hi + lo)
            if is_r_similar(a, b, 1.0 / mid):
                hi = mid
            else:
                lo = mid
    if return_witness:
        return hi, is_r_embeddable(a, b, 1.0 / hi)
    return hi


def rooted_isometric(a: RootedSample, b: RootedSample) -> bool:
    """Exact rooted isometry between two finite samples."""
    if a.size != b.size:
        return False
    w = is_r_embeddable(a, b, _cover_radius(a))
    return w is not None and w.distortion <= TOL


def _cover_radius(s: RootedSample) -> float:
    d = s.distances_from(s.root)
    r = float(np.max(d[np.isfinite(d)])) if s.size > 1 else 1.0
    # a larger radius shrinks the allowed distortion towards zero
    return max(r, 1.0) * 1e6
