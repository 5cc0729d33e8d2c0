"""The drainage network on the even lattice, as explicit windows and as a lazy height sampler."""

from __future__ import annotations

import numpy as np

from unidim.errors import DomainError
from unidim.sampling import RootedSampler
from unidim.trees import TreeWindow

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLD = np.uint64(0x9E3779B97F4A7C15)


def _mix(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer."""
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def site_steps(key: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Step ``±1`` of each site, a fixed function of ``(key, x, y)``.

    Windows drawn with the same key agree on their overlap, so nested windows
    are coupled.
    """
    with np.errstate(over="ignore"):
        k = np.uint64(key % (1 << 63))
        xx = np.asarray(x, dtype=np.int64).astype(np.uint64)
        yy = np.asarray(y, dtype=np.int64).astype(np.uint64)
        z = _mix(_mix(k * _GOLD ^ xx) + yy * _GOLD)
    return np.where(z >> np.uint64(63), 1, -1).astype(np.int64)


def drainage_window(key: int, half: int, below: int, above: int) -> TreeWindow:
    """Even-lattice points with ``|x| <= half`` and ``-below <= y <= above``, root at the origin.

    The parent of ``(x, y)`` is ``(x + step, y - 1)``; it is absent when it
    leaves the box. Points on the top row or next to the sides may miss children.
    """
    if min(half, below, above) < 1:
        raise DomainError("window extents must be positive")
    xs, ys = [], []
    for y in range(-below, above + 1):
        x = np.arange(-half, half + 1)
        x = x[(x + y) % 2 == 0]
        xs.append(x)
        ys.append(np.full(len(x), y))
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    index = {(a, b): i for i, (a, b) in enumerate(zip(x.tolist(), y.tolist()))}
    step = site_steps(key, x, y)
    parent = np.array([index.get((a + s, b - 1), -1) for a, b, s in zip(x.tolist(), y.tolist(), step.tolist())],
                      dtype=np.int64)
    complete = (y < above) & (np.abs(x) < half)
    root = index[(0, 0)]
    return TreeWindow(parent=parent, root=root, finite=False, complete=complete, level=y,
                      coords=np.column_stack([x, y]).astype(float))


def lazy_heights(rng: np.random.Generator, n: int, nmax: int) -> np.ndarray:
    """Root heights from the width of the descendant interval, capped at ``nmax``.

    Descendants of the root at each level form an interval of the even lattice.
    Its left end moves out with probability 1/2 (the outer neighbour drains in)
    and in otherwise, independently of the right end; the set dies when the
    two ends cross. The width in lattice steps is a lazy walk with increments
    -1, 0, +1 of probabilities 1/4, 1/2, 1/4 started at 0, and ``h >= j`` holds
    exactly when it stays nonnegative for ``j`` steps.
    """
    h = np.full(n, nmax, dtype=np.int64)
    w = np.zeros(n, dtype=np.int64)
    idx = np.arange(n)
    for level in range(1, nmax + 1):
        u = rng.integers(0, 4, size=idx.size)
        w += (u == 0).astype(np.int64) - (u == 3).astype(np.int64)
        dead = w < 0
        h[idx[dead]] = level - 1
        idx = idx[~dead]
        w = w[~dead]
        if idx.size == 0:
            break
    return h


def gen_drainage(half: int = 12, below: int = 12, above: int = 12, nmax: int = 4000, seed: int = 0) -> RootedSampler:
    """Draws are tree windows keyed by the replicate stream; the batch path returns root heights."""

    def draw(rng):
        return drainage_window(int(rng.integers(1 << 62)), half, below, above)

    return RootedSampler("drainage", draw, seed, {"half": half, "below": below, "above": above, "nmax": nmax},
                         lambda rng, n: lazy_heights(rng, n, nmax))
