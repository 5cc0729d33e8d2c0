"""Heights of the root in one-ended trees whose root descendants form a critical Galton-Watson tree."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from unidim.errors import DomainError
from unidim.sampling import RootedSampler
from unidim.trees import TreeWindow

KINDS = ("deterministic", "geometric", "poisson", "table")


@dataclass(frozen=True)
class OffspringDistribution:
    """Offspring law. ``geometric(p)`` has ``P(j) = p (1-p)^j`` on ``j >= 0``."""

    kind: str
    param: float = 1.0
    probs: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown offspring law {self.kind!r}")
        if self.kind == "geometric" and not 0 < self.param <= 1:
            raise DomainError("geometric parameter must lie in (0, 1]")
        if self.kind == "poisson" and not self.param >= 0:
            raise DomainError("Poisson mean must be nonnegative")
        if self.kind == "table":
            p = np.asarray(self.probs, dtype=float)
            if p.ndim != 1 or p.size == 0 or np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
                raise DomainError("table must be a probability vector")

    @property
    def mean(self) -> float:
        if self.kind == "deterministic":
            return float(self.param)
        if self.kind == "geometric":
            return (1 - self.param) / self.param
        if self.kind == "poisson":
            return float(self.param)
        p = np.asarray(self.probs)
        return float(np.dot(np.arange(len(p)), p))

    @property
    def variance(self) -> float:
        if self.kind == "deterministic":
            return 0.0
        if self.kind == "geometric":
            return (1 - self.param) / self.param ** 2
        if self.kind == "poisson":
            return float(self.param)
        p = np.asarray(self.probs)
        j = np.arange(len(p))
        return float(np.dot(j * j, p) - self.mean ** 2)

    @property
    def p0(self) -> float:
        if self.kind == "deterministic":
            return float(self.param == 0)
        if self.kind == "geometric":
            return float(self.param)
        if self.kind == "poisson":
            return float(np.exp(-self.param))
        return float(self.probs[0])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "deterministic":
            return np.full(size, int(self.param), dtype=np.int64)
        if self.kind == "geometric":
            return rng.geometric(self.param, size) - 1
        if self.kind == "poisson":
            return rng.poisson(self.param, size)
        return rng.choice(len(self.probs), size=size, p=np.asarray(self.probs))

    def size_biased(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draws from ``j p_j / mean``: the offspring count of an ancestor on the spine."""
        if self.kind == "deterministic":
            return np.full(size, int(self.param), dtype=np.int64)
        if self.kind == "geometric":
            return 1 + rng.negative_binomial(2, self.param, size)
        if self.kind == "poisson":
            return 1 + rng.poisson(self.param, size)
        p = np.asarray(self.probs, dtype=float) * np.arange(len(self.probs))
        return rng.choice(len(p), size=size, p=p / p.sum())

    def sum_of(self, rng: np.random.Generator, counts: np.ndarray) -> np.ndarray:
        """Total offspring of ``counts[i]`` independent individuals, for each ``i``."""
        counts = np.asarray(counts, dtype=np.int64)
        if self.kind == "deterministic":
            return counts * int(self.param)
        if self.kind == "geometric":
            # a sum of c geometric laws counting failures is negative binomial(c, p)
            out = np.zeros(len(counts), dtype=np.int64)
            pos = counts > 0
            out[pos] = rng.negative_binomial(counts[pos], self.param)
            return out
        if self.kind == "poisson":
            return rng.poisson(self.param * counts)
        p = np.asarray(self.probs)
        j = np.arange(len(p))
        return np.array([int(np.dot(j, rng.multinomial(c, p))) for c in counts], dtype=np.int64)


def check_critical(law: OffspringDistribution) -> None:
    if abs(law.mean - 1) > 1e-9:
        raise DomainError(f"offspring mean {law.mean:g} is not 1")
    if law.variance == 0:
        raise DomainError("the trivial law with one child each is excluded")


def gw_heights(law: OffspringDistribution, rng: np.random.Generator, n: int, depth: int) -> np.ndarray:
    """Extinction generation minus one for ``n`` trees; ``depth`` marks trees alive at ``depth``.

    A value ``h`` means generation ``h`` is the last nonempty one, so
    ``P(h >= j) = P(Z_j > 0)``. Every value is certain up to ``depth``.
    """
    z = np.ones(n, dtype=np.int64)
    h = np.full(n, depth, dtype=np.int64)
    alive = np.arange(n)
    for gen in range(1, depth + 1):
        z = law.sum_of(rng, z)
        dead = z == 0
        h[alive[dead]] = gen - 1
        alive = alive[~dead]
        z = z[~dead]
        if alive.size == 0:
            break
    return h


def gw_tree(law: OffspringDistribution, rng: np.random.Generator, depth: int) -> TreeWindow:
    """Descendant tree of the root, cut at ``depth``; the root's own parent lies outside."""
    parent = [-1]
    level = [0]
    front = [0]
    complete = []
    for gen in range(1, depth + 1):
        kids = law.sample(rng, len(front))
        nxt = []
        for v, c in zip(front, kids):
            for _ in range(int(c)):
                parent.append(v)
                level.append(gen)
                nxt.append(len(parent) - 1)
        front = nxt
        if not front:
            break
    n = len(parent)
    complete = np.ones(n, dtype=bool)
    complete[np.array(level) == depth] = False
    return TreeWindow(parent=np.array(parent), root=0, finite=False, complete=complete,
                      level=np.array(level))


def _grow(law: OffspringDistribution, rng, parent: list, level: list, front: list, gens: int) -> None:
    for _ in range(gens):
        kids = law.sample(rng, len(front))
        nxt = []
        for v, c in zip(front, kids):
            for _ in range(int(c)):
                parent.append(v)
                level.append(level[v] - 1)
                nxt.append(len(parent) - 1)
        front = nxt
        if not front:
            return


def egw_window(law: OffspringDistribution, rng: np.random.Generator, up: int = 4, depth: int = 8) -> TreeWindow:
    """Eternal Galton-Watson tree around the root: ``up`` spine ancestors, everything down to ``depth``.

    Spine ancestors have size-biased offspring, one child (in uniform position)
    continuing the spine; every other vertex has offspring from ``law``.
    ``level`` is the generation relative to the root, and vertices on the
    bottom level are incomplete.
    """
    if up < 1 or depth < 1:
        raise DomainError("up and depth must be positive")
    parent, level = [-1], [0]
    _grow(law, rng, parent, level, [0], depth)
    below = 0
    for j in range(1, up + 1):
        a = len(parent)
        parent.append(-1)
        level.append(j)
        parent[below] = a
        sibs = int(law.size_biased(rng, 1)[0]) - 1
        start = len(parent)
        for _ in range(sibs):
            parent.append(a)
            level.append(j - 1)
        _grow(law, rng, parent, level, list(range(start, len(parent))), depth + j - 1)
        below = a
    level = np.array(level)
    complete = level > -depth
    return TreeWindow(parent=np.array(parent), root=0, finite=False, complete=complete, level=level)


def gen_egw(law: OffspringDistribution, depth: int = 4096, seed: int = 0) -> RootedSampler:
    """Draws are windows around the root; the batch path returns root heights."""
    check_critical(law)

    def draw(rng):
        return egw_window(law, rng)

    def batch(rng, n):
        return gw_heights(law, rng, n, depth)

    return RootedSampler("egw", draw, seed, {"offspring": law.kind, "param": law.param, "depth": depth}, batch)
