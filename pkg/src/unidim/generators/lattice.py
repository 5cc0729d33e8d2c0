"""Windows of scaled lattices and of Cayley graphs of Z^k."""

from __future__ import annotations

import itertools

import numpy as np

from unidim.errors import DomainError
from unidim.sampling import RootedSampler
from unidim.space import RootedSample

STANDARD = "standard"
HEXAGONAL = "hexagonal"


def lattice_points(k: int, half: int) -> np.ndarray:
    """Integer points of ``{-half..half}^k`` with the origin first."""
    axes = [np.arange(-half, half + 1)] * k
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
    zero = np.flatnonzero(np.all(pts == 0, axis=1))[0]
    order = np.r_[zero, np.delete(np.arange(len(pts)), zero)]
    return pts[order]


def generators_for(name: str, k: int) -> np.ndarray:
    if name == STANDARD:
        g = np.eye(k, dtype=np.int64)
    elif name == HEXAGONAL:
        if k != 2:
            raise DomainError("the hexagonal generating set lives in Z^2")
        g = np.array([[1, 0], [0, 1], [1, 1]])
    else:
        raise DomainError(f"unknown generating set {name!r}")
    return np.concatenate([g, -g])


def lattice_window(k: int, delta: float = 1.0, half: int = 10, metric: str = "linf",
                   generators: str | np.ndarray | None = None) -> RootedSample:
    """Window ``{-half..half}^k`` of ``δZ^k`` rooted at the origin.

    With ``generators`` set, the metric is the word metric of the Cayley graph
    and edges join points differing by a generator.
    """
    if k < 1:
        raise DomainError("k must be positive")
    if not delta > 0:
        raise DomainError("delta must be positive")
    if half < 0:
        raise DomainError("half-width must be nonnegative")
    pts = lattice_points(k, half)
    slack = half - np.abs(pts).max(axis=1)
    if generators is None:
        return RootedSample.from_coords(pts * float(delta), metric=metric, margin=slack * float(delta))
    g = generators_for(generators, k) if isinstance(generators, str) else np.asarray(generators, dtype=np.int64)
    index = {tuple(p): i for i, p in enumerate(pts.tolist())}
    edges = []
    for gen in g[: len(g) // 2] if isinstance(generators, str) else g:
        for i, p in enumerate(pts.tolist()):
            j = index.get(tuple(np.add(p, gen).tolist()))
            if j is not None:
                edges.append((i, j))
    gmax = int(np.abs(g).max())
    # a geodesic from x of length rho stays within rho*gmax of x in the sup norm
    margin = slack / gmax * float(delta)
    lengths = np.full(len(edges), float(delta))
    return RootedSample.from_edges(len(pts), edges, lengths=lengths, margin=margin, coords=pts * float(delta))


def gen_lattice(k: int, delta: float = 1.0, window: int = 10, metric: str = "linf",
                generators: str | None = None, seed: int = 0) -> RootedSampler:
    """Deterministic sampler: every draw is the same window rooted at 0."""
    sample = lattice_window(k, delta, window, metric, generators)
    return RootedSampler("lattice", lambda rng: sample, seed,
                         {"k": k, "delta": delta, "window": window, "metric": metric, "generators": generators})


def word_norm(v: np.ndarray, generators: str) -> np.ndarray:
    """Closed-form word length for the standard and hexagonal sets of Z^2."""
    v = np.atleast_2d(v)
    if generators == STANDARD:
        return np.abs(v).sum(axis=1)
    if generators == HEXAGONAL:
        a, b = v[:, 0], v[:, 1]
        return np.maximum.reduce([np.abs(a), np.abs(b), np.abs(a - b)])
    raise DomainError(f"unknown generating set {generators!r}")


def sublattice_cover_radius(n: int, generators: str, k: int = 2) -> float:
    """Covering radius of ``nZ^k`` in the word metric, by enumerating one cell."""
    cell = np.array(list(itertools.product(range(n), repeat=k)))
    # nearest centre may sit outside the cell corners for skewed generating sets
    shifts = np.array(list(itertools.product((-n, 0, n, 2 * n), repeat=k)))
    d = np.min([word_norm(cell - s, generators) for s in shifts], axis=0)
    return float(d.max())


def sublattice_multiplicity(n: int, radius: float, generators: str, k: int = 2) -> int:
    """Largest number of ``nZ^k`` points within word distance ``radius`` of one point."""
    cell = np.array(list(itertools.product(range(n), repeat=k)))
    reach = int(np.ceil(radius / n)) + 1
    shifts = np.array(list(itertools.product(range(-reach, reach + 2), repeat=k))) * n
    hits = np.zeros(len(cell), dtype=np.int64)
    for s in shifts:
        hits += word_norm(cell - s, generators) <= radius + 1e-9
    return int(hits.max())
