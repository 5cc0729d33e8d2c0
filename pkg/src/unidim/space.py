"""Finite realizations of rooted discrete metric spaces.

A ``RootedSample`` holds a finite window of a (possibly infinite) discrete
space. Points are dense integer ids ``0..n-1``. The metric is backed either
by coordinates (euclidean, l1 or linf norm) or by a weighted edge list
(shortest-path distance). Each point carries an interior margin: balls of
radius up to the margin around that point are known to be complete.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from unidim.errors import DomainError, WindowTooSmallError

TOL = 1e-9
COORD_METRICS = ("euclidean", "l1", "linf")
METRICS = COORD_METRICS + ("graph",)
_P = {"euclidean": 2.0, "l1": 1.0, "linf": np.inf}
_CDIST = {"euclidean": "euclidean", "l1": "cityblock", "linf": "chebyshev"}


@dataclass(frozen=True)
class Window:
    """Extent of a generated window.

    ``kind`` is one of ``box`` (one half-width per axis), ``radius`` (graph
    radius around the root) or ``depth`` (generation depth).
    """

    kind: str
    extent: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ("box", "radius", "depth"):
            raise DomainError(f"unknown window kind {self.kind!r}")
        if len(self.extent) == 0 or min(self.extent) <= 0:
            raise DomainError("window extent must be positive")

    def interior(self, margin: float) -> "Window":
        ext = tuple(e - margin for e in self.extent)
        if min(ext) <= 0:
            raise WindowTooSmallError("interior sub-window is empty")
        return Window(self.kind, ext)


@dataclass(frozen=True)
class Ball:
    """Result of a ball query; ``interior`` is False when the ball may be clipped."""

    center: int
    radius: float
    points: np.ndarray
    interior: bool

    def __len__(self):
        return len(self.points)

    def __contains__(self, v):
        return bool(np.any(self.points == v))

    def as_set(self) -> set[int]:
        return set(int(p) for p in self.points)


@dataclass(frozen=True, eq=False)
class RootedSample:
    size: int
    root: int
    coords: np.ndarray | None = None
    edges: np.ndarray | None = None
    lengths: np.ndarray | None = None
    metric: str = "euclidean"
    margin: np.ndarray | None = None
    marks: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.size < 1:
            raise DomainError("a sample needs at least one point")
        if not 0 <= self.root < self.size:
            raise DomainError(f"root {self.root} is not a point id")
        if self.metric not in METRICS:
            raise DomainError(f"unknown metric {self.metric!r}")
        if self.coords is not None:
            c = np.asarray(self.coords, dtype=float)
            if c.ndim == 1:
                c = c[:, None]
            if c.shape[0] != self.size or not np.all(np.isfinite(c)):
                raise DomainError("coords must be finite with one row per point")
            object.__setattr__(self, "coords", c)
        if self.edges is not None:
            e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
            if e.size and (e.min() < 0 or e.max() >= self.size):
                raise DomainError("edge endpoint is not a point id")
            ln = np.ones(len(e)) if self.lengths is None else np.asarray(self.lengths, dtype=float)
            if ln.shape != (len(e),):
                raise DomainError("one length per edge required")
            if np.any(~(ln > 0)):
                raise DomainError("edge lengths must be positive")
            object.__setattr__(self, "edges", e)
            object.__setattr__(self, "lengths", ln)
        if self.metric == "graph" and self.edges is None:
            raise DomainError("graph metric needs an edge list")
        if self.metric != "graph" and self.coords is None:
            raise DomainError(f"{self.metric} metric needs coordinates")
        m = np.full(self.size, np.inf) if self.margin is None else np.asarray(self.margin, dtype=float)
        if m.shape != (self.size,):
            raise DomainError("one margin per point required")
        object.__setattr__(self, "margin", m)
        if self.metric != "graph" and self.size > 1:
            if self._kdtree.query_pairs(TOL, p=_P[self.metric]):
                raise DomainError("distinct points at zero distance (pseudo-metric)")

    # -- constructors ----------------------------------------------------

    @classmethod
    def from_coords(cls, coords, root: int = 0, metric: str = "euclidean", margin=None, marks=None,
                    edges=None, lengths=None):
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        return cls(size=coords.shape[0], root=root, coords=coords, metric=metric, margin=margin,
                   marks=dict(marks or {}), edges=edges, lengths=lengths)

    @classmethod
    def from_edges(cls, size: int, edges, root: int = 0, lengths=None, margin=None, coords=None, marks=None):
        return cls(size=size, root=root, edges=np.asarray(edges, dtype=np.int64).reshape(-1, 2),
                   lengths=lengths, metric="graph", margin=margin, coords=coords, marks=dict(marks or {}))

    # -- backends ----------------------------------------------------------

    @cached_property
    def _kdtree(self) -> cKDTree:
        return cKDTree(self.coords)

    @cached_property
    def _adjacency(self) -> sparse.csr_matrix:
        # parallel edges keep their shortest length
        key = np.sort(self.edges, axis=1)
        order = np.lexsort((self.lengths, key[:, 1], key[:, 0]))
        key, w = key[order], self.lengths[order]
        first = np.ones(len(key), dtype=bool)
        first[1:] = np.any(key[1:] != key[:-1], axis=1)
        key, w = key[first], w[first]
        rows = np.concatenate([key[:, 0], key[:, 1]])
        cols = np.concatenate([key[:, 1], key[:, 0]])
        return sparse.csr_matrix((np.concatenate([w, w]), (rows, cols)), shape=(self.size, self.size))

    @property
    def is_graph(self) -> bool:
        return self.metric == "graph"

    def _check(self, v) -> int:
        if not isinstance(v, (int, np.integer)) or not 0 <= v < self.size:
            raise DomainError(f"unknown point id {v!r}")
        return int(v)

    def distances_from(self, v: int, rmax: float = np.inf) -> np.ndarray:
        """Distances from ``v`` to every point; ``inf`` beyond ``rmax`` in graph mode."""
        v = self._check(v)
        if self.is_graph:
            lim = np.inf if not np.isfinite(rmax) else rmax + TOL
            return csgraph.dijkstra(self._adjacency, directed=False, indices=v, limit=lim)
        return cdist(self.coords[v:v + 1], self.coords, metric=_CDIST[self.metric])[0]

    def dist(self, u: int, v: int) -> float:
        u = self._check(u)
        v = self._check(v)
        if self.is_graph:
            return float(self.distances_from(u)[v])
        return float(cdist(self.coords[u:u + 1], self.coords[v:v + 1], metric=_CDIST[self.metric])[0, 0])

    def pairwise(self, subset: Iterable[int] | None = None) -> np.ndarray:
        idx = np.arange(self.size) if subset is None else np.asarray(list(subset), dtype=np.int64)
        for v in idx:
            self._check(int(v))
        if self.is_graph:
            d = csgraph.dijkstra(self._adjacency, directed=False, indices=idx)
            return d[:, idx]
        x = self.coords[idx]
        return cdist(x, x, metric=_CDIST[self.metric])

    def interior(self, v: int, r: float) -> bool:
        return bool(r <= self.margin[self._check(v)] + TOL)

    def reroot(self, v: int) -> "RootedSample":
        return dataclasses.replace(self, root=self._check(v))

    def with_metric(self, metric: str) -> "RootedSample":
        return dataclasses.replace(self, metric=metric)

    def relabel(self, perm) -> "RootedSample":
        """Move point ``i`` to id ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(self.size)
        return RootedSample(
            size=self.size,
            root=int(perm[self.root]),
            coords=None if self.coords is None else self.coords[inv],
            edges=None if self.edges is None else perm[self.edges],
            lengths=self.lengths,
            metric=self.metric,
            margin=self.margin[inv],
            marks={k: np.asarray(m)[inv] for k, m in self.marks.items()},
        )


def ball(sample: RootedSample, v: int, r: float) -> Ball:
    """Closed ball ``{u : d(v,u) <= r}``; the radius-0 ball is empty."""
    v = sample._check(v)
    if r < 0:
        raise DomainError("radius must be nonnegative")
    inside = sample.interior(v, r)
    if r == 0:
        return Ball(v, 0.0, np.empty(0, dtype=np.int64), inside)
    if sample.is_graph:
        d = sample.distances_from(v, r)
        pts = np.flatnonzero(d <= r + TOL)
    else:
        hit = sample._kdtree.query_ball_point(sample.coords[v], r + TOL, p=_P[sample.metric])
        pts = np.sort(np.asarray(hit, dtype=np.int64))
    return Ball(v, float(r), pts, inside)


def graph_distances(sample: RootedSample, v: int, rmax: float) -> dict[int, float]:
    """Shortest-path distances from ``v`` to all points within ``rmax``."""
    if sample.edges is None:
        raise DomainError("sample has no adjacency")
    if rmax < 0:
        raise DomainError("rmax must be nonnegative")
    g = sample if sample.is_graph else sample.with_metric("graph")
    d = g.distances_from(v, rmax)
    hit = np.flatnonzero(d <= rmax + TOL)
    return {int(u): float(d[u]) for u in hit}


def diameter(sample: RootedSample, subset: Iterable[int]) -> float:
    subset = list(subset)
    if not subset:
        raise DomainError("diameter of an empty set")
    if len(subset) == 1:
        sample._check(subset[0])
        return 0.0
    return float(sample.pairwise(subset).max())


# -- serialization ------------------------------------------------------------

_MAGIC = "unidim-sample 1"


def _f(x: float) -> str:
    return repr(float(x))


def dumps(sample: RootedSample) -> str:
    k = 0 if sample.coords is None else sample.coords.shape[1]
    m = 0 if sample.edges is None else len(sample.edges)
    lines = [_MAGIC, f"k {k} metric {sample.metric} root {sample.root} points {sample.size} edges {m}"]
    for i in range(sample.size):
        cs = "" if k == 0 else " ".join(_f(x) for x in sample.coords[i])
        lines.append(f"p {i} {_f(sample.margin[i])} {cs}".rstrip())
    for j in range(m):
        u, v = sample.edges[j]
        lines.append(f"e {u} {v} {_f(sample.lengths[j])}")
    for name in sorted(sample.marks):
        arr = np.asarray(sample.marks[name], dtype=float).reshape(sample.size, -1)
        width = "1" if np.ndim(sample.marks[name]) == 1 else str(arr.shape[1])
        lines.append(f"mark {name} {width}")
        for i in range(sample.size):
            lines.append(f"m {name} {i} " + " ".join(_f(x) for x in arr[i]))
    return "\n".join(lines) + "\n"


def loads(text: str) -> RootedSample:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if len(rows) < 2 or " ".join(rows[0]) != _MAGIC:
        raise DomainError("not a serialized sample")
    h = rows[1]
    head = dict(zip(h[0::2], h[1::2]))
    k, n, m = int(head["k"]), int(head["points"]), int(head["edges"])
    coords = np.zeros((n, k)) if k else None
    margin = np.zeros(n)
    edges = np.zeros((m, 2), dtype=np.int64)
    lengths = np.zeros(m)
    marks: dict[str, np.ndarray] = {}
    flat: set[str] = set()
    ei = 0
    for row in rows[2:]:
        tag = row[0]
        if tag == "p":
            i = int(row[1])
            margin[i] = float(row[2])
            if k:
                coords[i] = [float(x) for x in row[3:3 + k]]
        elif tag == "e":
            edges[ei] = (int(row[1]), int(row[2]))
            lengths[ei] = float(row[3])
            ei += 1
        elif tag == "mark":
            marks[row[1]] = np.zeros((n, int(row[2])))
            if row[2] == "1":
                flat.add(row[1])
        elif tag == "m":
            marks[row[1]][int(row[2])] = [float(x) for x in row[3:]]
        else:
            raise DomainError(f"bad record type {tag!r}")
    mk = {name: (a[:, 0] if name in flat else a) for name, a in marks.items()}
    return RootedSample(
        size=n, root=int(head["root"]), coords=coords,
        edges=edges if m else None, lengths=lengths if m else None,
        metric=head["metric"], margin=margin, marks=mk,
    )


def save(sample: RootedSample, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(sample))


def load(path) -> RootedSample:
    with open(path) as fh:
        return loads(fh.read())
