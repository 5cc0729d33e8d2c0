"""Rooted tree windows with parent maps, descendant sets and heights."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from unidim.errors import DomainError
from unidim.space import RootedSample


@dataclass(frozen=True, eq=False)
class TreeWindow:
    """A finite piece of a tree encoded by its parent map.

    ``parent[v] == -1`` marks a top vertex. When ``finite`` is False the tops
    are frontier vertices whose parents lie outside the window (the one-ended
    case); when True they are genuine roots of finite trees. ``complete[v]``
    says that every child of ``v`` is present in the window, so heights of
    vertices whose whole descendant set is complete are certain.
    """

    parent: np.ndarray
    root: int = 0
    finite: bool = False
    complete: np.ndarray | None = None
    lengths: np.ndarray | None = None
    level: np.ndarray | None = None
    coords: np.ndarray | None = None

    def __post_init__(self):
        p = np.asarray(self.parent, dtype=np.int64)
        n = len(p)
        if n == 0:
            raise DomainError("empty tree window")
        if p.min() < -1 or p.max() >= n or np.any(p == np.arange(n)):
            raise DomainError("invalid parent map")
        if not 0 <= self.root < n:
            raise DomainError("root is not a vertex")
        object.__setattr__(self, "parent", p)
        c = np.ones(n, dtype=bool) if self.complete is None else np.asarray(self.complete, dtype=bool)
        object.__setattr__(self, "complete", c)
        # depth computation doubles as the acyclicity check
        if np.any(self.depth < 0):
            raise DomainError("parent map has a cycle")

    @property
    def size(self) -> int:
        return len(self.parent)

    @cached_property
    def _children(self) -> tuple[np.ndarray, np.ndarray]:
        has = np.flatnonzero(self.parent >= 0)
        order = has[np.argsort(self.parent[has], kind="stable")]
        counts = np.bincount(self.parent[has], minlength=self.size)
        ptr = np.concatenate([[0], np.cumsum(counts)])
        return ptr, order

    def children(self, v: int) -> np.ndarray:
        ptr, idx = self._children
        return idx[ptr[v]:ptr[v + 1]]

    @cached_property
    def n_children(self) -> np.ndarray:
        ptr, _ = self._children
        return np.diff(ptr)

    @cached_property
    def depth(self) -> np.ndarray:
        """Hop distance from each vertex up to its top; -1 if on a cycle."""
        n = self.size
        d = np.full(n, -1, dtype=np.int64)
        d[self.parent == -1] = 0
        frontier = np.flatnonzero(self.parent == -1)
        ptr, idx = self._children
        k = 0
        while frontier.size:
            k += 1
            kids = idx[_ranges(ptr[frontier], ptr[frontier + 1])]
            kids = kids[d[kids] == -1]
            d[kids] = k
            frontier = kids
        return d

    @cached_property
    def _by_depth(self) -> list[np.ndarray]:
        order = np.argsort(self.depth, kind="stable")
        dd = self.depth[order]
        cuts = np.flatnonzero(np.diff(dd)) + 1
        return np.split(order, cuts)

    def _bottom_up(self, h, certain):
        for group in reversed(self._by_depth[1:]):
            par = self.parent[group]
            np.maximum.at(h, par, h[group] + 1)
            if certain is not None:
                np.logical_and.at(certain, par, certain[group])
        return h, certain

    @cached_property
    def _heights(self) -> tuple[np.ndarray, np.ndarray]:
        h = np.zeros(self.size, dtype=np.int64)
        certain = self.complete.copy()
        return self._bottom_up(h, certain)

    @property
    def height(self) -> np.ndarray:
        """Max hop distance to a descendant; exact where ``height_certain``."""
        return self._heights[0]

    @property
    def height_certain(self) -> np.ndarray:
        return self._heights[1]

    def descendants(self, v: int) -> np.ndarray:
        ptr, idx = self._children
        out = [v]
        stack = [v]
        while stack:
            u = stack.pop()
            kids = idx[ptr[u]:ptr[u + 1]]
            out.extend(kids.tolist())
            stack.extend(kids.tolist())
        return np.array(out, dtype=np.int64)

    def ancestor(self, v: int, j: int) -> int:
        """``F^j(v)``, or -1 when the chain leaves the window."""
        for _ in range(j):
            if v < 0:
                return -1
            v = int(self.parent[v])
        return v

    def cone(self, v: int, n: int) -> np.ndarray:
        """First ``n`` generations of descendants of ``v``, including ``v``."""
        ptr, idx = self._children
        out = [v]
        front = [v]
        for _ in range(n):
            nxt = []
            for u in front:
                nxt.extend(idx[ptr[u]:ptr[u + 1]].tolist())
            out.extend(nxt)
            front = nxt
        return np.array(out, dtype=np.int64)

    @cached_property
    def edges(self) -> np.ndarray:
        has = np.flatnonzero(self.parent >= 0)
        return np.column_stack([has, self.parent[has]])

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        has = np.flatnonzero(self.parent >= 0)
        if self.lengths is None:
            return np.ones(len(has))
        return np.asarray(self.lengths, dtype=float)[has]

    @cached_property
    def graph(self) -> sparse.csr_matrix:
        e = self.edges
        w = self.edge_lengths
        return sparse.csr_matrix(
            (np.concatenate([w, w]), (np.concatenate([e[:, 0], e[:, 1]]), np.concatenate([e[:, 1], e[:, 0]]))),
            shape=(self.size, self.size),
        )

    @cached_property
    def boundary(self) -> np.ndarray:
        """Vertices with neighbours missing from the window."""
        b = ~self.complete
        if not self.finite:
            b = b | (self.parent == -1)
        return np.flatnonzero(b)

    @cached_property
    def margin(self) -> np.ndarray:
        """Radius up to which balls around each vertex are complete."""
        if self.boundary.size == 0:
            return np.full(self.size, np.inf)
        return csgraph.dijkstra(self.graph, directed=False, indices=self.boundary, min_only=True)

    def _marks(self) -> dict:
        return _tree_marks(self)

    def to_sample(self, root: int | None = None) -> RootedSample:
        return RootedSample.from_edges(
            self.size, self.edges, root=self.root if root is None else root,
            lengths=self.edge_lengths, margin=self.margin, coords=self.coords,
            marks=self._marks(),
        )


def _tree_marks(tree: "TreeWindow") -> dict:
    m = {"depth": tree.depth.astype(float)}
    if tree.level is not None:
        m["level"] = np.asarray(tree.level, dtype=float)
    return m


def _ranges(starts: np.ndarray, stops: np.ndarray) -> np.ndarray:
    """Concatenation of ``arange(a, b)`` over paired starts and stops."""
    counts = stops - starts
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    offs = np.repeat(starts - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
    return offs + np.arange(total)


def strip_heights(size: int, edges: np.ndarray, alive: np.ndarray | None = None) -> np.ndarray:
    """Leaf-stripping heights of a forest: the round in which each vertex is deleted.

    Round 0 deletes every vertex of degree at most one, and so on. Vertices not
    ``alive`` are ignored and get height -1.
    """
    alive = np.ones(size, dtype=bool) if alive is None else alive.copy()
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    e = e[alive[e[:, 0]] & alive[e[:, 1]]]
    h = np.full(size, -1, dtype=np.int64)
    deg = np.bincount(e.ravel(), minlength=size)
    adj = sparse.csr_matrix((np.ones(2 * len(e)), (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])), shape=(size, size))
    live = alive.copy()
    rnd = 0
    while live.any():
        leaves = np.flatnonzero(live & (deg <= 1))
        h[leaves] = rnd
        live[leaves] = False
        # each deleted leaf lowers the degree of its live neighbours
        dec = np.asarray(adj[leaves].sum(axis=0)).ravel().astype(np.int64)
        deg = deg - dec
        rnd += 1
    return h


def ray(length: int) -> TreeWindow:
    """Path ``0 - 1 - ... - length-1`` with vertex ``i`` the parent of ``i-1``; top is frontier."""
    parent = np.arange(1, length + 1, dtype=np.int64)
    parent[-1] = -1
    return TreeWindow(parent=parent, root=0, finite=False)


def from_networkx(g, root=0) -> TreeWindow:
    """Finite tree from a networkx graph with integer nodes ``0..n-1``."""
    import networkx as nx

    n = g.number_of_nodes()
    parent = np.full(n, -1, dtype=np.int64)
    for u, v in nx.bfs_edges(g, root):
        parent[v] = u
    return TreeWindow(parent=parent, root=root, finite=True)


def from_edges(size: int, edges, root: int = 0) -> TreeWindow:
    adj = [[] for _ in range(size)]
    for u, v in np.asarray(edges, dtype=np.int64).reshape(-1, 2).tolist():
        adj[u].append(v)
        adj[v].append(u)
    parent = np.full(size, -1, dtype=np.int64)
    seen = np.zeros(size, dtype=bool)
    seen[root] = True
    stack = [root]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                parent[w] = u
                stack.append(w)
    if not seen.all():
        raise DomainError("edge list is not a connected tree")
    return TreeWindow(parent=parent, root=root, finite=True)
