"""Discrete self-similar spaces: the Cantor set, the Koch snowflake and general equal-ratio IFS."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from unidim.coverings import CoveringRule, block_rule
from unidim.errors import DomainError
from unidim.sampling import RootedSampler, bias_sampler
from unidim.space import RootedSample

# -- Cantor ----------------------------------------------------------------------------


def cantor_block(depth: int) -> np.ndarray:
    """Integers in ``[0, 3^depth)`` whose base-3 digits are all 0 or 2, ascending."""
    pts = np.zeros(1, dtype=np.int64)
    for j in range(depth):
        pts = np.concatenate([pts, pts + 2 * 3 ** j])
    return np.sort(pts)


def _cantor_sample(pts: np.ndarray, lo: int, hi: int, code: np.ndarray) -> RootedSample:
    order = np.argsort(pts)
    pts, code = pts[order], code[order]
    root = int(np.flatnonzero(pts == 0)[0])
    margin = np.minimum(pts - lo, hi - pts).astype(float)
    return RootedSample.from_coords(pts.astype(float), root=root, metric="euclidean", margin=margin,
                                    marks={"code": code.astype(float)})


def cantor_digit(depth: int, rng: np.random.Generator) -> RootedSample:
    """Points ``i`` with ``i + U`` using digits 0 and 2 only, for random digits ``U``.

    With ``u`` the lowest ``depth`` digits of ``U``, a carry into digit
    ``depth`` turns some digit into 1 almost surely, so every point with
    ``i + u`` in ``[-3^depth, 2*3^depth)`` is ``x - u`` for ``x`` in the
    depth-``depth`` block.
    """
    if not 1 <= depth <= 20:
        raise DomainError("depth must lie in 1..20")
    digits = 2 * rng.integers(0, 2, size=depth)
    u = int(np.dot(digits, 3 ** np.arange(depth)))
    block = cantor_block(depth)
    n = 3 ** depth
    # code: which digits of the point differ from those of u
    code = np.array([sum(1 << j for j in range(depth) if (x // 3 ** j) % 3 != (u // 3 ** j) % 3) for x in block.tolist()]) \
        if depth <= 12 else np.zeros(len(block), dtype=np.int64)
    return _cantor_sample(block - u, -n - u, 2 * n - u - 1, code)


def cantor_nested(depth: int, rng: np.random.Generator) -> RootedSample:
    """``T_{n+1} = T_n ∪ (T_n ± 2·3^n)`` with i.i.d. signs.

    Every further point lies more than ``3^depth`` beyond the hull of ``T_depth``.
    """
    if not 1 <= depth <= 20:
        raise DomainError("depth must lie in 1..20")
    pts = np.zeros(1, dtype=np.int64)
    code = np.zeros(1, dtype=np.int64)
    for j in range(depth):
        s = 1 if rng.random() < 0.5 else -1
        pts = np.concatenate([pts, pts + s * 2 * 3 ** j])
        code = np.concatenate([code, code + (1 << j)])
    n = 3 ** depth
    return _cantor_sample(pts, int(pts.min()) - n, int(pts.max()) + n, code)


def gen_cantor(depth: int = 12, construction: str = "nested", seed: int = 0) -> RootedSampler:
    if construction not in ("digit", "nested"):
        raise DomainError(f"unknown construction {construction!r}")
    fn = cantor_digit if construction == "digit" else cantor_nested
    return RootedSampler("cantor", lambda rng: fn(depth, rng), seed, {"depth": depth, "construction": construction})


def cantor_block_rule(m: int) -> CoveringRule:
    """Level-``m`` blocks of ``2^m`` points and diameter ``3^m - 1``; the root carries code 0."""
    if m < 1:
        raise DomainError("m must be positive")
    return block_rule(2 ** m, float(3 ** m - 1), f"cantor-block[m={m}]",
                      lambda rng, n: np.zeros(n, dtype=np.int64))


# -- Koch ------------------------------------------------------------------------------

# triangular lattice in the basis e1 = (1, 0), e2 = (1/2, sqrt(3)/2)
_HEX = np.array([[1, 0], [0, 1], [-1, 1], [-1, 0], [0, -1], [1, -1]])


def rot60(v: np.ndarray, times: int = 1) -> np.ndarray:
    """Rotate lattice vectors by ``60° * times`` counter-clockwise."""
    v = np.atleast_2d(v)
    for _ in range(times % 6):
        v = np.column_stack([-v[:, 1], v[:, 0] + v[:, 1]])
    return v


def to_plane(v: np.ndarray) -> np.ndarray:
    v = np.atleast_2d(v).astype(float)
    return np.column_stack([v[:, 0] + 0.5 * v[:, 1], v[:, 1] * np.sqrt(3) / 2])


# turning angle (in units of 60°) of each of the four pieces relative to the chord
_PIECE_TURN = (0, 1, -1, 0)


def koch_path(depth: int, rng: np.random.Generator, choices=None) -> tuple[np.ndarray, int]:
    """Path ``T_depth`` in lattice coordinates, ordered from ``A`` to ``B``, and the index of the origin.

    ``T_{n+1}`` is four copies of ``T_n`` forming a Koch generator with
    ``T_n`` in the position picked uniformly (or from ``choices``).
    """
    if not 1 <= depth <= 10:
        raise DomainError("depth must lie in 1..10")
    path = np.array([[0, 0], _HEX[int(rng.integers(6))]], dtype=np.int64)
    origin = 0
    for n in range(1, depth):
        pos = int(rng.integers(4)) if choices is None else int(choices[n - 1])
        v = path[-1] - path[0]
        rel = path - path[0]
        # chord direction of the whole generator, in units of v rotated back by the piece's turn
        turns = [t - _PIECE_TURN[pos] for t in _PIECE_TURN]
        vecs = [rot60(v, t)[0] for t in turns]
        start = path[0] - sum(vecs[:pos], np.zeros(2, dtype=np.int64))
        parts = []
        cur = start
        for j, t in enumerate(turns):
            piece = cur + rot60(rel, t)
            parts.append(piece if j == 0 else piece[1:])
            cur = cur + vecs[j]
        new = np.concatenate(parts)
        if len(np.unique(new, axis=0)) != len(new):
            raise RuntimeError("Koch attachment produced overlapping points")
        offset = sum(len(p) for p in parts[:pos]) - (1 if pos > 0 else 0)
        origin = offset + origin
        path = new
    return path, origin


def koch_window(depth: int, rng: np.random.Generator, guard: float = 0.5, choices=None) -> RootedSample:
    """Window of the Koch path rooted at the origin with planar coordinates.

    Pieces added later meet ``T_depth`` only through its end points. The
    margin of a point is ``guard`` times its distance to the nearer end point,
    a conservative bound checked empirically in the tests.
    """
    path, origin = koch_path(depth, rng, choices)
    xy = to_plane(path)
    xy = xy - xy[origin]
    ends = xy[[0, -1]]
    d = np.min(np.linalg.norm(xy[:, None, :] - ends[None, :, :], axis=2), axis=1)
    idx = np.arange(len(xy))
    edges = np.column_stack([idx[:-1], idx[1:]])
    return RootedSample.from_coords(xy, root=origin, metric="euclidean", margin=guard * d,
                                    marks={"code": idx.astype(float)}, edges=edges)


def koch_block_rule(m: int) -> CoveringRule:
    """Copies of ``T_m``: ``4^(m-1)`` consecutive path indices, diameter ``3^(m-1)`` (the chord)."""
    if m < 2:
        raise DomainError("m must be at least 2")
    period = 4 ** (m - 1)
    # the origin index has i.i.d. uniform base-4 digits, one per attachment step
    return block_rule(period, float(3 ** (m - 1)), f"koch-block[m={m}]",
                      lambda rng, n: rng.integers(period, size=n))


def gen_koch(depth: int = 8, seed: int = 0) -> RootedSampler:
    return RootedSampler("koch", lambda rng: koch_window(depth, rng), seed, {"depth": depth})


# -- general IFS -----------------------------------------------------------------------


@dataclass(frozen=True)
class IFSSpec:
    """Similitudes ``f_j(x) = r Q_j x + b_j`` with a common ratio ``r < 1``.

    ``witness`` optionally lists the vertices of a convex polytope whose
    interior satisfies the open set condition; it bounds window margins.
    ``contact`` is set when other copies meet an image of the witness only at
    its vertices, each inside a cone whose angular gap to the image is at
    least ``contact`` radians; margins may then use vertex distances.
    """

    ratio: float
    rotations: tuple
    shifts: tuple
    base: tuple
    witness: tuple | None = None
    contact: float | None = None

    def __post_init__(self):
        Q = np.asarray(self.rotations, dtype=float)
        b = np.asarray(self.shifts, dtype=float)
        if not 0 < self.ratio < 1:
            raise DomainError("ratio must lie in (0, 1)")
        if Q.ndim != 3 or Q.shape[1] != Q.shape[2] or b.shape != (Q.shape[0], Q.shape[1]):
            raise DomainError("need one k x k matrix and one shift per map")
        if Q.shape[0] < 1:
            raise DomainError("at least one map is required")
        for q in Q:
            if not np.allclose(q @ q.T, np.eye(q.shape[0]), atol=1e-12):
                raise DomainError("linear parts must be orthogonal")
        if len(self.base) != Q.shape[1]:
            raise DomainError("base point has the wrong dimension")

    @property
    def k(self) -> int:
        return len(self.base)

    @property
    def l(self) -> int:
        return len(self.shifts)

    @property
    def dimension(self) -> float:
        return float(np.log(self.l) / -np.log(self.ratio))

    def apply(self, j: int, x: np.ndarray) -> np.ndarray:
        Q = np.asarray(self.rotations[j], dtype=float)
        return self.ratio * x @ Q.T + np.asarray(self.shifts[j], dtype=float)

    def inverse(self, j: int, x: np.ndarray) -> np.ndarray:
        Q = np.asarray(self.rotations[j], dtype=float)
        return (x - np.asarray(self.shifts[j], dtype=float)) @ Q / self.ratio


def _inner_distance(x: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Distance from each point to the boundary of the convex hull of ``verts`` (negative outside)."""
    if verts.shape[1] == 1:
        lo, hi = verts.min(), verts.max()
        return np.minimum(x[:, 0] - lo, hi - x[:, 0])
    eq = ConvexHull(verts).equations
    return -(x @ eq[:, :-1].T + eq[:, -1]).max(axis=1)


def cantor_ifs() -> IFSSpec:
    return IFSSpec(1 / 3, ([[1.0]], [[1.0]]), ([0.0], [2 / 3]), (0.0,), ((0.0,), (1.0,)))


def sierpinski_ifs(base=(0.5, np.sqrt(3) / 6)) -> IFSSpec:
    I = np.eye(2).tolist()
    h = np.sqrt(3) / 2
    # two cells of the gasket meet at a vertex, 60 degrees apart
    return IFSSpec(0.5, (I, I, I), ((0.0, 0.0), (0.5, 0.0), (0.25, h / 2)), tuple(base),
                   ((0.0, 0.0), (1.0, 0.0), (0.5, h)), np.pi / 3)


def folded_ifs() -> IFSSpec:
    """``x/2`` and ``1 - x/2`` from ``o = 0``: images of ``o`` coincide, so weights exceed 1."""
    return IFSSpec(0.5, ([[1.0]], [[-1.0]]), ([0.0], [1.0]), (0.0,), ((0.0,), (1.0,)))


@dataclass(frozen=True, eq=False)
class SelfSimilarWindow:
    """Distinct points of ``K̂_depth`` with multiplicities and the string codes of each."""

    coords: np.ndarray
    root: int
    weight: np.ndarray
    point_of_code: np.ndarray
    depth: int
    l: int
    margin: np.ndarray


def _dedupe(x: np.ndarray, tol: float) -> np.ndarray:
    """Cluster labels for points within ``tol``; raises when clusters are ambiguous."""
    q = np.round(x / tol).astype(np.int64)
    _, labels = np.unique(q, axis=0, return_inverse=True)
    labels = labels.ravel()
    # rounding can split a cluster across a cell boundary: merge neighbours explicitly
    tree = cKDTree(x)
    pairs = tree.query_pairs(tol)
    far = tree.query_pairs(10 * tol)
    if len(far) != len(pairs):
        raise DomainError("coincidence detection is ambiguous at this tolerance")
    if pairs:
        parent = np.arange(len(x))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i, j in pairs:
            a, b = find(i), find(j)
            if a != b:
                parent[max(a, b)] = min(a, b)
        roots = np.array([find(i) for i in range(len(x))])
        _, labels = np.unique(roots, return_inverse=True)
    return labels.ravel()


def self_similar_window(ifs: IFSSpec, depth: int, rng: np.random.Generator, tol: float = 1e-7,
                        choices=None) -> SelfSimilarWindow:
    """``K̂_depth`` by the inductive doubling construction.

    Step ``n`` replaces ``K̂_{n-1}`` by ``l`` isometric copies
    ``g f_i^{-1} f_j g^{-1}`` with ``g = g_{n-1}``; copy ``j`` carries the
    codes ``j * l^{n-1} + c``. The base point ``o`` is never moved, and ``K̂_n``
    contains ``K̂_{n-1}`` as copy ``i_n``.
    """
    if depth < 0:
        raise DomainError("depth must be nonnegative")
    if depth * -np.log10(ifs.ratio) > 12:
        raise DomainError("depth too large for double precision")
    l, k = ifs.l, ifs.k
    o = np.asarray(ifs.base, dtype=float)[None, :]
    pts = o.copy()
    # g is an affine map x -> G x + c
    G, c = np.eye(k), np.zeros(k)
    picks = rng.integers(l, size=depth) if choices is None else np.asarray(choices, dtype=int)
    for n in range(1, depth + 1):
        i = int(picks[n - 1])
        ginv = (pts - c) @ np.linalg.inv(G).T
        copies = [ifs.apply(j, ginv) for j in range(l)]
        copies = [ifs.inverse(i, y) @ G.T + c for y in copies]
        # snap copy i back onto the existing points to stop drift
        copies[i] = pts
        pts = np.concatenate(copies)
        Qi = np.asarray(ifs.rotations[i], dtype=float)
        G = G @ (Qi.T / ifs.ratio)
        c = c - G @ np.asarray(ifs.shifts[i], dtype=float)
    labels = _dedupe(pts, tol)
    m = labels.max() + 1
    coords = np.zeros((m, k))
    coords[labels] = pts
    weight = np.bincount(labels, minlength=m)
    root = int(labels[np.argmin(np.linalg.norm(pts - o, axis=1))])
    if ifs.witness is not None:
        # points outside K̂_depth lie outside the open image g_depth(V)
        verts = np.asarray(ifs.witness, dtype=float) @ G.T + c
        margin = np.maximum(_inner_distance(coords, verts), 0.0)
        if ifs.contact is not None:
            vd = np.min(np.linalg.norm(coords[:, None, :] - verts[None, :, :], axis=2), axis=1)
            margin = np.maximum(margin, np.sin(ifs.contact) * vd)
    else:
        margin = np.zeros(m)
    return SelfSimilarWindow(coords, root, weight, labels, depth, l, margin)


def window_sample(w: SelfSimilarWindow) -> RootedSample:
    """Rooted sample with marks ``weight`` and ``codes`` (all codes of each point, padded with -1)."""
    width = int(w.weight.max())
    codes = np.full((len(w.weight), width), -1.0)
    fill = np.zeros(len(w.weight), dtype=np.int64)
    for code, p in enumerate(w.point_of_code.tolist()):
        codes[p, fill[p]] = code
        fill[p] += 1
    return RootedSample.from_coords(w.coords, root=w.root, metric="euclidean", margin=w.margin,
                                    marks={"weight": w.weight.astype(float), "codes": codes})


def ifs_block_rule(ifs: IFSSpec, m: int, simple: bool = False) -> CoveringRule:
    """Level-``m`` blocks ``code // l^m``, each inside a copy of the witness scaled by ``ratio^-m``.

    With ``simple=True`` (no coincident images) the root carries a single code
    with uniform digits, which enables the batch path.
    """
    if ifs.witness is None:
        raise DomainError("block radii need a witness polytope")
    if m < 1:
        raise DomainError("m must be positive")
    v = np.asarray(ifs.witness, dtype=float)
    diam = float(np.max(np.linalg.norm(v[:, None] - v[None], axis=2)))
    period = ifs.l ** m
    draw = (lambda rng, n: rng.integers(period, size=n)) if simple else None
    return block_rule(period, diam * ifs.ratio ** -m, f"ifs-block[m={m}]", draw)


def gen_self_similar(ifs: IFSSpec, depth: int = 8, tol: float = 1e-7, seed: int = 0,
                     unimodular: bool = True) -> RootedSampler:
    """Sampler of ``K̂_depth`` rooted at ``o``; with ``unimodular`` it is biased by ``1/w(o)``."""
    base = RootedSampler("self-similar", lambda rng: window_sample(self_similar_window(ifs, depth, rng, tol)),
                         seed, {"l": ifs.l, "ratio": ifs.ratio, "depth": depth, "tol": tol})
    if not unimodular:
        return base
    return bias_sampler(base, lambda s: 1.0 / s.marks["weight"][s.root], cap=1.0)
