"""Equivariant coverings, audits, covering-intensity bounds and Hausdorff contents."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.sparse import csgraph

from unidim.errors import DomainError, InvalidRuleError, WindowTooSmallError
from unidim.sampling import IntensityEstimate, RootedSampler, mean_ci, proportion, replicate_rng
from unidim.space import TOL, RootedSample, ball
from unidim.trees import TreeWindow, strip_heights


@dataclass(frozen=True, eq=False)
class CoveringAssignment:
    """Radius ``R(v)`` per point; zero means ``v`` is not a centre."""

    radii: np.ndarray
    floor: float
    rule: str
    seed: int | None = None

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        bad = (r != 0) & (r < self.floor - TOL)
        if np.any(bad) or np.any(r < 0):
            raise InvalidRuleError(f"{self.rule}: radii violate the floor {self.floor}")
        object.__setattr__(self, "radii", r)

    @property
    def centers(self) -> np.ndarray:
        return np.flatnonzero(self.radii > 0)


@dataclass(frozen=True)
class CoverAudit:
    is_cover: bool
    K: int
    violations: np.ndarray
    checked: int


@dataclass
class CoveringRule:
    """An equivariant covering rule at one scale.

    ``assign(sample, rng)`` labels every point of a window. ``root_radius``
    returns ``R(o)`` only, and ``batch(rng, n)`` returns ``R(o)`` for ``n``
    independent replicates of the model the rule is tied to. ``exact_p`` is
    ``P(R(o) != 0)`` when it is known in closed form.
    """

    name: str
    scale: float
    floor: float
    K: int | None = None
    assign: Callable[[Any, np.random.Generator], CoveringAssignment] | None = None
    root_radius: Callable[[Any, np.random.Generator], float] | None = None
    batch: Callable[[np.random.Generator, int], np.ndarray] | None = None
    exact_p: float | None = None
    meta: dict = field(default_factory=dict)

    def root_value(self, sample, rng) -> float:
        if self.root_radius is not None:
            return float(self.root_radius(sample, rng))
        a = self.assign(sample, rng)
        return float(a.radii[_root_of(sample)])


def _root_of(sample) -> int:
    return int(sample.root)


# -- audits -------------------------------------------------------------------------


def audit_cover(sample: RootedSample, assignment: CoveringAssignment) -> CoverAudit:
    """Coverage and multiplicity over points whose potential coverers all lie in the window."""
    r = assignment.radii
    # a window may hold no centre at all, so the floor also bounds the reach
    rmax = max(float(r.max()) if r.size else 0.0, assignment.floor)
    counts = np.zeros(sample.size, dtype=np.int64)
    for c in np.flatnonzero(r > 0):
        counts[ball(sample, int(c), r[c]).points] += 1
    check = sample.margin >= 2 * rmax - TOL if rmax > 0 else np.ones(sample.size, dtype=bool)
    idx = np.flatnonzero(check)
    viol = idx[counts[idx] == 0]
    K = int(counts[idx].max()) if idx.size else 0
    return CoverAudit(viol.size == 0 and idx.size > 0, K, viol, int(idx.size))


def lambda_r_bounds(sampler: RootedSampler | None, rule: CoveringRule, r: float | None = None, n: int = 100_000,
                    audit_reps: int = 2, seed: int | None = None) -> "LambdaBounds":
    """``[p/K, p]`` where ``p`` estimates ``P(R(o) != 0)`` for a K-bounded rule."""
    K = rule.K
    if audit_reps and rule.assign is not None and sampler is not None:
        seen = 0
        for i in range(audit_reps):
            s = sampler.draw(10_000_000 + i)
            if isinstance(s, TreeWindow):
                s = s.to_sample()
            a = rule.assign(s, replicate_rng(sampler.seed + 7919, i))
            au = audit_cover(s, a)
            if au.checked == 0:
                raise WindowTooSmallError(f"no point of the window is far enough inside to audit {rule.name}")
            if not au.is_cover:
                raise InvalidRuleError(f"{rule.name} failed the cover audit at {au.violations[:5]}")
            seen = max(seen, au.K)
        if K is not None and seen > K:
            raise InvalidRuleError(f"{rule.name} declared K={K} but audit found {seen}")
        K = seen if K is None else K
    if K is None:
        raise InvalidRuleError(f"{rule.name} has no multiplicity bound")
    seed = sampler.seed if seed is None and sampler is not None else (seed or 0)
    vals = root_radii(sampler, rule, n, seed)
    p = proportion(vals > 0)
    return LambdaBounds(rule.scale, p, int(K))


@dataclass(frozen=True)
class LambdaBounds:
    r: float
    p: IntensityEstimate
    K: int

    @property
    def lo(self) -> float:
        return self.p.estimate / self.K

    @property
    def hi(self) -> float:
        return self.p.estimate


def root_radii(sampler: RootedSampler | None, rule: CoveringRule, n: int, seed: int = 0) -> np.ndarray:
    """``R(o)`` over ``n`` replicates, vectorized when the rule offers a batch path."""
    if rule.batch is not None:
        return np.asarray(rule.batch(replicate_rng(seed, -1), n), dtype=float)
    if sampler is None:
        raise DomainError(f"{rule.name} needs a sampler")
    out = np.empty(n)
    for i in range(n):
        rng = sampler.rng(i)
        out[i] = rule.root_value(sampler.draw_fn(rng), rng)
    return out


@dataclass(frozen=True)
class ContentEstimate:
    value: float
    ci: float
    rule: str
    per_rule: dict


def content_estimate(sampler, family: Sequence[CoveringRule], alpha: float, M: float, n: int = 100_000,
                     seed: int = 0) -> ContentEstimate:
    """Smallest ``E[R(o)^alpha]`` over a family of rules with radii in ``{0} ∪ [M, ∞)``.

    Every member is evaluated on the same replicate streams, so comparisons
    across the family use common random numbers.
    """
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    per = {}
    for rule in family:
        if rule.floor < M - TOL:
            raise InvalidRuleError(f"{rule.name} has floor {rule.floor} below M={M}")
        r = root_radii(sampler, rule, n, seed)
        per[rule.name] = mean_ci(np.where(r > 0, r ** alpha, 0.0))
    if not per:
        raise DomainError("empty rule family")
    best = min(per, key=lambda k: per[k].estimate)
    return ContentEstimate(per[best].estimate, per[best].ci, best, per)


# -- lattices ---------------------------------------------------------------------------


def _lattice_radius(k: int, n: int, norm: str, radius: str) -> float:
    if radius == "paper":
        return float(n)
    if norm == "l2":
        return n * np.sqrt(k) / 2
    if norm == "linf":
        return n / 2
    if norm == "l1":
        return n * k / 2
    raise DomainError(f"no tight radius for norm {norm!r}")


def shifted_lattice_cover(k: int, delta: float, n: int, norm: str = "l2", radius: str = "paper",
                          disjoint: bool = False, cayley_radius: float | None = None) -> CoveringRule:
    """Centres on ``n δ Z^k - δ U`` with ``U`` uniform in ``{0..n-1}^k``.

    ``radius='paper'`` uses ``nδ``; ``'tight'`` uses the covering radius of the
    sub-lattice in the given norm. With ``disjoint=True`` (linf only) the
    spacing is ``2n+1`` and the radius ``nδ`` so the cubes tile the lattice.
    For ``norm='cayley'`` pass the sub-lattice covering radius under the word metric.
    """
    if n < 1 or int(n) != n:
        raise DomainError("n must be a positive integer")
    if delta <= 0:
        raise DomainError("delta must be positive")
    if disjoint:
        if norm != "linf":
            raise DomainError("the disjoint variant needs the linf norm")
        spacing, rad, K = 2 * n + 1, n * delta, 1
    elif norm == "cayley":
        if cayley_radius is None:
            raise DomainError("cayley norm needs its covering radius")
        spacing, rad, K = n, float(cayley_radius) * delta, None
    else:
        spacing, rad = n, _lattice_radius(k, n, norm, radius) * delta
        K = 2 ** k if radius == "tight" else None

    def assign(sample: RootedSample, rng):
        u = np.floor(rng.random(k) * spacing).astype(np.int64)
        idx = np.rint(sample.coords / delta).astype(np.int64) - np.rint(sample.coords[sample.root] / delta).astype(np.int64)
        centre = np.all((idx + u) % spacing == 0, axis=1)
        return CoveringAssignment(np.where(centre, rad, 0.0), rad, name)

    def root_radius(sample, rng):
        u = np.floor(rng.random(k) * spacing).astype(np.int64)
        return rad if np.all(u == 0) else 0.0

    def batch(rng, m):
        u = np.floor(rng.random((m, k)) * spacing).astype(np.int64)
        return np.where(np.all(u == 0, axis=1), rad, 0.0)

    name = f"lattice[{norm},{'disjoint' if disjoint else radius},n={n}]"
    return CoveringRule(name, rad, rad, K, assign, root_radius, batch, float(spacing) ** -k,
                        {"k": k, "delta": delta, "n": n, "spacing": spacing})


def interval_cover_line(points: np.ndarray, r: float, rng: np.random.Generator) -> CoveringAssignment:
    """One radius-``r`` ball at the largest point of each cell ``[mr+U, (m+1)r+U)``."""
    if r <= 0:
        raise DomainError("r must be positive")
    x = np.asarray(points, dtype=float).ravel()
    u = rng.random() * r
    cell = np.floor((x - u) / r).astype(np.int64)
    radii = np.zeros(len(x))
    order = np.lexsort((x, cell))
    last = np.ones(len(x), dtype=bool)
    last[:-1] = cell[order][1:] != cell[order][:-1]
    radii[order[last]] = r
    return CoveringAssignment(radii, r, f"interval[r={r:g}]")


def interval_rule(r: float) -> CoveringRule:
    def assign(sample: RootedSample, rng):
        return interval_cover_line(sample.coords[:, 0] - sample.coords[sample.root, 0], r, rng)

    def root_radius(sample, rng):
        x = sample.coords[:, 0] - sample.coords[sample.root, 0]
        u = rng.random() * r
        return r if not np.any((x > 0) & (x < u)) else 0.0

    return CoveringRule(f"interval[r={r:g}]", r, r, 3, assign, root_radius)


def gap_root_radius(gaps: np.ndarray, r: float, rng: np.random.Generator) -> np.ndarray:
    """Root radius of the interval rule given the gap from the root to its right neighbour."""
    u = rng.random(len(gaps)) * r
    return np.where(np.asarray(gaps) >= u, r, 0.0)


# -- finite trees -------------------------------------------------------------------------


def _tree_edges(tree: TreeWindow) -> np.ndarray:
    return tree.edges


def spanning_subtree(size: int, edges: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Mask of the smallest subtree containing every ``targets`` vertex."""
    alive = np.ones(size, dtype=bool)
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    while True:
        ke = e[alive[e[:, 0]] & alive[e[:, 1]]]
        deg = np.bincount(ke.ravel(), minlength=size)
        drop = alive & (deg <= 1) & ~targets
        if not drop.any() or drop.sum() == alive.sum():
            if drop.sum() == alive.sum():
                alive[:] = False
            return alive
        alive &= ~drop


def greedy_finite_tree_cover(tree: TreeWindow, n: int, rng: np.random.Generator | None = None,
                             literal: bool = False) -> np.ndarray:
    """Minimum ``n``-covering of a finite tree by greedy leaf-stripping.

    Each round works on the smallest subtree spanning the uncovered vertices:
    every vertex of stripping height ``n`` becomes a centre, or, if there is
    none, one vertex of maximal height (uniform among ties). ``literal=True``
    instead recurses inside each uncovered component on its own, which can
    use more balls than necessary.
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    rng = rng or np.random.default_rng(0)
    size = tree.size
    edges = tree.edges
    uncovered = np.ones(size, dtype=bool)
    centers: list[int] = []
    while uncovered.any():
        chosen: list[int] = []
        if literal:
            keep = edges[uncovered[edges[:, 0]] & uncovered[edges[:, 1]]]
            _, lab = csgraph.connected_components(_adj(size, keep), directed=False)
            sh = strip_heights(size, edges, uncovered)
            groups = [np.flatnonzero((lab == c) & uncovered) for c in np.unique(lab[uncovered])]
        else:
            span = spanning_subtree(size, edges, uncovered)
            sh = strip_heights(size, edges, span)
            groups = [np.flatnonzero(span)]
        for members in groups:
            hit = members[sh[members] == n]
            if hit.size:
                chosen.extend(hit.tolist())
            else:
                top = members[sh[members] == sh[members].max()]
                chosen.append(int(top[rng.integers(top.size)]))
        centers.extend(chosen)
        d = csgraph.dijkstra(tree.graph, directed=False, indices=chosen, limit=n + 0.5, min_only=True)
        uncovered &= ~(d <= n + TOL)
    return np.array(sorted(set(centers)), dtype=np.int64)


def _adj(size, edges):
    from scipy import sparse

    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return sparse.csr_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(size, size))


def brute_force_min_cover(tree: TreeWindow, n: int) -> int:
    """Smallest number of radius-``n`` balls covering a small finite tree."""
    d = csgraph.dijkstra(tree.graph, directed=False)
    near = d <= n + TOL
    for m in range(1, tree.size + 1):
        for comb in itertools.combinations(range(tree.size), m):
            if near[list(comb)].any(axis=0).all():
                return m
    return tree.size


# -- one-ended trees ----------------------------------------------------------------------


@dataclass(frozen=True)
class TreeCover:
    centers: np.ndarray
    certain: np.ndarray
    n: int

    def member(self, v: int) -> bool:
        return bool(np.any(self.centers == v))


def _alive_heights(tree: TreeWindow, alive: np.ndarray) -> np.ndarray:
    h = np.zeros(tree.size, dtype=np.int64)
    for group in reversed(tree._by_depth[1:]):
        g = group[alive[group]]
        par = tree.parent[g]
        ok = alive[par]
        np.maximum.at(h, par[ok], h[g[ok]] + 1)
    return h


def one_ended_ball_cover(tree: TreeWindow, n: int, rng: np.random.Generator | None = None,
                         buffer: int | None = None) -> TreeCover:
    """Greedy ball covering of a one-ended tree window.

    Each round selects, in the component containing the window top, every
    vertex of residual height ``n``; every finite component is handled by the
    finite-tree greedy rule. Selected balls are removed and the loop repeats.
    Vertices within ``buffer`` hops of the top, or with uncertain heights, are
    flagged as censored.
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    if tree.finite:
        raise DomainError("expected a one-ended window")
    rng = rng or np.random.default_rng(0)
    buffer = 4 * n + 2 if buffer is None else buffer
    certain = tree.height_certain & (tree.depth >= buffer)
    if not certain.any():
        raise WindowTooSmallError("no vertex of the window is determined")
    size = tree.size
    edges = tree.edges
    alive = np.ones(size, dtype=bool)
    centers: list[int] = []
    tops = np.flatnonzero(tree.parent == -1)
    while alive.any():
        keep = edges[alive[edges[:, 0]] & alive[edges[:, 1]]]
        _, lab = csgraph.connected_components(_adj(size, keep), directed=False)
        inf_labels = set(lab[tops[alive[tops]]].tolist())
        h = _alive_heights(tree, alive)
        fin = alive & ~np.isin(lab, list(inf_labels))
        sh = strip_heights(size, edges, fin)
        chosen: list[int] = []
        for c in np.unique(lab[alive]):
            members = np.flatnonzero((lab == c) & alive)
            if c in inf_labels:
                chosen.extend(members[h[members] == n].tolist())
            else:
                hit = members[sh[members] == n]
                if hit.size:
                    chosen.extend(hit.tolist())
                else:
                    top = members[sh[members] == sh[members].max()]
                    chosen.append(int(top[rng.integers(top.size)]))
        if not chosen:
            break
        centers.extend(chosen)
        d = csgraph.dijkstra(tree.graph, directed=False, indices=chosen, limit=n + 0.5, min_only=True)
        alive &= ~(d <= n + TOL)
    return TreeCover(np.array(sorted(centers), dtype=np.int64), certain, n)


def residual_heights(tree: TreeWindow, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Bottom-up residual heights of the cone algorithm and the selected mask.

    ``rho(v)`` is one more than the largest ``rho`` over children that were not
    selected, and ``v`` is selected exactly when ``rho(v) == n``.
    """
    rho = np.zeros(tree.size, dtype=np.int64)
    sel = np.zeros(tree.size, dtype=bool)
    groups = tree._by_depth
    for gi in range(len(groups) - 1, -1, -1):
        g = groups[gi]
        sel[g] = rho[g] == n
        if gi == 0:
            break
        keep = g[~sel[g]]
        np.maximum.at(rho, tree.parent[keep], rho[keep] + 1)
    return rho, sel


def cone_cover(tree: TreeWindow, n: int) -> TreeCover:
    """Fixed point of selecting all height-``n`` vertices and deleting their descendants.

    Membership of ``v`` depends on ``D(v)`` only, so it is certain wherever the
    height of ``v`` is.
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    certain = tree.height_certain
    if not certain.any():
        raise WindowTooSmallError("no vertex of the window is determined")
    _, sel = residual_heights(tree, n)
    return TreeCover(np.flatnonzero(sel), certain, n)


def cone_rule(n: int) -> CoveringRule:
    """Root membership in the cone covering; ``meta['diam']`` gives the cone diameter."""

    def root_radius(tree: TreeWindow, rng):
        sub = _descendant_window(tree, tree.root)
        _, sel = residual_heights(sub, n)
        return float(n) if sel[0] else 0.0

    return CoveringRule(f"cone[n={n}]", n, n, None, None, root_radius, meta={"kind": "cone"})


def _descendant_window(tree: TreeWindow, v: int) -> TreeWindow:
    d = tree.descendants(v)
    if not tree.height_certain[v]:
        raise WindowTooSmallError("descendants of the root are truncated")
    pos = np.full(tree.size, -1, dtype=np.int64)
    pos[d] = np.arange(len(d))
    par = tree.parent[d]
    newpar = np.where(np.arange(len(d)) == 0, -1, pos[np.maximum(par, 0)])
    return TreeWindow(parent=newpar, root=0, finite=True)


def cone_diameter(tree: TreeWindow, v: int, n: int) -> float:
    c = tree.cone(v, n)
    if c.size == 1:
        return 0.0
    d = csgraph.dijkstra(tree.graph, directed=False, indices=c)
    return float(d[:, c].max())


def generalized_content(sampler: RootedSampler, n_cone: int, alpha: float, M: float, n: int,
                        start: int = 0) -> IntensityEstimate:
    """``E[(M ∨ diam(C)/2)^alpha 1{o in S}]`` for the cone covering of height ``n_cone``."""
    vals = np.zeros(n)
    for i in range(n):
        tree = sampler.draw(start + i)
        sub = _descendant_window(tree, tree.root)
        _, sel = residual_heights(sub, n_cone)
        if sel[0]:
            vals[i] = max(M, 0.5 * cone_diameter(sub, 0, n_cone)) ** alpha
    return mean_ci(vals)


# -- regular trees --------------------------------------------------------------------------


def regular_ball_size(k: int, r: int) -> int:
    """``|N_r(o)|`` in the ``k``-regular tree."""
    if r < 0:
        raise DomainError("r must be nonnegative")
    if r == 0:
        return 0
    return 1 + k * sum((k - 1) ** j for j in range(r))


def regular_tree_window(k: int, depth: int) -> TreeWindow:
    """Ball of radius ``depth`` around the root of the ``k``-regular tree, as a BFS tree."""
    parent = [-1]
    level = [0]
    front = [0]
    for d in range(1, depth + 1):
        nxt = []
        for v in front:
            for _ in range(k if v == 0 else k - 1):
                parent.append(v)
                level.append(d)
                nxt.append(len(parent) - 1)
        front = nxt
    level = np.array(level)
    complete = level < depth
    return TreeWindow(parent=np.array(parent), root=0, finite=True, complete=complete, level=level)


def regular_tree_cover(k: int, r: int, depth: int | None = None) -> CoveringRule:
    """Disjoint radius-``r`` covering of the ``k``-regular tree.

    The ball containing the root has its centre uniform in ``N_r(o)``; further
    balls are grown outwards, each new centre lying ``r`` steps beyond the
    first uncovered vertex along a random downward path, which keeps balls
    pairwise disjoint.
    """
    if k < 3:
        raise DomainError("k must be at least 3")
    if r < 1:
        raise DomainError("r must be a positive integer")
    size_r = regular_ball_size(k, r)

    def assign(sample: RootedSample, rng):
        return _grow_regular(sample, r, rng)

    def root_radius(sample, rng):
        return float(r) if rng.integers(size_r) == 0 else 0.0

    def batch(rng, m):
        return np.where(rng.integers(size_r, size=m) == 0, float(r), 0.0)

    return CoveringRule(f"regular[k={k},r={r}]", r, r, 1, assign, root_radius, batch, 1.0 / size_r,
                        {"k": k, "ball": size_r})


def _grow_regular(sample: RootedSample, r: int, rng) -> CoveringAssignment:
    o = sample.root
    dist_o = sample.distances_from(o)
    par = np.full(sample.size, -1, dtype=np.int64)
    for a, b in sample.edges:
        if dist_o[a] < dist_o[b]:
            par[b] = a
        else:
            par[a] = b
    kids: list[list[int]] = [[] for _ in range(sample.size)]
    for v in np.argsort(dist_o, kind="stable"):
        if par[v] >= 0:
            kids[par[v]].append(int(v))
    covered = np.zeros(sample.size, dtype=bool)
    radii = np.zeros(sample.size)
    inner = np.flatnonzero(dist_o <= r + TOL)
    c0 = int(inner[rng.integers(inner.size)])
    radii[c0] = r
    covered[sample.distances_from(c0, r) <= r + TOL] = True
    while True:
        todo = np.flatnonzero(~covered & (par >= 0))
        todo = todo[covered[par[todo]]]
        if todo.size == 0:
            break
        for y in todo[np.argsort(dist_o[todo], kind="stable")]:
            if covered[y]:
                continue
            c, steps = int(y), 0
            while steps < r and kids[c]:
                c = kids[c][rng.integers(len(kids[c]))]
                steps += 1
            if steps == r:
                radii[c] = r
            # a walk cut short by the window edge stands for a centre outside it
            covered[sample.distances_from(c, steps) <= steps + TOL] = True
    return CoveringAssignment(radii, r, f"regular[r={r}]")


# -- self-similar blocks --------------------------------------------------------------------


def _codes(sample: RootedSample) -> np.ndarray:
    if "codes" in sample.marks:
        return np.asarray(sample.marks["codes"], dtype=np.int64)
    if "code" in sample.marks:
        return np.asarray(sample.marks["code"], dtype=np.int64)[:, None]
    raise DomainError("block rules need a 'code' or 'codes' mark")


def block_rule(period: int, radius: float, name: str = "block",
               root_residue: Callable[[np.random.Generator, int], np.ndarray] | None = None) -> CoveringRule:
    """One ball of radius ``radius`` per block of ``period`` consecutive codes.

    A shared offset ``γ`` uniform in ``{0..period-1}`` picks, in every block,
    the point whose code is ``γ`` modulo ``period``; ``radius`` must bound the
    block diameter. Points carrying several codes (padding ``-1``) are centres
    when any of them matches. ``root_residue(rng, n)`` draws the root code
    modulo ``period`` from its law and enables the batch path.
    """
    if period < 1 or radius <= 0:
        raise DomainError("period and radius must be positive")

    def assign(sample, rng):
        g = int(rng.integers(period))
        c = _codes(sample)
        hit = np.any((c >= 0) & (c % period == g), axis=1)
        return CoveringAssignment(np.where(hit, radius, 0.0), radius, name)

    def root_radius(sample, rng):
        g = int(rng.integers(period))
        c = _codes(sample)[sample.root]
        return radius if np.any((c >= 0) & (c % period == g)) else 0.0

    batch = None
    if root_residue is not None:
        def batch(rng, m):
            g = rng.integers(period, size=m)
            return np.where(np.asarray(root_residue(rng, m)) % period == g, radius, 0.0)

    # blocks are disjoint, so every point lies in exactly one candidate ball of its own block
    return CoveringRule(f"{name}[period={period}]", radius, radius, None, assign, root_radius, batch,
                        None, {"period": period})
