"""Built-in models, covering-rule families and transport functions, with parameter schemas."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from unidim import experiments as ex
from unidim.coverings import (CoveringRule, interval_rule, regular_tree_cover, regular_tree_window,
                              shifted_lattice_cover)
from unidim.errors import DomainError
from unidim.generators import (JumpDistribution, OffspringDistribution, canopy_level_cover, cantor_ifs, folded_ifs,
                               gen_canopy, gen_cantor, gen_drainage, gen_egw, gen_generalized_canopy, gen_koch,
                               gen_lattice, gen_self_similar, gen_srw_image, gen_srw_zeros, gen_subdivision,
                               sierpinski_ifs)
from unidim.generators.canopy import designed_law
from unidim.generators.lattice import sublattice_cover_radius, sublattice_multiplicity
from unidim.generators.selfsimilar import cantor_block_rule, ifs_block_rule, koch_block_rule
from unidim.sampling import RootedSampler, finite_space_sampler, g_catalog
from unidim.space import RootedSample


@dataclass(frozen=True)
class Param:
    type: type
    default: Any
    help: str
    choices: tuple | None = None

    def coerce(self, name: str, value):
        if self.type is bool and not isinstance(value, bool):
            raise DomainError(f"{name} must be a boolean")
        try:
            v = self.type(value)
        except (TypeError, ValueError):
            raise DomainError(f"{name} must be of type {self.type.__name__}") from None
        if self.type is int and isinstance(value, float) and value != int(value):
            raise DomainError(f"{name} must be an integer")
        if self.choices is not None and v not in self.choices:
            raise DomainError(f"{name} must be one of {list(self.choices)}")
        return v


@dataclass(frozen=True)
class Model:
    name: str
    summary: str
    params: dict
    build: Callable[[dict, int], RootedSampler]
    dim: Callable[[dict, int, int], "ex.Outcome"]
    g: tuple
    rules: tuple
    default_n: int = 100_000

    def resolve(self, given: dict | None) -> dict:
        given = dict(given or {})
        unknown = set(given) - set(self.params)
        if unknown:
            raise DomainError(f"unknown parameters for {self.name}: {sorted(unknown)}")
        return {k: p.coerce(k, given.get(k, p.default)) for k, p in self.params.items()}


@dataclass(frozen=True)
class RuleFamily:
    name: str
    summary: str
    K: str
    models: tuple
    build: Callable[[dict, float], CoveringRule]


IFS = {"sierpinski": sierpinski_ifs, "cantor": cantor_ifs, "folded": folded_ifs}


def _ifs(p):
    return IFS[p["ifs"]]()


def _line_points(size: int) -> RootedSample:
    return RootedSample.from_coords(np.arange(size, dtype=float), metric="euclidean")


def _finite(p, seed):
    sizes = [int(s) for s in str(p["sizes"]).split(",")]
    probs = [float(s) for s in str(p["probs"]).split(",")]
    if len(sizes) != len(probs) or min(sizes) < 1:
        raise DomainError("sizes and probs must be matching comma lists with positive sizes")
    S = finite_space_sampler([_line_points(s) for s in sizes], probs, seed, "finite")
    if p["root"] == "uniform":
        return S
    # pinning the root to an end point breaks unimodularity; kept as a negative control
    return RootedSampler("finite", lambda rng: S.draw_fn(rng).reroot(0), seed, dict(S.params, root="first"))


def _finite_dim(p, n, seed):
    sizes = [int(s) for s in str(p["sizes"]).split(",")]
    probs = [float(s) for s in str(p["probs"]).split(",")]
    m = ex.finite_measure(ex.mixture_sizes(sizes, probs, n, seed))
    from unidim.estimators import DimensionReport

    rep = DimensionReport("finite", "euclidean", 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, {0: m.value})
    return ex.Outcome(rep, {"measure": ex.Table(("alpha", "value", "ci"), [(0.0, m.value, m.ci)])}, {"measure": m})


def _pareto(p):
    return JumpDistribution("pareto", p["beta"])


def _offspring(p):
    return OffspringDistribution(p["offspring"], p["param"])


MODELS: dict[str, Model] = {}


def _add(m: Model):
    MODELS[m.name] = m


_add(Model(
    "lattice", "Scaled lattice δZ^k rooted at 0.",
    {"k": Param(int, 2, "dimension"), "delta": Param(float, 1.0, "spacing"),
     "window": Param(int, 10, "half-width of the window"),
     "metric": Param(str, "linf", "norm", ("linf", "l1", "euclidean"))},
    lambda p, s: gen_lattice(p["k"], p["delta"], p["window"], p["metric"], seed=s),
    lambda p, n, s: ex.lattice_dim(p["k"], n, s),
    ("self", "near1", "near2", "degree", "nearest"), ("shifted-lattice", "disjoint-lattice")))
_add(Model(
    "lattice-cayley", "Cayley graph of Z^2 under a generating set.",
    {"generators": Param(str, "standard", "generating set", ("standard", "hexagonal")),
     "window": Param(int, 10, "half-width of the window")},
    lambda p, s: gen_lattice(2, 1.0, p["window"], generators=p["generators"], seed=s),
    lambda p, n, s: ex.lattice_dim(2, n, s, p["generators"]),
    ("self", "near1", "near2", "degree", "nearest"), ("cayley-lattice",)))
_add(Model(
    "canopy", "Canopy tree with graph, geometric or factorial edge lengths.",
    {"k": Param(int, 4, "branching"), "variant": Param(str, "geometric", "edge lengths", ("graph", "geometric",
                                                                                          "factorial")),
     "a": Param(float, 2.0, "ratio of the geometric variant"), "depth": Param(int, 40, "largest root level")},
    lambda p, s: gen_canopy(p["k"], p["variant"], p["a"], p["depth"], seed=s),
    lambda p, n, s: ex.canopy_dim(p["k"], p["variant"], p["a"], max(n, 10_000_000), s, depth=p["depth"]),
    ("self", "near1", "degree", "up"), ("canopy-levels", "cone")))
_add(Model(
    "generalized-canopy", "Canopy of stacked stationary level processes with a designed level law.",
    {"alpha": Param(float, 0.5, "lower exponent"), "beta": Param(float, 0.75, "upper exponent"),
     "gamma": Param(float, 1.2, "steepness bound"), "width": Param(float, 50.0, "window half-width")},
    lambda p, s: gen_generalized_canopy(designed_law(p["alpha"], p["beta"], p["gamma"]), p["width"], seed=s),
    lambda p, n, s: ex.generalized_canopy_dim(p["alpha"], p["beta"], p["gamma"], n, seed=s),
    ("self", "up"), ("cone",)))
_add(Model(
    "egw", "Eternal Galton-Watson tree with critical offspring.",
    {"offspring": Param(str, "geometric", "offspring law", ("geometric", "poisson")),
     "param": Param(float, 0.5, "geometric p or Poisson mean"), "depth": Param(int, 4096, "height cap")},
    lambda p, s: gen_egw(_offspring(p), p["depth"], s),
    lambda p, n, s: ex.egw_dim(n, p["depth"], s, _offspring(p)),
    ("self", "near1", "degree", "up"), ("cone",)))
_add(Model(
    "srw-image", "Image of a two-sided walk with positive Pareto jumps.",
    {"beta": Param(float, 0.5, "Pareto tail exponent"), "steps": Param(int, 200, "steps each side")},
    lambda p, s: gen_srw_image(_pareto(p), p["steps"], s),
    lambda p, n, s: ex.srw_image_dim(p["beta"], n, s),
    ("self", "near2", "nearest"), ("interval",)))
_add(Model(
    "srw-zeros", "Zero set of the two-sided simple random walk.",
    {"steps": Param(int, 4096, "steps each side"), "cap": Param(int, 1 << 16, "return-time cap")},
    lambda p, s: gen_srw_zeros(p["steps"], p["cap"], s),
    lambda p, n, s: ex.srw_zeros_dim(n, p["cap"], s),
    ("self", "near2", "nearest"), ("interval",)))
_add(Model(
    "subdivision", "Image of a Pareto walk with each gap split into ceil(S^alpha) parts.",
    {"beta": Param(float, 0.8, "Pareto tail exponent"), "alpha": Param(float, 0.5, "subdivision exponent"),
     "steps": Param(int, 200, "steps each side")},
    lambda p, s: gen_subdivision(_pareto(p), p["alpha"], p["steps"], seed=s),
    lambda p, n, s: ex.subdivision_dim(p["beta"], p["alpha"], n, s),
    ("self", "near2", "nearest"), ("interval",)))
_add(Model(
    "drainage", "Drainage network on the even lattice under the graph metric.",
    {"half": Param(int, 12, "window half-width"), "nmax": Param(int, 4000, "height cap")},
    lambda p, s: gen_drainage(p["half"], p["half"], p["half"], p["nmax"], s),
    lambda p, n, s: ex.drainage_dim(min(n, 10_000), p["nmax"], s),
    ("self", "near1", "degree", "up"), ("cone",)))
_add(Model(
    "cantor", "Discrete Cantor set (digits 0 and 2).",
    {"depth": Param(int, 12, "construction depth"),
     "construction": Param(str, "nested", "construction", ("nested", "digit"))},
    lambda p, s: gen_cantor(p["depth"], p["construction"], s),
    lambda p, n, s: ex.cantor_dim(p["depth"], n, s, p["construction"]),
    ("self", "near2", "nearest"), ("cantor-block",)))
_add(Model(
    "koch", "Discrete Koch curve on the triangular lattice.",
    {"depth": Param(int, 8, "construction depth")},
    lambda p, s: gen_koch(p["depth"], s),
    lambda p, n, s: ex.koch_dim(p["depth"], n, s),
    ("self", "near1", "near2", "nearest"), ("koch-block",)))
_add(Model(
    "self-similar", "Discrete self-similar set of an equal-ratio IFS, biased by 1/w(o).",
    {"ifs": Param(str, "sierpinski", "IFS", tuple(IFS)), "depth": Param(int, 9, "construction depth")},
    lambda p, s: gen_self_similar(_ifs(p), p["depth"], seed=s),
    lambda p, n, s: ex.self_similar_dim(_ifs(p), p["depth"], n, s),
    ("self", "near1", "near2"), ("ifs-block",)))
_add(Model(
    "regular-tree", "k-regular tree.",
    {"k": Param(int, 3, "degree"), "depth": Param(int, 8, "window radius")},
    lambda p, s: RootedSampler("regular-tree", lambda rng: regular_tree_window(p["k"], p["depth"]).to_sample(), s,
                               dict(p)),
    lambda p, n, s: ex.regular_tree_dim(p["k"], n, s),
    ("self", "near1", "near2", "degree"), ("regular-tree",)))
_add(Model(
    "finite", "Mixture of finite point sets on the line, rooted uniformly (or pinned, as a control).",
    {"sizes": Param(str, "2,4", "comma list of sizes"), "probs": Param(str, "0.5,0.5", "comma list of weights"),
     "root": Param(str, "uniform", "root choice; 'first' is a non-unimodular control", ("uniform", "first"))},
    _finite, _finite_dim, ("self", "near1", "near2", "nearest"), ()))


def _lattice_rule(p, r):
    m = max(1, int(round(2 * r)))
    return shifted_lattice_cover(p.get("k", 2), p.get("delta", 1.0), m, norm="linf", radius="tight")


def _disjoint_rule(p, r):
    d = p.get("delta", 1.0)
    return shifted_lattice_cover(p.get("k", 2), d, max(1, math.ceil(r / d - 1e-12)), norm="linf", disjoint=True)


def _cayley_rule(p, r):
    g = p.get("generators", "standard")
    m = max(1, int(round(r)))
    cr = sublattice_cover_radius(m, g)
    rule = shifted_lattice_cover(2, 1.0, m, norm="cayley", cayley_radius=cr)
    rule.K = sublattice_multiplicity(m, cr, g)
    return rule


def _canopy_rule(p, r):
    from unidim.generators.canopy import level_offsets

    W = level_offsets(p.get("variant", "geometric"), 64, p.get("a", 2.0))
    n = max(1, int(np.searchsorted(W, r, side="right") - 1))
    return canopy_level_cover(p.get("k", 4), n, p.get("variant", "geometric"), p.get("a", 2.0), p.get("depth", 40))


def _cone_rule(p, r):
    from unidim.coverings import cone_rule

    return cone_rule(max(1, int(r)))


def _block_level(r, base):
    return max(1, int(math.floor(math.log(max(r, 1.0)) / math.log(base) + 1e-9)))


RULES: dict[str, RuleFamily] = {
    f.name: f for f in [
        RuleFamily("shifted-lattice", "Balls of the tight linf radius on a randomly shifted sub-lattice.", "2^k",
                   ("lattice",), _lattice_rule),
        RuleFamily("disjoint-lattice", "Disjoint linf cubes of radius r on a shifted sub-lattice.", "1",
                   ("lattice",), _disjoint_rule),
        RuleFamily("cayley-lattice", "Word-metric balls of the sub-lattice covering radius.",
                   "exact count on one cell", ("lattice-cayley",), _cayley_rule),
        RuleFamily("canopy-levels", "Balls of radius W[n] at every vertex of level at least n.",
                   "1 for geometric a >= 2, else audited", ("canopy",), _canopy_rule),
        RuleFamily("cone", "Cone covering of one-ended trees (selection of residual height n).",
                   "not K-bounded; content only", ("canopy", "generalized-canopy", "egw", "drainage"), _cone_rule),
        RuleFamily("interval", "One ball per randomly shifted cell of length r on the line.", "3",
                   ("srw-image", "srw-zeros", "subdivision"), lambda p, r: interval_rule(float(r))),
        RuleFamily("cantor-block", "One ball per level-m block of the Cantor set.", "audited (1 in practice)",
                   ("cantor",), lambda p, r: cantor_block_rule(_block_level(r, 3))),
        RuleFamily("koch-block", "One ball per copy of T_m along the Koch path.", "audited",
                   ("koch",), lambda p, r: koch_block_rule(max(2, _block_level(r, 3) + 1))),
        RuleFamily("ifs-block", "One ball per level-m block of a self-similar set.", "audited",
                   ("self-similar",), lambda p, r: ifs_block_rule(_ifs({"ifs": p.get("ifs", "sierpinski")}),
                                                                  _block_level(r, 2))),
        RuleFamily("regular-tree", "Disjoint radius-r balls grown outwards from the root's ball.", "1",
                   ("regular-tree",), lambda p, r: regular_tree_cover(p.get("k", 3), max(1, int(r)))),
    ]
}


def catalog() -> dict:
    """Structured listing of models, rule families and transport functions."""
    gs = g_catalog()
    return {
        "models": {m.name: {"summary": m.summary, "g": list(m.g), "rules": list(m.rules),
                            "params": {k: {"type": p.type.__name__, "default": p.default, "help": p.help,
                                           **({"choices": list(p.choices)} if p.choices else {})}
                                       for k, p in m.params.items()}}
                   for m in MODELS.values()},
        "rules": {f.name: {"summary": f.summary, "K": f.K, "models": list(f.models)} for f in RULES.values()},
        "g": {name: {"support": g.support, "reach": g.reach} for name, g in gs.items()},
    }


def model(name: str) -> Model:
    if name not in MODELS:
        raise DomainError(f"unknown model {name!r}; see `unidim catalog`")
    return MODELS[name]


def transport(names) -> list:
    gs = g_catalog()
    bad = [n for n in names if n not in gs]
    if bad:
        raise DomainError(f"unknown g-functions {bad}")
    return [gs[n] for n in names]
