"""Experiment configuration: YAML in, schema check, explicit defaults, stable digest."""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import jsonschema
import yaml

from unidim.catalog import MODELS, RULES, model
from unidim.errors import DomainError
from unidim.sampling import g_catalog

OUT_ENV = "UNIDIM_OUT"
DEFAULT_OUT = "unidim-out"
# each statistical MTP replicate draws a whole window
MTP_N = 2000
COMMANDS = ("gen", "cover", "dim", "kappa", "mtp-check", "intensity", "measure")

_params = {"type": "object", "additionalProperties": {"type": ["number", "string", "boolean"]}}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "model": {
            "type": "object", "additionalProperties": False, "required": ["name"],
            "properties": {"name": {"enum": sorted(MODELS)}, "params": _params},
        },
        "rule": {
            "type": "object", "additionalProperties": False, "required": ["family"],
            "properties": {"family": {"enum": sorted(RULES)}, "params": _params},
        },
        "scales": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "alpha": {
            "type": "object", "additionalProperties": False,
            "properties": {"value": {"type": "number", "minimum": 0}},
        },
        "floors": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "g": {"type": "array", "items": {"enum": sorted(g_catalog())}, "minItems": 1},
        "spaces": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "count": {"type": "integer", "minimum": 1},
        "n": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "out": {"type": "string"},
    },
}

# keys that never change results, so they stay out of the digest
_VOLATILE = ("out",)


class ConfigError(DomainError):
    """The configuration failed schema validation or names unknown entries."""


def validate(cfg: dict) -> None:
    v = jsonschema.Draft7Validator(SCHEMA)
    errs = sorted(v.iter_errors(cfg), key=lambda e: list(e.path))
    if errs:
        e = errs[0]
        where = "/".join(str(p) for p in e.path) or "<root>"
        raise ConfigError(f"config {where}: {e.message}")


def load(path) -> dict:
    try:
        cfg = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse {path}: {e}") from None
    cfg = {} if cfg is None else cfg
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping")
    return cfg


def merge(base: dict, over: dict) -> dict:
    """Nested update; ``None`` values in ``over`` leave ``base`` untouched."""
    out = dict(base)
    for k, v in over.items():
        if v is None:
            continue
        if isinstance(v, dict):
            out[k] = merge(out[k] if isinstance(out.get(k), dict) else {}, v)
        else:
            out[k] = v
    return out


def _default_family(m, command: str) -> str | None:
    if command == "measure" and "disjoint-lattice" in m.rules:
        return "disjoint-lattice"
    return m.rules[0] if m.rules else None


def default_scales(family: str | None) -> list:
    # block families live on powers of their contraction base
    if family in ("cantor-block", "koch-block"):
        return [3.0 ** j for j in range(1, 6)]
    return [2.0 ** j for j in range(1, 7)]


def resolve(cfg: dict, command: str) -> dict:
    """Validated config with every default written out."""
    validate(cfg)
    if cfg.get("command", command) != command:
        raise ConfigError(f"config is for {cfg['command']!r}, not {command!r}")
    out = {"command": command, "seed": int(cfg.get("seed", 0)),
           "out": str(cfg.get("out") or os.environ.get(OUT_ENV) or DEFAULT_OUT)}
    if command == "kappa":
        if "spaces" not in cfg:
            raise ConfigError("kappa needs two space files")
        out.update(spaces=[str(s) for s in cfg["spaces"]], tol=float(cfg.get("tol", 1e-3)))
        return out
    if "model" not in cfg:
        raise ConfigError(f"{command} needs a model")
    m = model(cfg["model"]["name"])
    try:
        out["model"] = {"name": m.name, "params": m.resolve(cfg["model"].get("params"))}
    except ConfigError:
        raise
    except DomainError as e:
        raise ConfigError(str(e)) from None
    if command == "gen":
        out["count"] = int(cfg.get("count", 1))
    else:
        out["n"] = int(cfg.get("n", MTP_N if command == "mtp-check" else m.default_n))
    if command == "mtp-check":
        out["g"] = list(cfg.get("g", m.g))
    if command in ("cover", "intensity", "measure"):
        fam = cfg.get("rule", {}).get("family") or _default_family(m, command)
        if fam is None and not (command == "measure" and m.name == "finite"):
            raise ConfigError(f"model {m.name} has no covering-rule family")
        if fam is not None:
            if m.name not in RULES[fam].models:
                raise ConfigError(f"rule {fam} does not apply to model {m.name}")
            # rule builders read model parameters, so only those may be overridden
            rp = dict(cfg.get("rule", {}).get("params", {}))
            bad = sorted(set(rp) - set(m.params))
            if bad:
                raise ConfigError(f"unknown rule parameters {bad}")
            out["rule"] = {"family": fam, "params": {k: m.params[k].coerce(k, v) for k, v in rp.items()}}
    if command in ("cover", "intensity"):
        out["scales"] = [float(s) for s in cfg.get("scales", default_scales(out["rule"]["family"]))]
    if command == "measure":
        a = cfg.get("alpha", {})
        out["alpha"] = {"value": float(a.get("value", 0.0 if m.name == "finite" else 1.0))}
        out["floors"] = [float(s) for s in cfg.get("floors", [2.0 ** j for j in range(7)])]
    return out


def digest(resolved: dict) -> str:
    body = {k: v for k, v in resolved.items() if k not in _VOLATILE}
    text = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def dump(resolved: dict) -> str:
    return yaml.safe_dump(resolved, sort_keys=True, default_flow_style=False)
