"""Command-line front end.

Every command resolves a config (YAML file and/or flags), writes the resolved
copy next to its outputs, and names every output file after the config digest.

CSV schemas
  gen        <cmd>-<model>-<digest>.csv: replicate, size, root, root_margin (plus one .space file per draw)
  cover      r, p_hat, ci, K, lambda_lo, lambda_hi
  intensity  scale, value, ci
  dim        main curve scale, value, ci; .loglog.csv holds log10 scale, log10 value;
             every table behind the report is also written under its own name
  mtp-check  g, out_mass, in_mass, z, threshold, n, rejected
  measure    floor, content, ci, rule

Exit status: 0 on success, 2 when a cross-check or diagnostic is red-flagged, 1 on errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from unidim import catalog as cat
from unidim import config as cfgmod
from unidim import experiments as ex
from unidim import space as sp
from unidim.coverings import lambda_r_bounds, root_radii
from unidim.errors import DomainError, WindowTooSmallError
from unidim.estimators import (ContentEstimate, cross_checks, hausdorff_measure_sweep, minkowski_estimate)
from unidim.kappa import kappa
from unidim.sampling import mtp_check_statistical, proportion
from unidim.trees import TreeWindow

OK, ERROR, RED = 0, 1, 2


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".10g")
    return str(x)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(x) for x in r])
    return buf.getvalue()


class Run:
    """Output bookkeeping for one command invocation."""

    def __init__(self, resolved: dict):
        self.cfg = resolved
        self.digest = cfgmod.digest(resolved)
        self.dir = Path(resolved["out"])
        self.dir.mkdir(parents=True, exist_ok=True)
        tag = resolved.get("model", {}).get("name")
        self.stem = "-".join(x for x in (resolved["command"], tag, self.digest) if x)
        self.files: list[Path] = []
        self.write("config.yaml", cfgmod.dump(resolved))

    def path(self, suffix: str) -> Path:
        return self.dir / f"{self.stem}.{suffix}" if suffix else self.dir / self.stem

    def write(self, suffix: str, text: str) -> Path:
        p = self.path(suffix)
        p.write_text(text)
        self.files.append(p)
        return p

    def table(self, name: str | None, columns, rows) -> Path:
        return self.write(f"{name}.csv" if name else "csv", csv_text(columns, rows))

    def report(self, body: dict, text: str) -> None:
        meta = {"digest": self.digest, "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                "config": self.cfg}
        self.write("report.json", json.dumps({"meta": meta, **body}, indent=2, default=_json) + "\n")
        self.write("report.txt", text.rstrip() + "\n")


def _json(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x).__name__)


def _num(x):
    if x is None:
        return None
    x = float(x)
    return "inf" if math.isinf(x) else x


def _sampler(r: dict):
    m = cat.model(r["model"]["name"])
    return m, r["model"]["params"], m.build(r["model"]["params"], r["seed"])


def _rule_family(r: dict):
    fam = cat.RULES[r["rule"]["family"]]
    params = {**r["model"]["params"], **r["rule"]["params"]}
    return fam, params


# -- commands -----------------------------------------------------------------------------


def cmd_gen(r: dict) -> int:
    run = Run(r)
    _, _, S = _sampler(r)
    rows = []
    for i in range(r["count"]):
        s = S.draw(i)
        if isinstance(s, TreeWindow):
            s = s.to_sample()
        sp.save(s, run.path(f"{i}.space"))
        run.files.append(run.path(f"{i}.space"))
        rows.append((i, s.size, s.root, float(s.margin[s.root])))
    run.table(None, ("replicate", "size", "root", "root_margin"), rows)
    print(f"gen: {r['count']} draws of {r['model']['name']} -> {run.dir}/{run.stem}.*")
    return OK


def cmd_cover(r: dict) -> int:
    run = Run(r)
    _, _, S = _sampler(r)
    fam, params = _rule_family(r)
    bounds, skipped = [], []
    for scale in r["scales"]:
        rule = fam.build(params, scale)
        try:
            b = lambda_r_bounds(S, rule, n=r["n"], seed=r["seed"])
        except WindowTooSmallError:
            # windows too small for the audit: fall back to the declared K
            if rule.K is None:
                raise
            b = lambda_r_bounds(S, rule, n=r["n"], audit_reps=0, seed=r["seed"])
            skipped.append(b.r)
        bounds.append(b)
    tab = ex.bounds_table(bounds)
    run.table(None, tab.columns, tab.rows)
    body = {"rule": fam.name, "K": fam.K, "bounds": [dict(zip(tab.columns, map(_num, row))) for row in tab.rows]}
    lines = [f"cover {r['model']['name']} / {fam.name} (K: {fam.K})"]
    lines += [f"  r={b.r:g}  lambda in [{b.lo:.5g}, {b.hi:.5g}]  (p_hat {b.p.estimate:.5g} +- {b.p.ci:.2g})"
              for b in bounds]
    if skipped:
        body["unaudited"] = skipped
        lines.append(f"  K taken as declared (window too small to audit) at r = {', '.join(f'{x:g}' for x in skipped)}")
    if len(bounds) >= 5 and len({b.K for b in bounds}) == 1 and all(b.hi > 0 for b in bounds):
        mk = minkowski_estimate(bounds)
        body["minkowski"] = {"point": mk.point, "ci": mk.ci, "lower": mk.lower, "upper": mk.upper,
                             "superpoly": mk.superpoly}
        lines.append(f"  Minkowski decay {mk.point:.4f} +- {mk.ci:.3f} (window proxies {mk.lower:.4f}..{mk.upper:.4f})")
    run.report(body, "\n".join(lines))
    print("\n".join(lines))
    return OK


def cmd_intensity(r: dict) -> int:
    run = Run(r)
    _, _, S = _sampler(r)
    fam, params = _rule_family(r)
    rows = []
    for scale in r["scales"]:
        rule = fam.build(params, scale)
        p = proportion(root_radii(S, rule, r["n"], r["seed"]) > 0)
        rows.append((rule.scale, p.estimate, p.ci))
    run.table(None, ("scale", "value", "ci"), rows)
    lines = [f"intensity of {fam.name} centres on {r['model']['name']}"]
    lines += [f"  scale={a:g}  P(o centre)={b:.5g} +- {c:.2g}" for a, b, c in rows]
    run.report({"rule": fam.name, "rows": [dict(scale=a, value=b, ci=c) for a, b, c in rows]}, "\n".join(lines))
    print("\n".join(lines))
    return OK


def primary_curve(tables: dict) -> list:
    """The run's main ``(scale, value, ci)`` curve from whichever table it produced."""
    for tab in tables.values():
        if tab.columns == ("scale", "value", "ci"):
            return list(tab.rows)
    if "lambda" in tables:
        t = tables["lambda"]
        return list(zip(t.column("r"), t.column("p_hat"), t.column("ci")))
    if "contents" in tables:
        t = tables["contents"]
        a = t.column("alpha")
        keep = a == a.min()
        return list(zip(t.column("scale")[keep], t.column("value")[keep], t.column("ci")[keep]))
    if "growth" in tables:
        t = tables["growth"]
        return [(x, y, 0.0) for x, y in zip(t.column("scale"), t.column("max_count"))]
    return []


def loglog(rows) -> list:
    return [(math.log10(x), math.log10(y)) for x, y, _ in rows if x > 0 and y > 0 and math.isfinite(y)]


def _report_text(rep) -> str:
    d = rep.as_dict()
    lines = [f"model {d['model']} (metric {d['metric']})",
             f"  Minkowski  [{d['minkowski'][0]}, {d['minkowski'][1]}]  ci {d['minkowski_ci']}",
             f"  Hausdorff  [{d['hausdorff'][0]}, {d['hausdorff'][1]}]  upper ci {d['hausdorff_upper_ci']}"]
    for a, v in d["measures"].items():
        lines.append(f"  measure alpha={a}: {v}")
    lines += [f"  note: {n}" for n in d["notes"]]
    return "\n".join(lines)


def cmd_dim(r: dict) -> int:
    run = Run(r)
    m = cat.model(r["model"]["name"])
    out = m.dim(r["model"]["params"], r["n"], r["seed"])
    for name, tab in sorted(out.tables.items()):
        run.table(name, tab.columns, tab.rows)
    main = primary_curve(out.tables)
    run.table(None, ("scale", "value", "ci"), main)
    run.table("loglog", ("log10_scale", "log10_value"), loglog(main))
    audit = cross_checks([out.report])
    text = _report_text(out.report) + "\n" + "\n".join(
        f"  check {c.name}: {'ok' if c.ok else 'RED'} ({c.detail})" for c in audit.checks)
    run.report({"report": out.report.as_dict(),
                "checks": [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in audit.checks]}, text)
    print(text)
    return RED if audit.red else OK


def cmd_mtp(r: dict) -> int:
    run = Run(r)
    _, _, S = _sampler(r)
    reps = mtp_check_statistical(S, cat.transport(r["g"]), r["n"])
    rows = [(x.name, x.out_mass, x.in_mass, x.z, x.threshold, x.n, x.rejected) for x in reps]
    run.table(None, ("g", "out_mass", "in_mass", "z", "threshold", "n", "rejected"), rows)
    lines = [f"mtp-check {r['model']['name']}"]
    lines += [f"  {x.name:8s} out {x.out_mass:.5g}  in {x.in_mass:.5g}  z {x.z:+.2f}  "
              f"{'REJECT' if x.rejected else 'pass'}" for x in reps]
    red = any(x.rejected for x in reps)
    run.report({"results": [dict(zip(("g", "out_mass", "in_mass", "z", "threshold", "n", "rejected"), row))
                            for row in rows], "passed": not red}, "\n".join(lines))
    print("\n".join(lines))
    return RED if red else OK


def cmd_measure(r: dict) -> int:
    run = Run(r)
    m, params, S = _sampler(r)
    alpha = r["alpha"]["value"]
    if m.name == "finite":
        if alpha != 0:
            raise DomainError("finite spaces only carry the 0-dimensional measure here")
        sizes = [int(s) for s in str(params["sizes"]).split(",")]
        probs = [float(s) for s in str(params["probs"]).split(",")]
        est = ex.finite_measure(ex.mixture_sizes(sizes, probs, r["n"], r["seed"]))
        rows = [(0.0, 1.0 / est.value, 0.0, "points")]
    else:
        fam, fp = _rule_family(r)
        est = hausdorff_measure_sweep(S, lambda M: [fam.build(fp, M)], alpha, r["floors"], n=r["n"], seed=r["seed"])
        rows = [(M, c.value, c.ci, c.rule) for M, c in zip(r["floors"], est.contents)
                if isinstance(c, ContentEstimate)]
    run.table(None, ("floor", "content", "ci", "rule"), rows)
    text = (f"measure alpha={alpha:g} of {m.name}: {est.kind} {_num(est.value)} +- {est.ci:.3g}"
            f" (contents monotone in floor: {est.monotone})")
    run.report({"alpha": alpha, "value": _num(est.value), "ci": est.ci, "kind": est.kind,
                "monotone": est.monotone}, text)
    print(text)
    return OK if est.monotone else RED


def cmd_kappa(r: dict) -> int:
    run = Run(r)
    a, b = (sp.load(p) for p in r["spaces"])
    v = kappa(a, b, r["tol"])
    text = f"kappa = {v:.6g} (tol {r['tol']:g})"
    run.report({"kappa": v, "tol": r["tol"], "spaces": r["spaces"]}, text)
    print(text)
    return OK


def cmd_catalog(args) -> int:
    c = cat.catalog()
    if args.json:
        print(json.dumps(c, indent=2, sort_keys=True))
        return OK
    print("models:")
    for name, m in c["models"].items():
        ps = ", ".join(f"{k}={v['default']}" for k, v in m["params"].items())
        print(f"  {name:20s} {m['summary']}\n  {'':20s} params: {ps}\n  {'':20s} rules: {', '.join(m['rules']) or '-'}"
              f"; g: {', '.join(m['g'])}")
    print("rule families:")
    for name, f in c["rules"].items():
        print(f"  {name:18s} K: {f['K']:32s} {f['summary']}")
    print("g-functions:")
    for name, g in c["g"].items():
        print(f"  {name:8s} reach {g['reach']:g}")
    return OK


COMMANDS = {"gen": cmd_gen, "cover": cmd_cover, "dim": cmd_dim, "kappa": cmd_kappa, "mtp-check": cmd_mtp,
            "intensity": cmd_intensity, "measure": cmd_measure}


def _floats(text: str) -> list:
    return [float(x) for x in text.split(",") if x]


def _model_flags(extra: list) -> dict:
    """``--key value`` pairs left over by argparse become model parameters."""
    out, i = {}, 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or len(tok) < 3:
            raise DomainError(f"unexpected argument {tok!r}")
        key, eq, val = tok[2:].partition("=")
        if not eq:
            if i + 1 >= len(extra):
                raise DomainError(f"missing value for {tok}")
            val = extra[i + 1]
            i += 1
        out[key.replace("-", "_")] = yaml.safe_load(val)
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="unidim", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config; flags override its entries")
    common.add_argument("--out", help=f"output directory (default ${cfgmod.OUT_ENV} or ./{cfgmod.DEFAULT_OUT})")
    common.add_argument("--seed", type=int)
    modelled = argparse.ArgumentParser(add_help=False, parents=[common])
    modelled.add_argument("--model", help="model name (see `unidim catalog`); other --key value flags set its params")
    modelled.add_argument("--n", type=int, help="replicates")
    helps = {"gen": "draw rooted samples and save them as .space files",
             "cover": "covering-intensity bounds [p/K, p] over a scale grid",
             "dim": "dimension report with Minkowski and Hausdorff brackets",
             "mtp-check": "statistical mass transport check",
             "intensity": "intensity of covering-rule centres over a scale grid",
             "measure": "Hausdorff measure by floor sweep and extrapolation"}
    for name, h in helps.items():
        s = sub.add_parser(name, parents=[modelled], help=h, description=h)
        if name == "gen":
            s.add_argument("--count", type=int, help="number of draws")
        if name in ("cover", "intensity", "measure"):
            s.add_argument("--rule", help="covering-rule family")
        if name in ("cover", "intensity"):
            s.add_argument("--scales", type=_floats, help="comma list of scales")
        if name == "measure":
            s.add_argument("--alpha", type=float)
            s.add_argument("--floors", type=_floats, help="comma list of floors M")
        if name == "mtp-check":
            s.add_argument("--g", type=lambda t: [x for x in t.split(",") if x], help="comma list of g-functions")
    k = sub.add_parser("kappa", parents=[common], help="kappa distance between two saved spaces")
    k.add_argument("spaces", nargs="*", help="two .space files")
    k.add_argument("--tol", type=float)
    c = sub.add_parser("catalog", help="list models, rule families and g-functions")
    c.add_argument("--json", action="store_true", help="machine-readable output")
    return p


def config_from_args(args, extra: list) -> dict:
    base = cfgmod.load(args.config) if args.config else {}
    over: dict = {"seed": args.seed, "out": args.out}
    if args.command == "kappa":
        over.update(spaces=args.spaces or None, tol=args.tol)
    else:
        params = _model_flags(extra)
        if args.model and base.get("model", {}).get("name") not in (None, args.model):
            base = {k: v for k, v in base.items() if k not in ("model", "rule")}
        if args.model or params:
            over["model"] = {"name": args.model, "params": params or None}
        over.update(n=args.n, count=getattr(args, "count", None), scales=getattr(args, "scales", None),
                    floors=getattr(args, "floors", None), g=getattr(args, "g", None))
        if getattr(args, "rule", None):
            over["rule"] = {"family": args.rule}
        if getattr(args, "alpha", None) is not None:
            over["alpha"] = {"value": args.alpha}
    return cfgmod.merge(base, over)


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        if args.command == "catalog":
            if extra:
                raise DomainError(f"unexpected arguments {extra}")
            return cmd_catalog(args)
        if args.command == "kappa" and extra:
            raise DomainError(f"unexpected arguments {extra}")
        resolved = cfgmod.resolve(config_from_args(args, extra), args.command)
        return COMMANDS[args.command](resolved)
    except (DomainError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
