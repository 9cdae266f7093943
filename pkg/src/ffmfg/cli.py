"""Command line entry point: ``ffmfg <subcommand> ...``.

Every artifact is deterministic in (config, seed): JSON is written with sorted
keys, floats in repr form, and no timestamps or absolute paths.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import SCHEMA, config_hash, load_scenario
from .errors import FfmfgError


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n")
    return path


def write_csv(path: Path, columns, rows) -> Path:
    # the model is nondimensional: columns without an explicit unit are marked [-]
    cols = [c if "[" in c else f"{c} [-]" for c in columns]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return path


def _series_rows(rec):
    cols = ["t", *rec.series]
    rows = [(float(t), *(float(rec.series[c][i]) for c in rec.series)) for i, t in enumerate(rec.times)]
    return cols, rows


def _snapshot_rows(state):
    n1, n2 = state.variant.names
    rows = list(zip(state.grid.x.tolist(), state.first.values.tolist(), state.second.values.tolist()))
    return ["x", n1, n2], rows


def manifest(command: str, raw_config: dict | None, metrics: dict, artifacts, seed=None) -> dict:
    out = {"command": command, "version": __version__, "metrics": metrics,
           "artifacts": sorted(str(a) for a in artifacts)}
    if raw_config is not None:
        out["config_sha256"] = config_hash(raw_config)
    if seed is not None:
        out["seed"] = int(seed)
    return out


def _out_dir(args, default: str) -> Path:
    out = Path(args.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    from .runner import run

    sc = load_scenario(args.config)
    out = _out_dir(args, f"runs/{sc.name}")
    res = run(sc)
    arts = []
    if res.record is not None:
        arts.append(write_csv(out / "series.csv", *_series_rows(res.record)).name)
        for i, st in enumerate(res.record.snapshots):
            tag = "initial" if i == 0 else ("final" if i == len(res.record.snapshots) - 1 else f"{i:05d}")
            arts.append(write_csv(out / f"snapshot_{tag}.csv", *_snapshot_rows(st)).name)
    for name, (cols, rows) in res.tables.items():
        arts.append(write_csv(out / f"{name}.csv", cols, rows).name)
    write_json(out / "manifest.json", manifest("simulate", sc.raw, res.metrics, arts + ["manifest.json"]))
    print(f"{sc.name}: {res.metrics.get('status', 'ok')} -> {out / 'manifest.json'}")
    return 0


def _table_text(key: str, basis) -> str:
    lines = [f"conservation laws for {key}", f"{'degree':>6}  law"]
    for E in basis:
        lines.append(f"{E.degree:>6}  {E}")
    return "\n".join(lines)


def cmd_derive(args) -> int:
    import sympy as sp

    from .entropy import polynomial_entropy_basis
    from .tables import PROBLEM_KEYS, pde_for

    if args.problem not in PROBLEM_KEYS:
        raise FfmfgError(f"unknown problem {args.problem!r}; choose from {', '.join(PROBLEM_KEYS)}")
    alpha = None if args.alpha is None else sp.Rational(args.alpha)
    pde = pde_for(args.problem, alpha=alpha)
    basis = polynomial_entropy_basis(pde, args.degree)
    payload = {"problem": args.problem, "degree": args.degree, "alpha": args.alpha, "version": __version__,
               "basis": [E.to_json() for E in basis]}
    text = _table_text(args.problem, basis)
    if args.out:
        out = _out_dir(args, ".")
        write_json(out / f"entropies_{args.problem}_deg{args.degree}.json", payload)
        (out / f"entropies_{args.problem}_deg{args.degree}.txt").write_text(text + "\n")
    print(text)
    return 0


def cmd_laxhopf(args) -> int:
    from .runner import run_laxhopf

    sc = load_scenario(args.config)
    if sc.solver != "laxhopf":
        raise FfmfgError(f"{args.config}: laxhopf needs solver 'laxhopf', got {sc.solver!r}")
    out = _out_dir(args, f"runs/{sc.name}")
    res = run_laxhopf(sc)
    arts = [write_csv(out / f"{n}.csv", c, r).name for n, (c, r) in res.tables.items()]
    write_json(out / "manifest.json", manifest("laxhopf", sc.raw, res.metrics, arts + ["manifest.json"]))
    print(f"T* = {res.metrics['shock_time']!r}; stationary check passed: {res.metrics['stationary']['passed']}")
    return 0


def cmd_analyze(args) -> int:
    from .analysis import CATALOG, fuzz_inequalities, poincare_sup

    seed = args.seed if args.seed is not None else 0
    report = {}
    for name in sorted(CATALOG):
        prof = CATALOG[name]()
        sup = poincare_sup(prof)
        report[name] = {"poincare_sup": sup.to_json(),
                        "fuzz": fuzz_inequalities(prof, n_samples=args.samples, seed=seed)}
    out = _out_dir(args, "analysis")
    write_json(out / "analysis.json", report)
    write_json(out / "manifest.json", manifest("analyze", None, {"profiles": sorted(report)},
                                               ["analysis.json", "manifest.json"], seed=seed))
    for name in sorted(report):
        r = report[name]
        print(f"{name:>10}  sup C = {r['poincare_sup']['sup']:.6g}  violations = {r['fuzz']}")
    return 0


def cmd_refine(args) -> int:
    from .runner import refine

    sc = load_scenario(args.config)
    out = _out_dir(args, f"runs/{sc.name}_refine")
    cols, rows, summary = refine(sc, args.levels)
    write_csv(out / "refinement.csv", cols, rows)
    write_json(out / "manifest.json", manifest("refine", sc.raw, summary, ["refinement.csv", "manifest.json"]))
    for r in rows:
        print(" ".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in r))
    return 0


def cmd_sweep(args) -> int:
    from .runner import SWEEP_KEYS, sweep

    sc = load_scenario(args.config)
    out = _out_dir(args, f"runs/{sc.name}_sweep")
    rows = sweep(sc, workers=args.workers)
    keys = [k for k in SWEEP_KEYS if k in sc.sweep]
    table = []
    for r in rows:
        m = r["metrics"]
        table.append((*(r["params"][k] for k in keys), r["status"],
                      m.get("decay_rate", float("nan")), m.get("I_final", float("nan")),
                      m.get("max_linf_" + ("z" if sc.solver == "system3" else "v"), float("nan"))))
    cols = [*keys, "status [text]", "decay_rate [1/time]", "I_final [-]", "max_linf [-]"]
    write_csv(out / "sweep.csv", cols, table)
    write_json(out / "sweep.json", {"runs": rows})
    write_json(out / "manifest.json", manifest("sweep", sc.raw, {"n_runs": len(rows),
                                                                 "n_failed": sum(r["status"] != "ok" for r in rows)},
                                               ["sweep.csv", "sweep.json", "manifest.json"]))
    print(f"{len(rows)} runs -> {out / 'sweep.csv'}")
    return 0


def cmd_schema(args) -> int:
    print(json.dumps(SCHEMA, sort_keys=True, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ffmfg", description="Numerical lab for 1D forward-forward mean-field games.")
    p.add_argument("--version", action="version", version=f"ffmfg {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, config=True):
        s = sub.add_parser(name, help=help_)
        if config:
            s.add_argument("--config", required=True, help="scenario JSON")
        s.add_argument("--out", help="output directory")
        s.set_defaults(fn=fn)
        return s

    add("simulate", cmd_simulate, "run one scenario")
    s = add("derive-entropies", cmd_derive, "polynomial conservation laws", config=False)
    s.add_argument("--problem", required=True)
    s.add_argument("--degree", type=int, required=True)
    s.add_argument("--alpha", default=None, help="rational alpha for system3 keys, e.g. 2 or 3/2 (symbolic if omitted)")
    add("laxhopf", cmd_laxhopf, "Lax-Hopf oracle fields and shock report")
    s = add("analyze", cmd_analyze, "Poincare constants and inequality fuzzing", config=False)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--samples", type=int, default=1000)
    s = add("refine", cmd_refine, "refinement study")
    s.add_argument("--levels", type=int, default=4)
    s = add("sweep", cmd_sweep, "parameter sweep")
    s.add_argument("--workers", type=int, default=1)
    sub.add_parser("schema", help="print the config JSON schema").set_defaults(fn=cmd_schema)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (FfmfgError, ValueError) as e:
        ctx = getattr(args, "config", None)
        prefix = "" if ctx is None or str(ctx) in str(e) else f"{ctx}: "
        print(f"error: {prefix}{e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
