"""Run a Scenario through the matching solver and summarise it as plain metrics."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import hyperbolic as hyp
from . import laxhopf as lh
from .analysis import observed_orders
from .config import Scenario, initial_fields, profile_values
from .entropy import (EntropyPde, Problem, convex_entropy, polynomial_entropy_basis)
from .errors import FfmfgError
from .grid import GridField, PeriodicGrid, RunRecord, Variant
from .models import CouplingSpec, HamiltonianSpec, ModelSpec
from .parabolic import ParabolicConfig, dissipation_mismatch, monotone_decay_check, solve_parabolic


@dataclass
class RunResult:
    scenario: Scenario
    record: RunRecord | None
    metrics: dict
    tables: dict = field(default_factory=dict)  # name -> (columns, rows) extra CSV output


def _entropy_name(E) -> str:
    return str(E).replace(" ", "")


def derived_entropies(sc: Scenario) -> dict:
    """Polynomial laws up to ``sc.entropy_degree`` (degree >= 2), else the convex H + P entropy."""
    out = {}
    if sc.solver == "vm":
        try:
            basis = polynomial_entropy_basis(EntropyPde.ff(sc.model.H, sc.model.g), sc.entropy_degree)
        except (FfmfgError, ValueError, TypeError, NotImplementedError):
            basis = []
        for E in basis:
            if E.degree >= 2:
                out[_entropy_name(E)] = E.state_function()
        if not out:
            out["H+P"] = convex_entropy(sc.model).state_function()
    elif sc.solver == "system3":
        pde = EntropyPde(Problem.SYSTEM3, alpha=sc.alpha, variant="derived")
        for E in polynomial_entropy_basis(pde, sc.entropy_degree):
            if E.degree >= 2:
                out[_entropy_name(E)] = E.state_function()
    elif sc.solver == "psystem":
        out["energy"] = lambda v, w: 0.5 * w * w + 0.5 * v * v + v**4 / 12.0
    return out


def _solver_config(sc: Scenario) -> hyp.SolverConfig:
    return hyp.SolverConfig(**{k: v for k, v in sc.solver_config.items()})


def _system3_model(alpha: float) -> ModelSpec:
    return ModelSpec(HamiltonianSpec.quadratic(), CouplingSpec.power(alpha))


def run_record(sc: Scenario, grid: PeriodicGrid | None = None) -> RunRecord:
    """Solver run for the four time-marching solvers at the scenario (or override) grid."""
    grid = grid or sc.grid
    v0, m0 = initial_fields(sc, grid)
    ent = derived_entropies(sc)
    if sc.solver == "vm":
        return hyp.solve_ff_vm(v0, m0, sc.model, _solver_config(sc), ent)
    if sc.solver == "system3":
        a = sc.alpha
        z0 = m0.with_values(m0.values**a + 0.5 * (a - 1.0) * v0.values**2)
        return hyp.solve_system3(z0, v0, a, _solver_config(sc), ent)
    if sc.solver == "psystem":
        w0 = m0.with_values(np.log(m0.values) - 0.5 * v0.values**2)
        return hyp.solve_psystem(v0, w0, sc.eps_visc, _solver_config(sc), ent)
    if sc.solver == "parabolic":
        kw = {k: sc.solver_config[k] for k in ("T", "cfl", "log_stride", "snapshot_stride") if k in sc.solver_config}
        return solve_parabolic(v0, m0, sc.model, ParabolicConfig(**kw), normalize=bool(sc.initial.get("normalize")))
    raise FfmfgError(f"solver {sc.solver!r} has no time-marching record")


def _f(x) -> float:
    return float(x)


def record_metrics(sc: Scenario, rec: RunRecord) -> dict:
    out = {"status": rec.status, "final_time": _f(rec.times[-1]), "steps": int(rec.meta.get("steps", 0)),
           "n_cells": sc.n_cells}
    if rec.blowup_time is not None:
        out["blowup_time"] = _f(rec.blowup_time)
    for col, vals in rec.series.items():
        if col.startswith(("mass", "mean_v", "int_")) or col.startswith("entropy_"):
            out[f"drift_{col}"] = _f(abs(vals[-1] - vals[0]))
        if col.startswith("linf_"):
            out[f"max_{col}"] = _f(np.max(vals))
    for k in ("monitor_max", "invariant_bound"):
        if k in rec.meta:
            out[k] = _f(rec.meta[k])
    if sc.solver == "parabolic":
        I = rec["I"]
        out["I0"], out["I_final"] = _f(I[0]), _f(I[-1])
        out["dissipation_mismatch"] = dissipation_mismatch(rec)
        rep = monotone_decay_check(rec, sc.model)
        out["decay"] = rep.to_json()
        for col in ("l1_v", "l1_m"):
            out[f"{col}_ratio"] = _f(rec[col][-1] / rec[col][0]) if rec[col][0] > 0 else 0.0
    return out


def run_laxhopf(sc: Scenario) -> RunResult:
    grid = sc.grid
    prof = sc.initial.get("u") or {"type": "sine", "amplitude": 0.05, "phase": "cos"}
    u0 = GridField(grid, profile_values(prof, grid.x))
    orient = sc.laxhopf.get("orientation", lh.FORWARD)
    sol = lh.HjSolution.from_field(u0, orient)
    times = sorted(float(t) for t in sc.laxhopf.get("times", [0.1]))
    rows = []
    for t in times:
        if t == 0:
            ux, m = lh.initial_vm(sol, grid)
            u = u0.values
            mask = np.zeros(grid.n_cells, dtype=bool)
        else:
            u = lh.lax_hopf_field(sol, grid, t).values
            ux, m, mask = lh.density_from_u(sol, grid.x, t)
        ux = getattr(ux, "values", ux)
        m = getattr(m, "values", m)
        for x, a, b, c, d in zip(grid.x, u, ux, m, mask):
            rows.append((t, float(x), float(a), float(b), float(c), int(bool(d))))
    metrics = {"n_cells": sc.n_cells, "orientation": orient, "times": times,
               "lipschitz": _f(sol.lipschitz),
               "shock_time": _f(lh.shock_time(sol)),
               "shock_time_corner_excluded": _f(lh.shock_time(sol, exclude_corner=True))}
    rep = lh.stationary_limit_check(sol, horizon=float(sc.laxhopf.get("horizon", 20.0)))
    metrics["stationary"] = rep.to_json()
    t_res = next((t for t in times if t > 2 * grid.dx), None)
    if t_res is not None:
        r = lh.lmfg_residuals(sol, grid.n_cells, t_res)
        metrics["lmfg_residuals"] = {"t": t_res, "hj": r.hj, "transport": r.transport,
                                     "masked_fraction": r.masked_fraction}
    cols = ["t [-]", "x [-]", "u [-]", "u_x [-]", "m [-]", "shock_mask [bool]"]
    return RunResult(sc, None, metrics, {"laxhopf_fields": (cols, rows)})


def run(sc: Scenario) -> RunResult:
    if sc.solver == "laxhopf":
        return run_laxhopf(sc)
    rec = run_record(sc)
    return RunResult(sc, rec, record_metrics(sc, rec))


def _field_pair(rec: RunRecord) -> tuple[np.ndarray, np.ndarray]:
    st = rec.final
    return st.first.values, st.second.values


def refine(sc: Scenario, levels: int) -> tuple[list[str], list[tuple], dict]:
    """Self-convergence against the finest level, plus first-order entropy drifts.

    Returns (columns, rows, summary). The finest level is the reference and has no error row.
    """
    if sc.solver == "laxhopf":
        raise FfmfgError("refine applies to the time-marching solvers")
    if levels < 2:
        raise FfmfgError("refine needs --levels >= 2")
    ns = [sc.n_cells * 2**k for k in range(levels)]
    recs = [run_record(sc, PeriodicGrid(n)) for n in ns]
    bad = [n for n, r in zip(ns, recs) if r.status != "ok"]
    if bad:
        raise FfmfgError(f"run did not finish at n_cells={bad}")
    fa, fb = _field_pair(recs[-1])
    ent_cols = [c for c in recs[0].series if c.startswith("entropy_")]
    h, err, drifts = [], [], {c: [] for c in ent_cols}
    for n, r in zip(ns[:-1], recs[:-1]):
        f = ns[-1] // n
        a, b = _field_pair(r)
        dx = 1.0 / n
        err.append(hyp.l1_distance(a, hyp.restrict(fa, f), dx) + hyp.l1_distance(b, hyp.restrict(fb, f), dx))
        h.append(dx)
        for c in ent_cols:
            drifts[c].append(float(abs(r[c][-1] - r[c][0])))
    orders = [float("nan")] + (observed_orders(h, err)[0] if len(h) > 1 else [])
    cols = ["n_cells [-]", "dx [-]", "l1_self_error [-]", "observed_order [-]",
            *(f"drift_{c} [-]" for c in ent_cols)]
    rows = [(n, dx, e, o, *(drifts[c][i] for c in ent_cols))
            for i, (n, dx, e, o) in enumerate(zip(ns, h, err, orders))]
    summary = {"levels": levels, "n_cells": ns, "l1_self_error": err,
               "fit_order": (observed_orders(h, err)[1] if len(h) > 1 else None),
               "entropy_drift_orders": {c: (observed_orders(h, drifts[c])[1]
                                            if len(h) > 1 and min(drifts[c]) > 0 else None)
                                        for c in ent_cols}}
    return cols, rows, summary


SWEEP_KEYS = ("eps", "amplitude", "n_cells", "alpha")


def sweep_points(sc: Scenario) -> list[dict]:
    keys = [k for k in SWEEP_KEYS if k in sc.sweep]
    if not keys or any(len(sc.sweep[k]) == 0 for k in keys):
        return []
    return [dict(zip(keys, vals)) for vals in itertools.product(*(sc.sweep[k] for k in keys))]


def _sweep_one(args) -> dict:
    sc, point = args
    row = {"params": point}
    try:
        res = run(sc.with_overrides(**point))
        row["metrics"] = res.metrics
        if res.record is not None and sc.solver == "parabolic":
            row["metrics"]["decay_rate"] = row["metrics"]["decay"]["fitted_rate"]
        row["status"] = res.metrics.get("status", "ok")
    except (FfmfgError, ValueError, ArithmeticError) as e:
        row["status"] = f"error: {type(e).__name__}: {e}"
        row["metrics"] = {}
    return row


def sweep(sc: Scenario, workers: int = 1) -> list[dict]:
    """Run every grid point independently; output sorted by the parameter tuple."""
    points = sweep_points(sc)
    jobs = [(sc, p) for p in points]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(j) for j in jobs]
    return sorted(rows, key=lambda r: tuple(r["params"][k] for k in SWEEP_KEYS if k in r["params"]))


__all__ = ["RunResult", "run", "run_record", "record_metrics", "run_laxhopf", "refine", "sweep",
           "sweep_points", "derived_entropies", "SWEEP_KEYS"]
