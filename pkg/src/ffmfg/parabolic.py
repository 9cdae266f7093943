"""Viscous forward-forward system and the quantities of its entropy-dissipation argument.

    v_t + (H(v) - g(m))_x = eps v_xx,    m_t - (m H'(v))_x = eps m_xx

Rusanov flux, then a centered diffusion step (backward Euler by FFT by default,
forward Euler optionally). Neither step touches the zero Fourier mode, so the
discrete means of v and m are preserved to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import decay_fit, poincare_constant, profile_from_coupling, profile_from_hamiltonian
from .errors import FitError, PositivityError, StabilityError
from .grid import (POSITIVITY_FLOOR, GridField, PeriodicGrid, RecordBuilder, RunRecord, SystemState, Variant,
                   diff_periodic, integrate)
from .hyperbolic import FluxFunction, _heat_implicit, _rusanov_update
from .models import ModelSpec


@dataclass(frozen=True)
class ParabolicConfig:
    T: float = 10.0
    cfl: float = 0.45
    diffusion: str = "implicit"  # or "explicit" (dt also limited by diffusion_safety dx^2/eps)
    diffusion_safety: float = 0.4
    log_stride: int = 0  # 0: choose about n_logs records
    n_logs: int = 2000
    snapshot_stride: int = 0

    def __post_init__(self):
        if not 0 < self.cfl < 1:
            raise ValueError("cfl must lie in (0, 1)")
        if not 0 < self.diffusion_safety <= 0.5:
            raise StabilityError("explicit diffusion needs a safety factor in (0, 1/2]")
        if self.diffusion not in ("implicit", "explicit"):
            raise ValueError("diffusion must be 'implicit' or 'explicit'")
        if self.T < 0:
            raise ValueError("T must be >= 0")


def normalize_initial_data(v0: GridField, m0: GridField) -> tuple[GridField, GridField]:
    """Subtract the mean of v0 and rescale m0 to unit mass."""
    if np.min(m0.values) <= 0:
        raise PositivityError("m0 must be > 0")
    return v0.with_values(v0.values - integrate(v0)), m0.with_values(m0.values / integrate(m0))


def entropy_gap(v: np.ndarray, m: np.ndarray, model: ModelSpec, dx: float) -> float:
    """``I = int H(v) + P(m) - H(0) - P(1)``, in Bregman form (equal when int v = 0, int m = 1)."""
    H = model.H
    bh = H.H(v) - H.H(0.0) - H.dH(0.0) * v
    return float(dx * np.sum(bh + model.g.bregman_P(m)))


def dissipation_rate(state: SystemState, E, eps: float = 1.0) -> float:
    """``eps * int (v_x, m_x) D^2E (v_x, m_x)^T dx`` with central-difference gradients.

    ``E`` must expose ``hessian(v, m) -> (E_vv, E_vm, E_mm)``.
    """
    a, b = state.first.values, state.second.values
    ax = diff_periodic(state.first).values
    bx = diff_periodic(state.second).values
    evv, evm, emm = E.hessian(a, b)
    q = evv * ax**2 + 2.0 * evm * ax * bx + emm * bx**2
    return float(eps * state.grid.dx * np.sum(q))


def _dissipation_hp(v, m, model: ModelSpec, dx: float) -> float:
    vx = (np.roll(v, -1) - np.roll(v, 1)) / (2 * dx)
    mx = (np.roll(m, -1) - np.roll(m, 1)) / (2 * dx)
    return float(model.eps * dx * np.sum(model.H.d2H(v) * vx**2 + model.g.d2P(m) * mx**2))


def solve_parabolic(v0: GridField, m0: GridField, model: ModelSpec, cfg: ParabolicConfig,
                    normalize: bool = True) -> RunRecord:
    """Evolve the viscous system to cfg.T; logs mass, mean_v, I, D, L1 and Linf quantities."""
    if not model.eps > 0:
        raise ValueError("parabolic runs need eps > 0")
    if not model.g.increasing:
        raise ValueError("g must be strictly increasing")
    if normalize:
        v0, m0 = normalize_initial_data(v0, m0)
    grid = v0.grid
    dx = grid.dx
    eps = model.eps
    flux = FluxFunction.vm(model)
    v, m = v0.values.copy(), m0.values.copy()
    lam0 = flux.max_speed(v, m)
    implicit = cfg.diffusion == "implicit"
    dt_diff = math.inf if implicit else cfg.diffusion_safety * dx * dx / eps
    est_steps = int(math.ceil(cfg.T / min(dt_diff, cfg.cfl * dx / max(lam0, 1e-12)))) if cfg.T > 0 else 1
    stride = cfg.log_stride or max(1, est_steps // cfg.n_logs)
    cols = ["mass", "mean_v", "I", "D", "l1_v", "l1_m", "linf_v", "linf_m",
            "min_v", "max_v", "min_m", "max_m"]
    rec = RecordBuilder(cols)

    def log(t):
        rec.append(t, mass=dx * np.sum(m), mean_v=dx * np.sum(v), I=entropy_gap(v, m, model, dx),
                   D=_dissipation_hp(v, m, model, dx), l1_v=dx * np.sum(np.abs(v)),
                   l1_m=dx * np.sum(np.abs(m - 1.0)), linf_v=np.max(np.abs(v)), linf_m=np.max(np.abs(m)),
                   min_v=np.min(v), max_v=np.max(v), min_m=np.min(m), max_m=np.max(m))

    def snap(t):
        rec.snapshots.append(SystemState.from_arrays(Variant.VM, grid, v, m, t))

    t = 0.0
    log(t)
    snap(t)
    mu = eps / dx**2
    step = 0
    status = "ok"
    blowup = None
    ext = dict(v_min=float(np.min(v)), v_max=float(np.max(v)), m_min=float(np.min(m)), m_max=float(np.max(m)))
    while t < cfg.T - 1e-14 * max(1.0, cfg.T):
        lam = flux.max_speed(v, m)
        dt = min(cfg.cfl * dx / max(lam, 1e-12), dt_diff, cfg.T - t)
        nv, nm = _rusanov_update(v, m, flux, dt, dx)
        if implicit:
            nv, nm = _heat_implicit(nv, dt * mu), _heat_implicit(nm, dt * mu)
        else:
            if dt * mu > 0.5:
                raise StabilityError("diffusion number exceeds 1/2")
            nv = nv + dt * mu * (np.roll(v, -1) - 2.0 * v + np.roll(v, 1))
            nm = nm + dt * mu * (np.roll(m, -1) - 2.0 * m + np.roll(m, 1))
        if np.min(nm) < POSITIVITY_FLOOR or not np.all(np.isfinite(nv)):
            status, blowup = "blowup", t
            break
        v, m = nv, nm
        t = t + dt if cfg.T - (t + dt) > 1e-14 * max(1.0, cfg.T) else cfg.T
        step += 1
        ext["v_min"] = min(ext["v_min"], float(np.min(v)))
        ext["v_max"] = max(ext["v_max"], float(np.max(v)))
        ext["m_min"] = min(ext["m_min"], float(np.min(m)))
        ext["m_max"] = max(ext["m_max"], float(np.max(m)))
        if step % stride == 0 or t >= cfg.T:
            log(t)
        if cfg.snapshot_stride and step % cfg.snapshot_stride == 0 and t < cfg.T:
            snap(t)
    snap(t)
    if rec.times[-1] != t:
        log(t)
    meta = {"steps": step, "n_cells": grid.n_cells, "eps": eps, "log_stride": stride, **ext}
    return rec.build(status=status, blowup_time=blowup, meta=meta)


def dissipation_mismatch(record: RunRecord, rel_floor: float = 1e-6) -> float:
    """``max |dI/dt + D| / D`` over interior logged times with ``I >= rel_floor * I(0)``.

    dI/dt is the (nonuniform) centered difference of the logged I.
    """
    t, I, D = record.times, record["I"], record["D"]
    if t.size < 3 or not I[0] > 0:
        return 0.0
    dIdt = (I[2:] - I[:-2]) / (t[2:] - t[:-2])
    Dm = D[1:-1]
    ok = (I[1:-1] >= rel_floor * I[0]) & (Dm > 0)
    if not np.any(ok):
        return 0.0
    return float(np.max(np.abs(dIdt[ok] + Dm[ok]) / Dm[ok]))


def decay_constant(record: RunRecord, model: ModelSpec) -> float:
    """``C0 = max(C_H(a_v, b_v), C_P(a_m, b_m))`` from the run's global observed ranges."""
    meta = record.meta
    cH = poincare_constant(profile_from_hamiltonian(model.H), meta["v_min"], meta["v_max"])
    cP = poincare_constant(profile_from_coupling(model.g), meta["m_min"], meta["m_max"])
    return float(max(cH, cP))


@dataclass(frozen=True)
class DecayReport:
    nonincreasing: bool
    increases: int
    max_increase: float
    C0: float
    bound_holds: bool
    worst_bound_ratio: float
    fitted_rate: float | None
    bound_rate: float
    nonnegative: bool
    violations: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.nonincreasing and self.bound_holds and self.nonnegative

    def to_json(self):
        return {k: getattr(self, k) for k in ("nonincreasing", "increases", "max_increase", "C0",
                                              "bound_holds", "worst_bound_ratio", "fitted_rate",
                                              "bound_rate", "nonnegative")} | {
            "violations": list(self.violations), "passed": self.passed}


def monotone_decay_check(record: RunRecord, model: ModelSpec, tol: float = 0.05,
                         step_tol: float = 1e-10) -> DecayReport:
    """Check that I is nonincreasing and ``I(t) <= exp(-eps t / C0) I(0) (1 + tol)``."""
    t, I, D = record.times, record["I"], record["D"]
    violations = []
    dI = np.diff(I)
    inc = dI > step_tol
    if np.any(inc):
        violations.append(f"I increased at {int(np.count_nonzero(inc))} logged steps")
    nonneg = bool(np.all(I >= -1e-15) and np.all(D >= -1e-15))
    if not nonneg:
        violations.append("negative I or D")
    C0 = decay_constant(record, model)
    eps = model.eps
    bound = np.exp(-eps * t / C0) * I[0] * (1.0 + tol)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0, I / bound, 0.0)
    worst = float(np.max(ratio)) if I[0] > 0 else 0.0
    holds = bool(np.all(I <= bound + 1e-300)) or I[0] == 0
    if not holds:
        violations.append(f"bound exceeded (max I/bound = {worst:.4g})")
    rate = None
    if I[0] > 0:
        try:
            rate = decay_fit(t, I).rate
        except FitError:
            rate = None
    return DecayReport(not np.any(inc), int(np.count_nonzero(inc)), float(np.max(dI)) if dI.size else 0.0,
                       C0, holds, worst, rate, -eps / C0, nonneg, tuple(violations))


def standard_scenario(n: int = 512, eps: float = 0.05):
    """``m0 = 1 + 0.2 sin(2 pi x)``, ``v0 = 0.1 cos(2 pi x)``, g = ln, H = p^2/2."""
    from .models import CouplingSpec, HamiltonianSpec

    grid = PeriodicGrid(n)
    model = ModelSpec(HamiltonianSpec.quadratic(), CouplingSpec.log(), eps)
    v0 = grid.sample(lambda x: 0.1 * np.cos(2 * np.pi * x))
    m0 = grid.sample(lambda x: 1.0 + 0.2 * np.sin(2 * np.pi * x))
    return v0, m0, model


__all__ = [
    "ParabolicConfig", "solve_parabolic", "dissipation_rate", "dissipation_mismatch",
    "monotone_decay_check", "DecayReport", "decay_constant", "entropy_gap", "normalize_initial_data",
    "standard_scenario",
]
