"""Rusanov finite-volume solvers for the first-order forward-forward systems.

Three formulations share one stepping loop:

* ``vm``: ``v_t + (H(v) - g(m))_x = 0``, ``m_t - (m H'(v))_x = 0``;
* ``system3``: ``z_t = (c v^3 + alpha v z)_x``, ``v_t = (z -+ alpha v^2/2)_x``;
* ``psystem``: ``v_t - w_x = 0``, ``w_t - sigma(v)_x = 0`` with optional viscosity.

All are written as ``U_t + f(U)_x = 0`` in state order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .entropy import system3_c
from .errors import CflError, DomainError, HyperbolicityError, PositivityError, RangeError
from .grid import (POSITIVITY_FLOOR, GridField, PeriodicGrid, RecordBuilder, RunRecord, SystemState,
                   Variant, diff_periodic, integrate)
from .models import (CouplingKind, CouplingSpec, HamiltonianKind, HamiltonianSpec, ModelSpec,
                     stress_sigma, stress_sigma_prime)

EntropyMap = Mapping[str, Callable[[np.ndarray, np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class FluxFunction:
    """Flux ``f(U)`` and local spectral radius of ``Df`` for one formulation."""

    kind: str
    model: ModelSpec | None = None
    alpha: float = 2.0
    variant: str = "derived"

    def __post_init__(self):
        if self.kind not in ("vm", "system3", "psystem"):
            raise ValueError(f"unknown flux kind {self.kind!r}")
        if self.kind == "vm" and self.model is None:
            raise ValueError("vm flux needs a model")
        if self.kind == "system3" and self.variant not in ("derived", "displayed"):
            raise ValueError(f"unknown system3 variant {self.variant!r}")

    @classmethod
    def vm(cls, model: ModelSpec):
        return cls("vm", model)

    @classmethod
    def system3(cls, alpha: float, variant: str = "derived"):
        return cls("system3", alpha=float(alpha), variant=variant)

    @classmethod
    def psystem(cls):
        return cls("psystem")

    @property
    def variant_tag(self) -> Variant:
        return {"vm": Variant.VM, "system3": Variant.ZV, "psystem": Variant.VW}[self.kind]

    def flux(self, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "vm":
            H, g = self.model.H, self.model.g
            return H.H(a) - g.g(b), -b * H.dH(a)
        if self.kind == "system3":
            z, v = a, b
            al = self.alpha
            s = -1.0 if self.variant == "derived" else 1.0
            return -(float(system3_c(al)) * v**3 + al * v * z), -(z + s * 0.5 * al * v**2)
        return -b, -stress_sigma(a)

    def jacobian(self, a, b) -> np.ndarray:
        """``Df`` at each point, shape (..., 2, 2)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        J = np.zeros(np.broadcast(a, b).shape + (2, 2))
        if self.kind == "vm":
            H, g = self.model.H, self.model.g
            J[..., 0, 0] = H.dH(a)
            J[..., 0, 1] = -g.dg(b)
            J[..., 1, 0] = -b * H.d2H(a)
            J[..., 1, 1] = -H.dH(a)
        elif self.kind == "system3":
            al = self.alpha
            s = -1.0 if self.variant == "derived" else 1.0
            J[..., 0, 0] = -al * b
            J[..., 0, 1] = -(3.0 * float(system3_c(al)) * b**2 + al * a)
            J[..., 1, 0] = -1.0
            J[..., 1, 1] = -s * al * b
        else:
            J[..., 0, 1] = -1.0
            J[..., 1, 0] = -stress_sigma_prime(a)
        return J

    def wave_speed(self, a, b) -> np.ndarray:
        """Spectral radius of ``Df`` (closed form; both eigenvalues are +-sqrt of a discriminant
        for the derived formulations)."""
        if self.kind == "vm":
            H, g = self.model.H, self.model.g
            disc = H.dH(a) ** 2 + b * g.dg(b) * H.d2H(a)
            return np.sqrt(np.maximum(disc, 0.0))
        if self.kind == "system3":
            J = self.jacobian(a, b)
            tr = J[..., 0, 0] + J[..., 1, 1]
            det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
            disc = 0.25 * tr**2 - det
            return np.abs(0.5 * tr) + np.sqrt(np.maximum(disc, 0.0))
        return np.sqrt(stress_sigma_prime(a))

    def max_speed(self, a, b) -> float:
        return float(np.max(self.wave_speed(a, b)))


@dataclass(frozen=True)
class SolverConfig:
    T: float = 0.1
    cfl: float = 0.45
    eps_art: float = 0.0
    snapshot_stride: int = 0  # 0: initial and final only
    log_stride: int = 1
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not 0 < self.cfl < 1:
            raise ValueError("cfl must lie in (0, 1)")
        if self.T < 0 or self.eps_art < 0:
            raise ValueError("T and eps_art must be >= 0")
        if self.log_stride < 1 or self.snapshot_stride < 0:
            raise ValueError("strides must be positive")


def _rusanov_update(a, b, flux: FluxFunction, dt: float, dx: float):
    fa, fb = flux.flux(a, b)
    lam = flux.wave_speed(a, b)
    lam_max = float(np.max(lam))
    if not np.isfinite(lam_max):
        raise FloatingPointError("non-finite wave speed")
    if dt * lam_max / dx > 1.0 + 1e-12:
        raise CflError(f"CFL number {dt * lam_max / dx:.4g} > 1")
    ar, br = np.roll(a, -1), np.roll(b, -1)
    far, fbr = np.roll(fa, -1), np.roll(fb, -1)
    s = np.maximum(lam, np.roll(lam, -1))
    Fa = 0.5 * (fa + far) - 0.5 * s * (ar - a)
    Fb = 0.5 * (fb + fbr) - 0.5 * s * (br - b)
    r = dt / dx
    return a - r * (Fa - np.roll(Fa, 1)), b - r * (Fb - np.roll(Fb, 1))


def lax_friedrichs_step(state: SystemState, flux: FluxFunction, dt: float) -> SystemState:
    """One local Lax-Friedrichs (Rusanov) step in conservation form."""
    if state.variant is not flux.variant_tag:
        raise ValueError(f"state variant {state.variant} does not match flux {flux.kind}")
    a, b = _rusanov_update(state.first.values, state.second.values, flux, dt, state.grid.dx)
    if state.variant is Variant.VM and np.min(b) < POSITIVITY_FLOOR:
        raise PositivityError(f"m fell below {POSITIVITY_FLOOR}")
    return SystemState.from_arrays(state.variant, state.grid, a, b, state.t + dt)


def _heat_implicit(u: np.ndarray, mu: float) -> np.ndarray:
    """Solve ``(I - mu * D2) x = u`` with the periodic second-difference matrix D2 (circulant)."""
    n = u.size
    k = np.arange(n // 2 + 1)
    symbol = 1.0 + 4.0 * mu * np.sin(np.pi * k / n) ** 2
    return np.fft.irfft(np.fft.rfft(u) / symbol, n)


def _explicit_diffusion(u: np.ndarray, mu: float) -> np.ndarray:
    return u + mu * (np.roll(u, -1) - 2.0 * u + np.roll(u, 1))


def _field_columns(variant: Variant) -> tuple[list[str], list[str]]:
    n1, n2 = variant.names
    alias = {"m": "mass", "v": "mean_v"}
    return [alias.get(n1, f"int_{n1}"), alias.get(n2, f"int_{n2}")], [f"linf_{n1}", f"linf_{n2}"]


def _evolve(state: SystemState, flux: FluxFunction, cfg: SolverConfig,
            entropies: EntropyMap | None = None,
            admissible: Callable[[np.ndarray, np.ndarray], None] | None = None,
            implicit_eps: float = 0.0,
            monitor: Callable[[np.ndarray, np.ndarray], float] | None = None,
            meta: dict | None = None) -> RunRecord:
    entropies = dict(entropies or {})
    ints, linfs = _field_columns(state.variant)
    cols = [*ints, *linfs, *(f"entropy_{k}" for k in entropies)]
    if monitor is not None:
        cols.append("monitor")
    rec = RecordBuilder(cols)
    grid = state.grid
    dx = grid.dx
    a, b = state.first.values.copy(), state.second.values.copy()
    t = state.t
    t_end = state.t + cfg.T
    monitor_max = -math.inf

    def log(t, a, b):
        vals = {ints[0]: dx * np.sum(a), ints[1]: dx * np.sum(b),
                linfs[0]: np.max(np.abs(a)), linfs[1]: np.max(np.abs(b))}
        for k, E in entropies.items():
            vals[f"entropy_{k}"] = dx * np.sum(E(a, b))
        if monitor is not None:
            vals["monitor"] = monitor(a, b)
        rec.append(t, **vals)

    def snap(t, a, b):
        rec.snapshots.append(SystemState.from_arrays(state.variant, grid, a, b, t))

    log(t, a, b)
    snap(t, a, b)
    if monitor is not None:
        monitor_max = monitor(a, b)
    status, blowup = "ok", None
    step = 0
    while t < t_end - 1e-14 * max(1.0, t_end):
        if step >= cfg.max_steps:
            status = "max_steps"
            break
        lam = flux.max_speed(a, b)
        if not np.isfinite(lam):
            status, blowup = "blowup", t
            break
        dt = cfg.cfl * dx / max(lam, 1e-12)
        if cfg.eps_art > 0:
            dt = min(dt, 0.4 * dx * dx / cfg.eps_art)
        dt = min(dt, t_end - t)
        try:
            with np.errstate(over="raise", invalid="raise", divide="raise", under="ignore"):
                na, nb = _rusanov_update(a, b, flux, dt, dx)
                if cfg.eps_art > 0:
                    mu = cfg.eps_art * dt / dx**2
                    na, nb = _explicit_diffusion(na, mu), _explicit_diffusion(nb, mu)
                if implicit_eps > 0:
                    mu = implicit_eps * dt / dx**2
                    na, nb = _heat_implicit(na, mu), _heat_implicit(nb, mu)
            if not (np.all(np.isfinite(na)) and np.all(np.isfinite(nb))):
                raise FloatingPointError("non-finite state")
            if admissible is not None:
                admissible(na, nb)
        except (PositivityError, DomainError, RangeError, FloatingPointError):
            status, blowup = "blowup", t
            break
        a, b = na, nb
        t = t + dt if t_end - (t + dt) > 1e-14 * max(1.0, t_end) else t_end
        step += 1
        if monitor is not None:
            monitor_max = max(monitor_max, monitor(a, b))
        if step % cfg.log_stride == 0 or t >= t_end:
            log(t, a, b)
        if cfg.snapshot_stride and step % cfg.snapshot_stride == 0 and t < t_end:
            snap(t, a, b)
    if not rec.snapshots or rec.snapshots[-1].t != t:
        snap(t, a, b)
    if rec.times[-1] != t:
        log(t, a, b)
    info = {"steps": step, "n_cells": grid.n_cells, "flux": flux.kind}
    if monitor is not None:
        info["monitor_max"] = float(monitor_max)
    info.update(meta or {})
    return rec.build(status=status, blowup_time=blowup, meta=info)


def _as_field(grid: PeriodicGrid | None, f) -> GridField:
    if isinstance(f, GridField):
        return f
    if grid is None:
        raise ValueError("pass GridField initial data or a grid")
    return GridField(grid, f)


def _vm_admissible(a, b):
    if np.min(b) < POSITIVITY_FLOOR:
        raise PositivityError(f"m fell below {POSITIVITY_FLOOR}")


def solve_ff_vm(v0, m0, model: ModelSpec, cfg: SolverConfig, entropies: EntropyMap | None = None,
                grid: PeriodicGrid | None = None) -> RunRecord:
    """Evolve the first-order (v, m) forward-forward system."""
    if not model.g.increasing:
        raise HyperbolicityError("g decreasing: the forward-forward system is elliptic, not hyperbolic")
    v0, m0 = _as_field(grid, v0), _as_field(grid, m0)
    state = SystemState(Variant.VM, v0, m0)
    return _evolve(state, FluxFunction.vm(model), cfg, entropies, _vm_admissible)


def system3_density_power(z, v, alpha):
    """``m^alpha = z - (alpha - 1) v^2 / 2`` for the derived (z, v) variables."""
    return np.asarray(z) - 0.5 * (alpha - 1.0) * np.asarray(v) ** 2


def solve_system3(z0, v0, alpha: float, cfg: SolverConfig, entropies: EntropyMap | None = None,
                  variant: str = "derived", grid: PeriodicGrid | None = None) -> RunRecord:
    """Evolve the (z, v) system. ``variant="derived"`` is the form equivalent to the MFG."""
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    z0, v0 = _as_field(grid, z0), _as_field(grid, v0)
    state = SystemState(Variant.ZV, z0, v0)

    def admissible(z, v):
        if variant == "derived" and np.min(system3_density_power(z, v, alpha)) <= 0:
            raise PositivityError("(z, v) left the admissible set m^alpha > 0")

    admissible(z0.values, v0.values)
    return _evolve(state, FluxFunction.system3(alpha, variant), cfg, entropies, admissible,
                   meta={"alpha": float(alpha), "variant": variant})


def riemann_invariant_map(v):
    """``G(v) = int_0^v sqrt(sigma'(s)) ds = (v sqrt(1+v^2) + asinh v)/2`` (odd)."""
    v = np.asarray(v, dtype=float)
    return 0.5 * (v * np.sqrt(1.0 + v * v) + np.arcsinh(v))


def inverse_riemann_map(y: float, tol: float = 1e-14) -> float:
    """Inverse of the odd increasing map :func:`riemann_invariant_map` (bisection)."""
    s = 1.0 if y >= 0 else -1.0
    y = abs(float(y))
    lo, hi = 0.0, max(1.0, y)
    while float(riemann_invariant_map(hi)) < y:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if float(riemann_invariant_map(mid)) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    return s * 0.5 * (lo + hi)


def invariant_region_bound(v0, w0) -> float:
    """Bound on ``|v|_inf + |w|_inf`` over the Riemann-invariant rectangle of the data.

    With ``R+- = w +- G(v)`` in ``[a+-, b+-]``, ``|G(v)| <= max(b+ - a-, b- - a+)/2`` and
    ``|w| <= max(|a+ + a-|, |b+ + b-|)/2``.
    """
    v0 = np.asarray(getattr(v0, "values", v0), dtype=float)
    w0 = np.asarray(getattr(w0, "values", w0), dtype=float)
    Gv = riemann_invariant_map(v0)
    rp, rm = w0 + Gv, w0 - Gv
    ap, bp, am, bm = rp.min(), rp.max(), rm.min(), rm.max()
    g_max = 0.5 * max(abs(bp - am), abs(ap - bm))
    w_max = 0.5 * max(abs(ap + am), abs(bp + bm))
    return inverse_riemann_map(g_max) + w_max


def solve_psystem(v0, w0, eps: float, cfg: SolverConfig, entropies: EntropyMap | None = None,
                  grid: PeriodicGrid | None = None) -> RunRecord:
    """Viscous p-system with ``sigma(v) = v + v^3/3``: Rusanov step, then implicit heat step.

    ``meta["monitor_max"]`` is the largest ``|v|_inf + |w|_inf`` over every step and
    ``meta["invariant_bound"]`` the bound implied by the initial data.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    v0, w0 = _as_field(grid, v0), _as_field(grid, w0)
    state = SystemState(Variant.VW, v0, w0)
    bound = invariant_region_bound(v0, w0)
    return _evolve(state, FluxFunction.psystem(), cfg, entropies, implicit_eps=eps,
                   monitor=lambda v, w: float(np.max(np.abs(v)) + np.max(np.abs(w))),
                   meta={"eps": float(eps), "invariant_bound": float(bound)})


def wave_initial_data(u0: GridField, m0: GridField, model: ModelSpec) -> tuple[GridField, GridField]:
    """``v0 = u0_x`` (central differences), ``w0 = g(m0) - H(v0)``."""
    if np.min(m0.values) <= 0:
        raise DomainError("m0 must be > 0")
    v0 = diff_periodic(u0)
    w0 = m0.with_values(model.g.g(m0.values) - model.H.H(v0.values))
    return v0, w0


LOG_MODEL = ModelSpec(HamiltonianSpec.quadratic(), CouplingSpec.log())


def wave_leapfrog(u0: GridField, ut0: GridField, T: float, cfl: float = 0.5) -> tuple[GridField, GridField]:
    """Leapfrog for ``u_tt = sigma'(u_x) u_xx`` (centered in space); returns (u_x, u_t) at T.

    Independent check of the p-system: (v, w) = (u_x, u_t) solve it for smooth data.
    """
    grid = u0.grid
    dx = grid.dx
    u = u0.values.copy()
    ut = ut0.values.copy()

    def acc(u):
        ux = (np.roll(u, -1) - np.roll(u, 1)) / (2 * dx)
        uxx = (np.roll(u, -1) - 2 * u + np.roll(u, 1)) / dx**2
        return stress_sigma_prime(ux) * uxx

    c = math.sqrt(float(np.max(stress_sigma_prime(diff_periodic(u0).values))))
    nsteps = max(2, int(math.ceil(T / (cfl * dx / c))))
    dt = T / nsteps
    prev = u.copy()
    cur = u + dt * ut + 0.5 * dt * dt * acc(u)
    for _ in range(nsteps - 1):
        prev, cur = cur, 2 * cur - prev + dt * dt * acc(cur)
    # u_t at T from the last two levels and one more step
    nxt = 2 * cur - prev + dt * dt * acc(cur)
    ux = (np.roll(cur, -1) - np.roll(cur, 1)) / (2 * dx)
    return GridField(grid, ux), GridField(grid, (nxt - prev) / (2 * dt))


def restrict(fine: np.ndarray, factor: int) -> np.ndarray:
    """Block-average a fine-grid field onto a grid ``factor`` times coarser (centers coincide)."""
    fine = np.asarray(fine, dtype=float)
    if fine.size % factor:
        raise ValueError("fine size must be a multiple of factor")
    return fine.reshape(-1, factor).mean(axis=1)


def l1_distance(a, b, dx: float) -> float:
    return float(dx * np.sum(np.abs(np.asarray(a) - np.asarray(b))))


__all__ = [
    "FluxFunction", "SolverConfig", "lax_friedrichs_step", "solve_ff_vm", "solve_system3",
    "solve_psystem", "wave_initial_data", "wave_leapfrog", "invariant_region_bound",
    "riemann_invariant_map", "inverse_riemann_map", "restrict", "l1_distance",
    "system3_density_power", "LOG_MODEL",
]
