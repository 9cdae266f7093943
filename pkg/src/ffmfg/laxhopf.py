"""Lax-Hopf evaluation for ``u_t + G(u_x) = 0`` and the logarithmic forward-forward MFG.

G is the even convex function ``(|p| sqrt(1+p^2) + arcsinh|p|)/2``, so
``G'(p)^2 = 1 + p^2`` away from p = 0 and u solves ``u_tt = (1 + u_x^2) u_xx``.
With ``m = exp(H(u_x) - G(u_x))`` the pair (u, m) solves

    u_t + u_x^2/2 = ln m,    m_t - (m u_x)_x = 0

wherever u is smooth. The reversed orientation ``u_t - G(u_x) = 0`` uses
``m = exp(H(u_x) + G(u_x))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import WindowError
from .grid import GridField, PeriodicGrid, diff_periodic
from .models import G_conjugate, G_of_p, G_prime, golden_section

FORWARD = "forward"
REVERSED = "reversed"


def trig_interpolant(values: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Periodic trigonometric interpolant of samples at cell centers of [0, 1)."""
    vals = np.asarray(values, dtype=float)
    n = vals.size
    c = np.fft.rfft(vals) / n
    k = np.arange(c.size)
    c = c * np.exp(-1j * np.pi * k / n)  # samples sit at (i + 1/2)/n
    w = np.full(c.size, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0

    def f(x):
        x = np.asarray(x, dtype=float)
        ph = np.exp(2j * np.pi * np.multiply.outer(x, k))
        return np.real(ph @ (w * c))

    return f


@dataclass(frozen=True, eq=False)
class HjSolution:
    """Initial profile (periodic callable) with orientation and a sampled Lipschitz bound."""

    u0: Callable[[np.ndarray], np.ndarray]
    orientation: str = FORWARD
    n_samples: int = 4096
    lipschitz: float = field(default=float("nan"))

    def __post_init__(self):
        if self.orientation not in (FORWARD, REVERSED):
            raise ValueError(f"orientation must be {FORWARD!r} or {REVERSED!r}")
        g = PeriodicGrid(self.n_samples)
        s = np.asarray(self.u0(g.x), dtype=float)
        if abs(float(self.u0(np.array([0.0]))[0]) - float(self.u0(np.array([1.0]))[0])) > 1e-9:
            raise ValueError("u0 must be periodic: u0(0) != u0(1)")
        if math.isnan(self.lipschitz):
            L = float(np.max(np.abs(np.diff(np.append(s, s[0])))) * self.n_samples)
            object.__setattr__(self, "lipschitz", L)

    @classmethod
    def from_field(cls, f: GridField, orientation: str = FORWARD) -> "HjSolution":
        return cls(trig_interpolant(f.values), orientation)

    @property
    def sign(self) -> float:
        return 1.0 if self.orientation == FORWARD else -1.0

    def sampled(self, grid: PeriodicGrid) -> GridField:
        return GridField(grid, self.u0(grid.x))


def _window(sol: HjSolution, t: float, margin: float) -> float:
    L = sol.lipschitz * 1.05 + 1e-3
    return t * max(1.0, math.sqrt(1.0 + L * L)) + margin


def lax_hopf_u(sol: HjSolution, x, t: float, n_scan: int = 2001, margin: float = 0.02,
               chunk: int = 256) -> np.ndarray:
    """``u(x,t) = inf_y t G*((x-y)/t) + u0(y)`` (forward); sup form for the reversed orientation.

    Grid scan over ``[x - R, x + R]`` followed by golden-section refinement of the
    best scan cell. Ties resolve to the smallest y.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return np.asarray(sol.u0(x), dtype=float)
    s = sol.sign
    R = _window(sol, t, margin)
    off = np.linspace(-R, R, n_scan)
    h = off[1] - off[0]

    def obj(xx, y):
        return t * G_conjugate((xx - y) / t) + s * sol.u0(y)

    out = np.empty_like(x)
    for lo in range(0, x.size, chunk):
        xs = x[lo:lo + chunk]
        Y = xs[:, None] + off[None, :]
        vals = obj(xs[:, None], Y)
        k = np.argmin(vals, axis=1)
        if np.any((k == 0) | (k == n_scan - 1)):
            raise WindowError("Lax-Hopf minimizer touched the window edge; enlarge margin")
        yk = xs + off[k]
        y_star = golden_section(lambda y: obj(xs, y), yk - h, yk + h)
        best = np.minimum(obj(xs, y_star), vals[np.arange(xs.size), k])
        out[lo:lo + chunk] = s * best
    return out


def lax_hopf_field(sol: HjSolution, grid: PeriodicGrid, t: float, **kw) -> GridField:
    return GridField(grid, lax_hopf_u(sol, grid.x, t, **kw))


def density_from_u(sol: HjSolution, x, t: float, h: float = 1e-6, shock_tol: float = 1e-3, **kw):
    """``(u_x, m, shock_mask)`` at points x.

    u_x is the centered quotient with step h. Where the one-sided quotients differ
    by more than ``shock_tol`` the gradient is discontinuous; m is NaN there.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = lax_hopf_u(sol, np.concatenate([x - h, x, x + h]), t, **kw).reshape(3, -1)
    dm = (u[1] - u[0]) / h
    dp = (u[2] - u[1]) / h
    ux = 0.5 * (dm + dp)
    mask = np.abs(dp - dm) > shock_tol
    m = np.exp(0.5 * ux**2 - sol.sign * G_of_p(ux))
    m = np.where(mask, np.nan, m)
    return ux, m, mask


def oracle_vm(sol: HjSolution, grid: PeriodicGrid, t: float, h: float = 1e-6, **kw):
    """Oracle (v, m) = (u_x, exp(H - G)) at the cell centers, without masking."""
    ux, _, mask = density_from_u(sol, grid.x, t, h, **kw)
    m = np.exp(0.5 * ux**2 - sol.sign * G_of_p(ux))
    return ux, m, mask


def initial_vm(sol: HjSolution, grid: PeriodicGrid, h: float = 1e-6):
    """(v0, m0) for the (v, m) solver from the same datum."""
    x = grid.x
    v0 = (sol.u0(x + h) - sol.u0(x - h)) / (2 * h)
    return v0, np.exp(0.5 * v0**2 - sol.sign * G_of_p(v0))


def shock_time(sol: HjSolution, n_fine: int = 16384, exclude_corner: bool = False) -> float:
    """``T* = 1 / max_y(-d/dy G'(u0'(y)))`` by differencing ``G'(u0')`` on a fine grid.

    For the reversed orientation the characteristic speed is ``-G'``. With
    ``exclude_corner`` the cells where u0' changes sign (where G' jumps between
    -1 and +1) are left out, giving the crossing time of the smooth characteristics.
    """
    g = PeriodicGrid(n_fine)
    p = diff_periodic(sol.sampled(g)).values
    c = sol.sign * G_prime(p)
    dc = (np.roll(c, -1) - np.roll(c, 1)) / (2.0 * g.dx)
    rate = -dc
    if exclude_corner:
        sgn = np.sign(p)
        ok = (np.roll(sgn, -1) == sgn) & (np.roll(sgn, 1) == sgn) & (sgn != 0)
        rate = np.where(ok, rate, -np.inf)
    mx = float(np.max(rate)) if rate.size else -np.inf
    return 1.0 / mx if mx > 0 else math.inf


def max_gradient_quotient(sol: HjSolution, t: float, n: int = 1024, **kw) -> float:
    """``max |u_x(x+dx) - u_x(x)| / dx`` with u_x from centered differences of lax_hopf_u."""
    g = PeriodicGrid(n)
    u = lax_hopf_field(sol, g, t, **kw)
    ux = diff_periodic(u).values
    return float(np.max(np.abs(np.roll(ux, -1) - ux)) / g.dx)


def max_abs_slope(sol: HjSolution, t: float, n: int = 1024, **kw) -> float:
    g = PeriodicGrid(n)
    return float(np.max(np.abs(diff_periodic(lax_hopf_field(sol, g, t, **kw)).values)))


@dataclass(frozen=True)
class StationaryReport:
    times: tuple[float, ...]
    oscillation: tuple[float, ...]
    gbar_estimates: tuple[float, ...]
    ratio: float
    passed: bool

    def to_json(self):
        return {"times": list(self.times), "oscillation": list(self.oscillation),
                "gbar_estimates": list(self.gbar_estimates), "ratio": self.ratio, "passed": self.passed}


def stationary_limit_check(sol: HjSolution, horizon: float = 20.0, t_ref: float = 1.0, n: int = 256,
                           n_times: int = 6, x0: float = 0.0, floor: float = 1e-12,
                           threshold: float = 0.1) -> StationaryReport:
    """Spatial oscillation of ``u(., t) + Gbar t`` at log-spaced times in [t_ref, horizon].

    ``Gbar`` is estimated from consecutive times at x0. The check passes when
    ``osc(horizon) <= threshold * osc(t_ref) + floor``.
    """
    g = PeriodicGrid(n)
    times = np.geomspace(t_ref, horizon, n_times)
    osc, gbar = [], []
    prev = None
    for t in times:
        u = lax_hopf_u(sol, g.x, float(t))
        u0x = float(lax_hopf_u(sol, np.array([x0]), float(t))[0])
        if prev is not None:
            gbar.append(-(u0x - prev[1]) / (t - prev[0]))
        prev = (float(t), u0x)
        osc.append(float(np.ptp(u)))
    ratio = osc[-1] / max(osc[0], floor)
    passed = osc[-1] <= threshold * osc[0] + floor
    return StationaryReport(tuple(float(t) for t in times), tuple(osc), tuple(gbar), float(ratio), bool(passed))


def godunov_hj(u0: GridField, T: float, orientation: str = FORWARD, cfl: float = 0.45) -> GridField:
    """Monotone Godunov scheme for ``u_t + G(u_x) = 0`` (or ``u_t - G(u_x) = 0``).

    G is even, convex, minimal at 0, so the Godunov Hamiltonian is
    ``max(G(max(p-, 0)), G(min(p+, 0)))``.
    """
    s = 1.0 if orientation == FORWARD else -1.0
    u = s * u0.values.copy()
    dx = u0.grid.dx
    t = 0.0
    while t < T - 1e-15:
        pm = (u - np.roll(u, 1)) / dx
        pp = (np.roll(u, -1) - u) / dx
        lam = math.sqrt(1.0 + float(max(np.max(np.abs(pm)), np.max(np.abs(pp)))) ** 2)
        dt = min(cfl * dx / lam, T - t)
        Gh = np.maximum(G_of_p(np.maximum(pm, 0.0)), G_of_p(np.minimum(pp, 0.0)))
        u = u - dt * Gh
        t += dt
    return u0.with_values(s * u)


@dataclass(frozen=True)
class LmfgResiduals:
    hj: float
    transport: float
    masked_fraction: float


def lmfg_residuals(sol: HjSolution, n: int, t: float, dt: float | None = None,
                   kink_tol: float = 0.05) -> LmfgResiduals:
    """Discrete L1 norms of ``u_t + u_x^2/2 - ln m`` and ``m_t - (m u_x)_x`` at time t.

    Centered differences in x (step dx = 1/n) and t (step dt, default dx). Cells
    whose stencil meets a gradient discontinuity (slope jump above ``kink_tol``
    between neighbours at any of the three times) are excluded and counted.
    """
    g = PeriodicGrid(n)
    dx = g.dx
    dt = dx if dt is None else dt
    if t - dt <= 0:
        raise ValueError("need t > dt")
    U = np.stack([lax_hopf_u(sol, g.x, t + k * dt) for k in (-1, 0, 1)])
    Ux = (np.roll(U, -1, axis=1) - np.roll(U, 1, axis=1)) / (2 * dx)
    M = np.exp(0.5 * Ux**2 - sol.sign * G_of_p(Ux))
    ut = (U[2] - U[0]) / (2 * dt)
    r1 = ut + 0.5 * Ux[1] ** 2 - np.log(M[1])
    mt = (M[2] - M[0]) / (2 * dt)
    flux = M[1] * Ux[1]
    r2 = mt - (np.roll(flux, -1) - np.roll(flux, 1)) / (2 * dx)
    jump = np.abs(np.roll(Ux, -1, axis=1) - Ux)  # slope jump between i and i+1
    bad = np.any(jump > kink_tol, axis=0)
    bad = bad | np.roll(bad, 1) | np.roll(bad, -1) | np.roll(bad, 2) | np.roll(bad, -2)
    ok = ~bad
    return LmfgResiduals(float(dx * np.sum(np.abs(r1[ok]))), float(dx * np.sum(np.abs(r2[ok]))),
                         float(np.mean(bad)))


def semigroup_defect(sol: HjSolution, x, t: float, s: float, n_scan: int = 801) -> float:
    """``max |u(x, t+s) - inf_y [s G*((x-y)/s) + u(y, t)]|`` at the given points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    inner = HjSolution(lambda y: lax_hopf_u(sol, np.ravel(y), t).reshape(np.shape(y)),
                       sol.orientation, n_samples=256)
    direct = lax_hopf_u(sol, x, t + s)
    composed = lax_hopf_u(inner, x, s, n_scan=n_scan, chunk=1)
    return float(np.max(np.abs(direct - composed)))


__all__ = [
    "HjSolution", "lax_hopf_u", "lax_hopf_field", "density_from_u", "oracle_vm", "initial_vm",
    "shock_time", "max_gradient_quotient", "max_abs_slope", "stationary_limit_check",
    "StationaryReport", "godunov_hj", "lmfg_residuals", "LmfgResiduals", "semigroup_defect",
    "trig_interpolant", "FORWARD", "REVERSED",
]
