"""Poincare-type constants, Jensen-gap decomposition and decay fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _quad

from .errors import DomainError, FitError
from .grid import GridField, diff_periodic, integrate
from .models import CouplingKind, CouplingSpec, HamiltonianKind, HamiltonianSpec

COINCIDENT_RTOL = 1e-6
COINCIDENT_LIMIT = 0.25
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True, eq=False)
class ConvexProfile:
    """Strictly convex Phi on an interval ``(lo, hi)`` (open), with Psi' = sqrt(Phi'')."""

    name: str
    phi: Callable
    dphi: Callable
    d2phi: Callable
    lo: float = -math.inf
    hi: float = math.inf
    psi: Callable | None = None
    lattice: tuple = ("log", 1e-6, 1e6)

    def check_domain(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if np.any(s <= self.lo) or np.any(s >= self.hi) or not np.all(np.isfinite(s)):
            raise DomainError(f"{self.name}: argument outside ({self.lo}, {self.hi})")
        return s

    def Psi(self, s) -> np.ndarray:
        s = self.check_domain(s)
        if self.psi is not None:
            return self.psi(s)
        ref = 1.0 if self.lo < 1.0 < self.hi else 0.5 * (self.lo + self.hi)
        f = lambda t: math.sqrt(float(self.d2phi(t)))
        flat = np.array([_quad.quad(f, ref, float(x), limit=200, epsabs=1e-13, epsrel=1e-12)[0]
                         for x in s.ravel()])
        return flat.reshape(s.shape)

    def lattice_points(self, n: int = 121) -> np.ndarray:
        kind, a, b = self.lattice
        if kind == "log":
            return np.logspace(math.log10(a), math.log10(b), n)
        if kind == "symlog":
            half = np.logspace(math.log10(a), math.log10(b), n // 2)
            return np.concatenate([-half[::-1], [0.0], half])
        return np.linspace(a, b, n)


def _pos(name, phi, dphi, d2phi, psi):
    return ConvexProfile(name, phi, dphi, d2phi, 0.0, math.inf, psi, ("log", 1e-6, 1e6))


def power_profile(p: float) -> ConvexProfile:
    """``s^p`` on (0, inf) for p > 1 or p < 0."""
    if 0 <= p <= 1:
        raise ValueError("s^p is strictly convex on (0, inf) only for p > 1 or p < 0")
    k = 2.0 * math.sqrt(p * (p - 1.0)) / p
    return _pos(f"s^{p:g}", lambda s: s**p, lambda s: p * s ** (p - 1), lambda s: p * (p - 1) * s ** (p - 2),
                lambda s: k * s ** (0.5 * p))


def neg_power_profile(p: float) -> ConvexProfile:
    """``-s^p`` on (0, inf), 0 < p < 1."""
    if not 0 < p < 1:
        raise ValueError("need 0 < p < 1")
    k = 2.0 * math.sqrt(p * (1.0 - p)) / p
    return _pos(f"-s^{p:g}", lambda s: -(s**p), lambda s: -p * s ** (p - 1),
                lambda s: p * (1 - p) * s ** (p - 2), lambda s: k * s ** (0.5 * p))


def neg_log_profile() -> ConvexProfile:
    return _pos("-ln s", lambda s: -np.log(s), lambda s: -1.0 / s, lambda s: 1.0 / s**2, np.log)


def entropy_profile() -> ConvexProfile:
    """``s ln s``."""
    return _pos("s ln s", lambda s: s * np.log(s), lambda s: np.log(s) + 1.0, lambda s: 1.0 / s,
                lambda s: 2.0 * np.sqrt(s))


def even_power_profile(n: int) -> ConvexProfile:
    """``s^(2n)`` on the real line."""
    if n < 1:
        raise ValueError("n >= 1")
    k = math.sqrt(2 * n * (2 * n - 1)) / n
    lat = ("symlog", 1e-3, 1e3) if n > 1 else ("symlog", 1e-6, 1e6)
    return ConvexProfile(f"s^{2 * n}", lambda s: s ** (2 * n), lambda s: 2 * n * s ** (2 * n - 1),
                         lambda s: 2 * n * (2 * n - 1) * s ** (2 * n - 2), psi=lambda s: k * np.sign(s) * np.abs(s) ** n,
                         lattice=lat)


def exp_profile(alpha: float) -> ConvexProfile:
    """``exp(alpha s)`` on the real line."""
    if alpha == 0:
        raise ValueError("alpha != 0")
    L = 60.0 / abs(alpha)
    sg = math.copysign(1.0, alpha)
    return ConvexProfile(f"exp({alpha:g}s)", lambda s: np.exp(alpha * s), lambda s: alpha * np.exp(alpha * s),
                         lambda s: alpha**2 * np.exp(alpha * s), psi=lambda s: 2.0 * sg * np.exp(0.5 * alpha * s),
                         lattice=("lin", -L, L))


def quadratic_profile(c: float = 1.0) -> ConvexProfile:
    """``c s^2 / 2``."""
    r = math.sqrt(c)
    return ConvexProfile(f"{c:g}s^2/2", lambda s: 0.5 * c * s**2, lambda s: c * s,
                         lambda s: c * np.ones_like(np.asarray(s, dtype=float)), psi=lambda s: r * s,
                         lattice=("symlog", 1e-6, 1e6))


def profile_from_hamiltonian(H: HamiltonianSpec) -> ConvexProfile:
    if H.kind is HamiltonianKind.QUADRATIC:
        return quadratic_profile(1.0)
    return ConvexProfile(f"H[{H.kind.value},{H.gamma:g}]", H.H, H.dH, H.d2H, lattice=("symlog", 1e-3, 1e3))


def profile_from_coupling(g: CouplingSpec) -> ConvexProfile:
    """Profile of the potential P (P'' = g'/m)."""
    if not g.increasing:
        raise ValueError("P is convex only for increasing g")
    if g.kind is CouplingKind.LOG:
        return neg_log_profile()
    if g.kind is CouplingKind.SIGNED_QUADRATIC:
        p = quadratic_profile(1.0)
        return ConvexProfile("m^2/2", p.phi, p.dphi, p.d2phi, 0.0, math.inf, p.psi)
    a = g.param
    if a == 1.0:
        return entropy_profile()
    k = 2.0 / math.sqrt(a)
    return _pos(f"P[m^{a:g}]", g.P, g.dP, g.d2P, lambda m: k * m ** (0.5 * a))


CATALOG = {
    "s^3": lambda: power_profile(3.0),
    "s^-1": lambda: power_profile(-1.0),
    "-s^0.5": lambda: neg_power_profile(0.5),
    "-ln s": neg_log_profile,
    "s ln s": entropy_profile,
    "s^2": lambda: even_power_profile(1),
    "s^4": lambda: even_power_profile(2),
    "exp(1.5s)": lambda: exp_profile(1.5),
}


def _gl(f, a, b):
    """24-point Gauss-Legendre on each [a_i, b_i] (vectorized)."""
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    x = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
    return 0.5 * (b - a)[..., 0] * np.sum(_GL_WEIGHTS * f(x, a, b), axis=-1)


def poincare_constant(profile: ConvexProfile, a, b):
    """``C(a, b) = (Phi(a) + Phi(b) - 2 Phi((a+b)/2)) / (Psi(b) - Psi(a))^2``.

    Endpoints are sorted first; coincident endpoints return the limit 1/4. Short
    intervals use quadrature of ``int Phi'' min(s-a, b-s)`` and ``int sqrt(Phi'')``
    to avoid cancellation.
    """
    a = profile.check_domain(a)
    b = profile.check_domain(b)
    a, b = np.minimum(a, b), np.maximum(a, b)
    a, b = np.broadcast_arrays(a, b)
    scale = np.maximum(np.abs(a), np.abs(b))
    width = b - a
    out = np.full(a.shape, COINCIDENT_LIMIT)
    short = (width > COINCIDENT_RTOL * scale) & (width <= 1e-2 * scale) & (width > 0)
    long_ = width > 1e-2 * scale
    if np.any(long_):
        al, bl = a[long_], b[long_]
        num = profile.phi(al) + profile.phi(bl) - 2.0 * profile.phi(0.5 * (al + bl))
        den = (profile.Psi(bl) - profile.Psi(al)) ** 2
        out[long_] = num / den
    if np.any(short):
        as_, bs = a[short], b[short]
        d2 = profile.d2phi
        mid = 0.5 * (as_ + bs)
        # the tent kernel min(s-a, b-s) has a kink at the midpoint: integrate each half
        num = (_gl(lambda x, a, b: d2(x) * (x - a), as_, mid)
               + _gl(lambda x, a, b: d2(x) * (b - x), mid, bs))
        den = _gl(lambda x, a, b: np.sqrt(d2(x)), as_, bs) ** 2
        out[short] = num / den
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PoincareSupReport:
    profile: str
    sup: float
    argmax: tuple[float, float]
    inner_max: float
    plateau: bool
    trend: tuple[float, ...]

    def to_json(self):
        return {"profile": self.profile, "sup": self.sup, "argmax": list(self.argmax),
                "inner_max": self.inner_max, "plateau": self.plateau, "trend": list(self.trend)}


def poincare_sup(profile: ConvexProfile, n: int = 121, rel_tol: float = 0.01) -> PoincareSupReport:
    """Lattice supremum of C(a, b), refined around the maximizing cell.

    Plateau certificate: the full-lattice max exceeds the max over the inner 90%
    of the lattice (5% trimmed at each end, in lattice index) by at most ``rel_tol``.
    ``trend`` holds the max over nested sub-lattices from the center outward.
    """
    pts = profile.lattice_points(n)
    pts = pts[(pts > profile.lo) & (pts < profile.hi)]
    A, B = np.meshgrid(pts, pts, indexing="ij")
    iu = np.triu_indices(pts.size, 1)
    C = np.full(A.shape, -np.inf)
    C[iu] = poincare_constant(profile, A[iu], B[iu])
    k = int(np.argmax(C))
    i, j = np.unravel_index(k, C.shape)
    best, arg = float(C[i, j]), (float(pts[i]), float(pts[j]))
    # local refinement on the neighbouring cell
    ia, ib = max(i - 1, 0), min(i + 1, pts.size - 1)
    ja, jb = max(j - 1, 0), min(j + 1, pts.size - 1)
    fa = np.linspace(pts[ia], pts[ib], 21)
    fb = np.linspace(pts[ja], pts[jb], 21)
    FA, FB = np.meshgrid(fa, fb, indexing="ij")
    ok = FA < FB
    if np.any(ok):
        vals = poincare_constant(profile, FA[ok], FB[ok])
        kk = int(np.argmax(vals))
        if vals[kk] > best:
            best, arg = float(vals[kk]), (float(FA[ok][kk]), float(FB[ok][kk]))
    m = pts.size
    trim = max(1, int(round(0.05 * m)))
    inner = C[trim:m - trim, trim:m - trim]
    inner_max = float(np.max(inner))
    trend = []
    for frac in (0.25, 0.5, 0.75, 0.9, 1.0):
        t = int(round(0.5 * (1 - frac) * m))
        sub = C[t:m - t, t:m - t] if t > 0 else C
        trend.append(float(np.max(sub)))
    plateau = best <= (1.0 + rel_tol) * inner_max
    return PoincareSupReport(profile.name, best, arg, inner_max, bool(plateau), tuple(trend))


def poincare_check(f: GridField, profile: ConvexProfile) -> float:
    """Margin ``C(a,b) int Phi''(f) f'^2 - (int Phi(f) - Phi(int f))`` with a, b = min f, max f."""
    vals = profile.check_domain(f.values)
    a, b = float(np.min(vals)), float(np.max(vals))
    C = poincare_constant(profile, a, b)
    fx = diff_periodic(f).values
    lhs = integrate(f.with_values(profile.phi(vals))) - float(profile.phi(integrate(f)))
    rhs = C * integrate(f.with_values(profile.d2phi(vals) * fx**2))
    return float(rhs - lhs)


@dataclass(frozen=True)
class JensenDecomposition:
    """Split of f at its mean A: p = |{f < A}|, A1, A2 the conditional means, gamma = p(A - A1)."""

    A: float
    p: float
    q: float
    A1: float
    A2: float
    gamma: float
    middle: float = 0.0  # p Phi(A1) + q Phi(A2) - Phi(A)


def jensen_gap(f: GridField, profile: ConvexProfile) -> tuple[float, JensenDecomposition]:
    vals = profile.check_domain(f.values)
    dx = f.grid.dx
    A = integrate(f)
    low = vals < A
    p = dx * np.count_nonzero(low)
    q = 1.0 - p
    gap = integrate(f.with_values(profile.phi(vals))) - float(profile.phi(A))
    if p == 0.0 or q <= 0.0:
        return float(gap), JensenDecomposition(A, p, max(q, 0.0), A, A, 0.0, 0.0)
    A1 = dx * float(np.sum(vals[low])) / p
    A2 = dx * float(np.sum(vals[~low])) / q
    middle = p * float(profile.phi(A1)) + q * float(profile.phi(A2)) - float(profile.phi(A))
    return float(gap), JensenDecomposition(A, p, q, A1, A2, p * (A - A1), middle)


def jensen_chain_violation(gap: float, d: JensenDecomposition, tol: float = 1e-10) -> float:
    """Largest violation of ``gap >= middle >= 0`` (0 when the chain holds within tol)."""
    return max(0.0, d.middle - gap - tol, -d.middle - tol)


@dataclass(frozen=True)
class DecayFit:
    rate: float
    r2: float
    n_points: int
    flat: bool = False

    def __iter__(self):
        return iter((self.rate, self.r2))


def decay_fit(times, values, floor: float = 1e-12, min_points: int = 10) -> DecayFit:
    """Least-squares fit of ``log I = c + rate t`` over the window ``I > floor * I(0)``."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape:
        raise FitError("times and values differ in length")
    if y.size == 0 or not y[0] > 0:
        raise FitError("I(0) must be > 0")
    win = y > floor * y[0]
    if np.count_nonzero(win) < min_points:
        raise FitError(f"only {np.count_nonzero(win)} points above the floor")
    t, ly = t[win], np.log(y[win])
    if np.ptp(ly) <= 1e-14 * max(1.0, abs(ly[0])):
        return DecayFit(0.0, 1.0, int(t.size), flat=True)
    slope, icpt = np.polyfit(t, ly, 1)
    res = ly - (slope * t + icpt)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(res**2)) / ss_tot
    return DecayFit(float(slope), r2, int(t.size))


def observed_orders(h: Sequence[float], err: Sequence[float]) -> tuple[list[float], float]:
    """Pairwise orders ``log(e_i/e_{i+1}) / log(h_i/h_{i+1})`` and the least-squares slope."""
    h = np.asarray(h, dtype=float)
    e = np.asarray(err, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        pair = list(np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:]))
        fit = float(np.polyfit(np.log(h), np.log(e), 1)[0]) if np.all(e > 0) else float("nan")
    return [float(x) for x in pair], fit


def random_trig_polynomial(rng: np.random.Generator, x: np.ndarray, max_degree: int = 6) -> np.ndarray:
    """Zero-mean trigonometric polynomial with decaying random coefficients, sup-normalized to 1."""
    K = int(rng.integers(1, max_degree + 1))
    k = np.arange(1, K + 1)[:, None]
    c = rng.standard_normal((2, K, 1)) / k
    f = np.sum(c[0] * np.cos(2 * np.pi * k * x) + c[1] * np.sin(2 * np.pi * k * x), axis=0)
    return f / np.max(np.abs(f))


def random_profile_sample(rng: np.random.Generator, grid, profile: ConvexProfile) -> GridField:
    """Random field mapping into the profile's domain."""
    T = random_trig_polynomial(rng, grid.x)
    if profile.lo == 0.0:
        L = 10.0 ** rng.uniform(-2, 2)
        r = rng.uniform(0.05, 0.95)
        return GridField(grid, L * (1.0 + r * T))
    c = rng.uniform(-3, 3)
    r = rng.uniform(0.05, 3.0)
    return GridField(grid, c + r * T)


def fuzz_inequalities(profile: ConvexProfile, n_samples: int = 1000, seed: int = 0, n_cells: int = 256,
                      tol: float = 1e-10) -> dict:
    """Counts of Poincare and Jensen-chain violations over random samples."""
    from .grid import PeriodicGrid

    rng = np.random.default_rng(seed)
    grid = PeriodicGrid(n_cells)
    poinc = jens = 0
    worst = math.inf
    gamma_err = 0.0
    for _ in range(n_samples):
        f = random_profile_sample(rng, grid, profile)
        margin = poincare_check(f, profile)
        worst = min(worst, margin)
        poinc += margin < -tol
        gap, d = jensen_gap(f, profile)
        jens += jensen_chain_violation(gap, d, tol) > 0
        gamma_err = max(gamma_err, abs(d.gamma - 0.5 * integrate(f.with_values(np.abs(f.values - d.A)))))
    return {"profile": profile.name, "samples": n_samples, "poincare_violations": int(poinc),
            "jensen_violations": int(jens), "worst_margin": float(worst), "gamma_identity_error": gamma_err}


__all__ = [
    "ConvexProfile", "power_profile", "neg_power_profile", "neg_log_profile", "entropy_profile",
    "even_power_profile", "exp_profile", "quadratic_profile", "profile_from_hamiltonian",
    "profile_from_coupling", "CATALOG", "poincare_constant", "poincare_sup", "PoincareSupReport",
    "poincare_check", "JensenDecomposition", "jensen_gap", "jensen_chain_violation", "DecayFit",
    "decay_fit", "observed_orders", "random_trig_polynomial", "random_profile_sample",
    "fuzz_inequalities",
]
