"""Hamiltonians, couplings and the derived model functions.

Numeric methods accept scalars or numpy arrays. ``expr`` methods return sympy
expressions of the same functions, used by the symbolic entropy code.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, RangeError, WindowError


class HamiltonianKind(str, enum.Enum):
    QUADRATIC = "quadratic"
    POWER_ABS = "power_abs"
    POWER_SQRT = "power_sqrt"


class CouplingKind(str, enum.Enum):
    POWER = "power"
    LOG = "log"
    SIGNED_QUADRATIC = "signed_quadratic"


@dataclass(frozen=True)
class HamiltonianSpec:
    """``p^2/2``, ``|p|^gamma/gamma`` or ``(1 + p^2)^(gamma/2)``."""

    kind: HamiltonianKind = HamiltonianKind.QUADRATIC
    gamma: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "kind", HamiltonianKind(self.kind))
        if self.kind is not HamiltonianKind.QUADRATIC and not self.gamma > 1:
            raise ValueError("gamma must be > 1")

    @classmethod
    def quadratic(cls):
        return cls(HamiltonianKind.QUADRATIC)

    @classmethod
    def power_abs(cls, gamma):
        return cls(HamiltonianKind.POWER_ABS, gamma)

    @classmethod
    def power_sqrt(cls, gamma):
        return cls(HamiltonianKind.POWER_SQRT, gamma)

    def H(self, p):
        p = np.asarray(p, dtype=float)
        if self.kind is HamiltonianKind.QUADRATIC:
            return 0.5 * p**2
        if self.kind is HamiltonianKind.POWER_ABS:
            return np.abs(p) ** self.gamma / self.gamma
        return (1.0 + p**2) ** (0.5 * self.gamma)

    def dH(self, p):
        p = np.asarray(p, dtype=float)
        if self.kind is HamiltonianKind.QUADRATIC:
            return p
        if self.kind is HamiltonianKind.POWER_ABS:
            return np.sign(p) * np.abs(p) ** (self.gamma - 1.0)
        return self.gamma * p * (1.0 + p**2) ** (0.5 * self.gamma - 1.0)

    def d2H(self, p):
        p = np.asarray(p, dtype=float)
        if self.kind is HamiltonianKind.QUADRATIC:
            return np.ones_like(p)
        if self.kind is HamiltonianKind.POWER_ABS:
            # singular (gamma < 2) or degenerate (gamma > 2) at p = 0
            return (self.gamma - 1.0) * np.abs(p) ** (self.gamma - 2.0)
        g = self.gamma
        return g * (1.0 + p**2) ** (0.5 * g - 2.0) * (1.0 + (g - 1.0) * p**2)

    def expr(self, p):
        import sympy as sp

        if self.kind is HamiltonianKind.QUADRATIC:
            return p**2 / 2
        g = sp.nsimplify(self.gamma)
        if self.kind is HamiltonianKind.POWER_ABS:
            return sp.Abs(p) ** g / g
        return (1 + p**2) ** (g / 2)


@dataclass(frozen=True)
class CouplingSpec:
    """``m^alpha``, ``ln m`` or ``s m^2 / 2`` with ``s = +-1``.

    ``param`` is alpha for POWER and the sign s for SIGNED_QUADRATIC.
    """

    kind: CouplingKind = CouplingKind.LOG
    param: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", CouplingKind(self.kind))
        if self.kind is CouplingKind.POWER and not self.param > 0:
            raise ValueError("alpha must be > 0")
        if self.kind is CouplingKind.SIGNED_QUADRATIC and self.param not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def power(cls, alpha):
        return cls(CouplingKind.POWER, float(alpha))

    @classmethod
    def log(cls):
        return cls(CouplingKind.LOG)

    @classmethod
    def signed_quadratic(cls, s):
        return cls(CouplingKind.SIGNED_QUADRATIC, int(s))

    @property
    def monotone(self) -> int:
        """+1 if g is strictly increasing on (0, inf), -1 if strictly decreasing."""
        if self.kind is CouplingKind.SIGNED_QUADRATIC:
            return int(self.param)
        return 1

    @property
    def increasing(self) -> bool:
        return self.monotone > 0

    def _check(self, m):
        m = np.asarray(m, dtype=float)
        if np.any(m <= 0):
            raise DomainError(f"coupling evaluated at m <= 0 (min m = {np.min(m)})")
        return m

    def g(self, m):
        m = self._check(m)
        if self.kind is CouplingKind.POWER:
            return m**self.param
        if self.kind is CouplingKind.LOG:
            return np.log(m)
        return 0.5 * self.param * m**2

    def dg(self, m):
        m = self._check(m)
        if self.kind is CouplingKind.POWER:
            return self.param * m ** (self.param - 1.0)
        if self.kind is CouplingKind.LOG:
            return 1.0 / m
        return self.param * m

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind is CouplingKind.LOG:
            return np.exp(y)
        if self.kind is CouplingKind.POWER:
            if np.any(y <= 0):
                raise RangeError(f"m^alpha has range (0, inf); got min {np.min(y)}")
            return y ** (1.0 / self.param)
        s = self.param
        if np.any(s * y <= 0):
            raise RangeError("s m^2/2 inverted outside its range")
        return np.sqrt(2.0 * s * y)

    def P(self, m):
        m = self._check(m)
        if self.kind is CouplingKind.POWER:
            a = self.param
            if a == 1.0:
                return m * np.log(m) - m
            return m**a / (a - 1.0)
        if self.kind is CouplingKind.LOG:
            return -np.log(m)
        return 0.5 * self.param * m**2

    def dP(self, m):
        m = self._check(m)
        if self.kind is CouplingKind.POWER:
            a = self.param
            if a == 1.0:
                return np.log(m)
            return a * m ** (a - 1.0) / (a - 1.0)
        if self.kind is CouplingKind.LOG:
            return -1.0 / m
        return self.param * m

    def d2P(self, m):
        return self.dg(m) / self._check(m)

    def bregman_P(self, m):
        """``P(m) - P(1) - P'(1)(m - 1)``, evaluated without cancellation."""
        m = self._check(m)
        d = m - 1.0
        if self.kind is CouplingKind.LOG:
            return d - np.log1p(d)
        if self.kind is CouplingKind.SIGNED_QUADRATIC:
            return 0.5 * self.param * d**2
        a = self.param
        if a == 1.0:
            return m * np.log(m) - d
        # (m^a - 1 - a(m-1)) / (a - 1) via expm1 for accuracy near m = 1
        return (np.expm1(a * np.log1p(d)) - a * d) / (a - 1.0)

    def expr(self, m):
        import sympy as sp

        if self.kind is CouplingKind.POWER:
            return m ** sp.nsimplify(self.param)
        if self.kind is CouplingKind.LOG:
            return sp.log(m)
        return sp.Integer(int(self.param)) * m**2 / 2

    def P_expr(self, m):
        import sympy as sp

        if self.kind is CouplingKind.POWER:
            a = sp.nsimplify(self.param)
            if a == 1:
                return m * sp.log(m) - m
            return m**a / (a - 1)
        if self.kind is CouplingKind.LOG:
            return -sp.log(m)
        return sp.Integer(int(self.param)) * m**2 / 2


@dataclass(frozen=True)
class ModelSpec:
    H: HamiltonianSpec = HamiltonianSpec()
    g: CouplingSpec = CouplingSpec()
    eps: float = 0.0

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("viscosity eps must be >= 0")


def potential_P(g: CouplingSpec, m):
    """Coupling potential with ``P'' = g'/m``; canonical constants, e.g. P = -ln m for g = ln m."""
    return g.P(m)


def phi(v, w, model: ModelSpec):
    """Squared wave speed ``H'(v)^2 + m g'(m) H''(v)`` with ``m = g^{-1}(w + H(v))``."""
    m = model.g.inverse(np.asarray(w) + model.H.H(v))
    return model.H.dH(v) ** 2 + model.g.dg(m) * m * model.H.d2H(v)


def stress_sigma(z):
    z = np.asarray(z, dtype=float)
    return z + z**3 / 3.0


def stress_sigma_prime(z):
    return 1.0 + np.asarray(z, dtype=float) ** 2


def G_of_p(p):
    """The even convex transform ``(|p| sqrt(1+p^2) + arcsinh|p|) / 2``."""
    a = np.abs(np.asarray(p, dtype=float))
    return 0.5 * (a * np.sqrt(1.0 + a * a) + np.arcsinh(a))


def G_prime(p):
    """``sign(p) sqrt(1+p^2)``; returns 0 at p = 0 (an element of the subdifferential [-1, 1])."""
    p = np.asarray(p, dtype=float)
    return np.sign(p) * np.sqrt(1.0 + p * p)


def G_conjugate(q):
    """Closed-form Legendre transform of G: 0 on [-1, 1], else (|q|sqrt(q^2-1) - arccosh|q|)/2."""
    a = np.abs(np.asarray(q, dtype=float))
    out = np.zeros_like(a)
    big = a > 1.0
    ab = a[big]
    out[big] = 0.5 * (ab * np.sqrt(ab * ab - 1.0) - np.arccosh(ab))
    return out if out.ndim else float(out)


INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f: Callable, lo, hi, tol: float = 1e-13, maximize: bool = False, max_iter: int = 200):
    """Vectorized golden-section search on brackets ``[lo, hi]`` (arrays of equal shape).

    Returns the argument of the minimum (or maximum). Ties shrink toward the
    smaller argument.
    """
    sgn = -1.0 if maximize else 1.0
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    for _ in range(max_iter):
        if np.all(np.abs(b - a) <= tol * (1.0 + np.abs(a))):
            break
        c = b - INV_PHI * (b - a)
        d = a + INV_PHI * (b - a)
        left = sgn * f(c) <= sgn * f(d)
        a, b = np.where(left, a, c), np.where(left, d, b)
    return 0.5 * (a + b)


def legendre(f: Callable, v: float, p_max: float = 10.0, n_scan: int = 4001) -> float:
    """Numeric convex conjugate ``sup_p (p v - f(p))`` by grid scan plus golden section."""
    p = np.linspace(-p_max, p_max, n_scan)
    vals = p * v - np.asarray(f(p), dtype=float)
    k = int(np.argmax(vals))
    if k == 0 or k == n_scan - 1:
        raise WindowError(f"maximizer at scan boundary |p| = {p_max}; enlarge p_max")
    h = p[1] - p[0]
    p_star = golden_section(lambda q: q * v - np.asarray(f(q), dtype=float),
                            p[k] - h, p[k] + h, maximize=True)
    return float(max(float(p_star * v - f(p_star)), vals[k]))
