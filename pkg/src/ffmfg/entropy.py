"""Entropy/entropy-flux pairs of the one-dimensional MFG systems.

Every system is written as ``U_t + A(U) U_x = 0`` in its state variables.
A function E(U) is an entropy iff ``grad(E) A`` is itself a gradient; the
curl of that row vector is a linear second-order operator on E. For the
backward-forward and forward-forward (v, m) systems we use the normalized
forms

    BF:  E_vv / H'' + E_mm / P''                                  = 0
    FF:  E_vv / H'' + 2 H' E_vm / (H'' g') - m E_mm / g'          = 0

which are the flux-derived operators divided by ``-H'' g'`` and ``H'' g'``.
Polynomial null spaces are computed in exact rational arithmetic (sympy),
with alpha kept symbolic for the (z, v) system.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
import sympy as sp
from sympy.polys.matrices import DomainMatrix

from .errors import DomainError, IntegrationError
from .grid import Variant
from .models import HamiltonianSpec, CouplingSpec, ModelSpec

V = sp.Symbol("v", real=True)
M = sp.Symbol("m", positive=True)
W = sp.Symbol("w", real=True)
Z = sp.Symbol("z", real=True)
ALPHA = sp.Symbol("alpha", positive=True)

# entropy monomials are v^i y^j; y is the second symbol here
PAIR_SYMBOLS = {Variant.VM: (V, M), Variant.VW: (V, W), Variant.ZV: (V, Z)}
# state order of each variant (the order the solvers store fields in)
STATE_SYMBOLS = {Variant.VM: (V, M), Variant.VW: (V, W), Variant.ZV: (Z, V)}


class Problem(str, enum.Enum):
    BACKWARD_FORWARD = "backward_forward"
    FORWARD_FORWARD = "forward_forward"
    SYSTEM3 = "system3"
    WAVE = "wave"  # (v, w) system v_t = w_x, w_t = phi v_x


def system3_c(alpha):
    return sp.Rational(1, 3) + alpha / 6 - alpha**2 / 2


def wave_phi(alpha, variant: str = "derived", v=V, w=W):
    """Squared wave speed of the (v, w) system for H = v^2/2, g = m^alpha.

    ``derived``: v^2 + alpha (w + v^2/2), from m g'(m) = alpha (w + H(v)).
    ``displayed``: v^2 + alpha (w + v^2), the alternative candidate.
    """
    if variant == "derived":
        return v**2 + alpha * (w + v**2 / 2)
    if variant == "displayed":
        return v**2 + alpha * (w + v**2)
    raise ValueError(f"unknown phi variant {variant!r}")


def system3_fluxes(alpha, variant: str = "derived", z=Z, v=V):
    """Right-hand-side fluxes (f_z, f_v) of ``z_t = (f_z)_x, v_t = (f_v)_x``.

    ``derived`` uses v_t = w_x = (z - alpha v^2/2)_x; ``displayed`` keeps the
    ``+ alpha v^2/2`` sign, which is the system the tabulated (z, v) laws solve.
    """
    fz = system3_c(alpha) * v**3 + alpha * v * z
    if variant == "derived":
        fv = z - alpha * v**2 / 2
    elif variant == "displayed":
        fv = z + alpha * v**2 / 2
    else:
        raise ValueError(f"unknown system3 variant {variant!r}")
    return fz, fv


@dataclass(frozen=True)
class EntropyPde:
    """Entropy condition of one system.

    ``model`` is needed for the (v, m) problems; ``alpha`` (symbolic by default)
    and ``variant`` for SYSTEM3 and WAVE.
    """

    problem: Problem
    model: ModelSpec | None = None
    alpha: object = ALPHA
    variant: str = "derived"

    def __post_init__(self):
        object.__setattr__(self, "problem", Problem(self.problem))
        if self.problem in (Problem.BACKWARD_FORWARD, Problem.FORWARD_FORWARD) and self.model is None:
            raise ValueError("(v, m) problems need a model")
        object.__setattr__(self, "alpha", sp.nsimplify(self.alpha))

    @classmethod
    def ff(cls, H: HamiltonianSpec, g: CouplingSpec):
        return cls(Problem.FORWARD_FORWARD, ModelSpec(H, g))

    @classmethod
    def bf(cls, H: HamiltonianSpec, g: CouplingSpec):
        return cls(Problem.BACKWARD_FORWARD, ModelSpec(H, g))

    @property
    def pair(self) -> Variant:
        return {Problem.BACKWARD_FORWARD: Variant.VM, Problem.FORWARD_FORWARD: Variant.VM,
                Problem.SYSTEM3: Variant.ZV, Problem.WAVE: Variant.VW}[self.problem]

    @property
    def symbols(self) -> tuple[sp.Symbol, sp.Symbol]:
        return PAIR_SYMBOLS[self.pair]

    def characteristic_matrix(self) -> sp.Matrix:
        """A(U) with ``U_t + A(U) U_x = 0`` in state order."""
        if self.problem in (Problem.BACKWARD_FORWARD, Problem.FORWARD_FORWARD):
            H = self.model.H.expr(V)
            g = self.model.g.expr(M)
            s = 1 if self.problem is Problem.FORWARD_FORWARD else -1
            F = sp.Matrix([s * (H - g), -M * sp.diff(H, V)])
            return F.jacobian([V, M])
        if self.problem is Problem.SYSTEM3:
            fz, fv = system3_fluxes(self.alpha, self.variant)
            return -sp.Matrix([fz, fv]).jacobian([Z, V])
        ph = wave_phi(self.alpha, self.variant)
        return sp.Matrix([[0, -1], [-ph, 0]])

    def flux_gradient(self, E) -> tuple[sp.Expr, sp.Expr]:
        """``grad(Q) = grad(E) A`` in state order."""
        s1, s2 = STATE_SYMBOLS[self.pair]
        A = self.characteristic_matrix()
        dE = [sp.diff(E, s1), sp.diff(E, s2)]
        return (sum(dE[i] * A[i, 0] for i in range(2)), sum(dE[i] * A[i, 1] for i in range(2)))

    def apply_from_flux(self, E) -> sp.Expr:
        """Curl of ``grad(E) A``: zero iff E is an entropy."""
        s1, s2 = STATE_SYMBOLS[self.pair]
        q1, q2 = self.flux_gradient(E)
        return sp.diff(q1, s2) - sp.diff(q2, s1)

    def coefficients(self):
        """(A, B, C, D, F) with L(E) = A E_vv + B E_vy + C E_yy + D E_v + F E_y."""
        x, y = self.symbols
        if self.problem in (Problem.BACKWARD_FORWARD, Problem.FORWARD_FORWARD):
            d2H = sp.diff(self.model.H.expr(V), V, 2)
            dH = sp.diff(self.model.H.expr(V), V)
            dg = sp.diff(self.model.g.expr(M), M)
            if self.problem is Problem.BACKWARD_FORWARD:
                return (1 / d2H, sp.Integer(0), M / dg, sp.Integer(0), sp.Integer(0))
            return (1 / d2H, 2 * dH / (d2H * dg), -M / dg, sp.Integer(0), sp.Integer(0))
        # generic: expand the curl operator on a general function
        f = sp.Function("E")(x, y)
        expr = sp.expand(self.apply_from_flux(f))
        coef = []
        for d in (f.diff(x, 2), f.diff(x, y), f.diff(y, 2), f.diff(x), f.diff(y)):
            coef.append(sp.simplify(expr.coeff(d)))
            expr = sp.expand(expr - coef[-1] * d)
        return tuple(coef)

    def apply(self, E) -> sp.Expr:
        x, y = self.symbols
        A, B, C, D, F = self.coefficients()
        return (A * sp.diff(E, x, 2) + B * sp.diff(E, x, y) + C * sp.diff(E, y, 2)
                + D * sp.diff(E, x) + F * sp.diff(E, y))

    def polynomial_coefficients(self):
        """Operator coefficients multiplied by a common denominator to make them polynomial."""
        x, y = self.symbols
        coefs = [sp.together(c) for c in self.coefficients()]
        dens = [sp.fraction(c)[1] for c in coefs]
        den = sp.lcm_list(dens) if dens else sp.Integer(1)
        out = []
        for c in coefs:
            p = sp.cancel(c * den)
            if not p.is_polynomial(x, y):
                raise ValueError(f"operator coefficient {c} is not rational in {x}, {y}")
            out.append(sp.expand(p))
        return tuple(out)


def _grlex_key(ij):
    i, j = ij
    return (-(i + j), -i)


@dataclass(frozen=True)
class PolynomialEntropy:
    """Polynomial ``sum c_ij v^i y^j`` with exact (rational or rational-in-alpha) coefficients."""

    pair: Variant
    terms: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "pair", Variant(self.pair))
        items = dict(self.terms.items() if isinstance(self.terms, Mapping) else self.terms)
        clean = {}
        for (i, j), c in items.items():
            c = sp.cancel(sp.nsimplify(c))
            if c != 0:
                clean[(int(i), int(j))] = c
        object.__setattr__(self, "terms", tuple(sorted(clean.items(), key=lambda kv: _grlex_key(kv[0]))))

    @property
    def coeffs(self) -> dict:
        return dict(self.terms)

    @property
    def degree(self) -> int:
        return max((i + j for (i, j), _ in self.terms), default=0)

    @property
    def symbols(self):
        return PAIR_SYMBOLS[self.pair]

    def expr(self) -> sp.Expr:
        x, y = self.symbols
        return sum((c * x**i * y**j for (i, j), c in self.terms), sp.Integer(0))

    @classmethod
    def from_expr(cls, expr, pair) -> "PolynomialEntropy":
        pair = Variant(pair)
        x, y = PAIR_SYMBOLS[pair]
        if isinstance(expr, str):
            expr = sp.sympify(expr, locals={"v": V, "m": M, "w": W, "z": Z, "alpha": ALPHA})
        poly = sp.Poly(sp.expand(expr), x, y)
        return cls(pair, {mon: c for mon, c in zip(poly.monoms(), poly.coeffs())})

    def normalized(self) -> "PolynomialEntropy":
        if not self.terms:
            return self
        lead = self.terms[0][1]
        return PolynomialEntropy(self.pair, {k: c / lead for k, c in self.terms})

    def subs(self, alpha) -> "PolynomialEntropy":
        a = sp.nsimplify(alpha)
        return PolynomialEntropy(self.pair, {k: sp.sympify(c).subs(ALPHA, a) for k, c in self.terms})

    def free_parameters(self) -> set:
        out = set()
        for _, c in self.terms:
            out |= sp.sympify(c).free_symbols
        return out

    def numeric(self) -> Callable:
        """Vectorized ``E(v, y)``; coefficients must be numeric."""
        if self.free_parameters():
            raise ValueError("substitute alpha before numeric evaluation")
        terms = [(i, j, float(c)) for (i, j), c in self.terms]

        def E(x, y):
            x = np.asarray(x, dtype=float)
            y = np.asarray(y, dtype=float)
            out = np.zeros(np.broadcast(x, y).shape)
            for i, j, c in terms:
                out = out + c * x**i * y**j
            return out

        return E

    def state_function(self) -> Callable:
        """E as a function of the state fields in solver order."""
        return to_state_function(self.numeric(), self.pair)

    def __str__(self):
        return str(self.expr())

    def to_json(self):
        return {
            "pair": self.pair.value,
            "degree": self.degree,
            "monomials": [[i, j] for (i, j), _ in self.terms],
            "coefficients": [str(c) for _, c in self.terms],
            "expression": str(self.expr()),
        }


def to_state_function(E: Callable, pair: Variant) -> Callable:
    if Variant(pair) is Variant.ZV:
        return lambda z, v: E(v, z)
    return E


@dataclass(frozen=True, eq=False)
class SymbolicEntropy:
    """A general (non-polynomial) entropy candidate given as a sympy expression in (v, y)."""

    expr: sp.Expr
    pair: Variant = Variant.VM

    def __post_init__(self):
        object.__setattr__(self, "pair", Variant(self.pair))
        x, y = PAIR_SYMBOLS[self.pair]
        e = self.expr
        d = {"v": sp.diff(e, x), "y": sp.diff(e, y)}
        h = (sp.diff(e, x, 2), sp.diff(e, x, y), sp.diff(e, y, 2))
        object.__setattr__(self, "_f", sp.lambdify((x, y), e, "numpy"))
        object.__setattr__(self, "_grad", [sp.lambdify((x, y), d[k], "numpy") for k in ("v", "y")])
        object.__setattr__(self, "_hess", [sp.lambdify((x, y), t, "numpy") for t in h])

    @property
    def symbols(self):
        return PAIR_SYMBOLS[self.pair]

    def __call__(self, x, y):
        return _bcast(self._f(x, y), x, y)

    def gradient(self, x, y):
        return tuple(_bcast(f(x, y), x, y) for f in self._grad)

    def hessian(self, x, y):
        """(E_vv, E_vy, E_yy)."""
        return tuple(_bcast(f(x, y), x, y) for f in self._hess)

    def state_function(self) -> Callable:
        return to_state_function(self, self.pair)


def _bcast(val, x, y):
    return np.broadcast_to(np.asarray(val, dtype=float), np.broadcast(np.asarray(x), np.asarray(y)).shape).copy()


def convex_entropy(model: ModelSpec) -> SymbolicEntropy:
    """``H(v) + P(m)``."""
    return SymbolicEntropy(model.H.expr(V) + model.g.P_expr(M), Variant.VM)


def _as_expr(E, pair: Variant) -> sp.Expr:
    if isinstance(E, (PolynomialEntropy, SymbolicEntropy)):
        return E.expr() if isinstance(E, PolynomialEntropy) else E.expr
    if isinstance(E, sp.Expr):
        return E
    if callable(E):
        return sp.sympify(E(*PAIR_SYMBOLS[pair]))
    return sp.sympify(E)


def entropy_residual(E, pde: EntropyPde, points) -> float:
    """``max |L(E)|`` over sample points ``(v, y)`` (array of shape (k, 2))."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = pde.symbols
    if pde.pair is Variant.VM and np.any(pts[:, 1] <= 0):
        raise DomainError("sample points need m > 0")
    L = pde.apply(_as_expr(E, pde.pair))
    extra = L.free_symbols - {x, y}
    if extra:
        raise ValueError(f"residual has free parameters {extra}; give the pde a numeric alpha")
    f = sp.lambdify((x, y), L, "numpy")
    vals = _bcast(f(pts[:, 0], pts[:, 1]), pts[:, 0], pts[:, 1])
    return float(np.max(np.abs(vals)))


def symbolic_residual(E, pde: EntropyPde) -> sp.Expr:
    return sp.simplify(pde.apply(_as_expr(E, pde.pair)))


def separable_entropy(lam: float, sign: int = 1, kind: str = "cos") -> SymbolicEntropy:
    """``exp(sign sqrt(lam) v) cos(sqrt(lam) m)`` (or ``sin``), for H = g = quadratic."""
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    if sign not in (1, -1):
        raise ValueError("sign must be +-1")
    k = sp.sqrt(sp.nsimplify(lam))
    trig = {"cos": sp.cos, "sin": sp.sin}[kind]
    return SymbolicEntropy(sp.exp(sign * k * V) * trig(k * M), Variant.VM)


def monomials(degree: int, include_constant: bool = False) -> list[tuple[int, int]]:
    lo = 0 if include_constant else 1
    out = [(i, d - i) for d in range(lo, degree + 1) for i in range(d + 1)]
    return sorted(out, key=_grlex_key)


def _domain_rref(rows: list[list], domain_hint=None):
    dm = DomainMatrix.from_Matrix(sp.Matrix(rows)).to_field()
    rref, pivots = dm.rref()
    return rref, pivots


def polynomial_entropy_basis(pde: EntropyPde, degree: int, include_constant: bool = False) -> list[PolynomialEntropy]:
    """Basis of polynomial entropies of total degree <= ``degree``, in reduced grlex form.

    Each element has leading coefficient 1 and no other element has a term on
    its leading monomial.
    """
    x, y = pde.symbols
    mons = monomials(degree, include_constant)
    if not mons:
        return []
    A, B, C, D, F = pde.polynomial_coefficients()
    images = []
    for i, j in mons:
        e = x**i * y**j
        img = (A * sp.diff(e, x, 2) + B * sp.diff(e, x, y) + C * sp.diff(e, y, 2)
               + D * sp.diff(e, x) + F * sp.diff(e, y))
        images.append(sp.Poly(sp.expand(img), x, y) if img != 0 else None)
    out_monos = sorted({mon for p in images if p is not None for mon in p.monoms()})
    rows = []
    for mon in out_monos:
        rows.append([p.coeff_monomial(mon) if p is not None else 0 for p in images])
    if rows:
        dm = DomainMatrix.from_Matrix(sp.Matrix(rows)).to_field()
        ns = dm.nullspace().to_Matrix()
    else:
        ns = sp.eye(len(mons))
    if ns.rows == 0:
        return []
    # reduced row echelon form in grlex order gives a canonical basis
    rref = DomainMatrix.from_Matrix(ns).to_field().rref()[0].to_Matrix()
    basis = []
    for r in range(rref.rows):
        row = rref.row(r)
        if all(c == 0 for c in row):
            continue
        basis.append(PolynomialEntropy(pde.pair, {mons[k]: row[k] for k in range(len(mons)) if row[k] != 0}))
    return basis


def span_coordinates(target: PolynomialEntropy, basis: Sequence[PolynomialEntropy]):
    """Exact coefficients expressing ``target`` in ``basis``, or None if not in the span."""
    mons = sorted({k for b in [target, *basis] for k, _ in b.terms}, key=_grlex_key)
    if not basis:
        return None if target.terms else []
    cs = sp.symbols(f"k0:{len(basis)}")
    eqs = []
    for mon in mons:
        lhs = sum(cs[n] * b.coeffs.get(mon, 0) for n, b in enumerate(basis))
        eqs.append(sp.Eq(lhs, target.coeffs.get(mon, 0)))
    sol = sp.solve(eqs, cs, dict=True)
    if not sol:
        return None
    s = sol[0]
    return [sp.simplify(s.get(c, 0)) for c in cs]


def in_span(target: PolynomialEntropy, basis: Sequence[PolynomialEntropy]) -> bool:
    return span_coordinates(target, basis) is not None


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10,
                     max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""
    if a == b:
        return 0.0

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        if depth <= 0:
            raise IntegrationError(f"adaptive Simpson did not converge on [{a}, {b}]")
        return (recurse(a, m, fa, flm, fm, left, tol / 2, depth - 1)
                + recurse(m, b, fm, frm, fb, right, tol / 2, depth - 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


class EntropyFlux:
    """Entropy flux Q reconstructed from ``grad(Q) = grad(E) A`` by line integration.

    Arguments of ``__call__`` are in entropy-variable order (v, y).
    """

    def __init__(self, E, pde: EntropyPde, base_point=(0.0, 1.0), tol: float = 1e-10):
        self.pde = pde
        self.base = tuple(float(b) for b in base_point)
        self.tol = tol
        expr = _as_expr(E, pde.pair)
        x, y = pde.symbols
        q_state = pde.flux_gradient(expr)
        s1, s2 = STATE_SYMBOLS[pde.pair]
        grads = {s1: q_state[0], s2: q_state[1]}
        self.Qx = sp.lambdify((x, y), grads[x], "numpy")
        self.Qy = sp.lambdify((x, y), grads[y], "numpy")

    def __call__(self, x: float, y: float, path: str = "x-first") -> float:
        x0, y0 = self.base
        if path == "x-first":
            a = adaptive_simpson(lambda s: float(self.Qx(s, y0)), x0, x, self.tol)
            return a + adaptive_simpson(lambda s: float(self.Qy(x, s)), y0, y, self.tol)
        if path == "y-first":
            a = adaptive_simpson(lambda s: float(self.Qy(x0, s)), y0, y, self.tol)
            return a + adaptive_simpson(lambda s: float(self.Qx(s, y)), x0, x, self.tol)
        raise ValueError(f"unknown path {path!r}")

    def path_discrepancy(self, x: float, y: float) -> float:
        return abs(self(x, y, "x-first") - self(x, y, "y-first"))


def entropy_flux(E, pde: EntropyPde, base_point=(0.0, 1.0), tol: float = 1e-10) -> EntropyFlux:
    return EntropyFlux(E, pde, base_point, tol)


def z_invariant_residual(alpha=ALPHA, F=None, phi_variant: str = "derived") -> sp.Expr:
    """``F_vv - d/dw(F_w phi)`` for the (v, w) system; default F = w + (alpha/2) v^2."""
    a = sp.nsimplify(alpha)
    if F is None:
        F = W + a / 2 * V**2
    ph = wave_phi(a, phi_variant)
    return sp.simplify(sp.diff(F, V, 2) - sp.diff(sp.diff(F, W) * ph, W))


def verify_z_invariant(alpha=ALPHA, phi_variant: str = "derived"):
    return z_invariant_residual(alpha, None, phi_variant)


def system3_consistency(alpha=ALPHA) -> dict:
    """Residuals of the (z, v) conservation laws against the (v, w) system they are built from.

    For each phi candidate and each sign of the v-flux, substitute
    ``z = w + (alpha/2) v^2`` and compare ``z_t = w_t + alpha v v_t`` (using
    ``v_t = w_x``, ``w_t = phi v_x``) with the (z, v) fluxes. Residuals are
    polynomials in (v, z) multiplying v_x and z_x; all zero means exact equivalence.
    """
    a = sp.nsimplify(alpha)
    vx, zx = sp.symbols("v_x z_x")
    w_of = Z - a / 2 * V**2
    wx = zx - a * V * vx
    out = {}
    for phi_variant in ("derived", "displayed"):
        ph = wave_phi(a, phi_variant, V, w_of)
        zt = ph * vx + a * V * wx
        for sys_variant in ("derived", "displayed"):
            fz, fv = system3_fluxes(a, sys_variant)
            rz = sp.expand(zt - (sp.diff(fz, V) * vx + sp.diff(fz, Z) * zx))
            rv = sp.expand(wx - (sp.diff(fv, V) * vx + sp.diff(fv, Z) * zx))
            out[(phi_variant, sys_variant)] = {"z_equation": sp.factor(rz), "v_equation": sp.factor(rv)}
    return out


__all__ = [
    "Problem", "EntropyPde", "PolynomialEntropy", "SymbolicEntropy", "EntropyFlux",
    "entropy_residual", "symbolic_residual", "separable_entropy", "polynomial_entropy_basis",
    "span_coordinates", "in_span", "entropy_flux", "convex_entropy", "verify_z_invariant",
    "z_invariant_residual", "system3_consistency", "system3_fluxes", "wave_phi",
    "adaptive_simpson", "monomials", "V", "M", "W", "Z", "ALPHA",
]
