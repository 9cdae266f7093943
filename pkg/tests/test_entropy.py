import sympy as sp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ffmfg.entropy import (ALPHA, M, V, W, Z, EntropyPde, PolynomialEntropy, Problem, SymbolicEntropy,
                           adaptive_simpson, convex_entropy, entropy_flux, entropy_residual, in_span,
                           polynomial_entropy_basis, separable_entropy, symbolic_residual, system3_consistency,
                           z_invariant_residual)
from ffmfg.errors import DomainError
from ffmfg.grid import Variant
from ffmfg.models import CouplingSpec, HamiltonianSpec, ModelSpec
from ffmfg.tables import PROBLEM_KEYS, REFERENCE_LAWS, pde_for, reference_entropies

H2 = HamiltonianSpec.quadratic()
RNG = np.random.default_rng(0)
PTS = np.column_stack([RNG.uniform(-2, 2, 50), RNG.uniform(0.2, 3, 50)])


def poly(s, pair=Variant.VM):
    return PolynomialEntropy.from_expr(s, pair)


@pytest.mark.parametrize("key", PROBLEM_KEYS)
def test_affine_functions_are_entropies(key):
    pde = pde_for(key, alpha=2)
    x, y = pde.symbols
    assert sp.simplify(pde.apply(3 * x - 5 * y)) == 0


def test_bf_quadratic_is_harmonic():
    # null space of degree k is spanned by Re, Im of (m + i v)^k
    basis = polynomial_entropy_basis(pde_for("bf-quadratic"), 5)
    for k in range(1, 6):
        z = sp.expand((M + sp.I * V) ** k)
        for part in (sp.re(z), sp.im(z)):
            assert in_span(poly(part), basis)
    assert len(basis) == 10


def test_degree_3_examples():
    b = polynomial_entropy_basis(pde_for("bf-quadratic"), 3)
    assert in_span(poly("v**3 - 3*m**2*v"), b) and in_span(poly("m**3 - 3*m*v**2"), b)
    b = polynomial_entropy_basis(pde_for("ff-quadratic"), 4)
    assert in_span(poly("-2*m**2*v**2 - m**4/3 + v**4"), b) and in_span(poly("m**3*v"), b)


def test_ff_log_low_degree_laws():
    b = polynomial_entropy_basis(pde_for("ff-log"), 4)
    assert sorted(str(E) for E in b) == sorted(["m", "v", "m**3*v"])


@pytest.mark.parametrize("key,size", [("bf-quadratic", 12), ("bf-antimonotone", 12), ("ff-quadratic", 8),
                                      ("ff-antimonotone", 8), ("system3-displayed", 6)])
def test_degree_6_basis_sizes(key, size):
    assert len(polynomial_entropy_basis(pde_for(key), 6)) == size


@pytest.mark.parametrize("key", list(REFERENCE_LAWS))
def test_reference_rows_have_zero_symbolic_residual(key):
    pde = pde_for(key)
    for _, E in reference_entropies(key):
        assert symbolic_residual(E, pde) == 0


def test_basis_normal_form():
    for E in polynomial_entropy_basis(pde_for("ff-quadratic"), 6):
        assert E.terms[0][1] == 1


@given(st.lists(st.integers(-5, 5), min_size=8, max_size=8))
def test_operator_linear_on_basis(cs):
    basis = polynomial_entropy_basis(pde_for("ff-quadratic"), 6)
    combo = sum((sp.Rational(c, 3) * E.expr() for c, E in zip(cs, basis)), sp.Integer(0))
    assert sp.expand(pde_for("ff-quadratic").apply(combo)) == 0


# laws of the derived (z, v) system, computed once and frozen
DERIVED_SYSTEM3 = {
    3: V**3 - 3 * V * Z / ALPHA,
    4: V**4 - 12 * (ALPHA * V**2 * Z + Z**2) / (7 * ALPHA**2 - ALPHA - 2),
    5: V**5 + 20 * ALPHA * V**3 * Z / (3 * ALPHA**2 - 3 * ALPHA - 6) - 20 * V * Z**2 / (ALPHA**2 - ALPHA - 2),
    6: (V**6 + V**4 * Z * (-135 * ALPHA**2 + 15 * ALPHA + 30) / (18 * ALPHA**3 + 2 * ALPHA**2 + 4 * ALPHA)
        + 90 * V**2 * Z**2 / (9 * ALPHA**2 + ALPHA + 2) + 30 * Z**3 / (9 * ALPHA**3 + ALPHA**2 + 2 * ALPHA)),
}


@pytest.mark.parametrize("d", sorted(DERIVED_SYSTEM3))
def test_derived_system3_laws(d):
    pde = pde_for("system3")
    assert sp.simplify(pde.apply(DERIVED_SYSTEM3[d])) == 0


def test_derived_system3_has_no_quadratic_law():
    b = polynomial_entropy_basis(pde_for("system3"), 2)
    assert all(E.degree == 1 for E in b)
    assert not in_span(poly("v*z", Variant.ZV), b)


def test_displayed_system3_contains_vz_at_alpha_2():
    b = polynomial_entropy_basis(pde_for("system3-displayed", alpha=2), 2)
    assert in_span(poly("v*z", Variant.ZV), b)


@pytest.mark.parametrize("alpha", [1, 2, 3, sp.Rational(5, 2)])
def test_symbolic_alpha_specializes(alpha):
    pde = pde_for("system3", alpha=alpha)
    b = polynomial_entropy_basis(pde, 4)
    for d in (3, 4):
        assert in_span(PolynomialEntropy.from_expr(DERIVED_SYSTEM3[d].subs(ALPHA, alpha), Variant.ZV), b)


def test_system3_consistency():
    res = system3_consistency()
    assert res[("derived", "derived")] == {"z_equation": 0, "v_equation": 0}
    assert res[("displayed", "derived")]["z_equation"] != 0
    assert res[("derived", "displayed")]["v_equation"] != 0


@pytest.mark.parametrize("alpha", [1, 2, sp.Rational(7, 3)])
def test_z_invariant(alpha):
    assert z_invariant_residual(alpha) == 0
    assert z_invariant_residual(alpha, F=W) != 0


def test_bf_and_ff_spot_entropies():
    for g in (CouplingSpec.log(), CouplingSpec.power(2), CouplingSpec.signed_quadratic(1)):
        assert entropy_residual(M * V, EntropyPde.bf(H2, g), PTS) == 0
        assert entropy_residual(H2.expr(V) - g.P_expr(M), EntropyPde.bf(H2, g), PTS) <= 1e-12
        assert entropy_residual(convex_entropy(ModelSpec(H2, g)), EntropyPde.ff(H2, g), PTS) <= 1e-12
    # H + P is not a backward-forward entropy
    assert entropy_residual(H2.expr(V) + CouplingSpec.log().P_expr(M), EntropyPde.bf(H2, CouplingSpec.log()), PTS) > 0.1


def test_residual_domain():
    with pytest.raises(DomainError):
        entropy_residual(V, EntropyPde.ff(H2, CouplingSpec.log()), [[0.0, -1.0]])


@pytest.mark.parametrize("lam,sign,kind", [(1.0, 1, "cos"), (4.0, -1, "sin"), (2.5, 1, "sin")])
def test_separable_entropies(lam, sign, kind):
    E = separable_entropy(lam, sign, kind)
    assert entropy_residual(E, pde_for("bf-quadratic"), PTS) <= 1e-10


def test_separable_needs_positive_lambda():
    with pytest.raises(ValueError):
        separable_entropy(0.0)


def test_flux_of_trivial_entropies():
    pde = EntropyPde.ff(H2, CouplingSpec.log())
    Qv = entropy_flux(V, pde)
    Qm = entropy_flux(M, pde)
    for v, m in [(0.3, 1.7), (-1.1, 0.4)]:
        assert Qv(v, m) == pytest.approx(0.5 * v * v - np.log(m), abs=1e-9)
        assert Qm(v, m) == pytest.approx(-m * v, abs=1e-9)


def test_flux_paths_agree():
    model = ModelSpec(H2, CouplingSpec.power(2))
    Q = entropy_flux(convex_entropy(model), EntropyPde.ff(H2, model.g))
    for v, m in [(0.5, 2.0), (-1.0, 0.3), (1.4, 1.1)]:
        assert Q.path_discrepancy(v, m) <= 1e-8


def test_adaptive_simpson():
    assert adaptive_simpson(np.sin, 0.0, np.pi, 1e-12) == pytest.approx(2.0, abs=1e-11)


def test_polynomial_entropy_json_and_numeric():
    E = poly("m**3*v - 2*v")
    js = E.to_json()
    assert js["degree"] == 4 and len(js["monomials"]) == len(js["coefficients"]) == 2
    assert E.numeric()(2.0, 1.0) == pytest.approx(-2.0)
    with pytest.raises(ValueError):
        PolynomialEntropy.from_expr(V * Z * ALPHA, Variant.ZV).numeric()


def test_symbolic_entropy_hessian():
    E = SymbolicEntropy(V**2 * M, Variant.VM)
    vv, vm, mm = E.hessian(np.array([1.0]), np.array([2.0]))
    assert (vv[0], vm[0], mm[0]) == (4.0, 2.0, 0.0)


def test_problem_tags():
    assert EntropyPde.ff(H2, CouplingSpec.log()).problem is Problem.FORWARD_FORWARD
    with pytest.raises(KeyError):
        pde_for("nope")
