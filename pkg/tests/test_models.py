import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ffmfg.errors import DomainError, RangeError, WindowError
from ffmfg.models import (CouplingSpec, G_conjugate, G_of_p, G_prime, HamiltonianSpec, ModelSpec, golden_section,
                          legendre, phi, stress_sigma, stress_sigma_prime)

HAMILTONIANS = [HamiltonianSpec.quadratic(), HamiltonianSpec.power_abs(3.0), HamiltonianSpec.power_sqrt(1.5)]
COUPLINGS = [CouplingSpec.log(), CouplingSpec.power(2), CouplingSpec.power(0.5), CouplingSpec.power(1),
             CouplingSpec.signed_quadratic(1), CouplingSpec.signed_quadratic(-1)]


def _fd(f, x, h=1e-5):
    return (f(x + h) - f(x - h)) / (2 * h)


@pytest.mark.parametrize("H", HAMILTONIANS, ids=lambda h: h.kind.value)
@given(p=st.floats(0.1, 1.5))
def test_hamiltonian_derivatives(H, p):
    assert H.dH(p) == pytest.approx(_fd(H.H, p), rel=1e-6)
    assert H.d2H(p) == pytest.approx(_fd(H.dH, p), rel=1e-5)
    assert H.d2H(p) > 0


@pytest.mark.parametrize("g", COUPLINGS, ids=lambda g: f"{g.kind.value}{g.param:g}")
@given(m=st.floats(0.2, 4.0))
def test_potential_relation(g, m):
    # P'' = g'/m and P' consistent with P
    assert g.dP(m) == pytest.approx(_fd(g.P, m), rel=1e-6, abs=1e-9)
    assert g.d2P(m) == pytest.approx(_fd(g.dP, m), rel=1e-5, abs=1e-9)
    assert g.d2P(m) == pytest.approx(g.dg(m) / m)


@pytest.mark.parametrize("g", COUPLINGS, ids=lambda g: f"{g.kind.value}{g.param:g}")
def test_bregman_matches_direct_form(g):
    m = np.linspace(0.3, 3.0, 41)
    direct = g.P(m) - g.P(1.0) - g.dP(1.0) * (m - 1.0)
    np.testing.assert_allclose(g.bregman_P(m), direct, atol=1e-13)


def test_log_potential_is_minus_log():
    assert CouplingSpec.log().P(math.e) == pytest.approx(-1.0)


def test_coupling_domain_and_range():
    with pytest.raises(DomainError):
        CouplingSpec.log().g(0.0)
    with pytest.raises(RangeError):
        CouplingSpec.power(2).inverse(-1.0)
    with pytest.raises(ValueError):
        CouplingSpec.signed_quadratic(2)
    with pytest.raises(ValueError):
        ModelSpec(eps=-1.0)


@given(st.floats(0.2, 5.0))
def test_inverse(y):
    for g in (CouplingSpec.log(), CouplingSpec.power(2), CouplingSpec.signed_quadratic(1)):
        assert g.g(g.inverse(y)) == pytest.approx(y)


def test_monotonicity_flags():
    assert CouplingSpec.log().increasing and not CouplingSpec.signed_quadratic(-1).increasing


def test_wave_speed_squared_log_case():
    model = ModelSpec(HamiltonianSpec.quadratic(), CouplingSpec.log())
    # m g'(m) = 1 for g = ln m, so phi = v^2 + 1 = sigma'(v)
    v = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(phi(v, np.zeros_like(v), model), stress_sigma_prime(v))
    assert stress_sigma(1.0) == pytest.approx(4 / 3)


@given(st.floats(-3, 3))
def test_G_and_its_conjugate(q):
    p = np.linspace(-8, 8, 160001)
    numeric = np.max(p * q - G_of_p(p))
    assert G_conjugate(q) == pytest.approx(numeric, abs=1e-6)


def test_G_corner_and_derivative():
    assert G_conjugate(0.7) == 0.0
    assert G_prime(0.0) == 0.0 and G_prime(1.0) == pytest.approx(math.sqrt(2))
    assert G_prime(0.5) == pytest.approx(_fd(G_of_p, 0.5), rel=1e-7)


def test_golden_section_vectorized():
    x = golden_section(lambda t: (t - np.array([0.3, -1.2])) ** 2, np.array([-2.0, -2.0]), np.array([2.0, 2.0]))
    np.testing.assert_allclose(x, [0.3, -1.2], atol=1e-8)


def test_legendre_of_quadratic():
    assert legendre(lambda p: 0.5 * p**2, 1.3) == pytest.approx(0.5 * 1.3**2, abs=1e-12)
    with pytest.raises(WindowError):
        legendre(lambda p: 0.5 * p**2, 20.0)
