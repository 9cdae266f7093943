import numpy as np
import pytest

from ffmfg.grid import PeriodicGrid
from ffmfg.laxhopf import (REVERSED, HjSolution, density_from_u, godunov_hj, lax_hopf_field, lax_hopf_u,
                           lmfg_residuals, semigroup_defect, shock_time, stationary_limit_check, trig_interpolant)

TWO_PI = 2 * np.pi
SOL = HjSolution(lambda x: 0.05 * np.cos(TWO_PI * x))


def test_trig_interpolant_exact_for_modes():
    g = PeriodicGrid(64)
    f = trig_interpolant(np.cos(TWO_PI * g.x) + 0.3 * np.sin(3 * TWO_PI * g.x))
    x = np.linspace(0, 1, 37)
    np.testing.assert_allclose(f(x), np.cos(TWO_PI * x) + 0.3 * np.sin(3 * TWO_PI * x), atol=1e-13)


def test_non_periodic_rejected():
    with pytest.raises(ValueError):
        HjSolution(lambda x: x)
    with pytest.raises(ValueError):
        HjSolution(lambda x: 0 * x, orientation="sideways")


def test_initial_time_returns_datum():
    x = np.linspace(0, 1, 11)
    np.testing.assert_allclose(lax_hopf_u(SOL, x, 0.0), SOL.u0(x), atol=1e-15)


@pytest.mark.parametrize("orientation", ["forward", REVERSED])
def test_agrees_with_godunov(orientation):
    sol = HjSolution(SOL.u0, orientation)
    errs = []
    for n in (256, 512):
        g = PeriodicGrid(n)
        errs.append(np.max(np.abs(lax_hopf_field(sol, g, 0.1).values - godunov_hj(sol.sampled(g), 0.1, orientation).values)))
    assert errs[1] < 0.6 * errs[0] and errs[1] < 1e-3


def test_forward_solution_nonincreasing_in_time():
    x = np.linspace(0, 1, 65)
    u1, u2 = lax_hopf_u(SOL, x, 0.05), lax_hopf_u(SOL, x, 0.1)
    assert np.all(u2 <= u1 + 1e-15)


def test_semigroup_property():
    assert semigroup_defect(SOL, np.array([0.1, 0.37, 0.5]), 0.05, 0.05) <= 1e-9


def test_stationary_limit():
    rep = stationary_limit_check(SOL, horizon=5.0, n=128, n_times=3)
    assert rep.passed


def test_shock_time_finite_and_scaling():
    T = shock_time(SOL, exclude_corner=True)
    assert np.isfinite(T) and T > 0
    T_half = shock_time(HjSolution(lambda x: 0.025 * np.cos(TWO_PI * x)), exclude_corner=True)
    assert T_half > 2 * T
    assert np.isinf(shock_time(HjSolution(lambda x: 0 * x)))


def test_density_mask_and_positivity():
    g = PeriodicGrid(128)
    ux, m, mask = density_from_u(SOL, g.x, 0.1)
    assert np.all(m[~mask] > 0) and np.all(np.isnan(m[mask]))


def test_mfg_residuals_refine():
    r1, r2 = lmfg_residuals(SOL, 128, 0.1), lmfg_residuals(SOL, 256, 0.1)
    assert r2.hj < 0.6 * r1.hj and r2.transport < 0.6 * r1.transport
    assert r2.masked_fraction < 0.2
