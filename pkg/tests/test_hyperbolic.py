import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ffmfg.errors import CflError, HyperbolicityError
from ffmfg.grid import PeriodicGrid, SystemState, Variant
from ffmfg.hyperbolic import (LOG_MODEL, FluxFunction, SolverConfig, _rusanov_update, inverse_riemann_map,
                              invariant_region_bound, l1_distance, lax_friedrichs_step, restrict,
                              riemann_invariant_map, solve_ff_vm, solve_psystem, solve_system3,
                              system3_density_power, wave_initial_data, wave_leapfrog)
from ffmfg.models import CouplingSpec, HamiltonianSpec, ModelSpec

TWO_PI = 2 * np.pi


def _data(n, a=0.1, b=0.1):
    g = PeriodicGrid(n)
    return g, g.sample(lambda x: a * np.cos(TWO_PI * x)), g.sample(lambda x: 1 + b * np.sin(TWO_PI * x))


def test_equilibrium_is_stationary():
    g = PeriodicGrid(64)
    r = solve_ff_vm(g.constant(0.0), g.constant(1.0), LOG_MODEL, SolverConfig(T=0.3))
    fin = r.final
    assert np.max(np.abs(fin.first.values)) == 0.0 and np.max(np.abs(fin.second.values - 1)) == 0.0


@given(st.floats(-0.2, 0.2), st.floats(-0.3, 0.3), st.integers(1, 3))
def test_means_conserved(a, b, k):
    g = PeriodicGrid(64)
    v0 = g.sample(lambda x: a * np.sin(TWO_PI * k * x))
    m0 = g.sample(lambda x: 1 + b * np.cos(TWO_PI * x))
    r = solve_ff_vm(v0, m0, LOG_MODEL, SolverConfig(T=0.05))
    assert abs(r["mass"][-1] - r["mass"][0]) <= 1e-13
    assert abs(r["mean_v"][-1] - r["mean_v"][0]) <= 1e-13


def test_system_eigenvalues():
    f = FluxFunction.vm(LOG_MODEL)
    v, m = np.array([0.7]), np.array([1.3])
    ev = np.sort(np.linalg.eigvals(f.jacobian(0.7, 1.3)).real)
    lam = np.sqrt(0.7**2 + 1.0)
    np.testing.assert_allclose(ev, [-lam, lam], rtol=1e-12)
    assert f.max_speed(v, m) == pytest.approx(lam)


def test_decreasing_coupling_rejected():
    g, v0, m0 = _data(32)
    with pytest.raises(HyperbolicityError):
        solve_ff_vm(v0, m0, ModelSpec(HamiltonianSpec.quadratic(), CouplingSpec.signed_quadratic(-1)), SolverConfig())


def test_cfl_violation_raises():
    g, v0, m0 = _data(32)
    f = FluxFunction.vm(LOG_MODEL)
    with pytest.raises(CflError):
        _rusanov_update(v0.values, m0.values, f, dt=10 * g.dx, dx=g.dx)


def test_single_step_matches_solver():
    g, v0, m0 = _data(32)
    st_ = lax_friedrichs_step(SystemState(Variant.VM, v0, m0), FluxFunction.vm(LOG_MODEL), 0.2 * g.dx)
    assert st_.t == pytest.approx(0.2 * g.dx)
    assert abs(np.sum(st_.second.values) - np.sum(m0.values)) < 1e-12


def test_signal_speed_near_one():
    # a small bump splits into two pulses moving at about +-1
    g = PeriodicGrid(1024)
    m0 = g.sample(lambda x: 1 + 1e-3 * np.exp(-((x - 0.5) / 0.03) ** 2))
    r = solve_ff_vm(g.constant(0.0), m0, LOG_MODEL, SolverConfig(T=0.25))
    assert r.status == "ok" and r.final.t == 0.25  # the Gaussian tails underflow; that is not a blowup
    dm = r.final.second.values - 1
    right = g.x[np.argmax(np.where(g.x > 0.5, dm, -1))]
    assert right - 0.5 == pytest.approx(0.25, abs=0.02)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(cfl=1.5)
    with pytest.raises(ValueError):
        SolverConfig(T=-1)


def test_system3_admissibility_and_density():
    assert system3_density_power(2.0, 1.0, 3.0) == pytest.approx(1.0)
    g = PeriodicGrid(32)
    with pytest.raises(Exception):
        solve_system3(g.constant(0.1), g.constant(1.0), 3.0, SolverConfig(T=0.01))


@pytest.mark.parametrize("alpha", [1.0, 2.0, 5.0, 10.0])
def test_system3_large_alpha_healthy(alpha):
    g, v0, m0 = _data(128)
    z0 = m0.with_values(m0.values**alpha + 0.5 * (alpha - 1) * v0.values**2)
    r = solve_system3(z0, v0, alpha, SolverConfig(T=0.05))
    assert r.status == "ok" and np.all(np.isfinite(r.final.first.values))


@given(st.floats(-50, 50))
def test_riemann_map_inverse(y):
    assert float(riemann_invariant_map(inverse_riemann_map(y))) == pytest.approx(y, abs=1e-11)


def test_riemann_map_is_odd_and_matches_integral():
    s = np.linspace(0, 1.3, 200001)
    integral = np.trapezoid(np.sqrt(1 + s * s), s)
    assert float(riemann_invariant_map(1.3)) == pytest.approx(integral, rel=1e-9)
    assert float(riemann_invariant_map(-0.4)) == -float(riemann_invariant_map(0.4))


def test_invariant_region_constant_data():
    g = PeriodicGrid(16)
    assert invariant_region_bound(g.constant(0.5), g.constant(0.2)) == pytest.approx(0.7)


def test_viscous_psystem_stays_in_region():
    g = PeriodicGrid(256)
    v0 = g.sample(lambda x: 0.8 * np.tanh(np.sin(TWO_PI * x) / 0.02))
    w0 = g.sample(lambda x: 0.3 * np.cos(TWO_PI * x))
    r = solve_psystem(v0, w0, 5e-3, SolverConfig(T=0.3))
    assert r.meta["monitor_max"] <= 1.01 * r.meta["invariant_bound"]


def test_psystem_matches_wave_equation():
    # (u_x, u_t) of u_tt = sigma'(u_x) u_xx solves the inviscid p-system
    errs = []
    for n in (256, 512):
        g = PeriodicGrid(n)
        u0 = g.sample(lambda x: 0.02 * np.sin(TWO_PI * x))
        ut0 = g.sample(lambda x: 0.05 * np.cos(TWO_PI * x))
        v0 = u0.with_values(0.02 * TWO_PI * np.cos(TWO_PI * g.x))
        vT, wT = wave_leapfrog(u0, ut0, 0.1)
        fin = solve_psystem(v0, ut0, 0.0, SolverConfig(T=0.1)).final
        errs.append(l1_distance(fin.first.values, vT.values, g.dx) + l1_distance(fin.second.values, wT.values, g.dx))
    assert errs[1] < 0.6 * errs[0]


def test_wave_initial_data():
    g = PeriodicGrid(64)
    u0 = g.sample(lambda x: 0.1 * np.sin(TWO_PI * x))
    v0, w0 = wave_initial_data(u0, g.constant(np.e), LOG_MODEL)
    np.testing.assert_allclose(w0.values, 1 - 0.5 * v0.values**2)


def test_restrict_block_average():
    np.testing.assert_allclose(restrict(np.arange(8.0), 2), [0.5, 2.5, 4.5, 6.5])
    with pytest.raises(ValueError):
        restrict(np.arange(7.0), 2)


def test_entropy_columns_logged():
    g, v0, m0 = _data(64)
    r = solve_ff_vm(v0, m0, LOG_MODEL, SolverConfig(T=0.05, log_stride=2), {"vm3": lambda v, m: v * m**3})
    assert "entropy_vm3" in r.series and r.times.size == r["entropy_vm3"].size
