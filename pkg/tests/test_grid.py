import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ffmfg.errors import PositivityError
from ffmfg.grid import (GridField, PeriodicGrid, RecordBuilder, SystemState, Variant, change_variables,
                        diff_periodic, integrate, laplacian_periodic, write_snapshot_csv)
from ffmfg.models import CouplingSpec, HamiltonianSpec, ModelSpec


@pytest.mark.parametrize("n", [8, 64, 100, 1024, 4096])
def test_dx_times_n_is_one(n):
    g = PeriodicGrid(n)
    assert g.dx * n == 1.0
    assert g.x[0] == pytest.approx(0.5 / n) and g.x.size == n


@pytest.mark.parametrize("n", [0, 7, -4])
def test_small_grids_rejected(n):
    with pytest.raises(ValueError):
        PeriodicGrid(n)


def test_mean_of_sine_vanishes():
    assert abs(integrate(PeriodicGrid(64).sample(lambda x: np.sin(2 * np.pi * x)))) < 1e-12


def test_central_difference_second_order():
    errs = []
    for n in (128, 256):
        g = PeriodicGrid(n)
        d = diff_periodic(g.sample(lambda x: np.sin(2 * np.pi * x)))
        errs.append(np.max(np.abs(d.values - 2 * np.pi * np.cos(2 * np.pi * g.x))))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.01)


def test_laplacian_of_mode():
    g = PeriodicGrid(256)
    lap = laplacian_periodic(g.sample(lambda x: np.cos(2 * np.pi * x)))
    assert np.max(np.abs(lap.values + 4 * np.pi**2 * np.cos(2 * np.pi * g.x))) < 2.5e-3  # (2 pi)^4 dx^2 / 12 = 2.0e-3


def test_field_validation():
    g = PeriodicGrid(8)
    with pytest.raises(ValueError):
        GridField(g, np.zeros(9))
    with pytest.raises(ValueError):
        GridField(g, np.full(8, np.nan))


def test_vm_state_needs_positive_density():
    g = PeriodicGrid(8)
    with pytest.raises(PositivityError):
        SystemState.from_arrays(Variant.VM, g, np.zeros(8), np.zeros(8))


@given(st.floats(-0.8, 0.8), st.floats(0.2, 3.0), st.sampled_from(["log", "power2", "power1"]))
def test_change_variables_round_trip(a, m, kind):
    g = {"log": CouplingSpec.log(), "power2": CouplingSpec.power(2), "power1": CouplingSpec.power(1)}[kind]
    model = ModelSpec(HamiltonianSpec.quadratic(), g)
    grid = PeriodicGrid(8)
    v = a * np.sin(2 * np.pi * grid.x)
    mm = m * (1 + 0.1 * np.cos(2 * np.pi * grid.x))
    s = SystemState.from_arrays(Variant.VM, grid, v, mm)
    targets = (Variant.VW,) if kind == "log" else (Variant.VW, Variant.ZV)
    for target in targets:
        back = change_variables(change_variables(s, target, model), Variant.VM, model)
        np.testing.assert_allclose(back.first.values, v, atol=1e-12)
        np.testing.assert_allclose(back.second.values, mm, rtol=1e-12)


def test_zv_needs_power_coupling():
    s = SystemState.from_arrays(Variant.VM, PeriodicGrid(8), np.zeros(8), np.ones(8))
    with pytest.raises(ValueError):
        change_variables(s, Variant.ZV, ModelSpec(HamiltonianSpec.quadratic(), CouplingSpec.log()))


def test_record_csv_and_snapshot(tmp_path):
    rb = RecordBuilder(["mass"])
    rb.append(0.0, mass=1.0)
    rb.append(0.5, mass=1.0)
    rec = rb.build()
    text = rec.to_csv(tmp_path / "s.csv").read_text().splitlines()
    assert text[0] == "t,mass" and len(text) == 3
    g = PeriodicGrid(8)
    st_ = SystemState.from_arrays(Variant.VM, g, np.zeros(8), np.ones(8))
    lines = write_snapshot_csv(st_, tmp_path / "x.csv").read_text().splitlines()
    assert lines[0] == "x,v,m" and len(lines) == 9
