import csv
import json

import pytest

from ffmfg import __version__
from ffmfg.cli import main
from ffmfg.config import config_hash, load_scenario, scenario_from_dict
from ffmfg.errors import ConfigError

SMOOTH = {"v": {"type": "sine", "amplitude": 0.1, "phase": "cos"},
          "m": {"type": "sine", "mean": 1.0, "amplitude": 0.1}}


def write(tmp_path, cfg, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg, indent=1))
    return p


def manifest(d):
    return json.loads((d / "manifest.json").read_text())


def test_equilibrium_manifest(tmp_path):
    cfg = {"name": "eq", "solver": "parabolic", "model": {"eps": 0.05}, "grid": {"n_cells": 32},
           "solver_config": {"T": 0.5}}
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(write(tmp_path, cfg)), "--out", str(out)]) == 0
    m = manifest(out)
    assert m["metrics"]["I_final"] == 0.0 and m["version"] == __version__
    assert m["config_sha256"] == config_hash(cfg)
    header = next(csv.reader((out / "series.csv").open()))
    assert header[0] == "t [-]" and all("[" in h for h in header)


def test_repeat_runs_byte_identical(tmp_path):
    cfg = {"name": "vm", "solver": "vm", "grid": {"n_cells": 64}, "initial": SMOOTH, "solver_config": {"T": 0.05}}
    p = write(tmp_path, cfg)
    for d in ("a", "b"):
        assert main(["simulate", "--config", str(p), "--out", str(tmp_path / d)]) == 0
    for f in ("manifest.json", "series.csv", "snapshot_final.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    assert "drift_entropy_m**3*v" in manifest(tmp_path / "a")["metrics"]


@pytest.mark.parametrize("solver,extra", [("system3", {"alpha": 3.0}), ("psystem", {"eps_visc": 0.01})])
def test_other_solvers(tmp_path, solver, extra):
    cfg = {"solver": solver, "grid": {"n_cells": 64}, "initial": SMOOTH, "solver_config": {"T": 0.05}, **extra}
    assert main(["simulate", "--config", str(write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == 0
    assert manifest(tmp_path / "o")["metrics"]["status"] == "ok"


def test_derive_entropies(tmp_path, capsys):
    assert main(["derive-entropies", "--problem", "ff-quadratic", "--degree", "6", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "entropies_ff-quadratic_deg6.json").read_text())
    assert len(data["basis"]) == 8
    assert {"degree", "monomials", "coefficients"} <= set(data["basis"][0])
    assert "m**3*v" in capsys.readouterr().out


def test_derive_entropies_unknown_problem(capsys):
    assert main(["derive-entropies", "--problem", "nope", "--degree", "2"]) == 2
    assert "unknown problem" in capsys.readouterr().err


def test_laxhopf(tmp_path):
    cfg = {"solver": "laxhopf", "grid": {"n_cells": 64}, "laxhopf": {"times": [0.0, 0.2], "horizon": 4.0}}
    assert main(["laxhopf", "--config", str(write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == 0
    m = manifest(tmp_path / "o")
    assert m["metrics"]["shock_time"] > 0 and m["metrics"]["stationary"]["passed"]
    rows = list(csv.reader((tmp_path / "o" / "laxhopf_fields.csv").open()))
    assert len(rows) == 1 + 2 * 64


def test_refine(tmp_path):
    cfg = {"solver": "vm", "grid": {"n_cells": 64}, "initial": SMOOTH, "solver_config": {"T": 0.05}}
    assert main(["refine", "--config", str(write(tmp_path, cfg)), "--levels", "3", "--out", str(tmp_path / "o")]) == 0
    rows = list(csv.reader((tmp_path / "o" / "refinement.csv").open()))
    assert rows[0][:4] == ["n_cells [-]", "dx [-]", "l1_self_error [-]", "observed_order [-]"]
    assert len(rows) == 3 and float(rows[2][3]) > 0.8


def test_sweep_sorted_and_parallel(tmp_path):
    cfg = {"solver": "system3", "grid": {"n_cells": 32}, "initial": SMOOTH, "solver_config": {"T": 0.02},
           "sweep": {"alpha": [10, 1, 5, 2]}}
    p = write(tmp_path, cfg)
    assert main(["sweep", "--config", str(p), "--out", str(tmp_path / "s1"), "--workers", "2"]) == 0
    assert main(["sweep", "--config", str(p), "--out", str(tmp_path / "s2")]) == 0
    rows = json.loads((tmp_path / "s1" / "sweep.json").read_text())["runs"]
    assert [r["params"]["alpha"] for r in rows] == [1, 2, 5, 10]
    assert all(r["status"] == "ok" for r in rows)
    assert (tmp_path / "s1" / "sweep.csv").read_bytes() == (tmp_path / "s2" / "sweep.csv").read_bytes()


def test_sweep_records_failures(tmp_path):
    cfg = {"solver": "vm", "grid": {"n_cells": 32}, "initial": SMOOTH, "solver_config": {"T": 0.02},
           "sweep": {"n_cells": [32, 7]}}
    assert main(["sweep", "--config", str(write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == 0
    runs = json.loads((tmp_path / "o" / "sweep.json").read_text())["runs"]
    assert runs[0]["status"].startswith("error") and runs[1]["status"] == "ok"


def test_empty_sweep(tmp_path):
    cfg = {"solver": "vm", "sweep": {"eps": []}}
    assert main(["sweep", "--config", str(write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == 0
    assert manifest(tmp_path / "o")["metrics"]["n_runs"] == 0


def test_analyze_seeded(tmp_path):
    for d in ("a", "b"):
        assert main(["analyze", "--seed", "3", "--samples", "20", "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a" / "analysis.json").read_bytes() == (tmp_path / "b" / "analysis.json").read_bytes()
    rep = json.loads((tmp_path / "a" / "analysis.json").read_text())
    assert all(v["fuzz"]["poincare_violations"] == 0 for v in rep.values())


def test_parse_error_has_line(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"solver": "vm",\n "grid": {"n_cells": 64,}}')
    assert main(["simulate", "--config", str(p)]) == 2
    assert "line 2" in capsys.readouterr().err


@pytest.mark.parametrize("cfg,where", [({"solver": "vm", "grid": {"n_cells": 4}}, "grid/n_cells"),
                                       ({"solver": "euler"}, "solver"),
                                       ({"solver": "vm", "bogus": 1}, "<root>"),
                                       ({"solver": "parabolic"}, "model/eps")])
def test_validation_errors(cfg, where):
    with pytest.raises(ConfigError, match=where):
        scenario_from_dict(cfg)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_scenario(tmp_path / "absent.json")
