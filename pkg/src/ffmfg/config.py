"""Scenario configuration: JSON schema, validation, and construction of initial data."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .errors import ConfigError
from .grid import GridField, PeriodicGrid
from .models import CouplingSpec, HamiltonianSpec, ModelSpec

SOLVERS = ("vm", "system3", "psystem", "parabolic", "laxhopf")

_PROFILE = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["constant", "sine", "smoothed_jump"]},
        "value": {"type": "number"},
        "mean": {"type": "number"},
        "amplitude": {"type": "number"},
        "frequency": {"type": "integer", "minimum": 1},
        "phase": {"enum": ["sin", "cos"]},
        "left": {"type": "number"},
        "right": {"type": "number"},
        "width": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ffmfg scenario",
    "type": "object",
    "required": ["solver"],
    "properties": {
        "name": {"type": "string"},
        "solver": {"enum": list(SOLVERS)},
        "model": {
            "type": "object",
            "properties": {
                "H": {"type": "object", "required": ["kind"],
                      "properties": {"kind": {"enum": ["quadratic", "power_abs", "power_sqrt"]},
                                     "gamma": {"type": "number", "exclusiveMinimum": 1}},
                      "additionalProperties": False},
                "g": {"type": "object", "required": ["kind"],
                      "properties": {"kind": {"enum": ["power", "log", "signed_quadratic"]},
                                     "param": {"type": "number"}},
                      "additionalProperties": False},
                "eps": {"type": "number", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "grid": {"type": "object", "properties": {"n_cells": {"type": "integer", "minimum": 8}},
                 "additionalProperties": False},
        "initial": {
            "type": "object",
            "properties": {"v": _PROFILE, "m": _PROFILE, "u": _PROFILE, "normalize": {"type": "boolean"}},
            "additionalProperties": False,
        },
        "solver_config": {
            "type": "object",
            "properties": {"T": {"type": "number", "minimum": 0},
                           "cfl": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                           "eps_art": {"type": "number", "minimum": 0},
                           "snapshot_stride": {"type": "integer", "minimum": 0},
                           "log_stride": {"type": "integer", "minimum": 0}},
            "additionalProperties": False,
        },
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "eps_visc": {"type": "number", "minimum": 0},
        "entropy_degree": {"type": "integer", "minimum": 1, "maximum": 6},
        "laxhopf": {
            "type": "object",
            "properties": {"times": {"type": "array", "items": {"type": "number", "minimum": 0}},
                           "orientation": {"enum": ["forward", "reversed"]},
                           "horizon": {"type": "number", "exclusiveMinimum": 0}},
            "additionalProperties": False,
        },
        "seed": {"type": "integer", "minimum": 0},
        "sweep": {
            "type": "object",
            "properties": {k: {"type": "array", "items": {"type": "number"}}
                           for k in ("eps", "amplitude", "n_cells", "alpha")},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

DEFAULTS: dict[str, Any] = {
    "name": "scenario",
    "model": {"H": {"kind": "quadratic"}, "g": {"kind": "log"}, "eps": 0.0},
    "grid": {"n_cells": 256},
    "initial": {"v": {"type": "constant", "value": 0.0}, "m": {"type": "constant", "value": 1.0},
                "normalize": False},
    "solver_config": {},
    "alpha": 2.0,
    "eps_visc": 0.0,
    "entropy_degree": 4,
    "laxhopf": {},
    "seed": 0,
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in ("v", "m", "u", "H", "g"):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(raw: dict) -> str:
    return hashlib.sha256(canonical_json(raw).encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class Scenario:
    raw: dict
    name: str
    solver: str
    model: ModelSpec
    n_cells: int
    initial: dict
    solver_config: dict
    alpha: float
    eps_visc: float
    entropy_degree: int
    laxhopf: dict
    seed: int
    sweep: dict = field(default_factory=dict)

    @property
    def grid(self) -> PeriodicGrid:
        return PeriodicGrid(self.n_cells)

    @property
    def hash(self) -> str:
        return config_hash(self.raw)

    def with_overrides(self, **kw) -> "Scenario":
        """Copy with top-level overrides (eps, amplitude, n_cells, alpha as used by sweeps)."""
        raw = copy.deepcopy(self.raw)
        raw.pop("sweep", None)
        if "n_cells" in kw:
            raw.setdefault("grid", {})["n_cells"] = int(kw.pop("n_cells"))
        if "eps" in kw:
            eps = float(kw.pop("eps"))
            if raw.get("solver") == "psystem":
                raw["eps_visc"] = eps
            else:
                raw.setdefault("model", {})["eps"] = eps
        if "alpha" in kw:
            raw["alpha"] = float(kw.pop("alpha"))
        if "amplitude" in kw:
            amp = float(kw.pop("amplitude"))
            for key in ("m", "u", "v"):
                prof = raw.get("initial", {}).get(key)
                if prof and prof.get("type") == "sine":
                    prof["amplitude"] = amp
                    break
        for k, v in kw.items():
            raw[k] = v
        return scenario_from_dict(raw)


def validate(raw: dict) -> None:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {e.message}") from None


def scenario_from_dict(raw: dict) -> Scenario:
    validate(raw)
    cfg = _merge(DEFAULTS, raw)
    mdl = cfg["model"]
    Hd = mdl["H"]
    H = HamiltonianSpec(Hd["kind"], float(Hd.get("gamma", 2.0)))
    gd = mdl["g"]
    param = gd.get("param", 1.0)
    try:
        if gd["kind"] == "signed_quadratic":
            g = CouplingSpec.signed_quadratic(int(param))
        else:
            g = CouplingSpec(gd["kind"], float(param))
        model = ModelSpec(H, g, float(mdl.get("eps", 0.0)))
    except ValueError as e:
        raise ConfigError(f"config invalid at model: {e}") from None
    if cfg["solver"] == "parabolic" and not model.eps > 0:
        raise ConfigError("config invalid at model/eps: parabolic runs need eps > 0")
    n = int(cfg["grid"]["n_cells"])
    try:
        PeriodicGrid(n)
    except ValueError as e:
        raise ConfigError(f"config invalid at grid/n_cells: {e}") from None
    return Scenario(raw=raw, name=cfg["name"], solver=cfg["solver"], model=model, n_cells=n,
                    initial=cfg["initial"], solver_config=cfg["solver_config"], alpha=float(cfg["alpha"]),
                    eps_visc=float(cfg["eps_visc"]), entropy_degree=int(cfg["entropy_degree"]),
                    laxhopf=cfg["laxhopf"], seed=int(cfg["seed"]), sweep=cfg.get("sweep", {}))


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    try:
        return scenario_from_dict(raw)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from None


def profile_values(prof: dict, x: np.ndarray) -> np.ndarray:
    kind = prof["type"]
    if kind == "constant":
        return np.full_like(x, float(prof.get("value", 0.0)))
    if kind == "sine":
        k = int(prof.get("frequency", 1))
        trig = np.sin if prof.get("phase", "sin") == "sin" else np.cos
        return float(prof.get("mean", 0.0)) + float(prof.get("amplitude", 0.0)) * trig(2 * np.pi * k * x)
    # periodic smoothed jump: left on (0, 1/2), right on (1/2, 1), tanh transitions of the given width
    a, b = float(prof.get("left", 0.0)), float(prof.get("right", 1.0))
    w = float(prof.get("width", 0.02))
    s = np.tanh(np.sin(2 * np.pi * x) / (2 * np.pi * w))
    return 0.5 * (a + b) + 0.5 * (a - b) * s


def initial_fields(sc: Scenario, grid: PeriodicGrid | None = None) -> tuple[GridField, GridField]:
    """(v0, m0) on the scenario grid (or an override grid)."""
    grid = grid or sc.grid
    v = GridField(grid, profile_values(sc.initial["v"], grid.x))
    mv = profile_values(sc.initial["m"], grid.x)
    if np.min(mv) <= 0:
        raise ConfigError("initial m profile must be > 0")
    return v, GridField(grid, mv)


__all__ = ["SCHEMA", "SOLVERS", "Scenario", "load_scenario", "scenario_from_dict", "validate",
           "config_hash", "canonical_json", "profile_values", "initial_fields"]
