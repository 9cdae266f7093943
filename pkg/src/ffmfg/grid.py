"""Periodic grids, grid fields, system states and run records.

All fields live at cell centers ``x_i = (i + 1/2) dx`` of the torus ``[0, 1)``.
Every container here is immutable; operations return new objects.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Iterable, Mapping

import numpy as np

from .errors import DomainError, PositivityError, RangeError

if TYPE_CHECKING:
    from .models import ModelSpec

POSITIVITY_FLOOR = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PeriodicGrid:
    n_cells: int

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 8:
            raise ValueError(f"n_cells must be an integer >= 8, got {self.n_cells}")
        if self.dx * self.n_cells != 1.0:
            raise ValueError(f"dx * n_cells != 1 in floating point for n_cells={self.n_cells}")

    @property
    def dx(self) -> float:
        return 1.0 / self.n_cells

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx

    def sample(self, f: Callable[[np.ndarray], np.ndarray]) -> "GridField":
        return GridField(self, np.broadcast_to(f(self.x), (self.n_cells,)))

    def constant(self, c: float) -> "GridField":
        return GridField(self, np.full(self.n_cells, float(c)))


@dataclass(frozen=True, eq=False)
class GridField:
    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != (self.grid.n_cells,):
            raise ValueError(f"expected {self.grid.n_cells} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("GridField values must be finite")
        object.__setattr__(self, "values", vals)

    def with_values(self, values) -> "GridField":
        return GridField(self.grid, values)

    def __len__(self):
        return self.grid.n_cells


def integrate(f: GridField) -> float:
    """Midpoint rule on the torus: ``dx * sum(values)``."""
    return float(f.grid.dx * np.sum(f.values))


def diff_periodic(f: GridField) -> GridField:
    """Second-order central difference ``(f[i+1] - f[i-1]) / (2 dx)``."""
    u = f.values
    return f.with_values((np.roll(u, -1) - np.roll(u, 1)) / (2.0 * f.grid.dx))


def laplacian_periodic(f: GridField) -> GridField:
    u = f.values
    return f.with_values((np.roll(u, -1) - 2.0 * u + np.roll(u, 1)) / f.grid.dx**2)


class Variant(str, enum.Enum):
    VM = "VM"
    ZV = "ZV"
    VW = "VW"

    @property
    def names(self) -> tuple[str, str]:
        return {"VM": ("v", "m"), "ZV": ("z", "v"), "VW": ("v", "w")}[self.value]


@dataclass(frozen=True, eq=False)
class SystemState:
    """A pair of fields on one grid. Field order follows the variant name."""

    variant: Variant
    first: GridField
    second: GridField
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.first.grid != self.second.grid:
            raise ValueError("both fields must share one grid")
        if self.t < 0:
            raise ValueError("time must be >= 0")
        if self.variant is Variant.VM and np.min(self.second.values) < POSITIVITY_FLOOR:
            raise PositivityError(f"m below floor {POSITIVITY_FLOOR}: min m = {np.min(self.second.values)}")

    @property
    def grid(self) -> PeriodicGrid:
        return self.first.grid

    def as_array(self) -> np.ndarray:
        return np.stack([self.first.values, self.second.values])

    @classmethod
    def from_arrays(cls, variant, grid: PeriodicGrid, a, b, t: float = 0.0) -> "SystemState":
        return cls(variant, GridField(grid, a), GridField(grid, b), t)

    def fields(self) -> dict[str, GridField]:
        n1, n2 = self.variant.names
        return {n1: self.first, n2: self.second}


def _zv_alpha(model: "ModelSpec") -> float:
    from .models import CouplingKind, HamiltonianKind

    if model.H.kind is not HamiltonianKind.QUADRATIC or model.g.kind is not CouplingKind.POWER:
        raise ValueError("the (z, v) variables require H(p) = p^2/2 and g(m) = m^alpha")
    return model.g.param


def _to_vw(s: SystemState, model: "ModelSpec") -> tuple[np.ndarray, np.ndarray]:
    if s.variant is Variant.VW:
        return s.first.values, s.second.values
    if s.variant is Variant.VM:
        v, m = s.first.values, s.second.values
        return v, model.g.g(m) - model.H.H(v)
    alpha = _zv_alpha(model)
    z, v = s.first.values, s.second.values
    return v, z - 0.5 * alpha * v**2


def change_variables(s: SystemState, target, model: "ModelSpec") -> SystemState:
    """Map between the (v, m), (z, v) and (v, w) descriptions.

    ``w = g(m) - H(v)`` (so ``m = g^{-1}(w + H(v))``) and ``z = w + (alpha/2) v^2``.
    """
    target = Variant(target)
    if target is s.variant:
        raise ValueError("source and target variants coincide")
    v, w = _to_vw(s, model)
    grid = s.grid
    if target is Variant.VW:
        return SystemState.from_arrays(Variant.VW, grid, v, w, s.t)
    if target is Variant.ZV:
        alpha = _zv_alpha(model)
        return SystemState.from_arrays(Variant.ZV, grid, w + 0.5 * alpha * v**2, v, s.t)
    y = w + model.H.H(v)
    m = model.g.inverse(y)
    return SystemState.from_arrays(Variant.VM, grid, v, m, s.t)


@dataclass(frozen=True, eq=False)
class RunRecord:
    """Aligned time series produced by one solver run.

    ``series`` maps column names (``mass``, ``mean_v``, ``entropy_<name>``,
    ``linf_v``...) to arrays aligned with ``times``.
    """

    times: np.ndarray
    series: Mapping[str, np.ndarray]
    snapshots: tuple[SystemState, ...] = ()
    status: str = "ok"
    blowup_time: float | None = None
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        times = _frozen(self.times)
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        series = {}
        for k, v in self.series.items():
            arr = _frozen(v)
            if arr.shape != times.shape:
                raise ValueError(f"series {k!r} not aligned with times")
            series[k] = arr
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "series", series)
        object.__setattr__(self, "snapshots", tuple(self.snapshots))

    def __getitem__(self, name: str) -> np.ndarray:
        return self.series[name]

    @property
    def final(self) -> SystemState | None:
        return self.snapshots[-1] if self.snapshots else None

    def to_csv(self, path) -> Path:
        path = Path(path)
        cols = ["t", *self.series]
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for i, t in enumerate(self.times):
                w.writerow([repr(float(t))] + [repr(float(self.series[c][i])) for c in self.series])
        return path


def write_snapshot_csv(state: SystemState, path) -> Path:
    path = Path(path)
    n1, n2 = state.variant.names
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", n1, n2])
        for x, a, b in zip(state.grid.x, state.first.values, state.second.values):
            w.writerow([repr(float(x)), repr(float(a)), repr(float(b))])
    return path


class RecordBuilder:
    """Mutable accumulator used by the solvers; ``build`` freezes it."""

    def __init__(self, columns: Iterable[str]):
        self.times: list[float] = []
        self.cols: dict[str, list[float]] = {c: [] for c in columns}
        self.snapshots: list[SystemState] = []

    def append(self, t: float, **values: float):
        if self.times and t <= self.times[-1]:
            return
        self.times.append(float(t))
        for c in self.cols:
            self.cols[c].append(float(values[c]))

    def build(self, **kwargs) -> RunRecord:
        return RunRecord(np.array(self.times), {k: np.array(v) for k, v in self.cols.items()},
                         tuple(self.snapshots), **kwargs)


def check_positive(m: np.ndarray, what: str = "m"):
    if m.size and not np.min(m) > 0:
        raise DomainError(f"{what} must be > 0 (min = {np.min(m)})")


__all__ = [
    "PeriodicGrid", "GridField", "SystemState", "Variant", "RunRecord", "RecordBuilder",
    "integrate", "diff_periodic", "laplacian_periodic", "change_variables",
    "write_snapshot_csv", "POSITIVITY_FLOOR",
]
