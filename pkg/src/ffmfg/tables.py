"""Reference polynomial conservation laws, stored as strings in (v, m) or (v, z).

Each entry is (problem key, pair, degree, polynomial). Problem keys resolve to
an :class:`~ffmfg.entropy.EntropyPde` via :func:`pde_for`.
"""

from __future__ import annotations

from .entropy import EntropyPde, PolynomialEntropy, Problem
from .grid import Variant
from .models import CouplingSpec, HamiltonianSpec

BF_MONOTONE = [
    (3, "v**3 - 3*m**2*v"),
    (3, "m**3 - 3*m*v**2"),
    (4, "-6*m**2*v**2 + m**4 + v**4"),
    (4, "m*v**3 - m**3*v"),
    (5, "-10*m**2*v**3 + 5*m**4*v + v**5"),
    (5, "-10*m**3*v**2 + 5*m*v**4 + m**5"),
    (6, "15*m**4*v**2 - 15*m**2*v**4 - m**6 + v**6"),
    (6, "m**5*v - 10*m**3*v**3/3 + m*v**5"),
]

BF_ANTIMONOTONE = [
    (3, "3*m**2*v + v**3"),
    (3, "3*m*v**2 + m**3"),
    (4, "6*m**2*v**2 + m**4 + v**4"),
    (4, "m**3*v + m*v**3"),
    (5, "10*m**2*v**3 + 5*m**4*v + v**5"),
    (5, "10*m**3*v**2 + 5*m*v**4 + m**5"),
    (6, "15*m**4*v**2 + 15*m**2*v**4 + m**6 + v**6"),
    (6, "m**5*v + 10*m**3*v**3/3 + m*v**5"),
]

FF_MONOTONE = [
    (3, "v**3 - 3*m**2*v"),
    (4, "-2*m**2*v**2 - m**4/3 + v**4"),
    (4, "m**3*v"),
    (5, "-2*m**2*v**3 - 3*m**4*v + v**5"),
    (6, "45*m**4*v**2/7 - 15*m**2*v**4/7 + 3*m**6/7 + v**6"),
]

FF_ANTIMONOTONE = [
    (3, "3*m**2*v + v**3"),
    (4, "2*m**2*v**2 - m**4/3 + v**4"),
    (4, "m**3*v"),
    (5, "2*m**2*v**3 - 3*m**4*v + v**5"),
    (6, "45*m**4*v**2/7 + 15*m**2*v**4/7 - 3*m**6/7 + v**6"),
]

# laws of z_t = (c v^3 + alpha v z)_x, v_t = (z + alpha v^2/2)_x
SYSTEM3_DISPLAYED = [
    (2, "v*z"),
    (4, "3*alpha**2*v**4 - alpha*v**4 - 12*alpha*v**2*z - 2*v**4 - 12*z**2"),
    (5, "v*(9*alpha**2*v**4 - 3*alpha*v**4 - 20*alpha*v**2*z - 6*v**4 - 60*z**2)"),
    (6, "6*alpha**3*v**6 - 2*alpha**2*v**6 - 4*alpha*v**6 + 5*alpha**2*v**4*z"
        " - 5*alpha*v**4*z - 60*alpha*v**2*z**2 - 10*v**4*z - 20*z**3"),
]

REFERENCE_LAWS = {
    "bf-quadratic": BF_MONOTONE,
    "bf-antimonotone": BF_ANTIMONOTONE,
    "ff-quadratic": FF_MONOTONE,
    "ff-antimonotone": FF_ANTIMONOTONE,
    "system3-displayed": SYSTEM3_DISPLAYED,
}

PROBLEM_KEYS = ("bf-quadratic", "bf-antimonotone", "ff-quadratic", "ff-antimonotone", "ff-log",
                "system3", "system3-displayed")


def pde_for(key: str, alpha=None) -> EntropyPde:
    """EntropyPde for a problem key; ``alpha`` applies to the system3 keys (symbolic if None)."""
    H = HamiltonianSpec.quadratic()
    if key == "bf-quadratic":
        return EntropyPde.bf(H, CouplingSpec.signed_quadratic(1))
    if key == "bf-antimonotone":
        return EntropyPde.bf(H, CouplingSpec.signed_quadratic(-1))
    if key == "ff-quadratic":
        return EntropyPde.ff(H, CouplingSpec.signed_quadratic(1))
    if key == "ff-antimonotone":
        return EntropyPde.ff(H, CouplingSpec.signed_quadratic(-1))
    if key == "ff-log":
        return EntropyPde.ff(H, CouplingSpec.log())
    if key in ("system3", "system3-displayed"):
        from .entropy import ALPHA

        variant = "displayed" if key.endswith("displayed") else "derived"
        return EntropyPde(Problem.SYSTEM3, alpha=ALPHA if alpha is None else alpha, variant=variant)
    raise KeyError(f"unknown problem key {key!r}; choose from {PROBLEM_KEYS}")


def reference_entropies(key: str) -> list[tuple[int, PolynomialEntropy]]:
    pair = Variant.ZV if key.startswith("system3") else Variant.VM
    return [(d, PolynomialEntropy.from_expr(s, pair)) for d, s in REFERENCE_LAWS[key]]
