"""Numerical lab for one-dimensional forward-forward mean-field games.

Submodules: ``models`` (H, g and derived potentials), ``entropy`` (exact entropy
PDEs and polynomial laws), ``hyperbolic`` and ``parabolic`` (finite-volume
solvers), ``laxhopf`` (variational oracle), ``analysis`` (Poincare-type
constants, Jensen gaps, decay fits), ``config``/``runner``/``cli`` (plumbing).
"""

__version__ = "0.1.0"
