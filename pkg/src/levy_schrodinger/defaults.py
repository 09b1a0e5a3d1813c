"""Centralized numeric defaults.

Every CLI manifest prints this table, so changing a value here changes the
recorded configuration of every run.
"""

from __future__ import annotations

QUAD_TOL = 1e-9  # absolute tolerance for scalar quadratures
TAIL_FIT_FRACTION = 0.05  # outer fraction of the grid used to fit algebraic tails
TAIL_FIT_MIN_POINTS = 8
EXTENSION_FACTOR = 2  # pad = EXTENSION_FACTOR * n points on each side
FAR_TAIL_NODES = 48  # Gauss-Jacobi (power laws) or Gauss-Legendre nodes for the far tail
POSITIVITY_FLOOR = 1e-12  # min(phi) >= floor * max(phi)
NORMALIZATION_TOL = 1e-6
BOUNDARY_DECAY_TOL = 1e-8  # spectral route: |f| at the edges
EVOLUTION_EDGE_FRACTION = 0.10
EVOLUTION_EDGE_TOL = 1e-8
POTENTIAL_FLOOR = -1e3  # V is clipped from below before exponentiation
SMALL_JUMP_NODES = 4  # Gauss-Jacobi nodes for the small-jump drift
DEFAULT_EPS_FACTOR = 1e-3  # sampler eps = factor * scale of the preset
KS_THRESHOLD = 0.05
DEFAULT_SEED = 20120101


def as_dict() -> dict[str, float | int]:
    return {k: v for k, v in globals().items() if k.isupper()}
