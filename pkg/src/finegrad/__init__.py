"""Exact counts of fine gradings on matrix and classical Lie algebras.

Submodules: ``partitions``, ``symplectic`` (Sp_2m(2) and its affine and
twisted actions), ``orbits`` (Burnside counting of multiset orbits),
``census`` (grading counts per series), ``asymptotics`` (constants and
envelopes) and ``cli``.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .census import GradingCountRow, avg_matrix, avg_series, n_A, n_B, n_C, n_D, n_matrix
from .orbits import CycleIndexUnavailable, OrbitCounter, orbit_count

__all__ = [
    "__version__",
    "GradingCountRow",
    "CycleIndexUnavailable",
    "OrbitCounter",
    "avg_matrix",
    "avg_series",
    "n_A",
    "n_B",
    "n_C",
    "n_D",
    "n_matrix",
    "orbit_count",
]
