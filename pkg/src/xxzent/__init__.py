"""Thermal pairwise entanglement in the fully connected XXZ spin model.

Four approximation tiers for the concurrence of a symmetric spin pair at
finite temperature: brute-force diagonalization, the exact collective-spectrum
sum, the static-path-plus-RPA integral (CSPA) and the mean-field-plus-RPA
closed forms (CMFA), plus the degraded SPA/MFA modes for comparison.
"""

from .model import ModelParams, crossing_fields, level_energy, multiplicity
from .exact import (
    CollectiveMoments,
    ConcurrenceResult,
    PairState,
    concurrence,
    exact_moments,
    ground_state_moments,
    pair_state,
)

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "CollectiveMoments",
    "PairState",
    "ConcurrenceResult",
    "level_energy",
    "multiplicity",
    "crossing_fields",
    "exact_moments",
    "ground_state_moments",
    "pair_state",
    "concurrence",
    "__version__",
]
