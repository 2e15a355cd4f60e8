"""Tunneling of the q-state Potts model on finite grid graphs.

Grids, configurations, bridge geometry, constructive paths, Metropolis
dynamics (direct and rejection-free), exhaustive landscape analysis and
statistical checks of hitting times.
"""

__version__ = "0.1.0"

from .config import Configuration, StableConfig, delta_energy, energy, parse_literal, stable_set
from .dynamics import ChainParams, HittingSample, batch_hits, hit, hit_rejection_free
from .errors import CapacityError, InputError, NumericalError, PottsError, PreconditionError, StuckStateError
from .exact import LandscapeIndex, deep_well_audit, mixing_time, phi_stable_pairs, spectral_gap
from .geometry import BridgeReport, bridges, has_cross
from .lattice import Boundary, GridSpec, HypothesisWarning, Vertex, gamma
from .paths import Path, expansion_path, reduction_path, reference_path

__all__ = [
    "Boundary",
    "BridgeReport",
    "CapacityError",
    "ChainParams",
    "Configuration",
    "GridSpec",
    "HittingSample",
    "HypothesisWarning",
    "InputError",
    "LandscapeIndex",
    "NumericalError",
    "Path",
    "PottsError",
    "PreconditionError",
    "StableConfig",
    "StuckStateError",
    "Vertex",
    "batch_hits",
    "bridges",
    "deep_well_audit",
    "delta_energy",
    "energy",
    "expansion_path",
    "gamma",
    "has_cross",
    "hit",
    "hit_rejection_free",
    "mixing_time",
    "parse_literal",
    "phi_stable_pairs",
    "reduction_path",
    "reference_path",
    "spectral_gap",
    "stable_set",
]
