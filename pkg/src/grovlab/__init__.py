"""Groverian entanglement, perfect teleportation and superdense coding for few-qubit states."""

from .qcore import TOL, PureState, DensityMatrix, Operator1Q, Tolerances, partial_trace
from .groverian import (
    GroverianResult,
    pmax_alternating,
    pmax_bloch,
    pmax_generalized_w,
    pmax_quadrangle,
    pmax_reduced,
)
from .protocols import build_protocol, simulate_teleport, superdense_check, teleport_feasible
from .conjlab import FamilySpec, family_state, scan_family, conjecture_report, kappa_sweep

__version__ = "0.1.0"

__all__ = [
    "TOL",
    "Tolerances",
    "PureState",
    "DensityMatrix",
    "Operator1Q",
    "partial_trace",
    "GroverianResult",
    "pmax_alternating",
    "pmax_reduced",
    "pmax_bloch",
    "pmax_generalized_w",
    "pmax_quadrangle",
    "teleport_feasible",
    "build_protocol",
    "simulate_teleport",
    "superdense_check",
    "FamilySpec",
    "family_state",
    "scan_family",
    "conjecture_report",
    "kappa_sweep",
    "__version__",
]
