"""Bounded-k quantum ensembles and desk-scale interference models."""

from qensemble.constants import (
    HBAR,
    M_ELECTRON,
    R_HYDROGEN,
    PhysicalConstants,
    derived_constants,
    norm_integral_coefficient,
)
from qensemble.errors import (
    BeamStoppingError,
    ConvergenceError,
    DomainError,
    ResolutionError,
    SingularityError,
    SingularMemberError,
    TruncationError,
    UnsupportedRegimeError,
)

__all__ = [
    "HBAR",
    "M_ELECTRON",
    "R_HYDROGEN",
    "PhysicalConstants",
    "derived_constants",
    "norm_integral_coefficient",
    "BeamStoppingError",
    "ConvergenceError",
    "DomainError",
    "ResolutionError",
    "SingularityError",
    "SingularMemberError",
    "TruncationError",
    "UnsupportedRegimeError",
]

__version__ = "0.1.0"
