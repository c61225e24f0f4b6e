"""Spin-dependent two-photon Kapitza-Dirac scattering: simulation and analysis."""

from . import analysis, compton, dirac, evolution, experiment, field, perturbation
from .errors import (
    InvalidArgument,
    KDSpinError,
    NormDrift,
    PoorFit,
    PreconditionError,
    SingularKinematics,
    UnsupportedComponent,
)

__version__ = "0.1.0"

__all__ = [
    "analysis", "compton", "dirac", "evolution", "experiment", "field", "perturbation",
    "InvalidArgument", "KDSpinError", "NormDrift", "PoorFit", "PreconditionError",
    "SingularKinematics", "UnsupportedComponent",
]
