"""Spectral asymptotics laboratory for the planar and n-dimensional Lamé operator.

The package provides exact and finite-element spectra, heat-trace and
counting-function coefficient extraction, resolvent symbol calculus and
one-dimensional image heat kernels.
"""
from .errors import (
    AssemblyError, BesselRangeError, ConditioningError, ConfigError, DifferentiationError, FactorizationError,
    FitError, IncompleteSpectrumError, IntegrationError, LameSpecError, MeshError, NumericsError, RangeError,
)
from .moduli import DIRICHLET, NEUMANN, ElasticModuli
from .spectrum import SpectrumTable

__version__ = "0.1.0"

__all__ = [
    "ElasticModuli", "SpectrumTable", "DIRICHLET", "NEUMANN",
    "LameSpecError", "ConfigError", "NumericsError", "RangeError", "BesselRangeError", "MeshError",
    "AssemblyError", "FactorizationError", "ConditioningError", "DifferentiationError", "IntegrationError",
    "FitError", "IncompleteSpectrumError",
]
