"""
GKSL moments package initialization.

Closed-form moment dynamics and Gaussian stationary states for quadratic
bosonic and fermionic GKSL generators, with a Fock-space oracle.
"""

from .algebra import GeneratorSpec, ModeSystem, QuadraticCoefficient, Statistics
from .gaussian import GaussianStateSpec, normalization, stationarity_residuals
from .moments import MomentTensor, moment_generator, propagate_moments

__version__ = "1.0.0"

__all__ = [
    "GaussianStateSpec",
    "GeneratorSpec",
    "ModeSystem",
    "MomentTensor",
    "QuadraticCoefficient",
    "Statistics",
    "moment_generator",
    "normalization",
    "propagate_moments",
    "stationarity_residuals",
]
