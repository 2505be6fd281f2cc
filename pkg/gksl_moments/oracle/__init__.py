"""
Brute-force Fock-space oracle: explicit operator matrices, master-equation
integration and matrix checks of the operator identities.
"""

from .dynamics import apply_generator, evolve, liouvillian
from .fock import (
    DensityMatrix,
    FockRep,
    build_rep,
    edge_population,
    extract_moments,
    purity,
    quadratic_operator,
    state_factory,
)
from .identities import IdentityKind, verify_identity

__all__ = [
    "DensityMatrix",
    "FockRep",
    "IdentityKind",
    "apply_generator",
    "build_rep",
    "edge_population",
    "evolve",
    "extract_moments",
    "liouvillian",
    "purity",
    "quadratic_operator",
    "state_factory",
    "verify_identity",
]
