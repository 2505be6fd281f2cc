"""
Gaussian states exp(1/2 a^T M a + s) and their stationarity conditions.

A Gaussian state is stationary for L = -1/2 sum_j [C_j, [C_j, .]] iff
[K_j S, e^{MS}] = 0 for every j, with S = J for bosons and S = E for fermions.
"""

import cmath
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .algebra import ModeSystem, QuadraticCoefficient, GeneratorSpec, structure_matrices, validate_coefficient
from .config import get_settings
from .errors import InputError, SingularNormalizationError, StateValidityError, SymmetryError
from .linalg import ComplexMatrix, as_matrix, comm, det, expm, fro_norm, identity
from .utils.logging_config import get_logger

logger = get_logger(__name__)

DEFINITENESS_THRESHOLD = -1e-10
SINGULAR_DET = 1e-12


def _step_matrix(system: ModeSystem) -> ComplexMatrix:
    j, e = structure_matrices(system)
    return j if system.is_boson else e


def is_negative_definite(m_matrix, system: ModeSystem) -> bool:
    """
    True if the Hermitian part of ME has all eigenvalues below -1e-10.
    """
    _, e = structure_matrices(system)
    me = as_matrix(m_matrix) @ e
    hermitian = 0.5 * (me + me.conj().T)
    return bool(np.max(np.linalg.eigvalsh(hermitian)) < DEFINITENESS_THRESHOLD)


def validate_exponent(m_matrix, system: ModeSystem, tol: Optional[float] = None) -> None:
    """
    Check that M is an admissible Gaussian exponent.

    Bosons: M = M^T = M~ and ME negative definite. Fermions: M = -M^T = -M~.

    Raises:
        SymmetryError: Naming the violated symmetry condition
        StateValidityError: If the bosonic ME is not negative definite
    """
    report = validate_coefficient(m_matrix, system, tol)
    if not report.passed:
        condition = report.violations[0].replace("K", "M")
        raise SymmetryError(f"Gaussian exponent violates {condition}", condition=condition)
    if system.is_boson and not is_negative_definite(m_matrix, system):
        raise StateValidityError("Gaussian exponent needs ME < 0 (negative definite)")


def normalization(
    m_matrix,
    system: ModeSystem,
    use_literal_k: bool = False,
    k=None,
) -> complex:
    """
    Log-normalization s making exp(1/2 a^T M a + s) unit-trace.

    Bosons: e^s = sqrt|det(e^{MJ} - I)|.
    Fermions: e^{-s} = sqrt(det(e^{ME} + I)).

    Args:
        m_matrix: Exponent M (assumed valid)
        system: Mode system
        use_literal_k: Fermions only; evaluate the determinant with the
            coefficient k in place of M
        k: Coefficient used when use_literal_k is set

    Raises:
        SingularNormalizationError: If det(e^{MJ} - I) vanishes (bosons)
    """
    m_matrix = as_matrix(m_matrix, "M")
    system.check_shape(m_matrix, "M")
    s_mat = _step_matrix(system)
    eye = identity(system.dim)

    if system.is_boson:
        value = det(expm(m_matrix @ s_mat) - eye)
        if not abs(value) > SINGULAR_DET:
            raise SingularNormalizationError(
                f"det(e^(MJ) - I) = {value:.3e}: MJ has an eigenvalue at 0"
            )
        return complex(0.5 * math.log(abs(value)))

    exponent = m_matrix
    if use_literal_k:
        if k is None:
            raise InputError("literal fermionic normalization needs the coefficient K")
        exponent = as_matrix(k, "K")
        logger.debug("Fermionic normalization evaluated with K in place of M")
    value = det(expm(exponent @ s_mat) + eye)
    s = -0.5 * cmath.log(value)
    if abs(s.imag) < 1e-12:
        s = complex(s.real, 0.0)
    return s


@dataclass(frozen=True, eq=False)
class GaussianStateSpec:
    """
    Gaussian state rho = exp(1/2 a^T M a + s).

    Attributes:
        m_matrix: Exponent M (2n x 2n)
        s: Log-normalization
        system: Mode system
    """

    m_matrix: ComplexMatrix
    s: complex
    system: ModeSystem

    def __post_init__(self):
        m_matrix = np.array(as_matrix(self.m_matrix, "M"))
        self.system.check_shape(m_matrix, "M")
        validate_exponent(m_matrix, self.system)
        m_matrix.flags.writeable = False
        object.__setattr__(self, "m_matrix", m_matrix)
        object.__setattr__(self, "s", complex(self.s))

    @classmethod
    def from_exponent(cls, m_matrix, system: ModeSystem) -> "GaussianStateSpec":
        """Validate M and attach its normalization."""
        m_matrix = as_matrix(m_matrix, "M")
        system.check_shape(m_matrix, "M")
        validate_exponent(m_matrix, system)
        return cls(m_matrix, normalization(m_matrix, system), system)


@dataclass(frozen=True)
class StationarityReport:
    """Per-coefficient commutator residuals and the stationarity verdict."""

    residuals: List[float]
    relative_residuals: List[float]
    tolerance: float

    @property
    def stationary(self) -> bool:
        return all(r < self.tolerance for r in self.residuals)


def stationarity_report(
    spec: GeneratorSpec, g: GaussianStateSpec, tol: Optional[float] = None
) -> StationarityReport:
    """
    Residuals ||[K_j S, e^{MS}]||_F, absolute and relative.

    The relative residual divides by ||K_j S||_F ||e^{MS}||_F (0 when K_j = 0).

    Raises:
        InputError: If spec and g use different mode systems
    """
    if spec.system != g.system:
        raise InputError(f"generator is {spec.system}, Gaussian state is {g.system}")
    if tol is None:
        tol = get_settings().stationarity_tol

    s_mat = _step_matrix(spec.system)
    exp_ms = expm(g.m_matrix @ s_mat)
    exp_norm = fro_norm(exp_ms)

    residuals, relative = [], []
    for coeff in spec.coefficients:
        ks = coeff.k @ s_mat
        r = fro_norm(comm(ks, exp_ms))
        scale = fro_norm(ks) * exp_norm
        residuals.append(r)
        relative.append(r / scale if scale > 0 else 0.0)

    report = StationarityReport(residuals, relative, tol)
    logger.debug(
        f"Stationarity residuals: max {max(residuals):.3e}",
        extra={"stationary": report.stationary, "terms": len(residuals)},
    )
    return report


def stationarity_residuals(
    spec: GeneratorSpec, g: GaussianStateSpec
) -> List[float]:
    """
    Residuals ||[K_j S, e^{MS}]||_F for j = 1..N.

    g is certified stationary iff every residual is below the stationarity
    tolerance.
    """
    return stationarity_report(spec, g).residuals


def gibbs_candidate(coeff: QuadraticCoefficient, beta: float) -> GaussianStateSpec:
    """
    Gaussian state with M = beta K, stationary for its own coefficient.

    MS = beta KS, so e^{MS} commutes with KS. Residuals against other
    coefficients of a multi-term generator are not controlled.

    Raises:
        StateValidityError: Bosons with beta K E not negative definite
    """
    beta = float(beta)
    m_matrix = beta * coeff.k
    if coeff.system.is_boson and not is_negative_definite(m_matrix, coeff.system):
        raise StateValidityError(
            f"beta={beta} gives beta*K*E that is not negative definite"
        )
    return GaussianStateSpec(m_matrix, normalization(m_matrix, coeff.system), coeff.system)
