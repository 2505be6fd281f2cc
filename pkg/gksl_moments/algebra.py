"""
Commutation structure of quadratic bosonic and fermionic forms.

Operators are stacked as a = (a_1, ..., a_n, a_1^+, ..., a_n^+): annihilators
first, then creators. Everything indexed by 2n in this package (coefficient
matrices, moment tensors, Fock operator lists) uses that order.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import get_settings
from .errors import InputError, ShapeError, SymmetryError
from .linalg import ComplexMatrix, as_matrix, as_vector, fro_norm


class Statistics(str, Enum):
    BOSON = "boson"
    FERMION = "fermion"


@dataclass(frozen=True)
class ModeSystem:
    """
    n modes of one particle species.

    Attributes:
        n: Number of modes (>= 1)
        statistics: Bosons (CCR) or fermions (CAR)
    """

    n: int
    statistics: Statistics = Statistics.BOSON

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InputError(f"mode count must be a positive integer, got {self.n}")
        object.__setattr__(self, "statistics", Statistics(self.statistics))

    @property
    def dim(self) -> int:
        """Size 2n of the stacked operator vector."""
        return 2 * self.n

    @property
    def is_boson(self) -> bool:
        return self.statistics is Statistics.BOSON

    def check_shape(self, x: ComplexMatrix, name: str = "matrix") -> None:
        if x.shape != (self.dim, self.dim):
            raise ShapeError(
                f"{name} must be {self.dim}x{self.dim} for n={self.n}, got "
                f"{x.shape[0]}x{x.shape[1]}"
            )


@lru_cache(maxsize=32)
def _structure(n: int) -> Tuple[ComplexMatrix, ComplexMatrix]:
    eye = np.eye(n, dtype=np.complex128)
    zero = np.zeros((n, n), dtype=np.complex128)
    j = np.block([[zero, -eye], [eye, zero]])
    e = np.block([[zero, eye], [eye, zero]])
    j.flags.writeable = False
    e.flags.writeable = False
    return j, e


def structure_matrices(system: ModeSystem) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """
    Return (J, E) with J = [[0, -I], [I, 0]] and E = [[0, I], [I, 0]].

    The arrays are read-only and shared between calls.
    """
    return _structure(system.n)


def tilde(x, system: ModeSystem) -> ComplexMatrix:
    """~-conjugation of a matrix: E conj(x) E."""
    x = as_matrix(x)
    system.check_shape(x)
    _, e = structure_matrices(system)
    return e @ x.conj() @ e


def tilde_vector(g, system: ModeSystem) -> np.ndarray:
    """~-conjugation of a vector: E conj(g)."""
    g = as_vector(g)
    if g.shape != (system.dim,):
        raise ShapeError(f"vector must have length {system.dim}, got {g.shape[0]}")
    _, e = structure_matrices(system)
    return e @ g.conj()


def _sign(system: ModeSystem) -> int:
    return 1 if system.is_boson else -1


def _conditions(system: ModeSystem) -> Tuple[str, str]:
    if system.is_boson:
        return "K = K^T", "K = K~"
    return "K = -K^T", "K = -K~"


@dataclass(frozen=True)
class SymmetryReport:
    """
    Deviation of a coefficient matrix from its symmetry class.

    transpose_deviation is ||K -+ K^T||_F and tilde_deviation is ||K -+ K~||_F,
    the sign following the statistics.
    """

    transpose_deviation: float
    tilde_deviation: float
    tolerance: float
    transpose_condition: str
    tilde_condition: str

    @property
    def passed(self) -> bool:
        return (
            self.transpose_deviation < self.tolerance
            and self.tilde_deviation < self.tolerance
        )

    @property
    def violations(self) -> List[str]:
        failed = []
        if self.transpose_deviation >= self.tolerance:
            failed.append(self.transpose_condition)
        if self.tilde_deviation >= self.tolerance:
            failed.append(self.tilde_condition)
        return failed


def validate_coefficient(
    k, system: ModeSystem, tol: Optional[float] = None
) -> SymmetryReport:
    """
    Measure how far k is from the valid coefficient class.

    Bosons need K = K^T = K~, fermions K = -K^T = -K~.

    Args:
        k: Candidate 2n x 2n coefficient
        system: Mode system fixing n and the statistics
        tol: Absolute Frobenius tolerance (settings.symmetry_tol by default)

    Raises:
        ShapeError: If k is not 2n x 2n
    """
    k = as_matrix(k, "K")
    system.check_shape(k, "K")
    if tol is None:
        tol = get_settings().symmetry_tol
    s = _sign(system)
    t_cond, tilde_cond = _conditions(system)
    return SymmetryReport(
        transpose_deviation=fro_norm(k - s * k.T),
        tilde_deviation=fro_norm(k - s * tilde(k, system)),
        tolerance=tol,
        transpose_condition=t_cond,
        tilde_condition=tilde_cond,
    )


def symmetrize(k, system: ModeSystem) -> ComplexMatrix:
    """
    Project k onto the valid coefficient class.

    The transpose and tilde projections commute, so applying them in
    sequence lands exactly in the class.
    """
    k = as_matrix(k, "K")
    system.check_shape(k, "K")
    s = _sign(system)
    k = 0.5 * (k + s * k.T)
    return 0.5 * (k + s * tilde(k, system))


def random_coefficient(system: ModeSystem, rng: np.random.Generator) -> ComplexMatrix:
    """Draw a valid coefficient: complex Gaussian matrix, then symmetrize."""
    r = rng.normal(size=(system.dim, system.dim)) + 1j * rng.normal(
        size=(system.dim, system.dim)
    )
    return symmetrize(r, system)


@dataclass(frozen=True, eq=False)
class QuadraticCoefficient:
    """
    Coefficient K of the self-adjoint form C = 1/2 a^T K a.

    Validated on construction; invalid matrices are rejected, never
    silently symmetrized.

    Raises:
        SymmetryError: Naming the first violated condition
    """

    k: ComplexMatrix
    system: ModeSystem
    tol: Optional[float] = field(default=None, repr=False)

    def __post_init__(self):
        k = np.array(as_matrix(self.k, "K"))
        self.system.check_shape(k, "K")
        report = validate_coefficient(k, self.system, self.tol)
        if not report.passed:
            condition = report.violations[0]
            raise SymmetryError(
                f"coefficient violates {condition} "
                f"(|K -+ K^T|_F={report.transpose_deviation:.3e}, "
                f"|K -+ K~|_F={report.tilde_deviation:.3e})",
                condition=condition,
            )
        k.flags.writeable = False
        object.__setattr__(self, "k", k)


@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    """
    The generator L(rho) = -1/2 sum_j [C_j, [C_j, rho]].

    Attributes:
        system: Shared mode system
        coefficients: K_1..K_N, N >= 1
    """

    system: ModeSystem
    coefficients: Tuple[QuadraticCoefficient, ...]

    def __post_init__(self):
        coefficients = tuple(self.coefficients)
        if not coefficients:
            raise InputError("generator needs at least one coefficient")
        for index, coeff in enumerate(coefficients):
            if coeff.system != self.system:
                raise InputError(
                    f"coefficient {index + 1} belongs to {coeff.system}, "
                    f"generator is {self.system}"
                )
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def from_matrices(
        cls, system: ModeSystem, matrices: Sequence, tol: Optional[float] = None
    ) -> "GeneratorSpec":
        return cls(system, tuple(QuadraticCoefficient(k, system, tol) for k in matrices))

    def __len__(self) -> int:
        return len(self.coefficients)


def drift_matrix(coeff: QuadraticCoefficient) -> ComplexMatrix:
    """
    Drift entering the moment equations: JK for bosons, EK for fermions.
    """
    if not isinstance(coeff, QuadraticCoefficient):
        raise SymmetryError("drift_matrix needs a validated QuadraticCoefficient")
    j, e = structure_matrices(coeff.system)
    s = j if coeff.system.is_boson else e
    return s @ coeff.k


def commutator_drift(coeff: QuadraticCoefficient) -> ComplexMatrix:
    """
    Matrix D with [1/2 a^T K a, f^T a] = f^T D a.

    D = JK for bosons and D = -EK for fermions. The sign does not matter
    wherever D appears twice, as in every double commutator.
    """
    d = drift_matrix(coeff)
    return d if coeff.system.is_boson else -d
