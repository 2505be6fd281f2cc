"""
Operator identities behind the closed-form moment equations, checked as
explicit matrices.

    linear-commutator     [C, f^T a] = f^T D a
    product-commutator    [C, prod_l f_l^T a] = sum_i prod_l f_l^T D^(delta_il) a
    double-commutator     [C, [C, prod_l f_l^T a]]
                              = sum_{i,p} prod_l f_l^T D^(delta_il + delta_pl) a
    adjoint-duality       tr X L(rho) = tr L(X) rho
    gaussian-conjugation  e^Q C e^-Q = 1/2 a^T X a,  Q = 1/2 a^T M a

with C = 1/2 a^T K a and D = commutator_drift(K). X is e^{-MJ} K e^{JM} for
bosons and e^{ME} K e^{-EM} for fermions.

Bosonic matrices are truncated, so residuals are measured on the block of
basis states with total occupation <= cutoff - 1 - buffer, where buffer
counts the ladder operators in the longest product. Products that start in
that block never reach the cutoff, which makes the truncated entries exact.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from ..algebra import GeneratorSpec, QuadraticCoefficient, commutator_drift, structure_matrices
from ..config import get_settings
from ..errors import ConfigurationError, InputError
from ..linalg import as_matrix, comm, expm, fro_norm
from ..utils.logging_config import get_logger
from .dynamics import apply_generator_to
from .fock import FockRep, linear_form, quadratic_form, quadratic_operator

logger = get_logger(__name__)

DEFAULT_TOLERANCE = 1e-10


class IdentityKind(str, Enum):
    LINEAR_COMMUTATOR = "linear-commutator"
    PRODUCT_COMMUTATOR = "product-commutator"
    DOUBLE_COMMUTATOR = "double-commutator"
    ADJOINT_DUALITY = "adjoint-duality"
    GAUSSIAN_CONJUGATION = "gaussian-conjugation"


@dataclass(frozen=True)
class IdentityReport:
    """Residual ||LHS - RHS||_F over the protected block."""

    kind: IdentityKind
    residual: float
    tolerance: float
    block_size: int

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance


def protected_block(rep: FockRep, buffer: int) -> np.ndarray:
    """
    Boolean mask of basis states safe from truncation artifacts.

    Raises:
        ConfigurationError: If the buffer leaves no protected states
    """
    if not rep.system.is_boson:
        return np.ones(rep.dim, dtype=bool)
    limit = rep.cutoff - 1 - buffer
    if limit < 0:
        raise ConfigurationError(
            f"buffer {buffer} exceeds what cutoff {rep.cutoff} can protect"
        )
    return rep.total_occupation <= limit


def _product(forms) -> np.ndarray:
    out = forms[0]
    for form in forms[1:]:
        out = out @ form
    return out


def _block_residual(lhs, rhs, mask) -> float:
    diff = (lhs - rhs)[np.ix_(mask, mask)]
    return fro_norm(diff)


def _require(value, name: str, kind: IdentityKind):
    if value is None:
        raise InputError(f"identity '{kind.value}' needs parameter '{name}'")
    return value


def verify_identity(
    kind,
    rep: FockRep,
    coeff: Optional[QuadraticCoefficient] = None,
    fs: Optional[Sequence] = None,
    m_matrix=None,
    spec: Optional[GeneratorSpec] = None,
    rho=None,
    x=None,
    tol: float = DEFAULT_TOLERANCE,
) -> IdentityReport:
    """
    Evaluate one operator identity and report its residual.

    Args:
        kind: IdentityKind or its string value
        rep: Fock representation
        coeff: Coefficient K (all kinds except adjoint-duality)
        fs: Linear-form vectors f_l (commutator kinds; linear-commutator uses fs[0])
        m_matrix: Exponent M (gaussian-conjugation); bosons need a
            particle-number-conserving M
        spec: Generator (adjoint-duality)
        rho: Density-like matrix (adjoint-duality)
        x: Observable matrix (adjoint-duality)
        tol: Pass threshold on the residual

    Raises:
        InputError: Missing parameters or mismatched systems
        ConfigurationError: Cutoff too small for the buffer, or a bosonic
            M mixing particle numbers
    """
    kind = IdentityKind(kind)

    if kind is IdentityKind.ADJOINT_DUALITY:
        spec = _require(spec, "spec", kind)
        rho = as_matrix(_require(rho, "rho", kind), "rho")
        x = as_matrix(_require(x, "x", kind), "x")
        lhs = np.trace(x @ apply_generator_to(spec, rep, rho))
        rhs = np.trace(apply_generator_to(spec, rep, x) @ rho)
        return _report(kind, float(abs(lhs - rhs)), tol, rep.dim)

    coeff = _require(coeff, "coeff", kind)
    rep.check_system(coeff.system)
    c = quadratic_operator(coeff, rep)
    drift_t = commutator_drift(coeff).T

    if kind is IdentityKind.GAUSSIAN_CONJUGATION:
        m_matrix = as_matrix(_require(m_matrix, "m_matrix", kind), "M")
        rep.system.check_shape(m_matrix, "M")
        j, e = structure_matrices(rep.system)
        if rep.system.is_boson:
            n = rep.system.n
            if fro_norm(m_matrix[:n, :n]) > 0 or fro_norm(m_matrix[n:, n:]) > 0:
                raise ConfigurationError(
                    "bosonic exponent must conserve particle number for a truncation-exact check"
                )
            transformed = expm(-m_matrix @ j) @ coeff.k @ expm(j @ m_matrix)
        else:
            transformed = expm(m_matrix @ e) @ coeff.k @ expm(-e @ m_matrix)
        q = quadratic_form(m_matrix, rep)
        lhs = expm(q) @ c @ expm(-q)
        rhs = quadratic_form(transformed, rep)
        mask = protected_block(rep, 2)
        return _report(kind, _block_residual(lhs, rhs, mask), tol, int(mask.sum()))

    fs = [np.asarray(f, dtype=np.complex128) for f in _require(fs, "fs", kind)]
    if not fs:
        raise InputError(f"identity '{kind.value}' needs at least one vector f")

    if kind is IdentityKind.LINEAR_COMMUTATOR:
        f = fs[0]
        lhs = comm(c, linear_form(f, rep))
        rhs = linear_form(drift_t @ f, rep)
        mask = protected_block(rep, 3)
        return _report(kind, _block_residual(lhs, rhs, mask), tol, int(mask.sum()))

    m = len(fs)
    plain = [linear_form(f, rep) for f in fs]
    once = [linear_form(drift_t @ f, rep) for f in fs]
    twice = [linear_form(drift_t @ (drift_t @ f), rep) for f in fs]
    levels = (plain, once, twice)
    product = _product(plain)

    if kind is IdentityKind.PRODUCT_COMMUTATOR:
        lhs = comm(c, product)
        rhs = sum(_product([levels[int(slot == i)][slot] for slot in range(m)]) for i in range(m))
        mask = protected_block(rep, 2 + m)
    elif kind is IdentityKind.DOUBLE_COMMUTATOR:
        lhs = comm(c, comm(c, product))
        rhs = sum(
            _product([levels[int(slot == i) + int(slot == p)][slot] for slot in range(m)])
            for i in range(m)
            for p in range(m)
        )
        mask = protected_block(rep, 4 + m)
    else:
        raise InputError(f"unsupported identity kind '{kind.value}'")

    return _report(kind, _block_residual(lhs, rhs, mask), tol, int(mask.sum()))


def _report(kind: IdentityKind, residual: float, tol: float, block: int) -> IdentityReport:
    report = IdentityReport(kind, residual, tol, block)
    logger.debug(
        f"Identity {kind.value}: residual {residual:.3e}",
        extra={"passed": report.passed, "block_size": block},
    )
    return report


def random_linear_forms(m: int, size: int, rng: np.random.Generator) -> list:
    """m unit-norm complex vectors of length size."""
    out = []
    for _ in range(m):
        f = rng.normal(size=size) + 1j * rng.normal(size=size)
        out.append(f / np.linalg.norm(f))
    return out


def random_number_conserving_exponent(n: int, rng: np.random.Generator, scale: float = 0.5):
    """Valid bosonic M = [[0, B], [B^T, 0]] with B Hermitian (conserves particle number)."""
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    b = 0.5 * (g + g.conj().T)
    b *= scale / max(np.linalg.norm(b), 1e-300)
    zero = np.zeros((n, n), dtype=np.complex128)
    return np.block([[zero, b], [b.T, zero]])
