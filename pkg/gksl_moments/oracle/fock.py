"""
Explicit Fock-space representation.

Bosonic modes are truncated at a per-mode occupation cutoff d; fermionic
modes use Jordan-Wigner strings on n two-level factors and are exact.
Mode 1 is the most significant Kronecker factor, and level k of a mode is
basis index k (for fermions: 0 empty, 1 occupied).
"""

import itertools
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..algebra import ModeSystem, QuadraticCoefficient
from ..config import get_settings
from ..errors import InputError, ShapeError, SizeLimitError, StateValidityError, TruncationError
from ..gaussian import normalization, validate_exponent
from ..linalg import ComplexMatrix, as_matrix, as_vector, expm
from ..moments import MomentTensor
from ..schemas import InitSpec, to_array, to_complex
from ..utils.logging_config import get_logger

logger = get_logger(__name__)

_SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=np.complex128)
_PARITY = np.diag([1, -1]).astype(np.complex128)
# extra bosonic levels used when exponentiating a Gaussian exponent
GAUSSIAN_PAD_LEVELS = 8


def annihilation(cutoff: int) -> ComplexMatrix:
    """Truncated ladder matrix a|k> = sqrt(k)|k-1> on levels 0..cutoff-1."""
    return np.diag(np.sqrt(np.arange(1, cutoff)), k=1).astype(np.complex128)


def _embed(factors: Sequence[ComplexMatrix]) -> ComplexMatrix:
    out = np.ones((1, 1), dtype=np.complex128)
    for factor in factors:
        out = np.kron(out, factor)
    return out


@dataclass(frozen=True, eq=False)
class FockRep:
    """
    Operators realizing the stacked vector (a_1..a_n, a_1^+..a_n^+).

    Attributes:
        system: Mode system
        cutoff: Per-mode level count (2 for fermions)
        ops: 2n operator matrices, annihilators first
        occupations: Per basis state, occupation of each mode (dim x n)
    """

    system: ModeSystem
    cutoff: int
    ops: Tuple[ComplexMatrix, ...]
    occupations: np.ndarray

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    @property
    def total_occupation(self) -> np.ndarray:
        return self.occupations.sum(axis=1)

    def check_system(self, system: ModeSystem) -> None:
        if system != self.system:
            raise InputError(f"representation is for {self.system}, got {system}")


def build_rep(system: ModeSystem, cutoff: int = 2, dim_cap: Optional[int] = None) -> FockRep:
    """
    Build the operator matrices for a mode system.

    Args:
        system: Mode system
        cutoff: Per-mode occupation cap d (bosons, >= 2); ignored for fermions
        dim_cap: Cap on the Hilbert dimension (settings.oracle_dim_cap by default)

    Raises:
        InputError: Boson cutoff below 2
        SizeLimitError: If d^n (or 2^n) exceeds the cap
    """
    if dim_cap is None:
        dim_cap = get_settings().oracle_dim_cap
    n = system.n
    if system.is_boson:
        if cutoff < 2:
            raise InputError(f"bosonic cutoff must be >= 2, got {cutoff}")
        levels = int(cutoff)
    else:
        levels = 2

    dim = levels**n
    if dim > dim_cap:
        raise SizeLimitError(f"Fock dimension {levels}^{n} = {dim} exceeds cap {dim_cap}")

    eye = np.eye(levels, dtype=np.complex128)
    if system.is_boson:
        local = annihilation(levels)
        lowering = [_embed([local if j == i else eye for j in range(n)]) for i in range(n)]
    else:
        # Jordan-Wigner: parity strings on the modes before i
        lowering = [
            _embed([_PARITY] * i + [_SIGMA_MINUS] + [eye] * (n - i - 1)) for i in range(n)
        ]
    raising = [op.conj().T for op in lowering]

    occupations = np.array(list(itertools.product(range(levels), repeat=n)), dtype=int)
    ops = tuple(lowering + raising)
    for op in ops:
        op.flags.writeable = False

    logger.debug(
        f"Built Fock representation [dim={dim}]",
        extra={"statistics": system.statistics.value, "n": n, "cutoff": levels},
    )
    return FockRep(system, levels, ops, occupations)


def linear_form(f, rep: FockRep) -> ComplexMatrix:
    """Operator f^T a = sum_alpha f_alpha op_alpha."""
    f = as_vector(f, "f")
    if f.shape != (rep.system.dim,):
        raise ShapeError(f"linear form needs {rep.system.dim} coefficients, got {f.shape[0]}")
    return np.tensordot(f, np.array(rep.ops), axes=1)


def quadratic_form(k, rep: FockRep) -> ComplexMatrix:
    """Operator 1/2 a^T k a for an arbitrary 2n x 2n matrix k."""
    k = as_matrix(k, "K")
    rep.system.check_shape(k, "K")
    ops = rep.ops
    out = np.zeros((rep.dim, rep.dim), dtype=np.complex128)
    for alpha, beta in zip(*np.nonzero(k)):
        out += k[alpha, beta] * (ops[alpha] @ ops[beta])
    return 0.5 * out


def quadratic_operator(coeff: QuadraticCoefficient, rep: FockRep) -> ComplexMatrix:
    """
    C = 1/2 a^T K a for a validated coefficient.

    Raises:
        InputError: If rep is for a different mode system
    """
    rep.check_system(coeff.system)
    return quadratic_form(coeff.k, rep)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A density matrix in a Fock representation."""

    rho: ComplexMatrix
    rep: FockRep

    def __post_init__(self):
        rho = as_matrix(self.rho, "rho")
        if rho.shape != (self.rep.dim, self.rep.dim):
            raise ShapeError(f"rho must be {self.rep.dim}x{self.rep.dim}, got {rho.shape}")
        object.__setattr__(self, "rho", rho)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.rho))

    def hermiticity_defect(self) -> float:
        return float(np.linalg.norm(self.rho - self.rho.conj().T))

    def min_eigenvalue(self) -> float:
        hermitian = 0.5 * (self.rho + self.rho.conj().T)
        return float(np.min(np.linalg.eigvalsh(hermitian)))


def purity(rho: DensityMatrix) -> float:
    """tr rho^2."""
    return float(np.real(np.sum(rho.rho * rho.rho.T)))


def edge_population(rho: DensityMatrix) -> float:
    """Population of bosonic basis states with some mode at the top level."""
    rep = rho.rep
    if not rep.system.is_boson:
        return 0.0
    at_edge = np.any(rep.occupations == rep.cutoff - 1, axis=1)
    return float(np.real(np.sum(np.diag(rho.rho)[at_edge])))


def check_density(
    rho: DensityMatrix,
    hermitian_tol: float = 1e-12,
    trace_tol: float = 1e-10,
    eigen_tol: float = 1e-10,
) -> DensityMatrix:
    """
    Check Hermiticity, unit trace and positivity.

    Raises:
        StateValidityError: On any violation
    """
    defect = rho.hermiticity_defect()
    if defect > hermitian_tol:
        raise StateValidityError(f"density matrix not Hermitian (defect {defect:.3e})")
    trace = rho.trace
    if abs(trace - 1) > trace_tol:
        raise StateValidityError(f"density matrix trace {trace.real:.12g} differs from 1")
    low = rho.min_eigenvalue()
    if low < -eigen_tol:
        raise StateValidityError(f"density matrix has negative eigenvalue {low:.3e}")
    return rho


def _per_mode(values, n: int, name: str) -> list:
    values = list(values)
    if len(values) == 1 and n > 1:
        values = values * n
    if len(values) != n:
        raise InputError(f"{name} needs one entry per mode ({n}), got {len(values)}")
    return values


def _coherent_mode(alpha: complex, levels: int, tail_tol: float) -> np.ndarray:
    amplitudes = np.zeros(levels, dtype=np.complex128)
    amplitudes[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for k in range(1, levels):
        amplitudes[k] = amplitudes[k - 1] * alpha / np.sqrt(k)
    tail = max(0.0, 1.0 - float(np.sum(np.abs(amplitudes) ** 2)))
    if tail > tail_tol:
        raise TruncationError(
            f"coherent amplitude {alpha} loses mass {tail:.3e} above cutoff {levels}",
            tail_mass=tail,
        )
    return amplitudes / np.linalg.norm(amplitudes)


def _random_state(rep: FockRep, seed: Optional[int]) -> ComplexMatrix:
    rng = np.random.default_rng(seed)
    support = np.ones(rep.dim, dtype=bool)
    if rep.system.is_boson:
        # keep clear of the truncation edge
        support = rep.total_occupation <= (rep.cutoff - 1) // 2
    size = int(support.sum())
    g = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    block = g @ g.conj().T
    rho = np.zeros((rep.dim, rep.dim), dtype=np.complex128)
    rho[np.ix_(support, support)] = block / np.trace(block)
    return rho


def _gaussian_exponential(m_matrix: ComplexMatrix, s: complex, rep: FockRep) -> ComplexMatrix:
    if not rep.system.is_boson:
        return expm(quadratic_form(m_matrix, rep) + s * np.eye(rep.dim))
    # truncated a a^+ is wrong on the top level, so exponentiate on a larger
    # space and keep the block with every mode below the cutoff
    levels = rep.cutoff + GAUSSIAN_PAD_LEVELS
    padded = build_rep(rep.system, levels, dim_cap=levels**rep.system.n)
    keep = np.all(padded.occupations < rep.cutoff, axis=1)
    full = expm(quadratic_form(m_matrix, padded) + s * np.eye(padded.dim))
    return full[np.ix_(keep, keep)]


def state_factory(init: InitSpec, rep: FockRep) -> DensityMatrix:
    """
    Realize an initial state in the Fock representation.

    Supported kinds: vacuum, fock, coherent (bosons), thermal, gaussian,
    random-valid. Coherent and thermal states are renormalized on the
    truncated space; bosonic gaussian states are exp(1/2 a^T M a + s) cut
    from a representation padded by GAUSSIAN_PAD_LEVELS,
    with s from normalization() unless given.

    Raises:
        TruncationError: Coherent amplitude too large for the cutoff
        StateValidityError: Invalid Gaussian exponent or non-physical result
        InputError: Fields inconsistent with the mode system
    """
    settings = get_settings()
    n, levels = rep.system.n, rep.cutoff
    kind = init.kind
    trace_tol = 1e-10

    if kind == "vacuum":
        psi = np.zeros(rep.dim, dtype=np.complex128)
        psi[0] = 1.0
        rho = np.outer(psi, psi.conj())
    elif kind == "fock":
        occupations = _per_mode(init.occupations, n, "occupations")
        if any(k < 0 or k >= levels for k in occupations):
            raise InputError(f"occupations {occupations} outside levels 0..{levels - 1}")
        index = int(np.ravel_multi_index(tuple(occupations), (levels,) * n))
        rho = np.zeros((rep.dim, rep.dim), dtype=np.complex128)
        rho[index, index] = 1.0
    elif kind == "coherent":
        if not rep.system.is_boson:
            raise InputError("coherent states are defined for bosons only")
        alphas = _per_mode([to_complex(a) for a in init.alpha], n, "alpha")
        psi = _embed(
            [
                _coherent_mode(a, levels, settings.coherent_tail_tol).reshape(-1, 1)
                for a in alphas
            ]
        ).ravel()
        rho = np.outer(psi, psi.conj())
    elif kind == "thermal":
        lambdas = _per_mode(init.lambdas, n, "lambdas")
        weights = _embed([np.diag(np.exp(-lam * np.arange(levels))) for lam in lambdas])
        rho = weights / np.trace(weights)
    elif kind == "gaussian":
        m_matrix = to_array(init.m_matrix)
        validate_exponent(m_matrix, rep.system)
        s = to_complex(init.s) if init.s is not None else normalization(m_matrix, rep.system)
        rho = _gaussian_exponential(m_matrix, s, rep)
        if rep.system.is_boson:
            trace_tol = settings.tail_mass_tol
    elif kind == "random-valid":
        rho = _random_state(rep, init.seed)
    else:
        raise InputError(f"unknown initial state kind '{kind}'")

    state = check_density(
        DensityMatrix(rho, rep), hermitian_tol=1e-10, trace_tol=trace_tol, eigen_tol=1e-10
    )
    logger.debug(f"Initial state prepared [kind={kind}]", extra={"dim": rep.dim})
    return state


def extract_moments(
    rho: DensityMatrix, rep: FockRep, m: int, cap: Optional[int] = None
) -> MomentTensor:
    """
    Moments tr(op_{i_1} ... op_{i_m} rho), products taken left to right.

    Raises:
        SizeLimitError: If (2n)^m exceeds the moment cap
    """
    if cap is None:
        cap = get_settings().moment_cap
    if m < 1:
        raise InputError(f"moment order must be >= 1, got {m}")
    size = rep.system.dim**m
    if size > cap:
        raise SizeLimitError(f"moment space dimension {size} exceeds cap {cap}")

    ops = rep.ops
    # tr(P op rho) = sum((P) * (op rho)^T)
    op_rho_t = [(op @ rho.rho).T for op in ops]
    prefixes: List[ComplexMatrix] = [np.eye(rep.dim, dtype=np.complex128)]
    for _ in range(m - 1):
        prefixes = [p @ op for p in prefixes for op in ops]
    values = np.array(
        [np.sum(p * q) for p in prefixes for q in op_rho_t], dtype=np.complex128
    )
    return MomentTensor(m, rep.system, values)
