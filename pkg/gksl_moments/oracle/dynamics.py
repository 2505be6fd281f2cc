"""
Brute-force master-equation dynamics in Fock space.

Integrates d/dt rho = L(rho), L(rho) = -1/2 sum_j [C_j, [C_j, rho]], either
exactly through the vectorized superoperator or with fixed-step RK4 when the
superoperator would be too large.
"""

import math
from typing import List, Optional, Sequence

import numpy as np

from ..algebra import GeneratorSpec
from ..config import get_settings
from ..errors import InputError, IntegrationError, SizeLimitError, TruncationError
from ..linalg import ComplexMatrix, expm
from ..moments import uniform_step, validate_times
from ..utils.logging_config import get_logger
from .fock import DensityMatrix, FockRep, edge_population, quadratic_operator

logger = get_logger(__name__)

SUPEROP_EXPM = "superop-expm"
RK4 = "rk4"


def generator_operators(spec: GeneratorSpec, rep: FockRep) -> List[ComplexMatrix]:
    """The matrices C_j realized in rep."""
    rep.check_system(spec.system)
    return [quadratic_operator(coeff, rep) for coeff in spec.coefficients]


def _apply(operators: Sequence[ComplexMatrix], rho: ComplexMatrix) -> ComplexMatrix:
    out = np.zeros_like(rho)
    for c in operators:
        c_rho = c @ rho
        out += c @ c_rho - 2.0 * c_rho @ c + rho @ c @ c
    return -0.5 * out


def apply_generator(spec: GeneratorSpec, rho: DensityMatrix) -> ComplexMatrix:
    """
    L(rho) = -1/2 sum_j (C_j^2 rho - 2 C_j rho C_j + rho C_j^2).

    Raises:
        InputError: If rho lives in a representation of another system
    """
    return _apply(generator_operators(spec, rho.rep), rho.rho)


def apply_generator_to(spec: GeneratorSpec, rep: FockRep, x) -> ComplexMatrix:
    """L applied to an arbitrary operator matrix (no density-matrix checks)."""
    return _apply(generator_operators(spec, rep), np.asarray(x, dtype=np.complex128))


def liouvillian(spec: GeneratorSpec, rep: FockRep, dim_cap: Optional[int] = None) -> ComplexMatrix:
    """
    Matrix of L acting on row-major vec(rho), using vec(A X B) = (A kron B^T) vec(X).

    Raises:
        SizeLimitError: If dim exceeds the superoperator cap
    """
    if dim_cap is None:
        dim_cap = get_settings().superop_dim_cap
    if rep.dim > dim_cap:
        raise SizeLimitError(
            f"superoperator needs dim <= {dim_cap}, representation has dim {rep.dim}"
        )
    eye = np.eye(rep.dim, dtype=np.complex128)
    lv = np.zeros((rep.dim**2, rep.dim**2), dtype=np.complex128)
    for c in generator_operators(spec, rep):
        c2 = c @ c
        lv += np.kron(c2, eye) - 2.0 * np.kron(c, c.T) + np.kron(eye, c2.T)
    return -0.5 * lv


def generator_norm_bound(operators: Sequence[ComplexMatrix]) -> float:
    """Upper bound sum_j 2 ||C_j||_2^2 on the norm of L."""
    return float(sum(2.0 * np.linalg.norm(c, 2) ** 2 for c in operators))


def _check_tail(rho: DensityMatrix, t: float, tol: float) -> None:
    tail = edge_population(rho)
    if tail > tol:
        logger.warning(
            f"Population {tail:.3e} at the truncation edge at t={t:g}",
            extra={"tail_mass": tail, "t": t, "cutoff": rho.rep.cutoff},
        )
        raise TruncationError(
            f"edge population {tail:.3e} exceeds {tol:.1e} at t={t:g}; raise the cutoff",
            tail_mass=tail,
        )


def _rk4_step(operators, rho: ComplexMatrix, h: float) -> ComplexMatrix:
    k1 = _apply(operators, rho)
    k2 = _apply(operators, rho + 0.5 * h * k1)
    k3 = _apply(operators, rho + 0.5 * h * k2)
    k4 = _apply(operators, rho + h * k3)
    return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _evolve_rk4(spec, rho0: DensityMatrix, t: np.ndarray, max_steps: int) -> List[ComplexMatrix]:
    operators = generator_operators(spec, rho0.rep)
    norm = generator_norm_bound(operators)
    h_max = 0.1 / norm if norm > 0 else math.inf

    intervals = np.diff(np.concatenate([[0.0], t]))
    counts = [0 if dt == 0 else max(1, math.ceil(dt / h_max)) for dt in intervals]
    if sum(counts) > max_steps:
        raise IntegrationError(
            f"rk4 needs {sum(counts)} steps (||L|| <= {norm:.3e}), limit is {max_steps}"
        )
    logger.debug(
        f"rk4 integration with {sum(counts)} steps",
        extra={"norm_bound": norm, "points": int(t.size)},
    )

    out, rho = [], rho0.rho
    for dt, count in zip(intervals, counts):
        for _ in range(count):
            rho = _rk4_step(operators, rho, dt / count)
        out.append(rho)
    return out


def _evolve_superop(spec, rho0: DensityMatrix, t: np.ndarray, dim_cap: int) -> List[ComplexMatrix]:
    lv = liouvillian(spec, rho0.rep, dim_cap)
    dim = rho0.rep.dim
    vec0 = rho0.rho.reshape(-1).copy()
    dt = uniform_step(t)

    if dt is not None:
        step = expm(dt * lv)
        current = vec0 if t[0] == 0 else expm(t[0] * lv) @ vec0
        out = [current.reshape(dim, dim)]
        for _ in range(1, t.size):
            current = step @ current
            out.append(current.reshape(dim, dim))
        return out

    return [
        rho0.rho.copy() if tk == 0 else (expm(tk * lv) @ vec0).reshape(dim, dim)
        for tk in t
    ]


def evolve(
    spec: GeneratorSpec,
    rho0: DensityMatrix,
    times: Sequence[float],
    method: Optional[str] = None,
    dim_cap: Optional[int] = None,
    tail_tol: Optional[float] = None,
) -> List[DensityMatrix]:
    """
    Integrate the master equation and return rho(t_k) for every time.

    Args:
        spec: The generator
        rho0: Initial density matrix
        times: Ascending times, first >= 0
        method: 'superop-expm', 'rk4', or None to pick superop-expm when
            dim is within the superoperator cap
        dim_cap: Superoperator cap override
        tail_tol: Edge-population alarm threshold for bosons

    Raises:
        InputError: Bad times, unknown method or mismatched system
        SizeLimitError: superop-expm requested above the cap
        IntegrationError: rk4 step budget exceeded
        TruncationError: Population reaching the bosonic cutoff
    """
    settings = get_settings()
    t = validate_times(times)
    rho0.rep.check_system(spec.system)
    if dim_cap is None:
        dim_cap = settings.superop_dim_cap
    if tail_tol is None:
        tail_tol = settings.tail_mass_tol
    if method is None:
        method = SUPEROP_EXPM if rho0.rep.dim <= dim_cap else RK4

    _check_tail(rho0, 0.0, tail_tol)
    if method == SUPEROP_EXPM:
        matrices = _evolve_superop(spec, rho0, t, dim_cap)
    elif method == RK4:
        matrices = _evolve_rk4(spec, rho0, t, settings.rk4_max_steps)
    else:
        raise InputError(f"unknown integration method '{method}'")

    states = []
    for tk, rho in zip(t, matrices):
        state = DensityMatrix(rho, rho0.rep)
        _check_tail(state, float(tk), tail_tol)
        states.append(state)
    logger.debug(
        f"Oracle trajectory with {len(states)} points [method={method}]",
        extra={"dim": rho0.rep.dim, "terms": len(spec)},
    )
    return states
