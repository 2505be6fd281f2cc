"""
Closed-form moment dynamics.

For C_j = 1/2 a^T K_j a the order-m moment vector <a (x) ... (x) a>_t obeys
d/dt y = G_m y with

    G_m = -1/2 sum_j sum_{i,p=1..m} (x)_l A_j^(delta_il + delta_pl),

A_j = JK_j for bosons and EK_j for fermions. Terms acting on distinct tensor
slots commute, so the double sum equals the square of the Kronecker sum
sum_i I (x) .. (x) A_j (x) .. (x) I; that form is what we build.
"""

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .algebra import GeneratorSpec, ModeSystem, drift_matrix
from .config import get_settings
from .errors import InputError, ShapeError, SizeLimitError
from .linalg import ComplexMatrix, as_matrix, as_vector, expm, identity, kron, require_square
from .utils.logging_config import get_logger

logger = get_logger(__name__)


def _check_cap(d: int, m: int, cap: Optional[int]) -> int:
    if m < 1 or int(m) != m:
        raise InputError(f"moment order must be a positive integer, got {m}")
    if cap is None:
        cap = get_settings().moment_cap
    size = d**m
    if size > cap:
        raise SizeLimitError(f"moment space dimension {d}^{m} = {size} exceeds cap {cap}")
    return size


@dataclass(frozen=True, eq=False)
class MomentTensor:
    """
    Order-m moments <a_{i_1} ... a_{i_m}> stored as a flat vector.

    Entries are in row-major lexicographic order of (i_1, ..., i_m), the order
    produced by Kronecker products of the index spaces.
    """

    order: int
    system: ModeSystem
    values: np.ndarray

    def __post_init__(self):
        values = np.array(as_vector(self.values, "moment values"))
        expected = self.system.dim**self.order
        if self.order < 1 or values.shape[0] != expected:
            raise ShapeError(
                f"order-{self.order} moments for n={self.system.n} need length "
                f"{expected}, got {values.shape[0]}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def as_tensor(self) -> np.ndarray:
        """View as an m-way array with axes of length 2n."""
        return self.values.reshape((self.system.dim,) * self.order)

    def at(self, *indices: int) -> complex:
        """Moment at 1-based multi-index (i_1, ..., i_m)."""
        if len(indices) != self.order:
            raise InputError(f"need {self.order} indices, got {len(indices)}")
        return complex(self.as_tensor()[tuple(i - 1 for i in indices)])

    def labels(self) -> List[str]:
        return moment_index_labels(self.order, self.system.n)


def moment_index_labels(m: int, n: int) -> List[str]:
    """
    Column labels like ``m2_1_2`` for every multi-index, 1-based, in storage order.
    """
    return [
        f"m{m}_" + "_".join(str(i + 1) for i in idx)
        for idx in itertools.product(range(2 * n), repeat=m)
    ]


def kron_sum(a, m: int, cap: Optional[int] = None) -> ComplexMatrix:
    """
    Kronecker sum sum_{i=1..m} I^(i-1) (x) a (x) I^(m-i).

    Raises:
        SizeLimitError: If d**m exceeds the moment cap
    """
    a = as_matrix(a)
    d = require_square(a)
    size = _check_cap(d, m, cap)
    result = np.zeros((size, size), dtype=np.complex128)
    for i in range(m):
        left = identity(d**i)
        right = identity(d ** (m - i - 1))
        result += kron(kron(left, a, max_entries=size * size), right, max_entries=size * size)
    return result


def moment_generator(spec: GeneratorSpec, m: int, cap: Optional[int] = None) -> ComplexMatrix:
    """
    Generator G_m = -1/2 sum_j (kron_sum(A_j, m))^2 of the order-m moments.

    For m=1 this is -1/2 sum_j A_j^2; for m=2 it expands to
    -1/2 sum_j (I (x) A_j^2 + 2 A_j (x) A_j + A_j^2 (x) I).
    """
    _check_cap(spec.system.dim, m, cap)
    size = spec.system.dim**m
    generator = np.zeros((size, size), dtype=np.complex128)
    for coeff in spec.coefficients:
        s = kron_sum(drift_matrix(coeff), m, cap)
        generator -= 0.5 * (s @ s)
    return generator


def moment_generator_double_sum(
    spec: GeneratorSpec, m: int, cap: Optional[int] = None
) -> ComplexMatrix:
    """
    G_m assembled term by term from the m^2 Kronecker products.

    Quadratically more work than moment_generator; kept as a reference.
    """
    d = spec.system.dim
    size = _check_cap(d, m, cap)
    generator = np.zeros((size, size), dtype=np.complex128)
    for coeff in spec.coefficients:
        a = drift_matrix(coeff)
        powers = [identity(d), a, a @ a]
        for i, p in itertools.product(range(m), repeat=2):
            term = np.ones((1, 1), dtype=np.complex128)
            for slot in range(m):
                term = np.kron(term, powers[(slot == i) + (slot == p)])
            generator -= 0.5 * term
    return generator


def validate_times(times: Sequence[float]) -> np.ndarray:
    """
    Check a time list is non-empty, finite, ascending and starts at t >= 0.

    Raises:
        InputError: On any violation
    """
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise InputError("times must be a non-empty list")
    if not np.all(np.isfinite(t)):
        raise InputError("times must be finite")
    if t[0] < 0:
        raise InputError(f"times must be >= 0, first entry is {t[0]}")
    if np.any(np.diff(t) < 0):
        raise InputError("times must be sorted ascending")
    return t


def uniform_step(t: np.ndarray) -> Optional[float]:
    """Return the common spacing of a uniform grid, or None."""
    if t.size < 3:
        return None
    steps = np.diff(t)
    if steps[0] > 0 and np.allclose(steps, steps[0], rtol=1e-12, atol=0.0):
        return float(steps[0])
    return None


class MomentPropagator:
    """
    Closed-form propagator for one generator and one moment order.

    Builds G_m once. Uniform time grids reuse expm(dt * G_m) between
    consecutive points; other grids take one exponential per time.
    """

    def __init__(self, spec: GeneratorSpec, order: int, cap: Optional[int] = None):
        self.spec = spec
        self.order = order
        self.generator = moment_generator(spec, order, cap)

    def at(self, y0: MomentTensor, t: float) -> MomentTensor:
        if t == 0:
            return y0
        values = expm(t * self.generator) @ y0.values
        return MomentTensor(self.order, y0.system, values)

    def trajectory(
        self,
        y0: MomentTensor,
        times: Sequence[float],
        jobs: int = 1,
        reuse_step: bool = True,
    ) -> List[MomentTensor]:
        """
        Moments y(t_k) = expm(t_k G_m) y0 at every requested time.

        Args:
            y0: Initial moments of matching order and system
            times: Ascending times, first >= 0
            jobs: Worker threads for independent time points
            reuse_step: Use the uniform-grid fast path when it applies
        """
        self._check_initial(y0)
        t = validate_times(times)
        dt = uniform_step(t) if reuse_step else None

        if dt is not None:
            logger.debug(
                f"Uniform grid: reusing one-step propagator for {t.size} points",
                extra={"order": self.order, "dt": dt},
            )
            step = expm(dt * self.generator)
            first = self.at(y0, float(t[0]))
            out = [first]
            current = first.values
            for _ in range(1, t.size):
                current = step @ current
                out.append(MomentTensor(self.order, y0.system, current))
            return out

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                return list(pool.map(lambda tk: self.at(y0, float(tk)), t))
        return [self.at(y0, float(tk)) for tk in t]

    def _check_initial(self, y0: MomentTensor) -> None:
        if y0.system != self.spec.system:
            raise InputError(
                f"initial moments belong to {y0.system}, generator is {self.spec.system}"
            )
        if y0.order != self.order:
            raise InputError(f"initial moments have order {y0.order}, expected {self.order}")


def propagate_moments(
    spec: GeneratorSpec,
    y0: MomentTensor,
    times: Sequence[float],
    jobs: int = 1,
    cap: Optional[int] = None,
    reuse_step: bool = False,
) -> List[MomentTensor]:
    """
    Propagate order-m moments in closed form.

    Args:
        spec: The generator
        y0: Initial moments; y(0) is returned unchanged when t_0 = 0
        times: Ascending times, first >= 0
        jobs: Worker threads for independent time points
        cap: Moment-space cap override
        reuse_step: Reuse expm(dt G_m) on uniform grids

    Raises:
        InputError: Unsorted or negative times, mismatched system
        SizeLimitError: (2n)^m above the cap
    """
    validate_times(times)
    propagator = MomentPropagator(spec, y0.order, cap)
    return propagator.trajectory(y0, times, jobs=jobs, reuse_step=reuse_step)


def conjugation_pair_deviation(y: MomentTensor) -> float:
    """
    Distance of a first-order tensor from the form (v, conj(v)).

    Physical states give <a^+> = conj(<a>); this measures how far y is from it.
    """
    if y.order != 1:
        raise InputError("conjugation pairing is defined for first-order moments only")
    n = y.system.n
    return float(np.linalg.norm(y.values[n:] - y.values[:n].conj()))
