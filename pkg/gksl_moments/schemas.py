"""
Scenario and report schema models module.

Defines the Pydantic models for scenario files and the JSON reports the
command-line front end writes. Complex numbers travel as [re, im] pairs and
matrices as row-major nested lists of such pairs.
"""

import numbers
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

ComplexPair = Tuple[float, float]
MatrixData = List[List[ComplexPair]]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ValueError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _pair(value, where: str = "value") -> ComplexPair:
    """Accept a real number, a complex number or an [re, im] pair."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"{where}: complex entries are [re, im] pairs, got {value!r}")
        return (_number(value[0], f"{where}[0]"), _number(value[1], f"{where}[1]"))
    if isinstance(value, numbers.Complex) and not isinstance(value, numbers.Real):
        return (float(value.real), float(value.imag))
    return (_number(value, where), 0.0)


def _pairs(values, where: str = "value") -> List[ComplexPair]:
    if isinstance(values, np.ndarray):
        values = values.tolist()
    if not isinstance(values, (list, tuple)):
        raise ValueError(f"{where}: expected a list of complex entries, got {values!r}")
    return [_pair(v, f"{where}[{i}]") for i, v in enumerate(values)]


def _matrix(rows, where: str = "matrix") -> MatrixData:
    if isinstance(rows, np.ndarray):
        rows = rows.tolist()
    if not isinstance(rows, (list, tuple)):
        raise ValueError(f"{where}: expected a list of rows, got {rows!r}")
    return [_pairs(row, f"{where}[{i}]") for i, row in enumerate(rows)]


def to_complex(pair: ComplexPair) -> complex:
    return complex(pair[0], pair[1])


def to_vector(pairs: List[ComplexPair]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)


def to_array(matrix: MatrixData) -> np.ndarray:
    """Nested [re, im] pairs to a complex128 array."""
    return np.array(
        [[complex(re, im) for re, im in row] for row in matrix], dtype=np.complex128
    )


def from_array(a) -> MatrixData:
    """Complex array to nested [re, im] pairs."""
    return [[(float(z.real), float(z.imag)) for z in row] for row in np.asarray(a)]


class SystemConfig(BaseModel):
    """Particle statistics and number of modes."""

    statistics: Literal["boson", "fermion"] = "boson"
    n: int = Field(1, ge=1)


class InitSpec(BaseModel):
    """
    Initial state for the Fock-space oracle.

    Only the fields relevant to ``kind`` are read: occupations for fock,
    alpha for coherent, lambdas for thermal, m_matrix (and optionally s)
    for gaussian, seed for random-valid.
    """

    kind: Literal["vacuum", "fock", "coherent", "thermal", "gaussian", "random-valid"] = "vacuum"
    occupations: Optional[List[int]] = None
    alpha: Optional[List[ComplexPair]] = None
    lambdas: Optional[List[float]] = None
    m_matrix: Optional[MatrixData] = None
    s: Optional[ComplexPair] = None
    seed: Optional[int] = None

    @field_validator("alpha", mode="before")
    @classmethod
    def _parse_alpha(cls, value):
        return None if value is None else _pairs(value, "alpha")

    @field_validator("m_matrix", mode="before")
    @classmethod
    def _parse_m(cls, value):
        return None if value is None else _matrix(value, "m_matrix")

    @field_validator("s", mode="before")
    @classmethod
    def _parse_s(cls, value):
        return None if value is None else _pair(value, "s")

    @model_validator(mode="after")
    def _check_kind_fields(self):
        required = {
            "fock": "occupations",
            "coherent": "alpha",
            "thermal": "lambdas",
            "gaussian": "m_matrix",
        }
        name = required.get(self.kind)
        if name is not None and getattr(self, name) is None:
            raise ValueError(f"initial state '{self.kind}' requires field '{name}'")
        return self


class TimeGrid(BaseModel):
    """Uniform grid of ``steps`` points from start to stop (dimensionless time)."""

    start: float = Field(0.0, ge=0.0)
    stop: float = 1.0
    steps: int = Field(11, ge=1)

    @model_validator(mode="after")
    def _check_order(self):
        if self.stop < self.start:
            raise ValueError("times.stop must not precede times.start")
        return self

    def points(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.steps)


class OracleConfig(BaseModel):
    """Fock-space oracle settings."""

    enabled: bool = True
    cutoff: int = Field(30, ge=2)
    method: Optional[Literal["superop-expm", "rk4"]] = None
    dim_cap: int = Field(256, ge=2)
    superop_dim_cap: int = Field(64, ge=2)


class Tolerances(BaseModel):
    """Comparison thresholds."""

    compare: float = Field(1e-6, gt=0)
    stationarity: float = Field(1e-10, gt=0)
    symmetry: float = Field(1e-12, gt=0)
    generator: float = Field(1e-8, gt=0)
    identity: float = Field(1e-10, gt=0)


class StationaryConfig(BaseModel):
    """Gaussian exponent checked by the stationary command."""

    m_matrix: MatrixData
    literal_k_normalization: bool = False

    @field_validator("m_matrix", mode="before")
    @classmethod
    def _parse_m(cls, value):
        return _matrix(value, "m_matrix")


class Scenario(BaseModel):
    """
    Complete run description read from a JSON scenario file.

    Matrices are validated against the declared 2n x 2n shape here;
    symmetry classes are checked when the generator is built.
    """

    system: SystemConfig = SystemConfig()
    coefficients: List[MatrixData] = Field(default_factory=list)
    random_coefficients: int = Field(0, ge=0)  # drawn from seed when > 0
    initial: InitSpec = InitSpec()
    explicit_moments: Optional[Dict[int, List[ComplexPair]]] = None
    times: TimeGrid = TimeGrid()
    moment_orders: List[int] = Field(default_factory=lambda: [1])
    oracle: OracleConfig = OracleConfig()
    tolerances: Tolerances = Tolerances()
    stationary: Optional[StationaryConfig] = None
    lemma_instances: int = Field(20, ge=1)
    seed: int = Field(0, ge=0)
    jobs: int = Field(1, ge=1)

    @field_validator("coefficients", mode="before")
    @classmethod
    def _parse_coefficients(cls, value):
        if not isinstance(value, (list, tuple)):
            raise ValueError(f"coefficients must be a list of matrices, got {value!r}")
        return [_matrix(k, f"coefficients[{i}]") for i, k in enumerate(value)]

    @field_validator("explicit_moments", mode="before")
    @classmethod
    def _parse_moments(cls, value):
        if value is None:
            return None
        if not isinstance(value, dict):
            raise ValueError(f"explicit_moments must map orders to entry lists, got {value!r}")
        return {order: _pairs(v, f"explicit_moments[{order}]") for order, v in value.items()}

    @field_validator("moment_orders")
    @classmethod
    def _check_orders(cls, value):
        if any(m < 1 for m in value):
            raise ValueError("moment orders must be >= 1")
        return value

    @model_validator(mode="after")
    def _check_shapes(self):
        dim = 2 * self.system.n
        matrices = [(f"coefficients[{i}]", k) for i, k in enumerate(self.coefficients)]
        if self.initial.m_matrix is not None:
            matrices.append(("initial.m_matrix", self.initial.m_matrix))
        if self.stationary is not None:
            matrices.append(("stationary.m_matrix", self.stationary.m_matrix))
        for name, k in matrices:
            if len(k) != dim or any(len(row) != dim for row in k):
                raise ValueError(f"{name} must be {dim}x{dim} for n={self.system.n}")
        if self.explicit_moments:
            for order, values in self.explicit_moments.items():
                if len(values) != dim**order:
                    raise ValueError(
                        f"explicit_moments[{order}] needs {dim ** order} entries, got {len(values)}"
                    )
        return self


class OrderDeviation(BaseModel):
    """Closed form vs oracle deviation for one moment order."""

    order: int
    max_deviation: float
    per_time: List[float]
    passed: bool


class CompareReport(BaseModel):
    """Outcome of the compare command."""

    seed: int
    statistics: str
    n: int
    tolerance: float
    verdict: Literal["pass", "fail", "truncation-alarm"]
    orders: List[OrderDeviation] = Field(default_factory=list)
    tail_mass: Optional[float] = None
    message: Optional[str] = None


class StationaryReport(BaseModel):
    """Outcome of the stationary command."""

    seed: int
    statistics: str
    n: int
    residuals: List[float]
    relative_residuals: List[float]
    s: ComplexPair
    generator_norm: Optional[float] = None
    tolerance: float
    verdict: Literal["stationary", "not stationary"]


class IdentityResult(BaseModel):
    """Worst residual of one operator identity over random instances."""

    kind: str
    instances: int
    max_residual: float
    passed: bool


class LemmaReport(BaseModel):
    """Outcome of the verify-lemmas command."""

    seed: int
    statistics: str
    n: int
    cutoff: Optional[int] = None
    tolerance: float
    results: List[IdentityResult]
    passed: bool
