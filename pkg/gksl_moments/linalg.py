"""
Dense complex matrix primitives.

Thin validated layer over numpy/scipy: every other module builds its
Kronecker products, exponentials, determinants and commutators here so
shape checks and size caps live in one place. Matrices are plain
``numpy.ndarray`` objects of dtype complex128 in row-major order.
"""

from typing import Optional

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .config import get_settings
from .errors import InputError, ShapeError, SizeLimitError

ComplexMatrix = npt.NDArray[np.complex128]
ComplexVector = npt.NDArray[np.complex128]


def as_matrix(x, name: str = "matrix") -> ComplexMatrix:
    """
    Convert input to a finite 2-D complex128 array.

    Raises:
        ShapeError: If x is not two-dimensional
        InputError: If any entry is NaN or infinite
    """
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} has non-finite entries; all entries must be finite")
    return a


def as_vector(x, name: str = "vector") -> ComplexVector:
    """Convert input to a finite 1-D complex128 array."""
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InputError(f"{name} has non-finite entries; all entries must be finite")
    return v


def require_square(a: ComplexMatrix, name: str = "matrix") -> int:
    """Return the size of a square matrix or raise ShapeError."""
    rows, cols = a.shape
    if rows != cols:
        raise ShapeError(f"{name} must be square, got {rows}x{cols}")
    return rows


def identity(size: int) -> ComplexMatrix:
    return np.eye(size, dtype=np.complex128)


def kron(a, b, max_entries: Optional[int] = None) -> ComplexMatrix:
    """
    Kronecker product with block (i, j) equal to a[i, j] * b.

    Args:
        a: Left factor
        b: Right factor
        max_entries: Cap on rows*cols of the result; defaults to moment_cap**2

    Raises:
        SizeLimitError: If the product would exceed the entry cap
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if max_entries is None:
        max_entries = get_settings().moment_cap ** 2
    entries = a.shape[0] * b.shape[0] * a.shape[1] * b.shape[1]
    if entries > max_entries:
        raise SizeLimitError(
            f"Kronecker product of {a.shape} and {b.shape} has {entries} entries "
            f"(cap {max_entries})"
        )
    return np.kron(a, b)


def expm(a) -> ComplexMatrix:
    """
    Matrix exponential by scaling and squaring with a Padé approximant.

    Raises:
        ShapeError: If a is not square
    """
    a = as_matrix(a)
    require_square(a)
    return scipy.linalg.expm(a)


def det(a) -> complex:
    """
    Determinant via pivoted LU factorization.

    Near-singular input is returned as computed; callers decide what
    counts as singular.
    """
    a = as_matrix(a)
    require_square(a)
    return complex(np.linalg.det(a))


def comm(a, b) -> ComplexMatrix:
    """Commutator ab - ba of two square matrices of equal size."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    require_square(a, "a")
    require_square(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"commutator needs equal shapes, got {a.shape} and {b.shape}")
    return a @ b - b @ a


def anticomm(a, b) -> ComplexMatrix:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"anticommutator needs equal shapes, got {a.shape} and {b.shape}")
    return a @ b + b @ a


def fro_norm(a) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(np.asarray(a), "fro"))
