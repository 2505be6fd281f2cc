"""
Exception hierarchy.

Every error raised by the library derives from GKSLError and carries the
process exit code the command-line front end maps it to:
2 for bad input, 3 for resource limits (caps, truncation, step budget).
"""


class GKSLError(Exception):
    """Base class for all library errors."""

    exit_code = 2


class InputError(GKSLError):
    """Malformed or inconsistent input (times, systems, scenario fields)."""

    exit_code = 2


class ShapeError(InputError):
    """Array has the wrong number of dimensions or the wrong size."""


class SymmetryError(InputError):
    """
    Coefficient or exponent matrix violates its symmetry class.

    The message names the violated condition, e.g. ``K = K^T``.
    """

    def __init__(self, message: str, condition: str = ""):
        super().__init__(message)
        self.condition = condition


class StateValidityError(InputError):
    """Gaussian exponent or initial state does not define a density matrix."""


class SingularNormalizationError(InputError):
    """det(e^{MJ} - I) vanishes, so the bosonic Gaussian cannot be normalized."""


class ConfigurationError(InputError):
    """Inconsistent numerical configuration, e.g. buffer larger than the cutoff."""


class SizeLimitError(GKSLError):
    """A dimension cap (moment space, oracle space, superoperator) was exceeded."""

    exit_code = 3


class TruncationError(GKSLError):
    """Bosonic cutoff too small: population leaks to the truncation edge."""

    exit_code = 3

    def __init__(self, message: str, tail_mass: float = float("nan")):
        super().__init__(message)
        self.tail_mass = tail_mass


class IntegrationError(GKSLError):
    """Fixed-step integration would need more steps than allowed."""

    exit_code = 3
