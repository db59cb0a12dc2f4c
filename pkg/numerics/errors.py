"""
Exception types shared by every polyfix package.
"""


class PolyfixError(Exception):
    """Base class for all polyfix failures."""


class DimensionMismatchError(PolyfixError, ValueError):
    """A vector or matrix does not match the ambient dimension."""


class OutOfRangeError(PolyfixError, ValueError):
    """An integer argument is outside the supported desk-scale range."""


class ConfigError(PolyfixError, ValueError):
    """An experiment, norm or map configuration record is malformed."""


class SingularNormalizationError(PolyfixError):
    """A tensor map was evaluated where its normalization is undefined."""


class NotConvergedError(PolyfixError):
    """Krasnoselskii iteration ran out of iterations (strict callers only)."""


class NoOrbitFoundError(PolyfixError):
    """No near-recurrence was observed within the iteration budget."""


class AmbiguousPeriodError(PolyfixError):
    """Two orbit points sit in the gap between orbit_tol and 10 * orbit_tol."""


class ContainmentViolationError(PolyfixError):
    """A sampled fixed point is not contained in the computed V(f)."""


class NoDifferentiablePointError(PolyfixError):
    """No point with a projection-like retract derivative was found."""


class StructureMismatchError(PolyfixError):
    """A subspace lacks the coordinate/sign structure a projection needs."""


class LinearityViolationError(PolyfixError):
    """The map A o f o R failed the superposition audit on W."""
