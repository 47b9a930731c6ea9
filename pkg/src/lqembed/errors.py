"""Exception types raised across the package."""


class LqEmbedError(Exception):
    """Base class for all errors raised by lqembed."""


class DomainError(LqEmbedError, ValueError):
    """An argument lies outside the domain of the function."""


class RangeError(LqEmbedError, OverflowError):
    """A result cannot be represented in double precision."""


class UnsupportedDimensionError(LqEmbedError, ValueError):
    """The operation has no implementation for this ambient dimension."""


class ExcludedExponentError(DomainError):
    """The exponent q is an even integer (or too close to one)."""


class HypothesisError(DomainError):
    """The smoothness order r does not satisfy 2r > n + q."""


class ResolutionError(LqEmbedError, ValueError):
    """The quadrature grid is too coarse for the requested degree."""


class ConditioningError(LqEmbedError, ArithmeticError):
    """An eigenvalue is too small to invert reliably."""


class AccuracyError(LqEmbedError, ArithmeticError):
    """A refinement loop failed to converge to the requested accuracy."""

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate


class ParityError(DomainError):
    """An even function was required but odd-degree content is present."""
