"""Exception hierarchy shared by all spdmeans modules."""

from __future__ import annotations


class SpdMeansError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SpdMeansError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class ShapeError(SpdMeansError, ValueError):
    """Matrix dimensions are incompatible or malformed."""


class DefinitenessError(SpdMeansError, ValueError):
    """A matrix failed symmetric positive-definite validation.

    Carries ``min_eigenvalue`` so callers can report how far from the
    cone the offending matrix is.
    """

    def __init__(self, message: str, min_eigenvalue: float | None = None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class NumericError(SpdMeansError, RuntimeError):
    """A numerical kernel (eigensolver, quadrature) failed to deliver."""


class NonConvergenceError(SpdMeansError, RuntimeError):
    """An iteration exhausted its budget before reaching tolerance.

    The partial :class:`~spdmeans.convergence.ConvergenceTrace` is attached
    as ``trace`` so callers can still inspect or emit it.
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class MatrixSetError(SpdMeansError, ValueError):
    """A matrix-set document failed to parse or validate."""
