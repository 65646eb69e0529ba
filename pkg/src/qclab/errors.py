"""Exception types shared across the package.

Each class carries the process exit code the command-line front end maps it to.
"""

from __future__ import annotations


class QclabError(Exception):
    """Base class for all errors raised by qclab."""

    exit_code = 1


class DegenerateVertexError(QclabError, ValueError):
    """A vertex angle parameter collapsed onto 0, 1 or 2, or vertices repeat."""


class DomainError(QclabError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class NonconvergenceError(QclabError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance.

    Parameters
    ----------
    message : str
        Human readable description.
    best_residual : float
        Smallest residual norm reached before giving up.
    """

    exit_code = 2

    def __init__(self, message: str, best_residual: float = float("nan")):
        super().__init__(message)
        self.best_residual = best_residual


class AccuracyError(QclabError, RuntimeError):
    """Two independent computations of the same quantity disagree."""

    exit_code = 3


class SamplingDensityError(AccuracyError):
    """Phase unwrapping saw a jump too large to resolve on the sampling grid."""


class ResolutionError(AccuracyError):
    """A discretization is too coarse to reproduce a known exact eigenvalue."""


class InfiniteNormError(QclabError, ArithmeticError):
    """A sampled supremum keeps growing as the sampling domain expands."""


class ConditioningWarning(UserWarning):
    """Input geometry is known to make the computation ill conditioned."""
