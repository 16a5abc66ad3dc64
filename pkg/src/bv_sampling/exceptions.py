"""Exceptions raised by the BV sampling library."""
from typing import Any, Optional


class BVSamplingError(Exception):
    """Base class for all library errors."""


class OrderMismatchError(BVSamplingError, ValueError):
    """Raised when operands of different differential order N are combined."""


class LocalityError(BVSamplingError, ValueError):
    """Raised when a measure has atoms outside the interval of a fundamental system."""


class InfeasibleProblemError(BVSamplingError):
    """Raised when interpolation constraints cannot be satisfied."""


class WellPosednessError(BVSamplingError):
    """Raised when a problem fails its well-posedness check."""

    def __init__(self, message: str, report: Optional[Any] = None) -> None:
        super().__init__(message)
        self.report = report


class ConvergenceError(BVSamplingError):
    """Raised when an iterative solver stops without a certified optimum."""


class ScaleGuardError(BVSamplingError):
    """Raised when a problem exceeds a desk-scale guard."""
