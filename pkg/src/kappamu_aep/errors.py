"""Exception types shared across the package."""

from __future__ import annotations


class KappaMuError(Exception):
    """Base class for all package errors."""


class DomainError(KappaMuError, ValueError):
    """An argument lies outside the domain of the requested function."""


class ConvergenceError(KappaMuError, ArithmeticError):
    """A series or quadrature failed to reach its tolerance.

    Attributes
    ----------
    estimate : float
        Best value available when the iteration stopped.
    error : float
        Error estimate (or bound) attached to ``estimate``.
    """

    def __init__(self, message: str, estimate: float = float("nan"), error: float = float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class DegenerateError(KappaMuError, ArithmeticError):
    """A ratio has a vanishing denominator."""


class FitError(KappaMuError, RuntimeError):
    """Nonlinear least squares did not produce a usable fit."""
