"""Exception types raised across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularSystemError(ArithmeticError):
    """Elimination hit a zero (or denormal) pivot."""


class DivergenceError(ArithmeticError):
    """A solution level contains non-finite values."""


class MissingExactSolutionError(ValueError):
    """An operation needs an exact solution the problem does not provide."""
