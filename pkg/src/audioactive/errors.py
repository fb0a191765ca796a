"""Exception types shared across the package."""

from __future__ import annotations


class AudioactiveError(Exception):
    """Base class for errors raised by this package."""


class DegenerateInputError(AudioactiveError, ValueError):
    """Empty strings and other inputs no rule can act on."""


class BudgetExceeded(AudioactiveError, RuntimeError):
    """A configured size or iteration budget ran out.

    ``partial`` holds whatever was computed before the limit was hit.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class ConvergenceError(AudioactiveError, RuntimeError):
    pass


class VerificationError(AudioactiveError, RuntimeError):
    """An internal cross-check disagreed (CRT mismatch, root disagreement, ...)."""


class NotAFactorError(AudioactiveError, ArithmeticError):
    pass
