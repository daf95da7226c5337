from __future__ import annotations

from typing import Any


class FowlerError(Exception):
    """Base class for errors raised by ezfowler."""


class DomainError(FowlerError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class AccuracyError(FowlerError, ArithmeticError):
    """A numerical rule could not reach its requested tolerance."""


class DegenerateProfileError(FowlerError, ZeroDivisionError):
    """A profile is identically zero or its mass collapsed to underflow."""


class NonConvergenceError(FowlerError, RuntimeError):
    """The fixed-point iteration stopped before meeting its tolerances.

    The last iterate is attached as ``partial`` so callers can still persist
    diagnostics.
    """

    def __init__(self, message: str, partial: Any = None) -> None:
        super().__init__(message)
        self.partial = partial
