"""Shared exception types.

Every failure mode callers are expected to handle gets its own class so that
library code never signals through return codes or NaNs.  The CLI maps these
onto process exit codes.
"""

from __future__ import annotations


class DomainError(ValueError):
    """Input outside an operation's documented domain."""


class PoleSignal(ArithmeticError):
    """Evaluation requested at (or within detection distance of) a pole.

    Carries the offending location in ``where`` when known.
    """

    def __init__(self, message: str, where=None):
        super().__init__(message)
        self.where = where


class ClassEmptyError(RuntimeError):
    """No rational function of the requested degree lives in the sign class.

    ``likely`` is True for the bookkeeping refusal raised while seeding (the
    forced pole and zero counts already exceed the degree, before any
    optimization has run); an exchange collapse reports likely=False.
    """

    def __init__(self, message: str, likely: bool = False):
        super().__init__(message)
        self.likely = likely


class NonConvergedError(RuntimeError):
    """The exchange ran out of iterations.  ``best`` holds the last iterate."""

    def __init__(self, message: str, best=None, deviation=None):
        super().__init__(message)
        self.best = best
        self.deviation = deviation


class EquirippleRefusal(RuntimeError):
    """certify() declined to issue a certificate.

    ``reason`` is machine-readable: "too-few-alternations", "non-alternating"
    or "unequal-ripple".  ``details`` carries the diagnostic payload (points,
    levels) for reporting.
    """

    def __init__(self, reason: str, message: str, details=None):
        super().__init__(message)
        self.reason = reason
        self.details = details or {}


class NotAMagnitudeError(ValueError):
    """The rational function is negative or has poles on the frequency axis."""


class AmbiguityError(RuntimeError):
    """A tolerance test could not classify a value either way.

    ``points`` lists the offending locations.
    """

    def __init__(self, message: str, points=None):
        super().__init__(message)
        self.points = points or []


class GridError(RuntimeError):
    """Sampling grid too coarse to separate features, even after refinement."""


class InstabilityError(ArithmeticError):
    """Filter simulation output grew past the overflow guard."""


class InfeasibleError(RuntimeError):
    """Degree search hit its cap.  ``best`` holds the closest miss."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best
