"""
Exception hierarchy shared by the toolkit.

Config and domain problems are ValueErrors (the caller passed something
unusable); numerical failures are RuntimeErrors and always name the
operation that gave up, so the CLI can report it.
"""
from __future__ import annotations

from typing import Optional


class SaextError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SaextError, ValueError):
    """Invalid command-line or environment configuration."""


class DomainError(SaextError, ValueError):
    """Argument outside the domain of an operation."""


class NumericsError(SaextError, RuntimeError):
    """A numerical procedure failed to deliver a trustworthy result."""

    def __init__(self, message: str, operation: str = ""):
        self.operation = operation
        prefix = f"{operation}: " if operation else ""
        super().__init__(prefix + message)


class ConvergenceError(NumericsError):
    """Iterative procedure did not converge; carries the best estimate."""

    def __init__(self, message: str, best_estimate: Optional[float] = None, operation: str = ""):
        self.best_estimate = best_estimate
        super().__init__(message, operation)


class BracketError(NumericsError):
    """Root finder was handed an interval without a sign change."""


class StiffnessError(NumericsError):
    """ODE integration stalled; x_reached is where it stopped."""

    def __init__(self, message: str, x_reached: float, operation: str = ""):
        self.x_reached = x_reached
        super().__init__(message, operation)


class TurningPointError(NumericsError):
    """E - V(x) vanishes inside an integration domain that must avoid it."""


class EstimationError(NumericsError):
    """Semiclassical estimate could not be formed (e.g. no complex root found)."""


class ProjectionError(NumericsError):
    """Projection onto the WKB basis is degenerate."""


class AsymptoticsNotReachedError(NumericsError):
    """Phase read-off at two nearby points disagrees; x_max is too small."""

    def __init__(self, message: str, spread: float, operation: str = ""):
        self.spread = spread
        super().__init__(message, operation)


class DataQualityError(NumericsError):
    """Input amplitudes violate unitarity beyond tolerance."""

    def __init__(self, message: str, residual: float, operation: str = ""):
        self.residual = residual
        super().__init__(message, operation)
