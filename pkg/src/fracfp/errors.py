"""Exception types raised by the library."""

from __future__ import annotations


class FracFPError(Exception):
    """Base class for all library errors."""


class DomainError(FracFPError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class ConfigurationError(FracFPError, ValueError):
    """Inconsistent or incomplete configuration."""


class UnsupportedFamilyError(FracFPError, ValueError):
    """The kernel family lacks a feature the operation needs (e.g. an s=1 member)."""


class GridMismatchError(FracFPError, ValueError):
    """Two profiles live on different grids."""


class TailDivergenceError(DomainError):
    """A weighted tail integral diverges for the requested weight."""


class ResolutionError(FracFPError, ValueError):
    """The grid does not resolve the requested Fourier symbol.

    ``required_half_width`` is an estimate of the half-width that would
    resolve the symbol with the same number of points, or ``None``.
    """

    def __init__(self, message: str, required_half_width: float | None = None):
        super().__init__(message)
        self.required_half_width = required_half_width


class QuadratureError(FracFPError, RuntimeError):
    """An adaptive quadrature did not reach its tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


class FitError(FracFPError, RuntimeError):
    """A regression or parameter fit could not be carried out."""
