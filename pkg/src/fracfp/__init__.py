"""Spectral solver and rate experiments for heavy-tailed nonlocal Fokker-Planck equations."""

__version__ = "0.1.0"

from .errors import (ConfigurationError, DomainError, FitError, FracFPError, GridMismatchError,
                     QuadratureError, ResolutionError, TailDivergenceError, UnsupportedFamilyError)
from .grids import Grid1D
from .kernels import Family, KernelSpec

__all__ = ["__version__", "ConfigurationError", "DomainError", "FitError", "FracFPError",
           "GridMismatchError", "QuadratureError", "ResolutionError", "TailDivergenceError",
           "UnsupportedFamilyError", "Grid1D", "Family", "KernelSpec"]
