"""Uniform grids, discrete Fourier transforms, profiles and weighted norms.

Conventions
-----------
Physical samples sit at cell centres ``x_j = -X + (j + 1/2) dx`` with
``dx = 2X/n``.  The forward transform is ``f^(xi) = int exp(-i x xi) f(x) dx``
and the inverse carries the ``1/(2 pi)``.  Dual frequencies are stored in FFT
order, ``xi_k = k pi / X``.

A :class:`SpectralProfile` may carry *analytic parts*: components whose
transform and physical-space form are both known in closed form.  They are
subtracted before the FFT and added back on the grid, which keeps slowly
decaying or very narrow pieces out of the discrete inversion.  A profile may
also register a power tail ``c |x|^(-p)``; inversion then removes the periodic
images of that tail and weighted norms add the integral beyond the window.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Mapping

import numpy as np
from scipy import special

from .errors import DomainError, GridMismatchError, TailDivergenceError

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Grid1D:
    """Symmetric cell-centred grid on ``[-X, X]`` with ``n`` points."""

    n_points: int
    half_width: float

    def __post_init__(self):
        n = self.n_points
        if n < 256 or n & (n - 1):
            raise DomainError(f"n_points must be a power of two >= 256, got {n}")
        if not self.half_width > 0:
            raise DomainError("half_width must be positive")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n_points

    @property
    def dxi(self) -> float:
        return np.pi / self.half_width

    @property
    def nyquist(self) -> float:
        return np.pi / self.dx

    @cached_property
    def x(self) -> np.ndarray:
        return -self.half_width + (np.arange(self.n_points) + 0.5) * self.dx

    @cached_property
    def xi(self) -> np.ndarray:
        return np.fft.fftfreq(self.n_points, d=1.0 / self.n_points) * self.dxi

    @cached_property
    def _phase(self) -> np.ndarray:
        return np.exp(-1j * self.x[0] * self.xi)

    def forward(self, values: np.ndarray) -> np.ndarray:
        """Discrete version of ``int exp(-i x xi) f(x) dx`` on the dual grid."""
        return self.dx * self._phase * np.fft.fft(values)

    def inverse(self, hat: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`forward`; returns complex samples."""
        return np.fft.ifft(hat / self._phase) / self.dx

    def evaluate(self, hat: np.ndarray, points) -> np.ndarray:
        """Trigonometric interpolant of the inverse transform at arbitrary points."""
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        flat = pts.ravel()
        out = np.empty(flat.shape)
        step = max(1, 2 ** 22 // self.n_points)
        for lo in range(0, flat.size, step):
            chunk = flat[lo:lo + step]
            out[lo:lo + step] = (np.exp(1j * np.outer(chunk, self.xi)) @ hat).real
        return (out * self.dxi / (2.0 * np.pi)).reshape(pts.shape)

    def edge_magnitude(self, hat: np.ndarray) -> float:
        """Largest modulus of a transform in the top 1% of the dual band."""
        top = np.abs(self.xi) >= 0.99 * self.nyquist
        return float(np.max(np.abs(hat[top])))


@dataclass(frozen=True)
class AnalyticPart:
    """A closed-form component: its transform and its physical-space form."""

    hat_fn: ArrayFn
    density_fn: ArrayFn
    weight: float = 1.0
    label: str = ""
    cell_mean_fn: Callable[[np.ndarray, float], np.ndarray] | None = None

    def hat(self, xi: np.ndarray) -> np.ndarray:
        return self.weight * self.hat_fn(xi)

    def density(self, x: np.ndarray) -> np.ndarray:
        return self.weight * self.density_fn(x)

    def cell_values(self, grid: "Grid1D") -> np.ndarray:
        """Cell averages when available (singular or unresolved parts), else point values."""
        if self.cell_mean_fn is None:
            return self.density(grid.x)
        return self.weight * self.cell_mean_fn(grid.x, grid.dx)

    def scaled(self, c: float) -> "AnalyticPart":
        return replace(self, weight=self.weight * c)


@dataclass(frozen=True)
class PowerTail:
    """Registered asymptote ``coef * |x|^(-power)`` for large ``|x|``."""

    coef: float
    power: float

    def scaled(self, c: float) -> "PowerTail":
        return PowerTail(self.coef * c, self.power)


def _combine_tails(a: PowerTail | None, b: PowerTail | None, cb: float) -> PowerTail | None:
    if b is None:
        return a
    b = b.scaled(cb)
    if a is None:
        return b
    if not np.isclose(a.power, b.power):
        # Keep the heavier tail; the lighter one is already inside the window.
        return a if a.power < b.power else b
    return PowerTail(a.coef + b.coef, a.power)


def periodic_images(tail: PowerTail, grid: Grid1D, x: np.ndarray | None = None) -> np.ndarray:
    """Sum over the periodic images ``m != 0`` of the tail at ``x`` (default: grid points)."""
    period = 2.0 * grid.half_width
    q = (grid.x if x is None else np.asarray(x, dtype=float)) / period
    p = tail.power
    return tail.coef * period ** (-p) * (special.zeta(p, 1.0 + q) + special.zeta(p, 1.0 - q))


@dataclass(frozen=True)
class DensityProfile:
    """Real samples on a :class:`Grid1D` with provenance metadata."""

    grid: Grid1D
    values: np.ndarray
    meta: Mapping = field(default_factory=dict)
    tail: PowerTail | None = None

    def __post_init__(self):
        if self.values.shape != (self.grid.n_points,):
            raise GridMismatchError("values do not match the grid size")

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def mass(self) -> float:
        return float(np.sum(self.values) * self.grid.dx)

    def at(self, points) -> np.ndarray:
        """Spectrally interpolated values at arbitrary points."""
        return self.grid.evaluate(self.grid.forward(self.values), points)

    def __sub__(self, other: "DensityProfile") -> "DensityProfile":
        _check_same_grid(self.grid, other.grid)
        return DensityProfile(self.grid, self.values - other.values, dict(self.meta),
                              _combine_tails(self.tail, other.tail, -1.0))

    def __add__(self, other: "DensityProfile") -> "DensityProfile":
        _check_same_grid(self.grid, other.grid)
        return DensityProfile(self.grid, self.values + other.values, dict(self.meta),
                              _combine_tails(self.tail, other.tail, 1.0))

    def scaled(self, c: float) -> "DensityProfile":
        tail = None if self.tail is None else self.tail.scaled(c)
        return DensityProfile(self.grid, c * self.values, dict(self.meta), tail)

    def to_spectral(self) -> "SpectralProfile":
        return SpectralProfile(self.grid, self.grid.forward(self.values), dict(self.meta))


@dataclass(frozen=True)
class SpectralProfile:
    """Complex samples on the dual grid (FFT order) with provenance metadata."""

    grid: Grid1D
    values: np.ndarray
    meta: Mapping = field(default_factory=dict)
    parts: tuple[AnalyticPart, ...] = ()
    tail: PowerTail | None = None

    def __post_init__(self):
        if self.values.shape != (self.grid.n_points,):
            raise GridMismatchError("values do not match the grid size")

    @property
    def xi(self) -> np.ndarray:
        return self.grid.xi

    def residual(self) -> np.ndarray:
        """Transform with the analytic parts removed."""
        out = np.array(self.values, dtype=complex)
        for part in self.parts:
            out -= part.hat(self.grid.xi)
        return out

    def to_density(self) -> DensityProfile:
        values = self.grid.inverse(self.residual()).real
        for part in self.parts:
            values = values + part.cell_values(self.grid)
        if self.tail is not None:
            values = values - periodic_images(self.tail, self.grid)
        return DensityProfile(self.grid, values, dict(self.meta), self.tail)

    def __sub__(self, other: "SpectralProfile") -> "SpectralProfile":
        _check_same_grid(self.grid, other.grid)
        parts = self.parts + tuple(p.scaled(-1.0) for p in other.parts)
        return SpectralProfile(self.grid, self.values - other.values, dict(self.meta), parts,
                               _combine_tails(self.tail, other.tail, -1.0))


def _check_same_grid(a: Grid1D, b: Grid1D) -> None:
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


def japanese(x) -> np.ndarray:
    """The weight ``<x> = (1 + x^2)^(1/2)``."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(1.0 + x * x)


def tail_integral(tail: PowerTail, half_width: float, k: float) -> float:
    """``int_{|x|>X} <x>^k |c| |x|^(-p) dx`` using ``<x>^k ~ |x|^k``."""
    expo = tail.power - 1.0 - k
    if expo <= 0:
        raise TailDivergenceError(
            f"weight k={k} makes the tail |x|^-{tail.power:g} non-integrable")
    return 2.0 * abs(tail.coef) * half_width ** (-expo) / expo


def weighted_l1_norm(f: DensityProfile, k: float, tail_correction: bool = True) -> float:
    """``int <x>^k |f(x)| dx`` by the cell-centred rule, plus the registered tail."""
    if k < 0:
        raise DomainError("weight exponent k must be nonnegative")
    total = float(np.sum(japanese(f.x) ** k * np.abs(f.values)) * f.grid.dx)
    if tail_correction and f.tail is not None and f.tail.coef != 0.0:
        total += tail_integral(f.tail, f.grid.half_width, k)
    return total


def l2_norm(f: DensityProfile) -> float:
    return float(np.sqrt(np.sum(f.values ** 2) * f.grid.dx))


def linf_distance(f: DensityProfile, g: DensityProfile) -> float:
    _check_same_grid(f.grid, g.grid)
    return float(np.max(np.abs(f.values - g.values)))


@dataclass(frozen=True)
class SobolevResult:
    """Value of ``int <xi>^(2m) |f^|^2 dxi`` and its cutoff-doubling diagnostic.

    ``band_ratio`` is the mean ratio between the contributions of successive
    dyadic frequency bands at the top of the dual grid.  A power-law integrand
    ``rho^q`` gives ``2^(q+1)``, so ``band_ratio >= 1`` means the partial
    integrals keep growing as the cutoff doubles.
    """

    value: float
    band_ratio: float
    divergent: bool
    partials: tuple[float, ...]


def sobolev_norm_sq(f: SpectralProfile, m: float, n_bands: int = 4) -> SobolevResult:
    if m < 0:
        raise DomainError("m must be nonnegative")
    rho = np.abs(f.xi)
    with np.errstate(divide="ignore"):
        integrand = np.exp(m * np.log1p(rho ** 2) + 2.0 * np.log(np.abs(f.values)))
    value = float(np.sum(integrand) * f.grid.dxi)
    cut = rho.max()
    partials = []
    for j in range(n_bands + 1):
        partials.append(float(np.sum(integrand[rho <= cut / 2 ** j]) * f.grid.dxi))
    bands = -np.diff(partials)          # bands[0] is the top band
    if bands[0] <= 1e-30 * max(value, 1e-300):
        return SobolevResult(value, 0.0, False, tuple(partials))
    ratios = bands[:-1] / np.maximum(bands[1:], 1e-300)
    ratio = float(np.exp(np.mean(np.log(np.maximum(ratios, 1e-300)))))
    return SobolevResult(value, ratio, ratio >= 1.0, tuple(partials))


def interpolation_theta(m: float, k: float, d: int = 1) -> float:
    """Exponent ``(m-k)/(m+d/2)`` that trades ``L^1_k`` for ``L^2`` and ``L^1_m``."""
    if not 0 < k < m:
        raise DomainError(f"need 0 < k < m, got k={k}, m={m}")
    return (m - k) / (m + d / 2.0)


def interpolation_constant(k: float, m: float) -> float:
    """Constant of the interpolation bound in d=1, from optimising the split radius.

    Splitting at ``<x> = R`` gives ``||f||_{L1_k} <= sqrt(2) R^(k+1/2) ||f||_2
    + R^(k-m) ||f||_{L1_m}``; minimising over ``R`` yields this constant times
    ``||f||_2^theta ||f||_{L1_m}^(1-theta)``.  It exceeds 1, and ratios above 1
    do occur (about 1.22 for a unit Gaussian at k=0.3, m=0.9).
    """
    theta = interpolation_theta(m, k, 1)
    p, q = k + 0.5, m - k
    return 2.0 ** (theta / 2) * ((q / p) ** (1 - theta) + (p / q) ** theta)


def interpolation_inequality_check(f: DensityProfile, k: float, m: float) -> float:
    """Ratio ``||f||_{L1_k} / (||f||_2^theta ||f||_{L1_m}^(1-theta))``.

    Bounded by :func:`interpolation_constant`.
    """
    theta = interpolation_theta(m, k, 1)
    num = weighted_l1_norm(f, k)
    den = l2_norm(f) ** theta * weighted_l1_norm(f, m) ** (1.0 - theta)
    return num / den
