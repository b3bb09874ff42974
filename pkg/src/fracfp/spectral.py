"""Exact Fourier-side solutions of the nonlocal fractional Fokker-Planck flow.

For ``d_t u = eps^(-2s) (J_eps * u - u) + div(x u)`` the transform satisfies

    u^(t, xi) = u0^(e^-t xi) exp(E(t, |xi|)),
    E(t, rho) = eps^(-2s) int_{e^-t rho}^{rho} (J^(eps y) - 1) dy / y.

Writing ``Lambda(w) = int_0^w (J^(y) - 1) dy / y`` (a function of the kernel
alone) gives ``E(t, rho) = eps^(-2s) [Lambda(eps rho) - Lambda(eps rho e^-t)]``
and the equilibrium ``F^(xi) = exp(eps^(-2s) Lambda(eps |xi|))``.
:class:`ExponentCache` tabulates ``Lambda`` once per kernel;
:func:`exponent_integral` evaluates ``E`` directly by adaptive quadrature and
serves as an independent route.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Protocol

import numpy as np
from scipy import integrate, special

from .errors import DomainError, QuadratureError, UnsupportedFamilyError
from .grids import AnalyticPart, Grid1D, PowerTail, SpectralProfile
from .kernels import Family, KernelSpec, remainder, symbol_minus_one, fourier_symbol
from .stable_laws import sigma_schedule, tail_constant

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
MATERN_MAX_POWER = 3.0


class ExponentCache:
    """Tabulated ``Lambda(w) = int_0^w (J^(y) - 1) dy / y`` for one kernel.

    The integral is taken in ``u = log y`` on panels of width ``h`` with an
    8-point Gauss-Legendre rule; queries add the partial panel with the same
    rule, so values are accurate to rounding at every ``w``.
    """

    def __init__(self, kernel: KernelSpec, u_min: float = -40.0, u_max: float = 20.0, h: float = 1.0 / 16):
        self.kernel = kernel
        self.s = kernel.s
        self.u_min, self.u_max, self.h = u_min, u_max, h
        n_panels = int(round((u_max - u_min) / h))
        left = u_min + h * np.arange(n_panels)
        nodes = left[:, None] + 0.5 * h * (_GL_NODES[None, :] + 1.0)
        vals = symbol_minus_one(kernel, np.exp(nodes))
        panels = 0.5 * h * vals @ _GL_WEIGHTS
        # below u_min the integrand is -y^(2s) up to higher order
        head = -math.exp(2 * self.s * u_min) / (2 * self.s)
        self._cum = head + np.concatenate([[0.0], np.cumsum(panels)])
        self._lambda_inf: float | None = None

    def _zeta_u(self, u: np.ndarray) -> np.ndarray:
        return symbol_minus_one(self.kernel, np.exp(u))

    def log_integral(self, w) -> np.ndarray:
        """``Lambda(w)`` for ``w >= 0``."""
        w = np.asarray(w, dtype=float)
        flat = w.ravel()
        out = np.zeros_like(flat)
        pos = flat > 0
        u = np.log(flat[pos])
        if np.any(u > self.u_max):
            raise DomainError(f"argument {np.exp(u.max()):.3g} beyond the tabulated range")
        res = np.empty_like(u)
        low = u < self.u_min
        res[low] = -np.exp(2 * self.s * u[low]) / (2 * self.s)
        mid = ~low
        um = u[mid]
        j = np.minimum(np.floor((um - self.u_min) / self.h).astype(int), len(self._cum) - 2)
        a = self.u_min + j * self.h
        half = 0.5 * (um - a)
        nodes = a[:, None] + half[:, None] * (_GL_NODES[None, :] + 1.0)
        part = half * (self._zeta_u(nodes) @ _GL_WEIGHTS)
        res[mid] = self._cum[j] + part
        out[pos] = res
        return out.reshape(w.shape)

    @property
    def lambda_inf(self) -> float:
        """``lim_{w -> inf} Lambda(w) + log w``."""
        if self._lambda_inf is None:
            big = math.exp(self.u_max)
            f = lambda y: float(fourier_symbol(self.kernel, np.array([y]))[0]) / y
            tail, _ = integrate.quad(f, big, np.inf, epsabs=1e-14, limit=200)
            self._lambda_inf = float(self.log_integral(big)) + self.u_max + tail
        return self._lambda_inf

    def exponent(self, epsilon: float, t: float, rho) -> np.ndarray:
        """``E(t, rho)``; ``t = inf`` gives the equilibrium exponent."""
        rho = np.asarray(rho, dtype=float)
        scale = epsilon ** (-2 * self.s)
        top = self.log_integral(epsilon * rho)
        if math.isinf(t):
            return scale * top
        return scale * (top - self.log_integral(epsilon * rho * math.exp(-t)))


@lru_cache(maxsize=64)
def exponent_cache(kernel: KernelSpec) -> ExponentCache:
    return ExponentCache(kernel)


def exponent_integral(kernel: KernelSpec, epsilon: float, t: float, rho, tol: float = 1e-12) -> np.ndarray:
    """``E(t, rho)`` by adaptive quadrature in ``u = log y`` (independent of the cache).

    The interval is capped at ``[log rho - 60, log rho]``; the part below the
    cap is added from the leading behaviour ``-y^(2s)``.  The tolerance is
    absolute, relaxed to ``1e-13 |E|`` when ``|E|`` is large.
    """
    if t < 0:
        raise DomainError("time must be nonnegative")
    if not 0 < epsilon <= 1:
        raise DomainError("epsilon must lie in (0, 1]")
    s = kernel.s
    scale = epsilon ** (-2 * s)
    f = lambda u: float(symbol_minus_one(kernel, np.array([epsilon * math.exp(u)]))[0])
    rhos = np.atleast_1d(np.asarray(rho, dtype=float))
    out = np.zeros(rhos.shape)
    span = min(t, 60.0)
    for i, r in enumerate(rhos.ravel()):
        if r == 0.0 or t == 0.0:
            continue
        hi = math.log(r)
        edges = np.linspace(hi - span, hi, int(math.ceil(span / 2.0)) + 1)
        val = err = 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            for a, b in zip(edges[:-1], edges[1:]):
                v, e = integrate.quad(f, a, b, epsabs=0.1 * tol / (scale * len(edges)), epsrel=1e-14,
                                      limit=200)
                val, err = val + v, err + e
        # large exponents cannot be certified below rounding of their own size
        if err * scale > max(tol, 1e-13 * abs(val) * scale):
            raise QuadratureError("exponent integral did not converge", err * scale)
        if t > 60.0:
            val -= (epsilon * r * math.exp(-60.0)) ** (2 * s) * (1 - math.exp(-2 * s * (t - 60.0))) / (2 * s)
        out.ravel()[i] = scale * val
    return out.reshape(np.shape(rho)) if np.ndim(rho) else float(out[0])


# ---------------------------------------------------------------------------
# initial data


class InitialDatum(Protocol):
    def hat(self, xi: np.ndarray) -> np.ndarray: ...

    density: Callable[[np.ndarray], np.ndarray] | None
    tail: PowerTail | None


@dataclass(frozen=True)
class GaussianInitial:
    """Normal law with given mean and variance."""

    mean: float = 0.0
    var: float = 1.0
    tail = None

    def hat(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.exp(-1j * self.mean * xi - 0.5 * self.var * xi * xi)

    def density(self, x):
        return np.exp(-(x - self.mean) ** 2 / (2 * self.var)) / math.sqrt(2 * math.pi * self.var)

    def cdf(self, x):
        return special.ndtr((x - self.mean) / math.sqrt(self.var))


@dataclass(frozen=True)
class IndicatorInitial:
    """Uniform law on ``[center - radius, center + radius]``."""

    radius: float = 1.0
    center: float = 0.0
    tail = None

    def hat(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.exp(-1j * self.center * xi) * np.sinc(self.radius * xi / math.pi)

    def density(self, x):
        return np.where(np.abs(x - self.center) < self.radius, 0.5 / self.radius, 0.0)

    def cdf(self, x):
        return np.clip((x - self.center + self.radius) / (2 * self.radius), 0.0, 1.0)


@dataclass(frozen=True)
class StableInitial:
    """Shifted stable law ``G^{s;gamma}(x - mean)``."""

    s: float
    gamma: float = 1.0
    mean: float = 0.0
    density = None

    def hat(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.exp(-1j * self.mean * xi - self.gamma * np.abs(xi) ** (2 * self.s))

    @property
    def tail(self):
        if self.s >= 1:
            return None
        return PowerTail(self.gamma * tail_constant(self.s), 1 + 2 * self.s)


@dataclass(frozen=True)
class EquilibriumInitial:
    """The equilibrium of the flow for ``(kernel, epsilon)``."""

    kernel: KernelSpec
    epsilon: float
    density = None

    def hat(self, xi):
        rho = np.abs(np.asarray(xi, dtype=float))
        return np.exp(exponent_cache(self.kernel).exponent(self.epsilon, math.inf, rho)).astype(complex)

    @property
    def tail(self):
        t = self.kernel.tail
        return None if t is None else t.scaled(1.0 / (2 * self.kernel.s))


@dataclass(frozen=True)
class EvolutionSetup:
    kernel: KernelSpec
    epsilon: float
    initial: object
    grid: Grid1D

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise DomainError("epsilon must lie in (0, 1]")
        if abs(complex(self.initial.hat(np.zeros(1))[0]) - 1.0) > 1e-12:
            raise DomainError("initial datum must be a probability density")


def _meta(kernel: KernelSpec, epsilon, t, kind: str) -> dict:
    return {"kind": kind, "kernel": kernel.label, "s": kernel.s, "epsilon": epsilon, "t": t}


def _transported(initial, t: float, weight: float) -> AnalyticPart:
    """``weight * e^t u0(e^t x)``: the part of the datum that has not jumped yet."""
    et = math.exp(t)
    cell_mean = None
    if getattr(initial, "cdf", None) is not None:
        def cell_mean(x, dx):
            return (initial.cdf(et * (x + 0.5 * dx)) - initial.cdf(et * (x - 0.5 * dx))) / dx
    return AnalyticPart(lambda xi: initial.hat(xi / et), lambda x: et * initial.density(et * x),
                        weight, "transported", cell_mean)


def _evolved_tail(kernel: KernelSpec, initial, t: float) -> PowerTail | None:
    """Tail ``K sigma(t) + c0 e^(-2st)`` of the evolved profile."""
    kt = kernel.tail
    it = getattr(initial, "tail", None)
    s = kernel.s
    coef, power = 0.0, None
    if kt is not None:
        coef += kt.coef * sigma_schedule(s, t)
        power = kt.power
    if it is not None:
        if power is None or np.isclose(it.power, power):
            coef += it.coef * math.exp(-(it.power - 1.0) * t)
            power = it.power
        elif it.power < power:
            coef, power = it.coef * math.exp(-(it.power - 1.0) * t), it.power
    return None if power is None else PowerTail(coef, power)


def evolve(setup: EvolutionSetup, t: float) -> SpectralProfile:
    """Transform of the solution at time ``t`` on the setup's dual grid."""
    if t < 0:
        raise DomainError("time must be nonnegative")
    kernel, eps, grid, u0 = setup.kernel, setup.epsilon, setup.grid, setup.initial
    xi = grid.xi
    expo = exponent_cache(kernel).exponent(eps, t, np.abs(xi))
    hat = u0.hat(math.exp(-t) * xi) * np.exp(expo)
    parts = ()
    weight = math.exp(-t * eps ** (-2 * kernel.s))
    if getattr(u0, "density", None) is not None and weight > 1e-300:
        parts = (_transported(u0, t, weight),)
    elif isinstance(u0, EquilibriumInitial) and u0.kernel == kernel and u0.epsilon == eps:
        # same slowly decaying Fourier tail as F: reuse its closed-form part
        parts = _equilibrium_parts(kernel, eps)
    return SpectralProfile(grid, hat, _meta(kernel, eps, t, "solution"), parts,
                           _evolved_tail(kernel, u0, t))


def matern_density(p: float, x) -> np.ndarray:
    """Inverse transform of ``(1 + xi^2)^(-p/2)`` in one dimension."""
    ax = np.abs(np.asarray(x, dtype=float))
    nu = 0.5 * (p - 1.0)
    c = 2.0 ** (-nu) / (math.sqrt(math.pi) * special.gamma(0.5 * p))
    with np.errstate(under="ignore"):
        return c * ax ** nu * special.kv(nu, ax)


def matern_cell_mean(p: float, x: np.ndarray, dx: float, n_exact: int = 8) -> np.ndarray:
    """Cell averages of :func:`matern_density`.

    Cells next to the origin, where the density is singular for ``p <= 1``, are
    integrated adaptively; the rest use 4-point Gauss-Legendre averages.
    """
    gx, gw = np.polynomial.legendre.leggauss(4)
    out = sum(0.5 * w * matern_density(p, x + 0.5 * dx * g) for g, w in zip(gx, gw))
    for i in np.flatnonzero(np.abs(x) < n_exact * dx):
        a, b = x[i] - 0.5 * dx, x[i] + 0.5 * dx
        brk = [0.0] if a < 0 < b else None
        out[i] = integrate.quad(lambda y: float(matern_density(p, y)), a, b, points=brk,
                                epsabs=1e-14, limit=200)[0] / dx
    return out


@dataclass(frozen=True)
class EquilibriumTail:
    """Large-frequency law ``F^(rho) ~ amplitude * rho^(-power)``.

    The amplitude is kept in log form; it overflows for small ``eps``.
    """

    log_amplitude: float
    power: float

    @property
    def amplitude(self) -> float:
        return math.exp(min(self.log_amplitude, 700.0))


def equilibrium_tail(kernel: KernelSpec, epsilon: float) -> EquilibriumTail:
    p = epsilon ** (-2 * kernel.s)
    lam = exponent_cache(kernel).lambda_inf
    return EquilibriumTail(p * (lam - math.log(epsilon)), p)


def _equilibrium_parts(kernel: KernelSpec, epsilon: float) -> tuple[AnalyticPart, ...]:
    """Matern component matching the equilibrium's Fourier tail when it decays slowly."""
    tail_law = equilibrium_tail(kernel, epsilon)
    if tail_law.power > MATERN_MAX_POWER:
        return ()
    p = tail_law.power
    return (AnalyticPart(lambda xi: (1.0 + np.asarray(xi) ** 2) ** (-0.5 * p),
                         lambda x: matern_density(p, x), tail_law.amplitude, "matern",
                         lambda x, dx: matern_cell_mean(p, x, dx)),)


def equilibrium_hat(kernel: KernelSpec, epsilon: float, grid: Grid1D) -> SpectralProfile:
    """Transform of the equilibrium ``F`` of the flow on the dual grid."""
    if not 0 < epsilon <= 1:
        raise DomainError("epsilon must lie in (0, 1]")
    rho = np.abs(grid.xi)
    hat = np.exp(exponent_cache(kernel).exponent(epsilon, math.inf, rho)).astype(complex)
    parts = _equilibrium_parts(kernel, epsilon)
    kt = kernel.tail
    tail = None if kt is None else kt.scaled(1.0 / (2 * kernel.s))
    return SpectralProfile(grid, hat, _meta(kernel, epsilon, math.inf, "equilibrium"), parts, tail)


def ffp_reference(initial, s: float, t: float, grid: Grid1D) -> SpectralProfile:
    """Fractional Ornstein-Uhlenbeck solution ``u0^(e^-t xi) exp(-sigma(t) |xi|^(2s))``."""
    if t < 0:
        raise DomainError("time must be nonnegative")
    xi = grid.xi
    sig = sigma_schedule(s, t)
    hat = initial.hat(math.exp(-t) * xi) * np.exp(-sig * np.abs(xi) ** (2 * s))
    parts = ()
    if t == 0 and getattr(initial, "density", None) is not None:
        parts = (_transported(initial, 0.0, 1.0),)
    coef, power = 0.0, None
    if s < 1:
        coef, power = tail_constant(s) * sig, 1 + 2 * s
    it = getattr(initial, "tail", None)
    if it is not None:
        coef += it.coef * math.exp(-(it.power - 1.0) * t)
        power = it.power if power is None else power
    tail = None if power is None else PowerTail(coef, power)
    meta = {"kind": "ffp", "s": s, "epsilon": 0.0, "t": t}
    return SpectralProfile(grid, hat, meta, parts, tail)


def ffp_equilibrium(s: float, grid: Grid1D) -> SpectralProfile:
    """Stable law ``G^{s;1/(2s)}``, the equilibrium of the fractional flow."""
    hat = np.exp(-np.abs(grid.xi) ** (2 * s) / (2 * s)).astype(complex)
    tail = PowerTail(tail_constant(s) / (2 * s), 1 + 2 * s) if s < 1 else None
    return SpectralProfile(grid, hat, {"kind": "ffp", "s": s, "epsilon": 0.0, "t": math.inf}, (), tail)


def consistency_multiplier_eps(kernel: KernelSpec, epsilon: float, rho) -> np.ndarray:
    """``eps^(-2s) (J^(eps rho) - 1) + rho^(2s)``, computed as ``R(eps rho) / eps^(2s)``."""
    rho = np.asarray(rho, dtype=float)
    return remainder(kernel, epsilon * rho) * epsilon ** (-2 * kernel.s)


def consistency_multiplier_s(kernel: KernelSpec, epsilon: float, rho) -> np.ndarray:
    """``eps^(-2s) (J^s(eps rho) - 1) - eps^(-2) (J^1(eps rho) - 1)``."""
    if kernel.family is Family.USER and kernel.user_symbol is None:
        raise UnsupportedFamilyError("family has no s=1 member")
    rho = np.asarray(rho, dtype=float)
    one = kernel.short_range()
    w = epsilon * rho
    return (symbol_minus_one(kernel, w) * epsilon ** (-2 * kernel.s)
            - symbol_minus_one(one, w) * epsilon ** (-2.0))
