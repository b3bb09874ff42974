"""Heavy-tailed kernel families given by their radial Fourier symbols.

Three concrete families are provided, each normalised so that
``J^(rho) = 1 - rho^(2s) + O(rho^(2s+delta))`` near the origin:

* ``stable``: ``exp(-rho^(2s))``;
* ``screened_poisson``: ``1 / (1 + rho^(2s))``;
* ``student_gauss_mixture``: ``a phi_t + (1 - a) exp(-gamma rho^2)`` where
  ``phi_t`` is the transform of a Student-t law with ``2s`` degrees of freedom.

A fourth family, ``user``, takes a callback ``symbol(s, rho)``.

Symbols are evaluated through ``J^ - 1`` and the remainder
``J^ - 1 + rho^(2s)`` computed without cancellation, so that small-frequency
quantities keep full relative precision.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import ConfigurationError, DomainError, ResolutionError, UnsupportedFamilyError
from .grids import DensityProfile, Grid1D, PowerTail, SpectralProfile, periodic_images
from .stable_laws import tail_constant

EDGE_TOL = 1e-8
_SERIES_Z = 1.5
_SERIES_TERMS = 24


class Family(str, enum.Enum):
    STABLE = "stable"
    SCREENED_POISSON = "screened_poisson"
    MIXTURE = "student_gauss_mixture"
    USER = "user"

    @classmethod
    def parse(cls, name: str | "Family") -> "Family":
        if isinstance(name, Family):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {"screenedpoisson": "screened_poisson", "studentgaussmixture": "student_gauss_mixture",
                   "mixture": "student_gauss_mixture", "usersymbol": "user"}
        key = aliases.get(key.replace("_", ""), key)
        try:
            return cls(key)
        except ValueError:
            raise ConfigurationError(f"unknown kernel family {name!r}") from None


_DEFAULT_C0 = {Family.STABLE: 0.5, Family.SCREENED_POISSON: 1.0, Family.MIXTURE: 1.0, Family.USER: 1.0}
# Variance of the Gaussian core Psi: wide enough to dominate the s -> 1 profile
# (Gaussian of variance 2, or the Laplace law for screened_poisson) beyond R.
_DEFAULT_CORE_VAR = {Family.STABLE: 4.0, Family.SCREENED_POISSON: 8.0, Family.MIXTURE: 4.0, Family.USER: 4.0}

SymbolFn = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric heavy-tailed kernel ``J^s`` and its hypothesis metadata.

    ``tail_const`` and ``tail_radius`` describe the pointwise bound
    ``J(x) <= tail_const (1-s) |x|^(-1-2s) + Psi(x)`` for ``|x| >= tail_radius``,
    with ``Psi`` a centred Gaussian of variance ``core_var``.
    """

    family: Family
    s: float
    delta: float = 1.0
    c0: float | None = None
    tail_const: float = 3.0
    tail_radius: float = 3.0
    core_var: float | None = None
    user_symbol: SymbolFn | None = field(default=None, compare=False)
    boundary: bool = False

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        s = float(self.s)
        object.__setattr__(self, "s", s)
        if self.boundary:
            if s not in (0.5, 1.0):
                raise DomainError("boundary members exist only for s = 1/2 and s = 1")
        elif not 0.5 < s < 1.0:
            raise DomainError(f"s must lie strictly inside (1/2, 1), got {s}")
        if self.delta <= 0:
            raise DomainError("delta must be positive")
        if self.c0 is None:
            object.__setattr__(self, "c0", _DEFAULT_C0[self.family])
        if self.core_var is None:
            object.__setattr__(self, "core_var", _DEFAULT_CORE_VAR[self.family])
        if self.c0 <= 0:
            raise DomainError("c0 must be positive")
        if self.family is Family.USER and self.user_symbol is None:
            raise ConfigurationError("user family needs a symbol callback")

    @classmethod
    def limit_member(cls, family, s: float, **kw) -> "KernelSpec":
        """The s=1 (short range) or s=1/2 member of a family."""
        return cls(family, s, boundary=True, **kw)

    def with_s(self, s: float) -> "KernelSpec":
        boundary = s in (0.5, 1.0)
        return KernelSpec(self.family, s, self.delta, self.c0, self.tail_const, self.tail_radius,
                          self.core_var, self.user_symbol, boundary)

    def short_range(self) -> "KernelSpec":
        """The s=1 member, used as the reference of the s -> 1 limit."""
        return self.with_s(1.0)

    @property
    def label(self) -> str:
        return f"{self.family.value}(s={self.s:g})"

    @property
    def tail(self) -> PowerTail | None:
        """Leading power tail of the density, shared by all built-in families."""
        if self.family is Family.USER or self.s >= 1.0:
            return None
        return PowerTail(tail_constant(self.s), 1.0 + 2.0 * self.s)


@dataclass(frozen=True)
class MixtureCoefficients:
    a: float
    gamma: float


def student_weight(s: float) -> float:
    """Weight ``a(s) = -Gamma(s) 4^s / (Gamma(-s) (2s)^s)`` on ``[1/2, 1)``."""
    if not 0.5 <= s < 1.0:
        raise DomainError(f"student weight is defined for s in [1/2, 1), got {s}")
    return -special.gamma(s) * 4.0 ** s / (special.gamma(-s) * (2.0 * s) ** s)


def mixture_coefficients(s: float) -> MixtureCoefficients:
    if not 0.5 < s < 1.0:
        raise DomainError(f"mixture coefficients need s in (1/2, 1), got {s}")
    a = student_weight(s)
    gamma = a / (2.0 * (1.0 - s)) * s / (1.0 - a)
    return MixtureCoefficients(a, gamma)


def _student_series(s: float):
    """Coefficients of ``phi_t = sum c_k z^(2k) - sum d_k z^(2s+2k)``."""
    k = np.arange(_SERIES_TERMS)
    logfact = special.gammaln(k + 1.0)
    c = np.exp(special.gammaln(1.0 - s) - logfact - special.gammaln(k + 1.0 - s) - k * math.log(4.0))
    pref = math.pi / (special.gamma(s) * math.sin(math.pi * s) * 4.0 ** s)
    d = pref * np.exp(-logfact - special.gammaln(k + 1.0 + s) - k * math.log(4.0))
    return c, d


def student_t_symbol(s: float, rho) -> np.ndarray:
    """Fourier transform of the Student-t law with ``2s`` degrees of freedom."""
    return 1.0 + _student_minus_one(s, np.asarray(rho, dtype=float))


def _student_minus_one(s: float, rho: np.ndarray) -> np.ndarray:
    z = math.sqrt(2.0 * s) * rho
    out = np.empty_like(z)
    small = z <= _SERIES_Z
    if np.any(small):
        c, d = _student_series(s)
        zs = z[small]
        z2 = zs * zs
        even = np.polynomial.polynomial.polyval(z2, np.r_[0.0, c[1:]])
        odd = zs ** (2 * s) * np.polynomial.polynomial.polyval(z2, d)
        out[small] = even - odd
    big = ~small
    if np.any(big):
        zb = z[big]
        with np.errstate(under="ignore"):
            val = 2.0 ** (1 - s) / special.gamma(s) * zb ** s * special.kv(s, zb)
        out[big] = np.nan_to_num(val) - 1.0
    return out


def _expm1_plus(u: np.ndarray) -> np.ndarray:
    """``exp(-u) - 1 + u`` without cancellation."""
    out = np.empty_like(u)
    small = u < 0.1
    us = u[small]
    term = us * us / 2.0
    acc = term.copy()
    for j in range(3, 20):
        term = -term * us / j
        acc += term
    out[small] = acc
    out[~small] = np.expm1(-u[~small]) + u[~small]
    return out


def _check_rho(rho) -> np.ndarray:
    r = np.asarray(rho, dtype=float)
    if np.any(r < 0) or np.any(np.isnan(r)):
        raise DomainError("radial frequency must be nonnegative")
    return r


def _minus_one_and_remainder(kernel: KernelSpec, rho: np.ndarray):
    s = kernel.s
    u = rho ** (2 * s)
    fam = kernel.family
    if fam is Family.STABLE:
        return np.expm1(-u), _expm1_plus(u)
    if fam is Family.SCREENED_POISSON:
        return -u / (1.0 + u), u * u / (1.0 + u)
    if fam is Family.MIXTURE:
        if s == 1.0:
            return np.expm1(-u), _expm1_plus(u)
        a = student_weight(s)
        if s == 0.5:
            zeta = np.expm1(-rho)
            return zeta, _expm1_plus(rho)
        gamma = a / (2.0 * (1.0 - s)) * s / (1.0 - a)
        g = gamma * rho * rho
        zeta = a * _student_minus_one(s, rho) + (1.0 - a) * np.expm1(-g)
        rem = zeta + u
        small = math.sqrt(2.0 * s) * rho <= _SERIES_Z
        if np.any(small):
            # Leading rho^(2s) and rho^2 terms cancel exactly; drop them analytically.
            c, d = _student_series(s)
            zs = math.sqrt(2.0 * s) * rho[small]
            z2 = zs * zs
            hi_even = np.polynomial.polynomial.polyval(z2, np.r_[0.0, 0.0, c[2:]])
            hi_odd = zs ** (2 * s) * np.polynomial.polynomial.polyval(z2, np.r_[0.0, d[1:]])
            rem[small] = a * (hi_even - hi_odd) + (1.0 - a) * _expm1_plus(g[small])
        return zeta, rem
    vals = np.asarray(kernel.user_symbol(s, rho), dtype=float)
    return vals - 1.0, vals - 1.0 + u


def symbol_minus_one(kernel: KernelSpec, rho) -> np.ndarray:
    """``J^(rho) - 1``, accurate for small ``rho``."""
    r = _check_rho(rho)
    return _minus_one_and_remainder(kernel, np.atleast_1d(r))[0].reshape(r.shape)


def fourier_symbol(kernel: KernelSpec, rho) -> np.ndarray:
    """Radial Fourier symbol ``J^(rho)``."""
    r = _check_rho(rho)
    if kernel.family is Family.USER:
        return np.asarray(kernel.user_symbol(kernel.s, r), dtype=float)
    return 1.0 + symbol_minus_one(kernel, r)


def zeta(kernel: KernelSpec, epsilon: float, rho) -> np.ndarray:
    """Symbol of the jump part at scale epsilon: ``J^(eps rho) - 1``."""
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    return symbol_minus_one(kernel, epsilon * _check_rho(rho))


def remainder(kernel: KernelSpec, rho) -> np.ndarray:
    """``R_s(rho) = J^(rho) - 1 + rho^(2s)``."""
    r = _check_rho(rho)
    return _minus_one_and_remainder(kernel, np.atleast_1d(r))[1].reshape(r.shape)


def required_half_width(kernel: KernelSpec, n_points: int, tol: float = EDGE_TOL) -> float | None:
    """Half-width at which ``|J^|`` drops below ``tol`` at the Nyquist edge."""
    rho = np.logspace(-1, 12, 2000)
    small = np.nonzero(np.abs(fourier_symbol(kernel, rho)) <= tol)[0]
    if small.size == 0:
        return None
    return n_points * math.pi / (2.0 * rho[small[0]])


def density(kernel: KernelSpec, grid: Grid1D, strict: bool = True) -> DensityProfile:
    """Kernel density on ``grid`` by discrete Fourier inversion.

    With ``strict`` the symbol must fall below 1e-8 at the dual edge.
    """
    hat = fourier_symbol(kernel, np.abs(grid.xi)).astype(complex)
    edge = grid.edge_magnitude(hat)
    if edge > EDGE_TOL and strict:
        need = required_half_width(kernel, grid.n_points)
        raise ResolutionError(
            f"{kernel.label}: symbol is {edge:.2e} at the dual edge; grid too coarse", need)
    meta = {"kind": "kernel", "kernel": kernel.label, "s": kernel.s, "edge": edge}
    return SpectralProfile(grid, hat, meta, tail=kernel.tail).to_density()


def _linnik_density(s: float, x: float) -> float:
    """Inverse transform of ``1/(1 + |xi|^a)``, ``a = 2s``, as a Laplace-type integral.

    ``J(x) = sin(pi a/2)/pi * int_0^inf v^a e^(-v|x|) / (1 + 2 v^a cos(pi a/2) + v^(2a)) dv``
    has a positive, non-oscillatory integrand.
    """
    a = 2.0 * s
    c = math.cos(0.5 * math.pi * a)
    ax = abs(x)

    def f(v):
        va = v ** a
        return va * math.exp(-v * ax) / (1.0 + 2.0 * va * c + va * va)

    head = integrate.quad(f, 0.0, 1.0, epsabs=1e-15, epsrel=1e-12, limit=200)[0]
    tail = integrate.quad(f, 1.0, np.inf, epsabs=1e-15, epsrel=1e-12, limit=400)[0]
    return math.sin(0.5 * math.pi * a) / math.pi * (head + tail)


def _symbol_cutoff(kernel: KernelSpec, tol: float = 1e-17) -> float | None:
    """Frequency beyond which ``|J^|`` stays below ``tol``, if it decays fast enough."""
    rho = np.logspace(-1, 4, 2000)
    small = np.nonzero(np.abs(fourier_symbol(kernel, rho)) <= tol)[0]
    return None if small.size == 0 else float(rho[small[0]])


def density_at(kernel: KernelSpec, x, epsabs: float = 1e-14) -> np.ndarray:
    """Pointwise density ``(1/pi) int_0^inf J^(rho) cos(rho x) d rho``.

    Screened-Poisson kernels use the Linnik representation; symbols with
    fast decay are integrated on the finite interval where they are above
    1e-17; anything else falls back to Fourier-integral quadrature.
    """
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(pts.shape)
    if kernel.family is Family.SCREENED_POISSON and kernel.s < 1:
        for i, p in enumerate(pts.ravel()):
            out.ravel()[i] = _linnik_density(kernel.s, p)
        return out
    f = lambda r: float(fourier_symbol(kernel, np.array([r]))[0])
    cut = _symbol_cutoff(kernel)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for i, p in enumerate(pts.ravel()):
            p = abs(p)
            if cut is not None:
                if p == 0.0:
                    val = integrate.quad(f, 0.0, cut, epsabs=epsabs, epsrel=1e-12, limit=400)[0]
                else:
                    val = integrate.quad(f, 0.0, cut, weight="cos", wvar=p, epsabs=epsabs,
                                         epsrel=1e-12, limit=2000)[0]
            elif p == 0.0:
                val = integrate.quad(f, 0.0, np.inf, epsabs=epsabs, epsrel=1e-12, limit=500)[0]
            else:
                val = integrate.quad(f, 0.0, np.inf, weight="cos", wvar=p, epsabs=epsabs, limlst=200)[0]
            out.ravel()[i] = val / math.pi
    return out


def density_table(kernel: KernelSpec, z) -> np.ndarray:
    """Fast pointwise density for many points.

    Fast-decaying symbols are inverted on an FFT grid that resolves them and
    the band-limited interpolant is evaluated at ``z``; screened-Poisson
    kernels use the Linnik representation.
    """
    z = np.abs(np.asarray(z, dtype=float))
    cut = _symbol_cutoff(kernel)
    if cut is None:
        return density_at(kernel, z)
    half = max(200.0, 4.0 * float(np.max(z, initial=0.0)))
    n = 1 << int(math.ceil(math.log2(max(256.0, 2.5 * half * cut / math.pi))))
    grid = Grid1D(n, half)
    hat = fourier_symbol(kernel, np.abs(grid.xi)).astype(complex)
    vals = grid.evaluate(hat, z)
    if kernel.tail is not None:
        vals = vals - periodic_images(kernel.tail, grid, z)
    return vals


@dataclass(frozen=True)
class CheckEntry:
    name: str
    measured: float
    bound: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class HypothesisReport:
    kernel: str
    s: float
    entries: tuple[CheckEntry, ...]
    remainder_order: float

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def effective_delta(self) -> float:
        """Measured remainder order minus ``2s``."""
        return self.remainder_order - 2.0 * self.s


def remainder_order(kernel: KernelSpec, lo: float = 1e-4, hi: float = 1e-2) -> float:
    """Measured low-frequency order of ``R_s``: slope of log|R| against log rho."""
    rho = np.logspace(math.log10(lo), math.log10(hi), 40)
    r = np.abs(remainder(kernel, rho))
    return float(np.polyfit(np.log(rho), np.log(r), 1)[0])


def verify_hypothesis1(kernel: KernelSpec, report_grid: Grid1D | None = None,
                       n_tail: int = 40) -> HypothesisReport:
    """Numerical check of the low-frequency remainder bound and of the pointwise tail bound."""
    grid = report_grid or Grid1D(4096, 50.0)
    s = kernel.s
    entries = []

    rho = np.logspace(-6, 0, 3000)
    ratio = np.abs(remainder(kernel, rho)) / rho ** (2 * s + kernel.delta)
    sup = float(np.max(ratio))
    entries.append(CheckEntry("remainder_sup_ratio", sup, kernel.c0, sup <= kernel.c0 * (1 + 1e-9),
                              f"sup_(rho<=1) |R|/rho^(2s+delta), delta={kernel.delta:g}"))

    lo, hi = kernel.tail_radius, 0.8 * grid.half_width
    xs = np.geomspace(lo, hi, n_tail)
    jx = density_table(kernel, xs)
    psi = np.exp(-xs ** 2 / (2 * kernel.core_var)) / math.sqrt(2 * math.pi * kernel.core_var)
    bound = kernel.tail_const * (1.0 - s) * xs ** (-1 - 2 * s) + psi
    tail_ratio = jx * xs ** (1 + 2 * s) / (1.0 - s)
    worst = float(np.max(jx / bound))
    entries.append(CheckEntry("tail_bound", worst, 1.0, worst <= 1.0,
                              f"max J/(C(1-s)|x|^(-1-2s)+Psi) on [{lo:g},{hi:g}]; "
                              f"far-field J|x|^(1+2s)/(1-s)={tail_ratio[-1]:.4g}"))

    prof = density(kernel, grid, strict=False)
    w = np.minimum(1.0, grid.x ** 2)
    moment = float(np.sum(w * prof.values) * grid.dx)
    if kernel.tail is not None:
        moment += 2.0 * kernel.tail.coef * grid.half_width ** (-2 * s) / (2 * s)
    entries.append(CheckEntry("levy_moment", moment, math.inf, bool(np.isfinite(moment)),
                              "int min(1,|y|^2) J(y) dy"))
    return HypothesisReport(kernel.label, s, tuple(entries), remainder_order(kernel))


def verify_hypothesis2(kernel: KernelSpec, rho=None) -> float:
    """Measured constant of the uniform-in-s comparison with the s=1 member.

    Returns the sup over ``rho`` of
    ``|(1-J^s)/rho^(2s) - (1-J^1)/rho^2| / ((1-s) rho^delta max(1, |log rho|))``.
    """
    if kernel.family is Family.USER and kernel.user_symbol is None:
        raise UnsupportedFamilyError("family has no s=1 member")
    if kernel.s >= 1.0:
        raise DomainError("need s < 1")
    one = kernel.short_range()
    r = np.logspace(-4, 4, 4001) if rho is None else _check_rho(rho)
    s = kernel.s
    lhs = np.abs(-symbol_minus_one(kernel, r) / r ** (2 * s) + symbol_minus_one(one, r) / r ** 2)
    den = (1.0 - s) * r ** kernel.delta * np.maximum(1.0, np.abs(np.log(r)))
    return float(np.max(lhs / den))
