"""Wild-sum representation of the flow, its Monte Carlo resummation, and
the positivity scan.

With ``lam = t / eps^(2s)`` the transform of the solution expands as

    u^(t, rho) = u0^(e^-t rho) e^(-lam) sum_n lam^n/n! E[prod_{j<=n} J^(eps e^(T_j - t) rho)],

``T_j`` independent uniforms on ``[0, t]`` (the ordered-simplex integral equals
``t^n/n!`` times this expectation).  Every order ``n`` reuses the same draws,
so the per-sample sum over ``n`` is one unbiased estimator of the series.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import DomainError, FracFPError
from .grids import Grid1D
from .kernels import KernelSpec, fourier_symbol
from .spectral import EquilibriumInitial, EvolutionSetup, IndicatorInitial, evolve

BLOCK = 1024
DEFICIT_TOL = 1e-4


class TruncationWarning(UserWarning):
    """The series truncation misses more than the allowed Poisson mass."""


class PositivityError(FracFPError, RuntimeError):
    """A computed density fell below the numerical tolerance: the grid is under-resolved."""


@dataclass(frozen=True)
class WildConfig:
    kernel: KernelSpec
    epsilon: float
    t: float
    n_max: int | None = None
    samples: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise DomainError("epsilon must lie in (0, 1]")
        if self.t < 0:
            raise DomainError("t must be nonnegative")
        if self.n_max is not None and self.n_max < 0:
            raise DomainError("n_max must be nonnegative")
        if self.samples < 1:
            raise DomainError("need at least one sample")

    @property
    def rate(self) -> float:
        """Poisson mean ``t / eps^(2s)``."""
        return self.t * self.epsilon ** (-2 * self.kernel.s)

    @property
    def order(self) -> int:
        """Truncation order; by default mean + 6 sd + 10."""
        if self.n_max is not None:
            return self.n_max
        lam = self.rate
        return int(math.ceil(lam + 6 * math.sqrt(lam) + 10))


def poisson_weights(lam: float, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1)
    if lam == 0:
        return (n == 0).astype(float)
    return np.exp(-lam + n * math.log(lam) - special.gammaln(n + 1))


def truncation_deficit(lam: float, n_max: int) -> float:
    """Poisson mass above ``n_max``."""
    return float(special.pdtrc(n_max, lam))


@dataclass(frozen=True)
class WildResult:
    rho: np.ndarray
    value: np.ndarray
    stderr: np.ndarray
    terms: np.ndarray
    term_stderr: np.ndarray
    deficit: float
    samples: int


def _block_products(cfg: WildConfig, rho: np.ndarray, block: int, size: int) -> np.ndarray:
    """Cumulative products ``prod_{j<=n} J^`` for one block; shape (size, N+1, n_rho)."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(block,)))
    n_max = cfg.order
    u = rng.uniform(0.0, cfg.t, size=(size, n_max))
    arg = cfg.epsilon * np.exp(u - cfg.t)[:, :, None] * rho[None, None, :]
    factors = fourier_symbol(cfg.kernel, arg)
    prods = np.cumprod(factors, axis=1)
    ones = np.ones((size, 1, rho.size))
    return np.concatenate([ones, prods], axis=1)


def wild_spectral(cfg: WildConfig, initial, rho) -> WildResult:
    """Monte Carlo value of the truncated Wild series at the frequencies ``rho``.

    Samples are drawn in fixed blocks of 1024, each with its own stream keyed
    by ``(seed, block)``, so the result does not depend on how blocks are
    distributed over workers.
    """
    rho = np.abs(np.atleast_1d(np.asarray(rho, dtype=float)))
    n_max = cfg.order
    lam = cfg.rate
    w = poisson_weights(lam, n_max)
    deficit = truncation_deficit(lam, n_max)
    if deficit > DEFICIT_TOL:
        warnings.warn(f"truncation at n={n_max} misses Poisson mass {deficit:.3e}", TruncationWarning)
    m = cfg.samples
    s1 = np.zeros((n_max + 1, rho.size))
    s2 = np.zeros_like(s1)
    y1 = np.zeros(rho.size)
    y2 = np.zeros(rho.size)
    for b in range(-(-m // BLOCK)):
        size = min(BLOCK, m - b * BLOCK)
        p = _block_products(cfg, rho, b, size)
        s1 += p.sum(axis=0)
        s2 += (p * p).sum(axis=0)
        y = np.einsum("n,mnr->mr", w, p)
        y1 += y.sum(axis=0)
        y2 += (y * y).sum(axis=0)
    mean_p = s1 / m
    var_p = np.maximum(s2 / m - mean_p ** 2, 0.0)
    mean_y = y1 / m
    var_y = np.maximum(y2 / m - mean_y ** 2, 0.0)
    scale = initial.hat(math.exp(-cfg.t) * rho)
    den = math.sqrt(max(m - 1, 1))
    return WildResult(rho, scale * mean_y, np.abs(scale) * np.sqrt(var_y) / den,
                      w[:, None] * mean_p * scale, w[:, None] * np.sqrt(var_p) / den * np.abs(scale),
                      deficit, m)


def mean_symbol(kernel: KernelSpec, epsilon: float, t: float, rho: float) -> float:
    """``(1/t) int_0^t J^(eps e^(tau - t) rho) d tau``."""
    if t == 0:
        return 1.0
    f = lambda tau: float(fourier_symbol(kernel, np.array([epsilon * math.exp(tau - t) * rho]))[0])
    return integrate.quad(f, 0.0, t, epsabs=1e-14, epsrel=1e-12)[0] / t


def wild_terms_exact(cfg: WildConfig, initial, rho, n_terms: int = 6) -> np.ndarray:
    """Deterministic Wild terms ``n = 0..n_terms`` at each ``rho``; shape (n_terms+1, n_rho).

    The ordered-time integral of a product of identical one-time factors is
    ``(t * mean_symbol)^n / n!``.
    """
    rho = np.abs(np.atleast_1d(np.asarray(rho, dtype=float)))
    lam = cfg.rate
    w = poisson_weights(lam, n_terms)
    out = np.empty((n_terms + 1, rho.size), dtype=complex)
    for i, r in enumerate(rho):
        mbar = mean_symbol(cfg.kernel, cfg.epsilon, cfg.t, r)
        out[:, i] = w * mbar ** np.arange(n_terms + 1) * initial.hat(math.exp(-cfg.t) * np.array([r]))[0]
    return out


def poisson_tail(m: int) -> float:
    """``e^(-m) sum_{n=m}^{2m} m^n / n!`` with log-Gamma weights."""
    if int(m) != m or m < 1:
        raise DomainError("m must be a positive integer")
    m = int(m)
    n = np.arange(m, 2 * m + 1)
    logw = -m + n * math.log(m) - special.gammaln(n + 1)
    top = logw.max()
    return float(math.exp(top) * np.sum(np.exp(logw - top)))


# ---------------------------------------------------------------------------
# positivity


@dataclass(frozen=True)
class PositivityReport:
    epsilons: tuple[float, ...]
    s_values: tuple[float, ...]
    alpha: np.ndarray
    t: float
    r1: float
    r2: float
    ratio_limit: float = 1e3

    @property
    def alpha_min(self) -> float:
        return float(np.min(self.alpha))

    @property
    def ratio(self) -> float:
        return float(np.max(self.alpha) / np.min(self.alpha)) if self.alpha_min > 0 else math.inf

    @property
    def passed(self) -> bool:
        return self.alpha_min > 0 and self.ratio < self.ratio_limit

    @property
    def worst(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.argmin(self.alpha), self.alpha.shape)
        return self.epsilons[i], self.s_values[j]


def ball_minimum(kernel: KernelSpec, epsilon: float, t: float, r1: float, initial, grid: Grid1D) -> float:
    """``min_{|x| <= r1} u(t, x)`` on the grid."""
    u = evolve(EvolutionSetup(kernel, epsilon, initial, grid), t).to_density()
    vals = u.values[np.abs(grid.x) <= r1]
    low = float(np.min(vals))
    if low < -1e-6:
        raise PositivityError(f"density reaches {low:.3e} at eps={epsilon}, s={kernel.s}; refine the grid")
    return low


def positivity_scan(kernel: KernelSpec, epsilons, s_values, t: float, r1: float, r2: float,
                    grid: Grid1D, initial: str = "indicator") -> PositivityReport:
    """``alpha = min_{|x| <= r1} u(t, x)`` over an ``(eps, s)`` grid.

    ``initial`` is ``"indicator"`` (normalised indicator of ``[-r2, r2]``) or
    ``"equilibrium"``.
    """
    if t <= 0 or r1 <= 0 or r2 <= 0:
        raise DomainError("t, R1 and R2 must be positive")
    eps_t, s_t = tuple(float(e) for e in epsilons), tuple(float(s) for s in s_values)
    alpha = np.empty((len(eps_t), len(s_t)))
    for i, eps in enumerate(eps_t):
        for j, s in enumerate(s_t):
            ker = kernel.with_s(s)
            u0 = IndicatorInitial(r2) if initial == "indicator" else EquilibriumInitial(ker, eps)
            alpha[i, j] = ball_minimum(ker, eps, t, r1, u0, grid)
    return PositivityReport(eps_t, s_t, alpha, t, r1, r2)
