"""Quantitative stable limit for rescaled sums with non-identical scales.

For i.i.d. draws from ``J`` scaled by ``sigma_j`` and normalised by
``n^(1/2s) sbar``, the density ``f_n`` has transform
``prod_j J^(xi sigma_j / (n^(1/2s) sbar))`` and converges to ``G^s`` in sup
norm at the rate ``n^(-delta/(2s))``, ``delta`` being the low-frequency
remainder order beyond ``2s``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, FitError
from .fitting import RateFit, fit_loglog
from .grids import Grid1D
from .kernels import Family, KernelSpec, remainder_order, symbol_minus_one
from .stable_laws import StableParams, stable_spectral

POLICIES = ("constant", "uniform", "alternating")
STABLE_FLOOR = 1e-12


@dataclass(frozen=True)
class ScaleSequence:
    sigmas: tuple[float, ...]
    s: float
    lower: float
    upper: float

    def __post_init__(self):
        if not self.sigmas:
            raise DomainError("need at least one scale")
        if not 0 < self.lower <= self.upper:
            raise DomainError("need 0 < l <= L")
        arr = np.asarray(self.sigmas)
        if np.any(arr < self.lower) or np.any(arr > self.upper):
            raise DomainError("scales must lie in [l, L]")

    @property
    def n(self) -> int:
        return len(self.sigmas)

    @property
    def sbar(self) -> float:
        """``sbar`` with ``sbar^(2s) = mean sigma_j^(2s)``."""
        return float(np.mean(np.asarray(self.sigmas) ** (2 * self.s)) ** (1.0 / (2 * self.s)))

    @classmethod
    def make(cls, policy: str, n: int, s: float, lower: float = 0.5, upper: float = 2.0,
             seed: int = 0) -> "ScaleSequence":
        if policy == "constant":
            sig = np.ones(n)
            lower, upper = min(lower, 1.0), max(upper, 1.0)
        elif policy == "uniform":
            sig = np.random.default_rng(np.random.SeedSequence([seed, n])).uniform(lower, upper, n)
        elif policy == "alternating":
            sig = np.where(np.arange(n) % 2 == 0, lower, upper)
        else:
            raise ConfigurationError(f"unknown scale policy {policy!r}; choose from {POLICIES}")
        return cls(tuple(float(v) for v in sig), s, lower, upper)


def rescaled_convolution_hat(kernel: KernelSpec, scales: ScaleSequence, rho) -> np.ndarray:
    """``prod_j J^(rho sigma_j / (n^(1/2s) sbar))``, accumulated as a sum of logs."""
    rho = np.abs(np.asarray(rho, dtype=float))
    norm = scales.n ** (1.0 / (2 * scales.s)) * scales.sbar
    sig, counts = np.unique(np.asarray(scales.sigmas), return_counts=True)
    log_mag = np.zeros(rho.shape)
    negative = np.zeros(rho.shape, dtype=bool)
    for sj, cj in zip(sig, counts):
        zeta = symbol_minus_one(kernel, rho * (sj / norm))
        val = 1.0 + zeta
        with np.errstate(divide="ignore"):
            log_mag += cj * np.where(zeta > -0.5, np.log1p(np.maximum(zeta, -0.5)),
                                     np.log(np.abs(val)))
        if cj % 2:
            negative ^= val < 0
    out = np.exp(log_mag)
    return np.where(negative, -out, out)


def be_distance(kernel: KernelSpec, scales: ScaleSequence, grid: Grid1D) -> float:
    """Sup-norm distance between ``f_n`` and ``G^s`` on the grid."""
    target = stable_spectral(StableParams(scales.s), grid)
    hat = rescaled_convolution_hat(kernel, scales, grid.xi)
    diff = grid.inverse(hat - target.values.real).real
    return float(np.max(np.abs(diff)))


@dataclass(frozen=True)
class BEResult:
    n_values: tuple[int, ...]
    distances: tuple[float, ...]
    policy: str
    s: float
    target: float | None
    fit: RateFit | None = None
    stable_input: bool = False
    c_be: float | None = None
    n_emp: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if self.stable_input:
            return bool(max(self.distances) < 1e-10)
        return self.fit is not None and self.fit.passed


def rate_target(kernel: KernelSpec) -> float:
    """Expected log-log slope ``-delta_eff/(2s)`` from the measured remainder order.

    ``delta_eff`` is the measured order beyond ``2s``, capped at ``2s``: the
    quadratic term of ``log J^`` contributes ``n zeta^2/2 ~ 1/n`` whatever the
    remainder order.
    """
    s = kernel.s
    order = remainder_order(kernel)
    return -min(order - 2 * s, 2 * s) / (2 * s)


def be_rate_fit(kernel: KernelSpec, n_list, policy: str, grid: Grid1D, seed: int = 0,
                lower: float = 0.5, upper: float = 2.0, tolerance: float = 0.25) -> BEResult:
    """Distances for each ``n`` and a log-log fit against the remainder-order target."""
    n_list = tuple(int(n) for n in n_list)
    if len(n_list) < 4:
        raise DomainError("need at least four n values")
    s = kernel.s
    dists = tuple(be_distance(kernel, ScaleSequence.make(policy, n, s, lower, upper, seed), grid)
                  for n in n_list)
    if max(dists) < STABLE_FLOOR:
        return BEResult(n_list, dists, policy, s, None, stable_input=True,
                        meta={"kernel": kernel.label})
    if kernel.family is Family.STABLE:
        raise FitError("stable kernel with nonzero distances: grid too coarse")
    target = rate_target(kernel)
    fit = fit_loglog(n_list, dists, target=target, tolerance=tolerance)
    rate = -target
    tail = slice(len(n_list) // 2, None)
    c_be = float(np.max(np.asarray(dists)[tail] * np.asarray(n_list, dtype=float)[tail] ** rate))
    bound = c_be * np.asarray(n_list, dtype=float) ** (-rate)
    ok = np.asarray(dists) <= bound * (1 + 1e-12)
    n_emp = None
    for i in range(len(n_list)):
        if ok[i:].all():
            n_emp = n_list[i]
            break
    return BEResult(n_list, dists, policy, s, target, fit, False, c_be, n_emp,
                    {"kernel": kernel.label, "remainder_order": remainder_order(kernel)})
