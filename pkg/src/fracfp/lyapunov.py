"""Drift inequality for the dual generator acting on ``phi = <x>^k``.

The dual generator is

    L* phi(x) = eps^(-2s) int J_eps(y) [phi(x+y) - phi(x)] dy - x phi'(x).

In kernel units ``y = eps z`` the jump part becomes
``eps^(-2s) int_0^inf J(z) [phi(x + eps z) + phi(x - eps z) - 2 phi(x)] dz``.
The near field ``z <= Z`` uses tabulated kernel values on graded
Gauss-Legendre panels; the second difference pairs ``+z`` and ``-z`` so the
first-order term never appears.  Beyond ``Z`` the kernel is replaced by its
asymptote ``K |z|^(-1-2s)``, whose jump measure ``K |y|^(-1-2s) dy`` does not
depend on ``eps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import DomainError, FitError, TailDivergenceError
from .grids import japanese
from .kernels import KernelSpec, density_table
from .stable_laws import tail_constant

LAMBDA_TARGET = 0.1
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def near_radius(epsilon: float) -> float:
    """Default near-field radius in kernel units."""
    return max(10.0, 5.0 / epsilon)


def _panel_rule(z_max: float, z_min: float = 1.0 / 1024):
    """Gauss-Legendre nodes and weights on panels graded towards the origin."""
    n_geo = max(1, int(math.ceil(math.log2(z_max / z_min))))
    edges = np.concatenate(([0.0], z_min * 2.0 ** np.arange(n_geo + 1)))
    edges = edges[edges < z_max]
    edges = np.append(edges, z_max)
    # split long panels so each is at most 2 units wide
    fine = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        m = max(1, int(math.ceil((b - a) / 2.0)))
        fine.extend(np.linspace(a, b, m + 1)[1:])
    fine = np.asarray(fine)
    a, b = fine[:-1, None], fine[1:, None]
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * _GL_X
    weights = 0.5 * (b - a) * _GL_W
    return nodes.ravel(), weights.ravel()


@lru_cache(maxsize=64)
def _near_table(kernel: KernelSpec, z_max: float):
    z, w = _panel_rule(z_max)
    return z, w * density_table(kernel, z)


def _second_difference(k: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``phi(x+y) + phi(x-y) - 2 phi(x)`` without cancellation for small ``y``."""
    x = x[:, None]
    a, b, c = 1.0 + (x + y) ** 2, 1.0 + (x - y) ** 2, 1.0 + x * x
    h = 0.5 * k
    # a^h - c^h = c^h expm1(h log1p((a-c)/c))
    da = np.expm1(h * np.log1p((2.0 * x * y + y * y) / c))
    db = np.expm1(h * np.log1p((-2.0 * x * y + y * y) / c))
    return c ** h * (da + db)


def _check_k(kernel: KernelSpec, k: float) -> None:
    if not 0 < k <= 1:
        raise DomainError("weight exponent k must lie in (0, 1]")
    if k > 2 * kernel.s - 0.05:
        raise TailDivergenceError(
            f"k={k} too close to 2s={2 * kernel.s:g}: the jump integral of <x>^k diverges")


def drift_term(k: float, x) -> np.ndarray:
    """``-x . grad <x>^k = -k <x>^k + k <x>^(k-2)``."""
    x = np.asarray(x, dtype=float)
    return -k * japanese(x) ** k + k * japanese(x) ** (k - 2.0)


def near_field_jump(kernel: KernelSpec, epsilon: float, k: float, x, radius: float | None = None) -> np.ndarray:
    """``eps^(-2s) int_{|z| <= radius} J(z) [phi(x + eps z) - phi(x)] dz``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    radius = near_radius(epsilon) if radius is None else radius
    z, wj = _near_table(kernel, float(radius))
    out = _second_difference(k, x, epsilon * z) @ wj
    return out * epsilon ** (-2.0 * kernel.s)


def far_field_jump(kernel: KernelSpec, k: float, x, y_min: float) -> np.ndarray:
    """Jump integral over ``|y| > y_min`` with the kernel replaced by its asymptote."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = kernel.s
    if kernel.tail is None:
        return np.zeros_like(x)
    c = kernel.tail.coef
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        f = lambda y: float(_second_difference(k, np.array([xi]), np.array([y]))[0, 0]) * y ** (-1.0 - 2 * s)
        pts = [abs(xi)] if abs(xi) > y_min else None
        hi = max(4.0 * abs(xi), 4.0 * y_min)
        v1 = integrate.quad(f, y_min, hi, points=pts, limit=200, epsabs=1e-13)[0]
        v2 = integrate.quad(f, hi, np.inf, limit=200, epsabs=1e-13)[0]
        out[i] = c * (v1 + v2)
    return out


def dual_generator_apply(kernel: KernelSpec, epsilon: float, k: float, x,
                         radius: float | None = None) -> np.ndarray:
    """``L* <x>^k`` at the points ``x``."""
    if not 0 < epsilon <= 1:
        raise DomainError("epsilon must lie in (0, 1]")
    _check_k(kernel, k)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    radius = near_radius(epsilon) if radius is None else radius
    jump = near_field_jump(kernel, epsilon, k, x, radius)
    jump = jump + far_field_jump(kernel, k, x, epsilon * radius)
    return jump + drift_term(k, x)


@dataclass(frozen=True)
class LyapunovFit:
    """Constants of ``L* phi <= C - lambda phi`` fitted on a grid."""

    x: np.ndarray
    values: np.ndarray
    c_l: float
    lambda_l: float
    epsilon: float
    s: float
    k: float
    x0: float
    lambda_target: float = LAMBDA_TARGET
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.lambda_l >= self.lambda_target)

    @property
    def holds(self) -> bool:
        phi = japanese(self.x) ** self.k
        return bool(np.all(self.values <= self.c_l - self.lambda_l * phi + 1e-12 * (1 + abs(self.c_l))))


def lyapunov_fit(kernel: KernelSpec, epsilon: float, k: float, x_grid, x0: float = 5.0,
                 lambda_target: float = LAMBDA_TARGET) -> LyapunovFit:
    """Fit ``(C_L, lambda_L)`` from ``L* phi`` on ``x_grid``.

    ``C_probe`` is the largest value of ``L* phi`` on ``|x| <= x0`` (at least 0),
    ``lambda_L`` the smallest ``(C_probe - L* phi)/phi`` on ``|x| >= x0`` and
    ``C_L`` the smallest constant for which the inequality holds everywhere on
    the grid with that ``lambda_L``.
    """
    x = np.asarray(x_grid, dtype=float)
    if np.max(np.abs(x)) < 20.0:
        raise DomainError("x_grid must reach |x| >= 20")
    vals = dual_generator_apply(kernel, epsilon, k, x)
    phi = japanese(x) ** k
    inner, outer = np.abs(x) <= x0, np.abs(x) >= x0
    if not inner.any() or not outer.any():
        raise DomainError("x0 must split the grid")
    c_probe = max(0.0, float(np.max(vals[inner])))
    lam = float(np.min((c_probe - vals[outer]) / phi[outer]))
    if lam <= 0:
        raise FitError(f"no admissible drift constant: lambda={lam:.3g} at eps={epsilon}, s={kernel.s}")
    c_l = float(np.max(vals + lam * phi))
    return LyapunovFit(x, vals, c_l, lam, epsilon, kernel.s, k, x0, lambda_target,
                       {"kernel": kernel.label, "c_probe": c_probe})


def truncated_second_moment(kernel: KernelSpec, radius: float = 1.0) -> float:
    """``int_{|z| <= R} z^2 J(z) dz``."""
    z, wj = _near_table(kernel, float(radius))
    return float(2.0 * np.sum(z * z * wj))


# ---------------------------------------------------------------------------
# fractional Laplacian of the weight


def fractional_laplacian_weight(s: float, k: float, x, cutoff: float = 1e-3) -> np.ndarray:
    """``-(-Delta)^s <x>^k`` in one dimension by the singular integral.

    ``K int_0^inf [phi(x+y) + phi(x-y) - 2 phi(x)] y^(-1-2s) dy`` with ``K`` the
    stable tail constant (which equals the normalising constant of the
    fractional Laplacian in d=1).  Below ``cutoff`` the second difference is
    replaced by ``phi''(x) y^2``.
    """
    if not 0.5 <= s < 1:
        raise DomainError("s must lie in [1/2, 1)")
    if not 0 < k < 2 * s:
        raise DomainError("need 0 < k < 2s")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    c = tail_constant(s)
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        head = weight_second_derivative(k, xi) * cutoff ** (2 - 2 * s) / (2 - 2 * s)
        f = lambda y: float(_second_difference(k, np.array([xi]), np.array([y]))[0, 0]) * y ** (-1.0 - 2 * s)
        hi = max(4.0 * abs(xi), 4.0)
        pts = [abs(xi)] if cutoff < abs(xi) < hi else None
        v1 = integrate.quad(f, cutoff, hi, points=pts, limit=400, epsabs=1e-13)[0]
        v2 = integrate.quad(f, hi, np.inf, limit=200, epsabs=1e-13)[0]
        out[i] = c * (head + v1 + v2)
    return out


def weight_second_derivative(k: float, x) -> np.ndarray:
    """``d^2/dx^2 <x>^k = k <x>^(k-2) + k (k-2) x^2 <x>^(k-4)``."""
    x = np.asarray(x, dtype=float)
    j = japanese(x)
    return k * j ** (k - 2) + k * (k - 2) * x * x * j ** (k - 4)


def fractional_weight_decay(s: float, k: float, x_grid) -> float:
    """``max |-(-Delta)^s <x>^k| / (<x>^(k-2s) (1 + 1/(2s) + 1/(2s-k)))`` over the grid."""
    if k >= 2 * s:
        raise DomainError("need k < 2s")
    x = np.asarray(x_grid, dtype=float)
    vals = fractional_laplacian_weight(s, k, x)
    scale = japanese(x) ** (k - 2 * s) * (1 + 1 / (2 * s) + 1 / (2 * s - k))
    return float(np.max(np.abs(vals) / scale))
