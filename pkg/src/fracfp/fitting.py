"""Least-squares rate fits on logarithmic axes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FitError


@dataclass(frozen=True)
class RateFit:
    """Line ``log y = intercept + slope * log x`` (or ``* x`` for exponential fits).

    ``passed`` compares the slope with ``target`` according to ``mode``:
    ``"band"`` needs ``|slope - target| <= tolerance``, ``"at_least"`` needs
    ``slope >= target - tolerance``, ``"at_most"`` needs
    ``slope <= target + tolerance``.  The residual (RMS in log units) must stay
    below ``max_residual``.
    """

    x: tuple[float, ...]
    y: tuple[float, ...]
    slope: float
    intercept: float
    residual: float
    target: float | None = None
    tolerance: float = 0.0
    mode: str = "band"
    max_residual: float = np.inf
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.slope) or self.residual > self.max_residual:
            return False
        if self.target is None:
            return True
        if self.mode == "band":
            return abs(self.slope - self.target) <= self.tolerance
        if self.mode == "at_least":
            return self.slope >= self.target - self.tolerance
        if self.mode == "at_most":
            return self.slope <= self.target + self.tolerance
        raise ValueError(f"unknown mode {self.mode!r}")

    def as_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "residual": self.residual,
                "target": self.target, "tolerance": self.tolerance, "mode": self.mode,
                "pass": self.passed}


def _fit(u: np.ndarray, v: np.ndarray):
    if u.size < 2:
        raise FitError("need at least two points")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise FitError("non-finite data in fit")
    A = np.vstack([u, np.ones_like(u)]).T
    (slope, icept), *_ = np.linalg.lstsq(A, v, rcond=None)
    res = float(np.sqrt(np.mean((v - A @ np.array([slope, icept])) ** 2)))
    return float(slope), float(icept), res


def fit_loglog(x, y, target=None, tolerance=0.0, mode="band", max_residual=np.inf, **meta) -> RateFit:
    """Regression of ``log y`` on ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise FitError("log-log fit needs positive data")
    slope, icept, res = _fit(np.log(x), np.log(y))
    return RateFit(tuple(x), tuple(y), slope, icept, res, target, tolerance, mode, max_residual, meta)


def fit_exponential(t, y, target=None, tolerance=0.0, mode="at_least", max_residual=np.inf, **meta) -> RateFit:
    """Regression of ``log y`` on ``t``; the decay rate is ``-slope``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise FitError("exponential fit needs positive data")
    slope, icept, res = _fit(t, np.log(y))
    return RateFit(tuple(t), tuple(y), slope, icept, res, target, tolerance, mode, max_residual, meta)
