"""Run configuration: one JSON document, strict keys, per-experiment defaults."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigurationError
from .grids import Grid1D
from .kernels import Family, KernelSpec

EXPERIMENTS = ("verify-kernel", "evolve", "equilibrium", "decay-rate", "eps-limit", "s-limit",
               "gclt", "regularity", "wild-verify", "lyapunov", "positivity")

SUP_T_LIST = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
HEAVY_GRID = {"n_points": 2 ** 14, "half_width": 200.0}
LIGHT_GRID = {"n_points": 2 ** 12, "half_width": 50.0}

_KERNEL_KEYS = {"family", "s", "delta", "c0", "tail_const", "tail_radius", "core_var"}
_BLOCK_KEYS = {
    "grid": {"n_points", "half_width"},
    "time": {"t_list", "t_max", "steps"},
    "weights": {"k", "m", "M"},
    "initial": {"kind", "mean", "var", "radius"},
    "gclt": {"n_list", "policy", "lower", "upper", "tolerance"},
    "wild": {"t", "samples", "n_max", "probes", "rho_max"},
    "positivity": {"t", "r1", "r2"},
    "lyapunov": {"x_max", "n_x", "x0", "lambda_target"},
    "regularity": {"dm"},
}
_TOP_KEYS = {"experiment", "kernel", "epsilon", "s", "seed", "output", "families"} | set(_BLOCK_KEYS)

_BASE: dict[str, Any] = {
    "kernel": {"family": "stable", "s": 0.75},
    "epsilon": [0.5],
    "s": [0.75],
    "grid": dict(LIGHT_GRID),
    "time": {"t_list": [0.5, 1.0, 2.0]},
    "weights": {"k": 0.5, "m": 0.75, "M": 1.0},
    "initial": {"kind": "gaussian", "mean": 1.0, "var": 0.5},
    "seed": 0,
    "output": None,
}

DEFAULTS: dict[str, dict[str, Any]] = {
    "verify-kernel": {"families": ["stable", "screened_poisson", "student_gauss_mixture"],
                      "s": [0.6, 0.75, 0.9]},
    "evolve": {},
    "equilibrium": {"epsilon": [0.5, 1.0]},
    "decay-rate": {"epsilon": [0.1, 0.5, 1.0], "s": [0.6, 0.75, 0.9],
                   "grid": {"n_points": 2 ** 15, "half_width": 50.0},
                   "time": {"t_list": [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0]}},
    "eps-limit": {"epsilon": [0.2, 0.1, 0.05, 0.025], "s": [0.75], "grid": dict(HEAVY_GRID),
                  "time": {"t_list": list(SUP_T_LIST)},
                  "weights": {"k": 0.25, "m": 0.75, "M": 1.0}},
    "s-limit": {"epsilon": [0.3], "s": [0.85, 0.9, 0.95, 0.975], "grid": dict(HEAVY_GRID),
                "time": {"t_list": list(SUP_T_LIST)},
                "weights": {"k": 0.25, "m": 0.75, "M": 1.0}},
    "gclt": {"kernel": {"family": "screened_poisson", "s": 0.75}, "s": [0.75, 0.9, 0.99],
             "gclt": {"n_list": [64, 128, 256, 512, 1024], "policy": "constant",
                      "lower": 0.5, "upper": 2.0, "tolerance": 0.25}},
    "regularity": {"epsilon": [1.0], "s": [0.75], "regularity": {"dm": 0.1}},
    "wild-verify": {"epsilon": [0.5], "s": [0.75], "initial": {"kind": "gaussian", "mean": 0.0, "var": 1.0},
                    "wild": {"t": 1.0, "samples": 10000, "n_max": None, "probes": 20, "rho_max": 6.0}},
    "lyapunov": {"epsilon": [0.1, 0.5, 1.0], "s": [0.6, 0.75, 0.9],
                 "lyapunov": {"x_max": 40.0, "n_x": 161, "x0": 5.0, "lambda_target": 0.1}},
    "positivity": {"epsilon": [0.05, 0.1, 0.5, 1.0], "s": [0.6, 0.75, 0.9],
                   "positivity": {"t": 1.0, "r1": 1.0, "r2": 1.0}},
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _check_keys(doc: dict) -> None:
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    if "kernel" in doc:
        bad = set(doc["kernel"]) - _KERNEL_KEYS
        if bad:
            raise ConfigurationError(f"unknown kernel keys: {sorted(bad)}")
    for block, allowed in _BLOCK_KEYS.items():
        if block in doc:
            if not isinstance(doc[block], dict):
                raise ConfigurationError(f"block {block!r} must be an object")
            bad = set(doc[block]) - allowed
            if bad:
                raise ConfigurationError(f"unknown keys in {block!r}: {sorted(bad)}")


def epsilon_guard(delta: float, d: int = 1) -> float:
    """Largest admissible eps for short-range limit runs, ``sqrt(2/(4 + 2 delta + d))``."""
    return math.sqrt(2.0 / (4.0 + 2.0 * delta + d))


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    raw: dict = field(repr=False)

    @classmethod
    def build(cls, experiment: str, doc: dict | None = None) -> "RunConfig":
        if experiment not in EXPERIMENTS:
            raise ConfigurationError(f"unknown experiment {experiment!r}")
        doc = dict(doc or {})
        _check_keys(doc)
        name = doc.pop("experiment", experiment)
        if name != experiment:
            raise ConfigurationError(f"config is for {name!r}, not {experiment!r}")
        merged = _merge(_merge(_BASE, DEFAULTS[experiment]), doc)
        if "kernel" in doc and "s" in doc["kernel"] and "s" not in doc:
            merged["s"] = [doc["kernel"]["s"]]
        cfg = cls(experiment, merged)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, experiment: str, path: str | Path | None) -> "RunConfig":
        if path is None:
            return cls.build(experiment)
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(doc, dict):
            raise ConfigurationError("config must be a JSON object")
        return cls.build(experiment, doc)

    def override(self, **kw) -> "RunConfig":
        doc = {k: v for k, v in kw.items() if v is not None}
        return RunConfig.build(self.experiment, _merge(self._user_view(), doc))

    def _user_view(self) -> dict:
        return copy.deepcopy(self.raw)

    # ------------------------------------------------------------------
    def validate(self) -> None:
        r = self.raw
        w = r["weights"]
        k, m, big_m = w["k"], w["m"], w["M"]
        if not 0 < k < m <= big_m <= 1:
            raise ConfigurationError(f"weights need 0 < k < m <= M <= 1, got {k}, {m}, {big_m}")
        for e in self.epsilons:
            if not 0 < e <= 1:
                raise ConfigurationError(f"epsilon {e} outside (0, 1]")
        for s in self.s_values:
            if not 0.5 < s < 1:
                raise ConfigurationError(f"s {s} outside (1/2, 1)")
        if self.experiment == "s-limit":
            cap = epsilon_guard(self.kernel.delta)
            for e in self.epsilons:
                if e >= cap:
                    raise ConfigurationError(f"s-limit runs need eps < {cap:.4f}, got {e}")
        Family.parse(r["kernel"]["family"])
        self.grid  # validates grid
        if self.t_list and min(self.t_list) < 0:
            raise ConfigurationError("times must be nonnegative")

    @property
    def kernel(self) -> KernelSpec:
        """Kernel at the first configured ``s``."""
        return self.kernel_at(self.s_values[0])

    def kernel_at(self, s: float, family: str | None = None) -> KernelSpec:
        kb = dict(self.raw["kernel"])
        kb.pop("s", None)
        fam = kb.pop("family")
        if family is not None and Family.parse(family) != Family.parse(fam):
            # family overrides reset the family-specific defaults
            kb = {k: v for k, v in kb.items() if k in ("delta", "tail_const", "tail_radius")}
            fam = family
        return KernelSpec(Family.parse(fam), s, **kb)

    @property
    def epsilons(self) -> list[float]:
        return [float(e) for e in self.raw["epsilon"]]

    @property
    def s_values(self) -> list[float]:
        return [float(s) for s in self.raw["s"]]

    @property
    def grid(self) -> Grid1D:
        g = self.raw["grid"]
        return Grid1D(int(g["n_points"]), float(g["half_width"]))

    @property
    def t_list(self) -> list[float]:
        tb = self.raw["time"]
        if tb.get("t_list") is not None:
            return [float(t) for t in tb["t_list"]]
        steps = int(tb["steps"])
        return [float(tb["t_max"]) * i / steps for i in range(steps + 1)]

    @property
    def weights(self) -> tuple[float, float, float]:
        w = self.raw["weights"]
        return float(w["k"]), float(w["m"]), float(w["M"])

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    def block(self, name: str) -> dict:
        return dict(self.raw.get(name) or {})

    def to_json(self) -> str:
        return json.dumps({"experiment": self.experiment, **self.raw}, sort_keys=True, indent=2)

    @property
    def digest(self) -> str:
        doc = {k: v for k, v in self.raw.items() if k != "output"}
        blob = json.dumps({"experiment": self.experiment, **doc}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]
