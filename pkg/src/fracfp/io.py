"""CSV and JSON persistence of experiment results."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .experiments import ExperimentResult, Table


def versions() -> dict[str, str]:
    return {"fracfp": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return "%.17g" % float(np.real(v))
    return str(v)


def write_csv(table: Table, path: Path, meta: dict) -> Path:
    """Metadata comment block, header row, one row per record; no timestamps."""
    with open(path, "w", newline="") as fh:
        for key, val in meta.items():
            fh.write(f"# {key}: {val}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_cell(v) for v in row])
    return path


def _parse(cell: str):
    if cell in ("true", "false"):
        return cell == "true"
    try:
        return float(cell)
    except ValueError:
        return cell


def read_csv(path: Path) -> tuple[dict, list[str], list[list]]:
    meta, rows, header = {}, [], None
    with open(path) as fh:
        for line in fh:
            if line.startswith("# "):
                k, _, v = line[2:].rstrip("\n").partition(": ")
                meta[k] = v
            elif header is None:
                header = next(csv.reader([line]))
            else:
                rows.append([_parse(c) for c in next(csv.reader([line]))])
    return meta, header or [], rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, (complex, np.complexfloating)):
        return _jsonable(complex(obj).real)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def has_nan(obj) -> bool:
    if isinstance(obj, dict):
        return any(has_nan(v) for v in obj.values())
    if isinstance(obj, (list, tuple)):
        return any(has_nan(v) for v in obj)
    if isinstance(obj, np.ndarray):
        return bool(np.isnan(np.asarray(obj, dtype=complex)).any())
    if isinstance(obj, (float, np.floating, complex, np.complexfloating)):
        return bool(np.isnan(obj))
    return False


def summary(res: ExperimentResult) -> dict:
    flags = [r["pass"] for r in res.results if "pass" in r]
    nan = has_nan(res.results) or any(has_nan(t.rows) for t in res.tables)
    ok = bool(res.passed and all(flags) and not nan)
    return _jsonable({"experiment": res.experiment, "config_hash": res.config.digest,
                      "versions": versions(), "results": res.results, "nan_detected": nan, "pass": ok})


def write_outputs(res: ExperimentResult, out: Path, fmt: str = "both") -> list[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    meta = {"experiment": res.experiment, "config_hash": res.config.digest, **versions()}
    if fmt in ("csv", "both"):
        for table in res.tables:
            paths.append(write_csv(table, out / f"{res.experiment}_{table.name}.csv", meta))
    if fmt in ("json", "both"):
        p = out / f"{res.experiment}_summary.json"
        p.write_text(json.dumps(summary(res), indent=2, sort_keys=True) + "\n")
        paths.append(p)
    (out / f"{res.experiment}_config.json").write_text(res.config.to_json() + "\n")
    return paths
