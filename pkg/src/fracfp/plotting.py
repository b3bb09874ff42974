"""PNG figures for experiment tables, rendered with the Agg backend."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiments import ExperimentResult, Table  # noqa: E402


def plot_table(table: Table, path: Path) -> Path | None:
    spec = table.plot
    if spec is None or not table.rows:
        return None
    cols = {c: i for i, c in enumerate(table.columns)}
    data = np.array([[float(np.real(v)) for v in row] for row in table.rows])
    x = data[:, cols[spec.x]]
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in spec.ys:
        y = data[:, cols[name]]
        mask = np.isfinite(y) & np.isfinite(x)
        if spec.logy:
            mask &= y > 0
        if spec.logx:
            mask &= x > 0
        ax.plot(x[mask], y[mask], marker="o" if len(x) < 40 else None, ms=3, label=name)
    if spec.logx:
        ax.set_xscale("log")
    if spec.logy:
        ax.set_yscale("log")
    ax.set_xlabel(spec.xlabel or spec.x)
    if spec.ylabel:
        ax.set_ylabel(spec.ylabel)
    ax.set_title(spec.title)
    if len(spec.ys) > 1:
        ax.legend(fontsize=7)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_result(res: ExperimentResult, out: Path) -> list[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    made = []
    for table in res.tables:
        p = plot_table(table, out / f"{res.experiment}_{table.name}.png")
        if p is not None:
            made.append(p)
    return made
