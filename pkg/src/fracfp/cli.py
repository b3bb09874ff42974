"""``fracfp`` command line: one subcommand per experiment."""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from . import __version__
from .config import EXPERIMENTS, RunConfig
from .errors import FracFPError
from .experiments import run
from .io import summary, write_outputs

ENV_OUT = "FRACFP_OUT"


def _execute(name: str, config, out, seed, jobs, fmt, no_plots) -> None:
    try:
        cfg = RunConfig.load(name, config)
        if seed is not None:
            cfg = cfg.override(seed=seed)
        res = run(cfg, jobs)
    except FracFPError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(2)
    out_dir = Path(out or cfg.raw.get("output") or os.environ.get(ENV_OUT) or "fracfp_out")
    paths = write_outputs(res, out_dir, fmt)
    if not no_plots:
        from .plotting import plot_result
        paths += plot_result(res, out_dir)
    summ = summary(res)
    for rec in summ["results"]:
        if "pass" in rec:
            keys = ", ".join(f"{k}={v}" for k, v in rec.items()
                             if k != "pass" and not isinstance(v, (list, dict)))
            click.echo(f"[{'PASS' if rec['pass'] else 'FAIL'}] {keys}")
    click.echo(f"{name}: {'PASS' if summ['pass'] else 'FAIL'} ({len(paths)} files in {out_dir})")
    sys.exit(0 if summ["pass"] else 1)


def _command(name: str) -> click.Command:
    @click.command(name=name, help=f"Run the {name} experiment.")
    @click.option("--config", "config", type=click.Path(exists=True, dir_okay=False), default=None,
                  help="JSON run configuration.")
    @click.option("--out", type=click.Path(file_okay=False), default=None,
                  help=f"Output directory (default ${ENV_OUT} or ./fracfp_out).")
    @click.option("--seed", type=int, default=None, help="Override the configured seed.")
    @click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True,
                  help="Worker processes for independent cells.")
    @click.option("--format", "fmt", type=click.Choice(["csv", "json", "both"]), default="both",
                  show_default=True)
    @click.option("--no-plots", is_flag=True, help="Skip PNG figures.")
    def cmd(config, out, seed, jobs, fmt, no_plots):
        _execute(name, config, out, seed, jobs, fmt, no_plots)

    return cmd


@click.group()
@click.version_option(__version__, prog_name="fracfp")
def main() -> None:
    """Rate experiments for heavy-tailed nonlocal Fokker-Planck equations."""


for _name in EXPERIMENTS:
    main.add_command(_command(_name))


if __name__ == "__main__":
    main()
