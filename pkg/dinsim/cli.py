"""dinsim command-line interface."""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Annotated

import typer

from dinsim.commands import calibrate, lifecycle, mc, sweep
from dinsim.shared.constants import APP_NAME, LOG_FORMAT, LOG_LEVEL

app = typer.Typer(
    name=APP_NAME,
    help="Default insurance note simulator: return curves, calibration, Monte Carlo, liens.",
    no_args_is_help=True,
    add_completion=False,
)

ConfigOption = Annotated[
    Path | None, typer.Option("--config", help="Flat section.key = value config file.")
]
SetOption = Annotated[
    list[str] | None,
    typer.Option("--set", help="Override one key, e.g. model.moc=30. Repeatable."),
]
OutOption = Annotated[Path | None, typer.Option("--out", help="Output path.")]


@app.callback()
def main(
    log_level: Annotated[
        str, typer.Option("--log-level", help="DEBUG, INFO, WARNING or ERROR.")
    ] = LOG_LEVEL,
) -> None:
    level = log_level.upper()
    if level not in logging.getLevelNamesMapping():
        raise typer.BadParameter(f"unknown log level {log_level!r}", param_hint="--log-level")
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


@app.command("sweep")
def sweep_command(
    config: ConfigOption = None, overrides: SetOption = None, out: OutOption = None
) -> None:
    """Write bank and underwriter curves over the rho grid as CSV."""
    raise typer.Exit(sweep.run(config, overrides or [], out))


@app.command("calibrate")
def calibrate_command(
    config: ConfigOption = None, overrides: SetOption = None, out: OutOption = None
) -> None:
    """Fit free knobs to the anchors and report residuals (exit 1 if any missed)."""
    raise typer.Exit(calibrate.run(config, overrides or [], out))


@app.command("mc")
def mc_command(
    config: ConfigOption = None,
    overrides: SetOption = None,
    out: OutOption = None,
    seed: Annotated[int | None, typer.Option("--seed", help="Study seed.")] = None,
) -> None:
    """Run a seeded Monte Carlo study over funds."""
    raise typer.Exit(mc.run(config, overrides or [], out, seed))


@app.command("lifecycle")
def lifecycle_command(
    scenario: Annotated[Path, typer.Argument(help="Scenario file of timed lien actions.")],
    out: OutOption = None,
) -> None:
    """Replay a lien scenario and write the ledger log."""
    raise typer.Exit(lifecycle.run(scenario, out))
