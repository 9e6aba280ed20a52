"""Fit the anchors, solve the clawback rate, write the key = value report."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path

from dinsim.calibrate import calibrate
from dinsim.shared.config import anchors, load_config, model_params
from dinsim.shared.error_handling import EXIT_FAILURE, EXIT_OK, handle_errors
from dinsim.shared.output import write_text

logger = logging.getLogger(__name__)


@handle_errors
def run(config: Path | None, overrides: Sequence[str], out: Path | None) -> int:
    run_config = load_config(config, list(overrides))
    section = run_config.calibrate
    report = calibrate(
        anchors(run_config),
        section.free_knobs,
        base=model_params(run_config),
        grid_points=section.grid_points,
        max_sweeps=section.max_sweeps,
    )
    path = out or Path(run_config.output.calibrate)
    write_text(path, report.to_text())

    missed = [r.anchor.name for r in report.results if not r.within]
    if missed:
        logger.warning("Anchors out of tolerance: %s", ", ".join(missed))
        return EXIT_FAILURE
    return EXIT_OK
