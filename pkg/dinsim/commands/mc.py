"""Monte Carlo study: one CSV row per fund plus a summary block."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path

import pandas as pd

from dinsim.model import ModelParams
from dinsim.montecarlo import FundRun, SimConfig, run_study, summarize
from dinsim.shared.config import distribution, load_config, sim_config
from dinsim.shared.constants import BANK_BREAK_EVEN, UNDERWRITER_BREAK_EVEN
from dinsim.shared.error_handling import EXIT_OK, handle_errors
from dinsim.shared.output import Scalar, format_float, write_csv

logger = logging.getLogger(__name__)

COLUMNS: tuple[str, ...] = ("fund", "rho", "bank_baseline", "bank_clawback", "uw_net")


def runs_frame(runs: Sequence[FundRun]) -> pd.DataFrame:
    rows = [
        (
            str(r.fund),
            format_float(r.rho),
            format_float(r.bank_baseline),
            format_float(r.bank_clawback),
            format_float(r.uw_net),
        )
        for r in runs
    ]
    return pd.DataFrame(rows, columns=list(COLUMNS))


def study_metadata(config: SimConfig, distribution_name: str) -> dict[str, Scalar]:
    meta: dict[str, Scalar] = {
        "command": "mc",
        "seed": config.seed,
        "n_funds": config.n_funds,
        "investments_per_fund": config.investments_per_fund,
        "distribution": distribution_name,
    }
    for name in ModelParams.__dataclass_fields__:
        meta[f"params.{name}"] = getattr(config.params, name)
    return meta


def summary_block(runs: Sequence[FundRun]) -> dict[str, Scalar]:
    block: dict[str, Scalar] = {}
    columns = {
        "bank_baseline": ([r.bank_baseline for r in runs], BANK_BREAK_EVEN),
        "bank_clawback": ([r.bank_clawback for r in runs], BANK_BREAK_EVEN),
        "uw_net": ([r.uw_net for r in runs], UNDERWRITER_BREAK_EVEN),
    }
    for column, (values, break_even) in columns.items():
        summary = summarize(values, break_even)
        for key, value in summary._asdict().items():
            block[f"summary.{column}.{key}"] = value
    return block


@handle_errors
def run(
    config: Path | None, overrides: Sequence[str], out: Path | None, seed: int | None = None
) -> int:
    run_config = load_config(config, list(overrides))
    study = sim_config(run_config, seed)
    runs = run_study(study, distribution(run_config))
    path = out or Path(run_config.output.mc)
    write_csv(
        path,
        runs_frame(runs),
        header=study_metadata(study, run_config.mc.distribution),
        footer=summary_block(runs),
    )
    logger.info("Monte Carlo written: path=%s funds=%d", path, len(runs))
    return EXIT_OK
