"""Evaluate the return curves over a ρ grid and write them as CSV."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path

import pandas as pd

from dinsim.model import CurvePoint, ModelParams, insured_face, sweep
from dinsim.shared.config import load_config, model_params, rho_grid
from dinsim.shared.constants import NORMAL_RANGE, ZERO_FUNDS_RANGE
from dinsim.shared.error_handling import EXIT_OK, OutputError, handle_errors
from dinsim.shared.money import format_money, to_money
from dinsim.shared.output import Scalar, format_float, read_csv, write_csv

logger = logging.getLogger(__name__)

COLUMNS: tuple[str, ...] = (
    "rho",
    "bank_baseline",
    "bank_clawback",
    "uw_per_dollar_baseline",
    "uw_per_dollar_clawback",
    "uw_invested",
)


def sweep_frame(points: Sequence[CurvePoint]) -> pd.DataFrame:
    rows = [
        (
            format_float(p.rho),
            format_float(p.bank_multiple),
            format_float(p.bank_multiple_clawback),
            format_float(p.uw_per_dollar_insured),
            format_float(p.uw_per_dollar_insured_clawback),
            format_money(p.uw_invested_funds),
        )
        for p in points
    ]
    return pd.DataFrame(rows, columns=list(COLUMNS))


def sweep_metadata(params: ModelParams) -> dict[str, Scalar]:
    meta: dict[str, Scalar] = {"command": "sweep"}
    for name in ModelParams.__dataclass_fields__:
        meta[f"params.{name}"] = getattr(params, name)
    meta["insured_face"] = insured_face(params)
    meta["normal_range.low"], meta["normal_range.high"] = NORMAL_RANGE
    meta["zero_funds_range.low"], meta["zero_funds_range.high"] = ZERO_FUNDS_RANGE
    return meta


def read_sweep_csv(path: Path) -> list[CurvePoint]:
    frame, meta = read_csv(path)
    missing = [c for c in COLUMNS if c not in frame.columns]
    if missing or "insured_face" not in meta:
        raise OutputError(f"{path} is not a sweep CSV (missing {', '.join(missing) or 'face'})")
    face = to_money(meta["insured_face"])
    return [
        CurvePoint(
            rho=float(row.rho),
            bank_multiple=float(row.bank_baseline),
            bank_multiple_clawback=float(row.bank_clawback),
            uw_per_dollar_insured=float(row.uw_per_dollar_baseline),
            uw_per_dollar_insured_clawback=float(row.uw_per_dollar_clawback),
            uw_invested_funds=to_money(str(row.uw_invested)),
            insured_face=face,
        )
        for row in frame.itertuples(index=False)
    ]


@handle_errors
def run(config: Path | None, overrides: Sequence[str], out: Path | None) -> int:
    run_config = load_config(config, list(overrides))
    params = model_params(run_config)
    points = sweep(params, rho_grid(run_config))
    path = out or Path(run_config.output.sweep)
    write_csv(path, sweep_frame(points), header=sweep_metadata(params))
    logger.info("Sweep written: path=%s points=%d", path, len(points))
    return EXIT_OK
