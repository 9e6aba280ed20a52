"""Artifact formatting: CSV tables with `#` metadata and key = value text."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from decimal import Decimal
from pathlib import Path

import pandas as pd

from dinsim.shared.error_handling import OutputError
from dinsim.shared.money import format_money

logger = logging.getLogger(__name__)

Scalar = str | int | float | bool | Decimal | None


def format_float(value: float) -> str:
    """Shortest repr that parses back to the same float."""
    return repr(float(value))


def format_value(value: Scalar) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, Decimal):
        return format_money(value)
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def key_value_lines(values: Mapping[str, Scalar], prefix: str = "") -> list[str]:
    return [f"{prefix}{key} = {format_value(value)}" for key, value in values.items()]


def key_value_text(values: Mapping[str, Scalar]) -> str:
    return "".join(f"{line}\n" for line in key_value_lines(values))


def parse_key_value(lines: Iterable[str], prefix: str = "") -> dict[str, str]:
    """Inverse of ``key_value_lines`` for lines carrying ``prefix``."""
    parsed: dict[str, str] = {}
    for raw in lines:
        line = raw.strip()
        if not line.startswith(prefix):
            continue
        key, sep, value = line[len(prefix) :].partition("=")
        if sep:
            parsed[key.strip()] = value.strip()
    return parsed


def write_csv(
    path: Path,
    frame: pd.DataFrame,
    *,
    header: Mapping[str, Scalar] | None = None,
    footer: Mapping[str, Scalar] | None = None,
) -> None:
    """UTF-8, LF endings, `#` metadata above and below the table."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            for line in key_value_lines(header or {}, prefix="# "):
                fh.write(f"{line}\n")
            frame.to_csv(fh, index=False, lineterminator="\n")
            for line in key_value_lines(footer or {}, prefix="# "):
                fh.write(f"{line}\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    logger.info("Wrote CSV: path=%s rows=%d", path, len(frame))


def read_csv(path: Path) -> tuple[pd.DataFrame, dict[str, str]]:
    """Table as strings plus its `#` metadata."""
    try:
        text = path.read_text(encoding="utf-8")
        frame = pd.read_csv(path, comment="#", dtype=str, keep_default_na=False)
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return frame, parse_key_value(text.splitlines(), prefix="# ")


def write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    logger.info("Wrote report: path=%s bytes=%d", path, len(text.encode("utf-8")))
