"""Root conftest: environment and shared fixtures for all tests."""

from __future__ import annotations

import os
from collections.abc import Callable
from pathlib import Path

import pytest

# ---- Environment variables for tests ----
os.environ["DINSIM_THREADS"] = "2"
os.environ["DINSIM_LOG_LEVEL"] = "WARNING"

from dinsim.model import ModelParams  # noqa: E402

# Knob set meeting all four anchors under the two-point template.
FITTED = {
    "moc": 46.55,
    "deal_duration_years": 7.54,
    "winner_multiple": 1.5104,
    "reserve_stress": 2.4177,
}


@pytest.fixture()
def default_params() -> ModelParams:
    return ModelParams()


@pytest.fixture()
def fitted_params() -> ModelParams:
    return ModelParams(**FITTED)


@pytest.fixture()
def write_config(tmp_path: Path) -> Callable[[str], Path]:
    """Write a flat config file and return its path."""

    def _write(text: str, name: str = "run.conf") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
