"""Tests for shared constants module."""

from dinsim.shared.constants import (
    DAYS_PER_MONTH,
    DAYS_PER_YEAR,
    LOG_LEVEL,
    MOC_MAX,
    MOC_MIN,
    NEGOTIATION_WINDOW_DAYS,
    NORMAL_RANGE,
    RHO_TOP,
    THREADS,
    ZERO_FUNDS_RANGE,
)


def test_environment_overrides() -> None:
    assert THREADS == 2
    assert LOG_LEVEL == "WARNING"


def test_calendar() -> None:
    assert DAYS_PER_MONTH == 30
    assert DAYS_PER_YEAR == 360
    assert NEGOTIATION_WINDOW_DAYS == DAYS_PER_MONTH


def test_moc_bounds() -> None:
    assert (MOC_MIN, MOC_MAX) == (2.0, 47.0)


def test_shaded_regions() -> None:
    assert NORMAL_RANGE == (0.9, 1.5)
    assert ZERO_FUNDS_RANGE == (2.27, 8.0)
    assert RHO_TOP == NORMAL_RANGE[1]
