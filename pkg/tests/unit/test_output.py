"""Tests for artifact formatting and CSV metadata."""

from __future__ import annotations

from decimal import Decimal
from pathlib import Path

import pandas as pd
import pytest
from pytest_mock import MockerFixture

from dinsim.shared.error_handling import OutputError
from dinsim.shared.output import (
    format_value,
    key_value_text,
    parse_key_value,
    read_csv,
    write_csv,
    write_text,
)


@pytest.mark.parametrize(
    ("value", "expected"),
    [
        (None, "none"),
        (True, "true"),
        (False, "false"),
        (0.1, "0.1"),
        (1 / 3, "0.3333333333333333"),
        (7, "7"),
        (Decimal("2.5"), "2.5000"),
        ("bank", "bank"),
    ],
)
def test_format_value(value: object, expected: str) -> None:
    assert format_value(value) == expected  # type: ignore[arg-type]


def test_key_value_text_parses_back() -> None:
    text = key_value_text({"converged": True, "moc": 43.0})
    assert text == "converged = true\nmoc = 43.0\n"
    assert parse_key_value(text.splitlines()) == {"converged": "true", "moc": "43.0"}


def test_parse_key_value_filters_prefix() -> None:
    lines = ["# a = 1", "rho,bank", "# b = x = y", "#c"]
    assert parse_key_value(lines, prefix="# ") == {"a": "1", "b": "x = y"}


class TestCsv:
    def test_metadata_round_trip(self, tmp_path: Path) -> None:
        path = tmp_path / "nested" / "table.csv"
        frame = pd.DataFrame({"rho": [0.0, 0.5], "bank": [21.5, 29.0]})
        write_csv(path, frame, header={"command": "sweep"}, footer={"summary.mean": 1.25})

        table, meta = read_csv(path)

        assert meta == {"command": "sweep", "summary.mean": "1.25"}
        assert list(table.columns) == ["rho", "bank"]
        assert table["bank"].tolist() == ["21.5", "29.0"]

    def test_lf_endings(self, tmp_path: Path) -> None:
        path = tmp_path / "table.csv"
        write_csv(path, pd.DataFrame({"x": [1]}), header={"k": "v"})
        raw = path.read_bytes()
        assert b"\r\n" not in raw
        assert raw == b"# k = v\nx\n1\n"

    def test_header_only_table(self, tmp_path: Path) -> None:
        path = tmp_path / "empty.csv"
        write_csv(path, pd.DataFrame(columns=["rho", "bank"]))
        table, meta = read_csv(path)
        assert table.empty
        assert list(table.columns) == ["rho", "bank"]
        assert meta == {}

    def test_write_failure(self, tmp_path: Path, mocker: MockerFixture) -> None:
        mocker.patch.object(Path, "open", side_effect=PermissionError(13, "Permission denied"))
        with pytest.raises(OutputError, match="Permission denied"):
            write_csv(tmp_path / "t.csv", pd.DataFrame({"x": [1]}))

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(OutputError, match="cannot read"):
            read_csv(tmp_path / "absent.csv")


def test_write_text_creates_parents(tmp_path: Path) -> None:
    path = tmp_path / "a" / "b" / "report.txt"
    write_text(path, "ok\n")
    assert path.read_text(encoding="utf-8") == "ok\n"


def test_write_text_failure(tmp_path: Path) -> None:
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OutputError):
        write_text(blocker / "report.txt", "x")
