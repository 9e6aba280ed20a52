"""Tests for flat config loading and validation."""

from __future__ import annotations

from collections.abc import Callable
from pathlib import Path

import pytest

from dinsim.montecarlo import EmpiricalCsv, LogNormal, TwoPoint
from dinsim.shared.config import (
    RunConfig,
    anchors,
    distribution,
    load_config,
    model_params,
    parse_flat,
    rho_grid,
    sim_config,
)
from dinsim.shared.error_handling import ConfigError

WriteConfig = Callable[..., Path]
DEFAULT_CONF = Path(__file__).resolve().parents[2] / "config" / "default.conf"


class TestParseFlat:
    def test_skips_comments_and_blanks(self) -> None:
        text = "# header\n\nmodel.moc = 30\n  sweep.rho_step=0.5  \n"
        assert parse_flat(text) == ["model.moc=30", "sweep.rho_step=0.5"]

    def test_value_may_contain_equals(self) -> None:
        assert parse_flat("output.sweep = a=b.csv") == ["output.sweep=a=b.csv"]

    @pytest.mark.parametrize("line", ["model.moc 30", "= 30"])
    def test_rejects_malformed_lines(self, line: str) -> None:
        with pytest.raises(ConfigError, match=":1:"):
            parse_flat(line, "run.conf")


class TestLoadConfig:
    def test_defaults_without_file(self) -> None:
        config = load_config()
        assert isinstance(config, RunConfig)
        assert config.model.moc == 43
        assert config.mc.seed is None
        assert [a.name for a in anchors(config)] == [
            "bank_at_zero",
            "gap_64",
            "rho_star",
            "clawback_rate_reference",
        ]

    def test_shipped_file_matches_defaults(self) -> None:
        config = load_config(DEFAULT_CONF)
        assert config.mc.seed == 1
        assert model_params(config) == model_params(load_config())
        assert len(rho_grid(config)) == 801

    def test_file_values(self, write_config: WriteConfig) -> None:
        path = write_config("model.moc = 30\nmodel.limited_liability = false\nmc.seed = 9\n")
        config = load_config(path)
        params = model_params(config)
        assert params.moc == 30
        assert params.limited_liability is False
        assert sim_config(config).seed == 9

    def test_overrides_beat_file(self, write_config: WriteConfig) -> None:
        path = write_config("model.moc = 30\n")
        config = load_config(path, ["model.moc=35", " model.premium_rate = 0.02 "])
        assert config.model.moc == 35
        assert config.model.premium_rate == 0.02

    def test_unknown_key(self, write_config: WriteConfig) -> None:
        with pytest.raises(ConfigError):
            load_config(write_config("model.mco = 30\n"))

    def test_type_mismatch(self) -> None:
        with pytest.raises(ConfigError):
            load_config(None, ["model.moc=lots"])

    def test_malformed_override(self) -> None:
        with pytest.raises(ConfigError, match="override"):
            load_config(None, ["model.moc"])

    def test_domain_invariants_surface_as_config_errors(self) -> None:
        with pytest.raises(ConfigError, match="moc"):
            load_config(None, ["model.moc=60"])

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.conf")


class TestAnchors:
    def test_file_anchors_replace_defaults(self, write_config: WriteConfig) -> None:
        path = write_config(
            "anchors.flat.metric = bank_at_zero\n"
            "anchors.flat.target = 21.5\n"
            "anchors.flat.tolerance = 0.1\n"
        )
        (anchor,) = anchors(load_config(path))
        assert (anchor.name, anchor.metric, anchor.target, anchor.tolerance) == (
            "flat",
            "bank_at_zero",
            21.5,
            0.1,
        )

    def test_missing_field(self, write_config: WriteConfig) -> None:
        path = write_config("anchors.flat.metric = bank_at_zero\nanchors.flat.target = 1\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_unknown_metric(self, write_config: WriteConfig) -> None:
        path = write_config(
            "anchors.x.metric = sharpe\nanchors.x.target = 1\nanchors.x.tolerance = 1\n"
        )
        with pytest.raises(ConfigError):
            load_config(path)


class TestGrid:
    def test_explicit_grid(self) -> None:
        config = load_config(None, ["sweep.grid=[0.5, 1.0, 2.0]"])
        assert rho_grid(config) == [0.5, 1.0, 2.0]

    def test_empty_grid(self) -> None:
        assert rho_grid(load_config(None, ["sweep.grid=[]"])) == []

    def test_range_grid(self) -> None:
        config = load_config(None, ["sweep.rho_start=0.9", "sweep.rho_stop=1.5"])
        grid = rho_grid(config)
        assert len(grid) == 61
        assert grid[0] == 0.9
        assert grid[-1] == 1.5

    @pytest.mark.parametrize(
        "override",
        ["sweep.grid=[2.0, 1.0]", "sweep.grid=[-1.0]", "sweep.rho_step=0", "sweep.rho_stop=-1"],
    )
    def test_bad_grid(self, override: str) -> None:
        with pytest.raises(ConfigError):
            load_config(None, [override])


class TestSimulation:
    def test_seed_required(self) -> None:
        with pytest.raises(ConfigError, match="seed"):
            sim_config(load_config())

    def test_cli_seed_wins(self) -> None:
        config = load_config(None, ["mc.seed=3"])
        assert sim_config(config, seed=8).seed == 8

    def test_bad_seed(self) -> None:
        with pytest.raises(ConfigError):
            load_config(None, ["mc.seed=-4"])

    def test_unknown_distribution(self) -> None:
        with pytest.raises(ConfigError, match="distribution"):
            load_config(None, ["mc.distribution=pareto"])

    def test_two_point_uses_winner_multiple(self) -> None:
        config = load_config(None, ["model.winner_multiple=2.5", "mc.rho=0.8"])
        assert distribution(config) == TwoPoint(2.5, 0.8)

    def test_lognormal(self) -> None:
        config = load_config(None, ["mc.distribution=lognormal", "mc.sigma=0.3"])
        assert distribution(config) == LogNormal(-0.125, 0.3)

    def test_empirical(self, tmp_path: Path) -> None:
        csv = tmp_path / "funds.csv"
        csv.write_text("multiple\n1.0\n2.0\n")
        config = load_config(
            None, ["mc.distribution=empirical", f"mc.empirical_csv={csv}", "mc.dispersion=0.2"]
        )
        dist = distribution(config)
        assert isinstance(dist, EmpiricalCsv)
        assert dist.dispersion == 0.2

    def test_empirical_needs_path(self) -> None:
        with pytest.raises(ConfigError, match="empirical_csv"):
            load_config(None, ["mc.distribution=empirical"])

    def test_empirical_missing_file_fails_at_load(self, tmp_path: Path) -> None:
        missing = tmp_path / "none.csv"
        with pytest.raises(ConfigError, match="cannot read mc.empirical_csv"):
            load_config(None, ["mc.distribution=empirical", f"mc.empirical_csv={missing}"])

    def test_malformed_empirical_file_fails_at_load(self, tmp_path: Path) -> None:
        csv = tmp_path / "funds.csv"
        csv.write_text("weight\n1\n")
        with pytest.raises(ConfigError, match="multiple"):
            load_config(None, ["mc.distribution=empirical", f"mc.empirical_csv={csv}"])
