"""Run configuration: flat ``section.key = value`` files over typed defaults.

The schema is an OmegaConf structured config, so unknown keys and type
mismatches are rejected when the file and ``--set`` overrides are merged.
"""

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from omegaconf import MISSING, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from dinsim.calibrate import DEFAULT_ANCHORS, Anchor
from dinsim.model import ModelParams
from dinsim.montecarlo import EmpiricalCsv, LogNormal, OutcomeDistribution, SimConfig, TwoPoint
from dinsim.shared.constants import (
    DEFAULT_COVERAGE,
    DEFAULT_EQUITY_SHARE,
    DEFAULT_HORIZON_YEARS,
    DEFAULT_PREMIUM_RATE,
    GRID_START,
    GRID_STEP,
    GRID_STOP,
    MOC_MODEL_HIGH,
    REFERENCE_CLAWBACK_RATE,
)
from dinsim.shared.error_handling import BadDistribution, ConfigError, ValidationError

logger = logging.getLogger(__name__)

DISTRIBUTIONS = ("two_point", "lognormal", "empirical")


@dataclass
class ModelSection:
    original_capital: float = 1.0
    moc: float = MOC_MODEL_HIGH
    horizon_years: int = DEFAULT_HORIZON_YEARS
    deal_duration_years: float = float(DEFAULT_HORIZON_YEARS)
    premium_rate: float = DEFAULT_PREMIUM_RATE
    equity_share: float = DEFAULT_EQUITY_SHARE
    clawback_rate: float = REFERENCE_CLAWBACK_RATE
    coverage: float = DEFAULT_COVERAGE
    funds_cost_rate: float = 0.0
    winner_multiple: float = 1.8
    limited_liability: bool = True
    reserve_stress: float = 1.0


@dataclass
class SweepSection:
    rho_start: float = GRID_START
    rho_stop: float = GRID_STOP
    rho_step: float = GRID_STEP
    grid: Optional[List[float]] = None


@dataclass
class AnchorSection:
    metric: str = MISSING
    target: float = MISSING
    tolerance: float = MISSING


def _default_anchors() -> Dict[str, AnchorSection]:
    return {a.name: AnchorSection(a.metric, a.target, a.tolerance) for a in DEFAULT_ANCHORS}


@dataclass
class CalibrateSection:
    free_knobs: List[str] = field(
        default_factory=lambda: ["deal_duration_years", "moc", "reserve_stress", "winner_multiple"]
    )
    grid_points: int = 10
    max_sweeps: int = 40


@dataclass
class MCSection:
    seed: Optional[int] = None
    n_funds: int = 1000
    investments_per_fund: int = 100
    distribution: str = "two_point"
    rho: float = 1.0
    mu: float = -0.125
    sigma: float = 0.5
    empirical_csv: Optional[str] = None
    dispersion: float = 0.0


@dataclass
class OutputSection:
    sweep: str = "out/sweep.csv"
    calibrate: str = "out/calibration.txt"
    mc: str = "out/mc.csv"
    lifecycle: str = "out/lifecycle.log"


@dataclass
class RunConfig:
    model: ModelSection = field(default_factory=ModelSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    anchors: Dict[str, AnchorSection] = field(default_factory=_default_anchors)
    calibrate: CalibrateSection = field(default_factory=CalibrateSection)
    mc: MCSection = field(default_factory=MCSection)
    output: OutputSection = field(default_factory=OutputSection)


# ---- Loading ----


def parse_flat(text: str, source: str = "<config>") -> List[str]:
    """Turn ``section.key = value`` lines into an OmegaConf dotlist."""
    dotlist: List[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{source}:{lineno}: expected 'section.key = value', got {line!r}")
        dotlist.append(f"{key.strip()}={value.strip()}")
    return dotlist


def _check_overrides(overrides: List[str]) -> None:
    for item in overrides:
        key, sep, _ = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override must look like section.key=value, got {item!r}")


def load_config(path: Optional[Path] = None, overrides: Optional[List[str]] = None) -> RunConfig:
    """Merge defaults, the config file and ``--set`` overrides, then validate."""
    overrides = [o.strip() for o in overrides or []]
    _check_overrides(overrides)
    dotlist: List[str] = []
    if path is not None:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
        dotlist = parse_flat(text, str(path))

    try:
        schema = OmegaConf.structured(RunConfig)
        if any(item.startswith("anchors.") for item in dotlist):
            schema.anchors = {}
        merged = OmegaConf.merge(
            schema, OmegaConf.from_dotlist(dotlist), OmegaConf.from_dotlist(overrides)
        )
        config = OmegaConf.to_object(merged)
    except OmegaConfBaseException as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc

    if not isinstance(config, RunConfig):
        raise ConfigError("configuration did not resolve to a run config")
    validate(config)
    logger.info("Config loaded: path=%s overrides=%d", path, len(overrides))
    return config


def validate(config: RunConfig) -> None:
    """Build every domain object once so bad values fail before any run."""
    try:
        model_params(config)
        rho_grid(config)
        anchors(config)
        if config.mc.seed is not None:
            sim_config(config)
        if config.mc.distribution not in DISTRIBUTIONS:
            raise ValidationError(
                f"mc.distribution must be one of {', '.join(DISTRIBUTIONS)}, "
                f"got {config.mc.distribution!r}"
            )
        if config.calibrate.max_sweeps < 0:
            raise ValidationError("calibrate.max_sweeps must be >= 0")
        distribution(config)
    except (ValidationError, BadDistribution) as exc:
        raise ConfigError(exc.message) from exc
    except OSError as exc:
        raise ConfigError(
            f"cannot read mc.empirical_csv {config.mc.empirical_csv}: {exc.strerror or exc}"
        ) from exc


# ---- Domain objects ----


def model_params(config: RunConfig) -> ModelParams:
    return ModelParams(**asdict(config.model))


def rho_grid(config: RunConfig) -> List[float]:
    section = config.sweep
    if section.grid is not None:
        grid = [float(x) for x in section.grid]
    else:
        if section.rho_step <= 0:
            raise ValidationError(f"sweep.rho_step must be > 0, got {section.rho_step}")
        if section.rho_stop < section.rho_start:
            raise ValidationError("sweep.rho_stop must be >= sweep.rho_start")
        count = round((section.rho_stop - section.rho_start) / section.rho_step) + 1
        grid = np.round(section.rho_start + np.arange(count) * section.rho_step, 10).tolist()
    if any(x < 0 for x in grid):
        raise ValidationError("sweep grid values must be >= 0")
    if any(b < a for a, b in zip(grid, grid[1:], strict=False)):
        raise ValidationError("sweep grid must be sorted ascending")
    return grid


def anchors(config: RunConfig) -> List[Anchor]:
    return [
        Anchor(name, section.metric, float(section.target), float(section.tolerance))
        for name, section in config.anchors.items()
    ]


def sim_config(config: RunConfig, seed: Optional[int] = None) -> SimConfig:
    chosen = config.mc.seed if seed is None else seed
    if chosen is None:
        raise ConfigError("mc.seed is required (set it in the config or pass --seed)")
    return SimConfig(
        seed=chosen,
        n_funds=config.mc.n_funds,
        investments_per_fund=config.mc.investments_per_fund,
        params=model_params(config),
    )


def distribution(config: RunConfig) -> OutcomeDistribution:
    section = config.mc
    if section.distribution == "lognormal":
        return LogNormal(section.mu, section.sigma)
    if section.distribution == "empirical":
        if not section.empirical_csv:
            raise ConfigError("mc.empirical_csv is required for the empirical distribution")
        return EmpiricalCsv.from_csv(Path(section.empirical_csv), section.dispersion)
    return TwoPoint(config.model.winner_multiple, section.rho)
