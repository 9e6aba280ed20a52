"""Closed-form cash-flow model of a DIN-insured venture bank.

Every quantity is computed per unit of insured face and scaled by the insured
face F = moc × original_capital. Outcome templates are vectorised over the
conventional return axis so a whole sweep is one numpy pass; the scalar
entry points wrap the vector ones.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import NamedTuple, Protocol

import numpy as np
import numpy.typing as npt

from dinsim.shared.constants import (
    DEFAULT_COVERAGE,
    DEFAULT_EQUITY_SHARE,
    DEFAULT_HORIZON_YEARS,
    DEFAULT_PREMIUM_RATE,
    GRID_START,
    GRID_STEP,
    GRID_STOP,
    MOC_MAX,
    MOC_MIN,
    MOC_MODEL_HIGH,
    REFERENCE_CLAWBACK_RATE,
    RHO_TOP,
)
from dinsim.shared.error_handling import MocOutOfRange, NonPositiveDenominator, ValidationError
from dinsim.shared.money import Money, to_money

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
RhoLike = float | Sequence[float] | FloatArray


def check_moc(moc: float) -> None:
    if not (MOC_MIN <= moc <= MOC_MAX):
        raise MocOutOfRange(f"moc must be within [{MOC_MIN:g}, {MOC_MAX:g}], got {moc}")


def _check_fraction(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0):
        raise ValidationError(f"{name} must be within [0, 1], got {value}")


@dataclass(frozen=True)
class ModelParams:
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

    def __post_init__(self) -> None:
        check_moc(self.moc)
        if not self.original_capital > 0:
            raise ValidationError(f"original_capital must be > 0, got {self.original_capital}")
        if self.horizon_years < 1:
            raise ValidationError(f"horizon_years must be >= 1, got {self.horizon_years}")
        if not (0.0 < self.deal_duration_years <= self.horizon_years):
            raise ValidationError(
                f"deal_duration_years must be within (0, {self.horizon_years}], "
                f"got {self.deal_duration_years}"
            )
        for name in ("premium_rate", "equity_share", "clawback_rate", "coverage"):
            _check_fraction(name, getattr(self, name))
        if self.coverage == 0:
            raise ValidationError("coverage must be > 0")
        if not (0.0 <= self.funds_cost_rate <= 1.0):
            raise ValidationError(
                f"funds_cost_rate must be within [0, 1], got {self.funds_cost_rate}"
            )
        if not (self.winner_multiple > 0 and math.isfinite(self.winner_multiple)):
            raise ValidationError(f"winner_multiple must be > 0, got {self.winner_multiple}")
        if not (self.reserve_stress >= 1.0 and math.isfinite(self.reserve_stress)):
            raise ValidationError(f"reserve_stress must be >= 1, got {self.reserve_stress}")

    @property
    def face(self) -> float:
        return self.moc * self.original_capital

    @property
    def premium_load(self) -> float:
        """Cumulative premium per unit face over the deal."""
        return self.premium_rate * self.deal_duration_years * self.coverage


# ---- Outcome templates ----


class OutcomeSplit(NamedTuple):
    """Per unit face: defaulted weight, asset value of defaults, survivor value."""

    default_weight: FloatArray
    default_value: FloatArray
    survivor_value: FloatArray


class OutcomeTemplate(Protocol):
    def split(self, rho: FloatArray) -> OutcomeSplit: ...


@dataclass(frozen=True)
class TwoPointTemplate:
    """Losers at 0, winners at max(g, ρ), winner weight min(1, ρ/g)."""

    winner_multiple: float

    def __post_init__(self) -> None:
        if not self.winner_multiple > 0:
            raise ValidationError(f"winner_multiple must be > 0, got {self.winner_multiple}")

    def split(self, rho: FloatArray) -> OutcomeSplit:
        g = self.winner_multiple
        win_weight = np.minimum(1.0, rho / g)
        winners_default = np.maximum(g, rho) < 1.0
        default_weight = np.where(winners_default, 1.0, 1.0 - win_weight)
        default_value = np.where(winners_default, rho, 0.0)
        survivor_value = np.where(winners_default, 0.0, rho)
        return OutcomeSplit(default_weight, default_value, survivor_value)


@dataclass(frozen=True)
class EmpiricalTemplate:
    """Fixed (multiple, weight) shape rescaled so its mean equals ρ."""

    multiples: tuple[float, ...]
    weights: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        weights = self.weights or (1.0,) * len(self.multiples)
        if not self.multiples or len(weights) != len(self.multiples):
            raise ValidationError("empirical template needs one weight per multiple")
        if any(m < 0 for m in self.multiples) or any(w < 0 for w in weights):
            raise ValidationError("empirical multiples and weights must be >= 0")
        total = math.fsum(weights)
        if total <= 0:
            raise ValidationError("empirical weights must not all be zero")
        normalised = tuple(w / total for w in weights)
        if math.fsum(m * w for m, w in zip(self.multiples, normalised, strict=True)) <= 0:
            raise ValidationError("empirical template mean must be > 0")
        object.__setattr__(self, "weights", normalised)

    @property
    def mean(self) -> float:
        return math.fsum(m * w for m, w in zip(self.multiples, self.weights, strict=True))

    def split(self, rho: FloatArray) -> OutcomeSplit:
        m = np.asarray(self.multiples, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        values = np.outer(rho / self.mean, m)
        defaulted = values < 1.0
        return OutcomeSplit(
            default_weight=(w * defaulted).sum(axis=1),
            default_value=(w * values * defaulted).sum(axis=1),
            survivor_value=(w * values * ~defaulted).sum(axis=1),
        )


def template_for(params: ModelParams) -> OutcomeTemplate:
    return TwoPointTemplate(params.winner_multiple)


# ---- Flows ----


class Flows(NamedTuple):
    """Per unit face, one entry per ρ."""

    premiums: FloatArray
    payouts: FloatArray
    equity: FloatArray
    recovered_assets: FloatArray
    bank: FloatArray
    recovery: FloatArray
    invested: FloatArray
    carry: FloatArray

    @property
    def bank_clawback(self) -> FloatArray:
        return self.bank - self.recovery

    @property
    def underwriter(self) -> FloatArray:
        return (
            self.premiums
            + self.equity
            + self.recovered_assets
            + self.recovery
            - self.payouts
            - self.carry
        )


def _as_rho(rho: RhoLike) -> FloatArray:
    arr = np.atleast_1d(np.asarray(rho, dtype=np.float64))
    if arr.size and (np.any(arr < 0) or not np.all(np.isfinite(arr))):
        raise ValidationError("rho values must be finite and >= 0")
    return arr


def invested_per_face(
    params: ModelParams, rho: RhoLike, template: OutcomeTemplate | None = None
) -> FloatArray:
    """Reserve for the payout at ρ / reserve_stress, net of premiums collected."""
    template = template or template_for(params)
    stressed = template.split(_as_rho(rho) / params.reserve_stress).default_weight
    return np.maximum(0.0, params.coverage * stressed - params.premium_load)


def flows(
    params: ModelParams,
    rho: RhoLike,
    *,
    clawback_rate: float | None = None,
    template: OutcomeTemplate | None = None,
) -> Flows:
    template = template or template_for(params)
    rho_arr = _as_rho(rho)
    rate = params.clawback_rate if clawback_rate is None else clawback_rate
    e = params.equity_share

    split = template.split(rho_arr)
    premiums = np.full_like(rho_arr, params.premium_load)
    payouts = params.coverage * split.default_weight
    bank = payouts + (1.0 - e) * split.survivor_value - premiums

    owed = rate * payouts
    recovery = np.minimum(owed, np.maximum(0.0, bank)) if params.limited_liability else owed

    invested = invested_per_face(params, rho_arr, template)
    return Flows(
        premiums=premiums,
        payouts=payouts,
        equity=e * split.survivor_value,
        recovered_assets=split.default_value,
        bank=bank,
        recovery=recovery,
        invested=invested,
        carry=params.funds_cost_rate * invested * params.deal_duration_years,
    )


# ---- Public operations ----


def insured_face(params: ModelParams) -> Money:
    check_moc(params.moc)
    return to_money(params.face)


def bank_curve(
    params: ModelParams,
    rho: RhoLike,
    *,
    clawback_rate: float | None = None,
    template: OutcomeTemplate | None = None,
) -> FloatArray:
    f = flows(params, rho, clawback_rate=clawback_rate, template=template)
    return params.moc * f.bank_clawback


def bank_return(
    params: ModelParams,
    rho: float,
    *,
    clawback_rate: float | None = None,
    template: OutcomeTemplate | None = None,
) -> float:
    """Net multiple of original capital over the horizon."""
    return float(bank_curve(params, rho, clawback_rate=clawback_rate, template=template)[0])


class UnderwriterCashflow(NamedTuple):
    net: float
    invested_funds: float
    per_dollar: float

    @property
    def return_on_invested(self) -> float | None:
        return self.net / self.invested_funds if self.invested_funds > 0 else None


def underwriter_cashflow(
    params: ModelParams,
    rho: float,
    *,
    clawback_rate: float | None = None,
    template: OutcomeTemplate | None = None,
) -> UnderwriterCashflow:
    f = flows(params, rho, clawback_rate=clawback_rate, template=template)
    per_dollar = float(f.underwriter[0])
    return UnderwriterCashflow(
        net=per_dollar * params.face,
        invested_funds=float(f.invested[0]) * params.face,
        per_dollar=per_dollar,
    )


def invested_funds(
    params: ModelParams, rho: float, template: OutcomeTemplate | None = None
) -> float:
    return float(invested_per_face(params, rho, template)[0]) * params.face


def perverse_incentive_gap(params: ModelParams, rho_top: float = RHO_TOP) -> float:
    """How much more the uncured bank earns at total failure than at ρ_top."""
    at_zero, at_top = bank_curve(params, [0.0, rho_top], clawback_rate=0.0)
    if at_top <= 0:
        raise NonPositiveDenominator(
            f"baseline bank return at rho={rho_top} is {at_top:.6g}; gap undefined"
        )
    return float(at_zero / at_top - 1.0)


# ---- Sweeps ----


@dataclass(frozen=True)
class CurvePoint:
    rho: float
    bank_multiple: float
    bank_multiple_clawback: float
    uw_per_dollar_insured: float
    uw_per_dollar_insured_clawback: float
    uw_invested_funds: Money
    insured_face: Money

    @property
    def uw_return_on_invested(self) -> float | None:
        if self.uw_invested_funds <= 0:
            return None
        return self.uw_per_dollar_insured * float(self.insured_face) / float(self.uw_invested_funds)

    @property
    def uw_return_on_invested_clawback(self) -> float | None:
        if self.uw_invested_funds <= 0:
            return None
        return (
            self.uw_per_dollar_insured_clawback
            * float(self.insured_face)
            / float(self.uw_invested_funds)
        )


def default_grid() -> list[float]:
    count = round((GRID_STOP - GRID_START) / GRID_STEP) + 1
    grid: list[float] = np.round(GRID_START + np.arange(count) * GRID_STEP, 10).tolist()
    return grid


def sweep(
    params: ModelParams,
    rho_grid: Sequence[float] | None = None,
    template: OutcomeTemplate | None = None,
) -> list[CurvePoint]:
    grid = default_grid() if rho_grid is None else list(rho_grid)
    if not grid:
        return []
    rho = _as_rho(grid)
    if np.any(np.diff(rho) < 0):
        raise ValidationError("rho grid must be sorted ascending")

    baseline = flows(params, rho, clawback_rate=0.0, template=template)
    cured = flows(params, rho, template=template)
    face = insured_face(params)
    bank_scale = params.moc

    logger.info(
        "Sweep evaluated: points=%d moc=%s clawback_rate=%s",
        len(grid),
        params.moc,
        params.clawback_rate,
    )
    return [
        CurvePoint(
            rho=float(rho[i]),
            bank_multiple=float(bank_scale * baseline.bank_clawback[i]),
            bank_multiple_clawback=float(bank_scale * cured.bank_clawback[i]),
            uw_per_dollar_insured=float(baseline.underwriter[i]),
            uw_per_dollar_insured_clawback=float(cured.underwriter[i]),
            uw_invested_funds=to_money(float(baseline.invested[i]) * params.face),
            insured_face=face,
        )
        for i in range(len(grid))
    ]
