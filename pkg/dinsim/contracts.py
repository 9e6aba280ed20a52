"""DIN instruments and single-contract arithmetic.

A default insurance note (DIN) insures an investment booked as a bank loan:
the insured pays a flat annual premium, receives the face value on default
(handing the asset to the underwriter) and otherwise owes the underwriter an
equity share at closeout. The clawback lien attached to each payout starts at
``initial_fraction`` of the payment and accrues monthly to the full payment.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from decimal import Decimal
from enum import StrEnum
from typing import NamedTuple, Protocol

from dinsim.shared.constants import (
    DEFAULT_COVERAGE,
    DEFAULT_EQUITY_SHARE,
    DEFAULT_HORIZON_YEARS,
    DEFAULT_PREMIUM_RATE,
)
from dinsim.shared.error_handling import NotInDefault, ValidationError, ZeroAllocation
from dinsim.shared.money import ZERO, D, Money, Number, mul_rate, to_money

logger = logging.getLogger(__name__)


def _check_fraction(name: str, value: float, *, allow_zero: bool = True) -> None:
    low_ok = value >= 0 if allow_zero else value > 0
    if not (math.isfinite(value) and low_ok and value <= 1):
        bound = "[0, 1]" if allow_zero else "(0, 1]"
        raise ValidationError(f"{name} must be in {bound}, got {value}")


def _check_amount(name: str, value: Money) -> None:
    if not value.is_finite() or value < 0:
        raise ValidationError(f"{name} must be a non-negative amount, got {value}")


@dataclass(frozen=True)
class DinContract:
    face: Money
    premium_rate: float = DEFAULT_PREMIUM_RATE
    equity_share: float = DEFAULT_EQUITY_SHARE
    coverage: float = DEFAULT_COVERAGE
    term_years: int = DEFAULT_HORIZON_YEARS

    def __post_init__(self) -> None:
        object.__setattr__(self, "face", to_money(self.face))
        if self.face <= 0:
            raise ValidationError(f"face must be positive, got {self.face}")
        _check_fraction("premium_rate", self.premium_rate)
        _check_fraction("equity_share", self.equity_share)
        _check_fraction("coverage", self.coverage, allow_zero=False)
        if self.term_years < 1:
            raise ValidationError(f"term_years must be >= 1, got {self.term_years}")


class LienState(StrEnum):
    NEGOTIATION_WINDOW = "NegotiationWindow"
    ACCRUING = "Accruing"
    SETTLED = "Settled"
    BANKRUPT = "Bankrupt"


class AccrualSchedule(Protocol):
    def fraction(self, initial: Decimal, months: int, horizon: int) -> Decimal:
        """Fraction of the payment owed after ``months`` whole months."""
        ...


@dataclass(frozen=True)
class LinearAccrual:
    """Equal monthly steps from the initial fraction up to 100% at the horizon."""

    def fraction(self, initial: Decimal, months: int, horizon: int) -> Decimal:
        grown = initial + (1 - initial) * Decimal(months) / Decimal(horizon)
        return min(Decimal(1), grown)


@dataclass(frozen=True)
class ClawbackLien:
    payment_value: Money
    initial_fraction: float
    accrual_horizon_months: int
    months_elapsed: int = 0
    state: LienState = LienState.NEGOTIATION_WINDOW
    schedule: AccrualSchedule = field(default_factory=LinearAccrual)

    def __post_init__(self) -> None:
        object.__setattr__(self, "payment_value", to_money(self.payment_value))
        _check_amount("payment_value", self.payment_value)
        _check_fraction("initial_fraction", self.initial_fraction)
        if self.accrual_horizon_months < 1:
            raise ValidationError(
                f"accrual_horizon_months must be >= 1, got {self.accrual_horizon_months}"
            )
        if self.months_elapsed < 0:
            raise ValidationError(f"months_elapsed must be >= 0, got {self.months_elapsed}")

    @property
    def accrued_value(self) -> Money:
        return lien_value(self, self.months_elapsed)

    @property
    def is_closed(self) -> bool:
        return self.state in (LienState.SETTLED, LienState.BANKRUPT)


class SettlementKind(StrEnum):
    CASH = "Cash"
    EQUITY_TRANSFER = "EquityTransfer"


@dataclass(frozen=True)
class SettlementOffer:
    kind: SettlementKind
    cash_amount: Money = ZERO
    policy_amount: Money = ZERO
    investment_allocation: Money = ZERO

    def __post_init__(self) -> None:
        for name in ("cash_amount", "policy_amount", "investment_allocation"):
            amount = to_money(getattr(self, name))
            object.__setattr__(self, name, amount)
            _check_amount(name, amount)
        if self.kind is SettlementKind.EQUITY_TRANSFER and self.investment_allocation == 0:
            raise ZeroAllocation("equity transfer needs a positive investment allocation")

    @classmethod
    def cash(cls, amount: Number) -> SettlementOffer:
        return cls(SettlementKind.CASH, cash_amount=to_money(amount))

    @classmethod
    def equity(cls, policy_amount: Number, investment_allocation: Number) -> SettlementOffer:
        return cls(
            SettlementKind.EQUITY_TRANSFER,
            policy_amount=to_money(policy_amount),
            investment_allocation=to_money(investment_allocation),
        )


class DinPayout(NamedTuple):
    insured_receives: Money
    underwriter_receives_asset: Money


# ---- Operations ----


def annual_premium(contract: DinContract) -> Money:
    return to_money(contract.face * D(contract.premium_rate) * D(contract.coverage))


def premium_schedule(contract: DinContract, duration_years: float) -> list[Money]:
    """Flat yearly premiums over the deal, the last year prorated."""
    if not (math.isfinite(duration_years) and duration_years > 0):
        raise ValidationError(f"duration_years must be positive, got {duration_years}")
    annual = annual_premium(contract)
    duration = D(duration_years)
    full_years = int(duration)
    schedule = [annual] * full_years
    remainder = duration - full_years
    if remainder > 0:
        schedule.append(mul_rate(annual, remainder))
    return schedule


def din_payout(contract: DinContract, asset_value_at_default: Number) -> DinPayout:
    asset = to_money(asset_value_at_default)
    _check_amount("asset_value_at_default", asset)
    if asset >= contract.face:
        raise NotInDefault(f"asset value {asset} is not below face {contract.face}")
    insured = mul_rate(contract.face, contract.coverage)
    logger.debug("DIN payout: face=%s insured=%s asset=%s", contract.face, insured, asset)
    return DinPayout(insured_receives=insured, underwriter_receives_asset=asset)


def closeout_equity_share(contract: DinContract, equity_value: Number) -> Money:
    value = to_money(equity_value)
    _check_amount("equity_value", value)
    return mul_rate(value, contract.equity_share)


def lien_value(lien: ClawbackLien, months: int) -> Money:
    if months < 0:
        raise ValidationError(f"months must be >= 0, got {months}")
    fraction = lien.schedule.fraction(
        D(lien.initial_fraction), months, lien.accrual_horizon_months
    )
    return min(lien.payment_value, to_money(lien.payment_value * fraction))


def equity_settlement_share(policy_amount: Number, investment_allocation: Number) -> float:
    """Share of the named investment that moves to the underwriter, capped at 1."""
    policy = to_money(policy_amount)
    allocation = to_money(investment_allocation)
    _check_amount("policy_amount", policy)
    _check_amount("investment_allocation", allocation)
    if allocation == 0:
        raise ZeroAllocation("investment allocation must be positive")
    return min(1.0, float(policy / allocation))


def bundled_loan_scenario(default_fraction: float, premium_fraction: float) -> float:
    """Return multiple of a bundled loan sold at par with a DIN kept on every loan."""
    _check_fraction("default_fraction", default_fraction)
    if not (math.isfinite(premium_fraction) and premium_fraction >= 0):
        raise ValidationError(f"premium_fraction must be >= 0, got {premium_fraction}")
    return 1.0 + default_fraction - premium_fraction
