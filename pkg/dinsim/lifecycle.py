"""Lien lifecycle state machine on an event-sourced, zero-sum ledger.

A DIN payout credits the insured and attaches a clawback lien on it. The
insured has a negotiation window (30 days by default) before the lien starts
accruing month by month; the case ends when the lien is settled in cash or
equity, or when the debtor goes bankrupt and the underwriter recovers in
primary position. Every cash movement is a ``LedgerEvent`` whose postings sum
to exactly zero.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from enum import StrEnum
from typing import NamedTuple

from dinsim.contracts import (
    ClawbackLien,
    LienState,
    SettlementKind,
    SettlementOffer,
    equity_settlement_share,
    lien_value,
)
from dinsim.shared.constants import DAYS_PER_MONTH, NEGOTIATION_WINDOW_DAYS
from dinsim.shared.error_handling import (
    CaseClosed,
    InsufficientCash,
    UnbalancedEvent,
    ValidationError,
    WrongEventKind,
)
from dinsim.shared.money import ZERO, Money, Number, format_money, to_money

logger = logging.getLogger(__name__)


class AccountId(StrEnum):
    BANK = "Bank"
    UNDERWRITER = "Underwriter"
    FIRM = "Firm"
    PORTFOLIO_COMPANIES = "PortfolioCompanies"
    EXTERNAL_SINK = "ExternalSink"


class EventTag(StrEnum):
    PREMIUM_PAID = "PremiumPaid"
    DIN_PAYOUT = "DinPayout"
    ASSET_TRANSFER = "AssetTransfer"
    LIEN_ATTACHED = "LienAttached"
    LIEN_ACCRUED = "LienAccrued"
    LIEN_SETTLED_CASH = "LienSettledCash"
    LIEN_SETTLED_EQUITY = "LienSettledEquity"
    BANKRUPTCY_RECOVERY = "BankruptcyRecovery"
    EQUITY_SHARE = "EquityShare"
    FUNDS_CARRY = "FundsCarry"


class Posting(NamedTuple):
    account: AccountId
    amount: Money


class LedgerAccount(NamedTuple):
    id: AccountId
    balance: Money


@dataclass(frozen=True)
class LedgerEvent:
    timestamp: int
    tag: EventTag
    postings: tuple[Posting, ...] = ()
    memo: Money | None = None

    @property
    def total(self) -> Money:
        return to_money(sum((p.amount for p in self.postings), ZERO))

    @property
    def is_balanced(self) -> bool:
        return self.total == 0


def make_event(
    timestamp: int,
    tag: EventTag,
    postings: Iterable[tuple[AccountId, Number]] = (),
    memo: Number | None = None,
) -> LedgerEvent:
    """Build an event, quantising every amount and dropping zero postings."""
    amounts = ((account, to_money(amount)) for account, amount in postings)
    quantised = tuple(Posting(account, amount) for account, amount in amounts if amount != 0)
    return LedgerEvent(
        timestamp=timestamp,
        tag=tag,
        postings=quantised,
        memo=None if memo is None else to_money(memo),
    )


def transfer(
    timestamp: int,
    tag: EventTag,
    source: AccountId,
    target: AccountId,
    amount: Number,
    memo: Number | None = None,
) -> LedgerEvent:
    value = to_money(amount)
    return make_event(timestamp, tag, [(source, -value), (target, value)], memo)


# ---- Ledger ----


@dataclass(frozen=True)
class Ledger:
    """Balances plus the append-only log that produced them."""

    opening: Mapping[AccountId, Money] = field(default_factory=dict)
    balances: Mapping[AccountId, Money] = field(default_factory=dict)
    log: tuple[LedgerEvent, ...] = ()

    def balance(self, account: AccountId) -> Money:
        return self.balances.get(account, ZERO)

    def accounts(self) -> list[LedgerAccount]:
        return [LedgerAccount(account, self.balance(account)) for account in AccountId]

    def total(self) -> Money:
        return to_money(sum(self.balances.values(), ZERO))


def make_ledger(opening: Mapping[AccountId, Number] | None = None) -> Ledger:
    start = {account: ZERO for account in AccountId}
    for account, amount in (opening or {}).items():
        start[AccountId(account)] = to_money(amount)
    return Ledger(opening=dict(start), balances=dict(start))


def post_event(ledger: Ledger, event: LedgerEvent) -> Ledger:
    return post_events(ledger, (event,))


def post_events(ledger: Ledger, events: Iterable[LedgerEvent]) -> Ledger:
    """Apply events in order; nothing is applied if any of them is unbalanced."""
    balances = dict(ledger.balances)
    log = list(ledger.log)
    for event in events:
        if not event.is_balanced:
            raise UnbalancedEvent(
                f"{event.tag} at day {event.timestamp} does not sum to zero (total {event.total})"
            )
        for posting in event.postings:
            balances[posting.account] = balances.get(posting.account, ZERO) + posting.amount
        log.append(event)
    return Ledger(opening=ledger.opening, balances=balances, log=tuple(log))


def replay(
    events: Iterable[LedgerEvent], opening: Mapping[AccountId, Number] | None = None
) -> Ledger:
    return post_events(make_ledger(opening), events)


def export_log(events: Iterable[LedgerEvent]) -> str:
    """One line per posting: ``day,tag,account,amount``."""
    lines: list[str] = []
    for event in events:
        if not event.postings:
            memo = format_money(event.memo) if event.memo is not None else ""
            lines.append(f"{event.timestamp},{event.tag},-,{memo}")
            continue
        for posting in event.postings:
            lines.append(
                f"{event.timestamp},{event.tag},{posting.account},{format_money(posting.amount)}"
            )
    return "".join(f"{line}\n" for line in lines)


# ---- Lien cases ----


@dataclass(frozen=True)
class LienCase:
    lien: ClawbackLien
    attach_day: int
    negotiation_window_days: int = NEGOTIATION_WINDOW_DAYS
    firm_assets: Money = ZERO
    debtor: AccountId = AccountId.FIRM
    day: int = -1
    equity_share_transferred: float | None = None
    events: tuple[LedgerEvent, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "firm_assets", to_money(self.firm_assets))
        if self.negotiation_window_days < 0:
            raise ValidationError(
                f"negotiation_window_days must be >= 0, got {self.negotiation_window_days}"
            )
        if self.firm_assets < 0:
            raise ValidationError(f"firm_assets must be >= 0, got {self.firm_assets}")
        if self.day < self.attach_day:
            object.__setattr__(self, "day", self.attach_day)

    @property
    def state(self) -> LienState:
        return self.lien.state

    @property
    def accrued_value(self) -> Money:
        return self.lien.accrued_value

    @property
    def days_since_attach(self) -> int:
        return self.day - self.attach_day


def payout_event(day: int, amount: Number, insured: AccountId = AccountId.FIRM) -> LedgerEvent:
    return transfer(day, EventTag.DIN_PAYOUT, AccountId.UNDERWRITER, insured, amount)


def _payout_recipient(event: LedgerEvent) -> tuple[AccountId, Money]:
    credits = [p for p in event.postings if p.account is not AccountId.UNDERWRITER]
    if not credits:
        return AccountId.FIRM, ZERO
    return credits[0].account, to_money(sum((p.amount for p in credits), ZERO))


def attach_lien(
    payout: LedgerEvent,
    clawback_rate: float,
    horizon_months: int,
    *,
    firm_assets: Number = 0,
    negotiation_window_days: int = NEGOTIATION_WINDOW_DAYS,
) -> LienCase:
    if payout.tag is not EventTag.DIN_PAYOUT:
        raise WrongEventKind(f"a lien attaches to a DinPayout event, not {payout.tag}")
    debtor, payment = _payout_recipient(payout)
    lien = ClawbackLien(
        payment_value=payment,
        initial_fraction=clawback_rate,
        accrual_horizon_months=horizon_months,
    )
    attached = make_event(payout.timestamp, EventTag.LIEN_ATTACHED, memo=lien.accrued_value)
    logger.info(
        "Lien attached: day=%d debtor=%s payment=%s accrued=%s",
        payout.timestamp,
        debtor,
        payment,
        lien.accrued_value,
    )
    return LienCase(
        lien=lien,
        attach_day=payout.timestamp,
        negotiation_window_days=negotiation_window_days,
        firm_assets=to_money(firm_assets),
        debtor=debtor,
        events=(attached,),
    )


def _require_open(case: LienCase, action: str) -> None:
    if case.lien.is_closed:
        raise CaseClosed(f"cannot {action}: lien case is {case.state}")


def advance_time(case: LienCase, days: int) -> LienCase:
    _require_open(case, "advance time")
    if days < 0:
        raise ValidationError(f"days must be >= 0, got {days}")
    if days == 0:
        return case

    day = case.day + days
    elapsed = day - case.attach_day
    window = case.negotiation_window_days
    if elapsed < window:
        state, months = LienState.NEGOTIATION_WINDOW, 0
    else:
        state, months = LienState.ACCRUING, elapsed // DAYS_PER_MONTH

    lien = case.lien
    accruals = [
        make_event(
            case.attach_day + max(month * DAYS_PER_MONTH, window),
            EventTag.LIEN_ACCRUED,
            memo=lien_value(lien, month),
        )
        for month in range(lien.months_elapsed + 1, min(months, lien.accrual_horizon_months) + 1)
    ]
    lien = replace(lien, months_elapsed=max(lien.months_elapsed, months), state=state)
    return replace(case, lien=lien, day=day, events=(*case.events, *accruals))


def settle(case: LienCase, offer: SettlementOffer) -> tuple[LienCase, LedgerEvent]:
    _require_open(case, "settle")
    accrued = case.accrued_value

    if offer.kind is SettlementKind.CASH:
        if offer.cash_amount < accrued:
            raise InsufficientCash(
                f"cash offer {offer.cash_amount} is below the accrued lien value {accrued} "
                f"(state {case.state})"
            )
        event = transfer(
            case.day, EventTag.LIEN_SETTLED_CASH, case.debtor, AccountId.UNDERWRITER, accrued
        )
        share = None
    else:
        share = equity_settlement_share(offer.policy_amount, offer.investment_allocation)
        value = min(offer.policy_amount, case.lien.payment_value)
        event = transfer(
            case.day, EventTag.LIEN_SETTLED_EQUITY, case.debtor, AccountId.UNDERWRITER, value
        )

    logger.info(
        "Lien settled: kind=%s day=%d accrued=%s share=%s",
        offer.kind,
        case.day,
        accrued,
        share,
    )
    lien = replace(case.lien, state=LienState.SETTLED)
    settled = replace(
        case, lien=lien, equity_share_transferred=share, events=(*case.events, event)
    )
    return settled, event


def bankruptcy(case: LienCase, firm_assets: Number | None = None) -> tuple[LienCase, LedgerEvent]:
    """Underwriter recovers in primary position up to the debtor's assets."""
    _require_open(case, "enter bankruptcy")
    assets = case.firm_assets if firm_assets is None else to_money(firm_assets)
    if assets < 0:
        raise ValidationError(f"firm_assets must be >= 0, got {assets}")
    accrued = case.accrued_value
    recovery = min(accrued, assets)
    shortfall = accrued - recovery
    event = transfer(
        case.day,
        EventTag.BANKRUPTCY_RECOVERY,
        case.debtor,
        AccountId.UNDERWRITER,
        recovery,
        memo=shortfall,
    )
    if shortfall > 0:
        logger.info(
            "Bankruptcy shortfall: day=%d accrued=%s recovered=%s loss=%s",
            case.day,
            accrued,
            recovery,
            shortfall,
        )
    lien = replace(case.lien, state=LienState.BANKRUPT)
    closed = replace(case, lien=lien, firm_assets=assets, events=(*case.events, event))
    return closed, event


