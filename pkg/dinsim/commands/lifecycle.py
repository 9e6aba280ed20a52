"""Replay a lien scenario file through the ledger and write the event log.

Scenario lines are ``action key=value ...``; ``#`` starts a comment::

    payout amount=100 day=0
    attach rate=0.623 horizon=12 firm_assets=500
    advance days=30
    settle kind=cash amount=62.3
    settle kind=equity policy=50 allocation=200
    bankruptcy assets=40
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import typer

from dinsim.contracts import SettlementOffer
from dinsim.lifecycle import (
    AccountId,
    Ledger,
    LedgerEvent,
    LienCase,
    advance_time,
    attach_lien,
    bankruptcy,
    export_log,
    make_ledger,
    payout_event,
    post_event,
    settle,
)
from dinsim.shared.config import OutputSection
from dinsim.shared.constants import DEFAULT_LIEN_HORIZON_MONTHS, NEGOTIATION_WINDOW_DAYS
from dinsim.shared.error_handling import (
    EXIT_OK,
    ConfigError,
    LedgerError,
    TransitionError,
    handle_errors,
)
from dinsim.shared.money import format_money
from dinsim.shared.output import write_text

logger = logging.getLogger(__name__)

ACTIONS: dict[str, frozenset[str]] = {
    "payout": frozenset({"amount", "day", "insured"}),
    "attach": frozenset({"rate", "horizon", "firm_assets", "window"}),
    "advance": frozenset({"days"}),
    "settle": frozenset({"kind", "amount", "policy", "allocation"}),
    "bankruptcy": frozenset({"assets"}),
}


@dataclass(frozen=True)
class Step:
    lineno: int
    action: str
    args: dict[str, str] = field(default_factory=dict)

    def get(self, key: str, default: str | None = None) -> str:
        value = self.args.get(key, default)
        if value is None:
            raise ConfigError(f"line {self.lineno}: {self.action} needs {key}=")
        return value

    def number(self, key: str, default: str | None = None) -> int:
        raw = self.get(key, default)
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"line {self.lineno}: {key} must be an integer, got {raw!r}") from exc


def parse_scenario(text: str) -> list[Step]:
    steps: list[Step] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        action, *pairs = line.split()
        if action not in ACTIONS:
            raise ConfigError(f"line {lineno}: unknown action {action!r}")
        args: dict[str, str] = {}
        for pair in pairs:
            key, sep, value = pair.partition("=")
            if not sep or key not in ACTIONS[action]:
                raise ConfigError(f"line {lineno}: unexpected argument {pair!r} for {action}")
            args[key] = value
        steps.append(Step(lineno, action, args))
    return steps


@dataclass
class Replay:
    ledger: Ledger = field(default_factory=make_ledger)
    payout: LedgerEvent | None = None
    case: LienCase | None = None
    posted: int = 0

    def require_case(self, step: Step) -> LienCase:
        if self.case is None:
            raise TransitionError(f"line {step.lineno}: {step.action} before any lien is attached")
        return self.case

    def sync(self) -> None:
        """Post case events not yet on the ledger."""
        if self.case is None:
            return
        for event in self.case.events[self.posted :]:
            self.ledger = post_event(self.ledger, event)
        self.posted = len(self.case.events)

    def apply(self, step: Step) -> None:
        if step.action == "payout":
            insured = AccountId(step.get("insured", AccountId.FIRM.value))
            self.payout = payout_event(step.number("day", "0"), step.get("amount"), insured)
            self.ledger = post_event(self.ledger, self.payout)
            self.case, self.posted = None, 0
            return
        if step.action == "attach":
            if self.payout is None:
                raise TransitionError(
                    f"line {step.lineno}: attach needs a payout with no lien on it yet"
                )
            self.case = attach_lien(
                self.payout,
                float(step.get("rate")),
                step.number("horizon", str(DEFAULT_LIEN_HORIZON_MONTHS)),
                firm_assets=step.get("firm_assets", "0"),
                negotiation_window_days=step.number("window", str(NEGOTIATION_WINDOW_DAYS)),
            )
            self.payout, self.posted = None, 0
        elif step.action == "advance":
            self.case = advance_time(self.require_case(step), step.number("days"))
        elif step.action == "settle":
            case = self.require_case(step)
            kind = step.get("kind")
            if kind == "cash":
                offer = SettlementOffer.cash(step.get("amount", str(case.accrued_value)))
            elif kind == "equity":
                offer = SettlementOffer.equity(step.get("policy"), step.get("allocation"))
            else:
                raise ConfigError(f"line {step.lineno}: settle kind must be cash or equity")
            self.case, _ = settle(case, offer)
        else:
            assets = step.args.get("assets")
            self.case, _ = bankruptcy(self.require_case(step), assets)
        self.sync()


def replay_scenario(text: str) -> Ledger:
    replay = Replay()
    for step in parse_scenario(text):
        try:
            replay.apply(step)
        except (ValueError, ArithmeticError) as exc:
            raise ConfigError(f"line {step.lineno}: bad value ({exc})") from exc
    ledger = replay.ledger
    if ledger.total() != sum(ledger.opening.values()):
        raise LedgerError(f"ledger total drifted to {ledger.total()}")
    return ledger


@handle_errors
def run(scenario: Path, out: Path | None) -> int:
    try:
        text = scenario.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {scenario}: {exc.strerror or exc}") from exc
    ledger = replay_scenario(text)
    path = out or Path(OutputSection().lifecycle)
    write_text(path, export_log(ledger.log))
    for account in ledger.accounts():
        typer.echo(f"{account.id} = {format_money(account.balance)}")
    typer.echo(f"total = {format_money(ledger.total())}")
    return EXIT_OK
