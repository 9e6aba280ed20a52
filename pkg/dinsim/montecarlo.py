"""Seeded Monte Carlo over funds of DIN-insured investments.

Each fund draws from its own Philox stream keyed by the study seed with the
fund index in the counter, so results do not depend on which thread ran which
fund. Fund cash flows are posted through the lifecycle ledger.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple, Protocol

import numpy as np
import numpy.typing as npt
import pandas as pd

from dinsim.contracts import (
    DinContract,
    SettlementOffer,
    closeout_equity_share,
    din_payout,
    premium_schedule,
)
from dinsim.lifecycle import (
    AccountId,
    EventTag,
    Ledger,
    LedgerEvent,
    attach_lien,
    bankruptcy,
    make_event,
    make_ledger,
    payout_event,
    post_events,
    settle,
    transfer,
)
from dinsim.model import ModelParams, insured_face, invested_funds
from dinsim.shared.constants import (
    BANK_BREAK_EVEN,
    DAYS_PER_YEAR,
    DEFAULT_LIEN_HORIZON_MONTHS,
    THREADS,
)
from dinsim.shared.error_handling import BadDistribution, EmptyInput, ValidationError
from dinsim.shared.money import QUANTUM, ZERO, to_money

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

SEED_LIMIT = 2**64
QUANTILES: tuple[float, ...] = (0.05, 0.25, 0.50, 0.75, 0.95)


def fund_rng(seed: int, fund_index: int) -> np.random.Generator:
    """Independent stream per fund: key = seed, counter word 2 = fund index."""
    counter = np.array([0, 0, fund_index, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


# ---- Distributions ----


class OutcomeDistribution(Protocol):
    @property
    def mean(self) -> float: ...

    def sample(self, rng: np.random.Generator, size: int) -> FloatArray: ...


@dataclass(frozen=True)
class TwoPoint:
    winner_multiple: float
    mean_return: float

    def __post_init__(self) -> None:
        if not (self.winner_multiple > 0 and math.isfinite(self.winner_multiple)):
            raise BadDistribution(f"winner_multiple must be > 0, got {self.winner_multiple}")
        if not (self.mean_return >= 0 and math.isfinite(self.mean_return)):
            raise BadDistribution(f"mean return must be >= 0, got {self.mean_return}")

    @property
    def mean(self) -> float:
        return self.mean_return

    def sample(self, rng: np.random.Generator, size: int) -> FloatArray:
        win = min(1.0, self.mean_return / self.winner_multiple)
        value = max(self.winner_multiple, self.mean_return)
        return np.where(rng.random(size) < win, value, 0.0)


@dataclass(frozen=True)
class LogNormal:
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma) and self.sigma >= 0):
            raise BadDistribution(f"lognormal needs finite mu and sigma >= 0, got {self}")

    @property
    def mean(self) -> float:
        return math.exp(self.mu + 0.5 * self.sigma**2)

    def sample(self, rng: np.random.Generator, size: int) -> FloatArray:
        return rng.lognormal(self.mu, self.sigma, size)


@dataclass(frozen=True)
class EmpiricalCsv:
    """Fund-level multiples; investments scatter around the drawn fund mean."""

    multiples: tuple[float, ...]
    weights: tuple[float, ...]
    dispersion: float = 0.0

    def __post_init__(self) -> None:
        if not self.multiples:
            raise BadDistribution("empirical distribution has no rows")
        if len(self.weights) != len(self.multiples):
            raise BadDistribution("empirical distribution needs one weight per multiple")
        values = np.asarray(self.multiples + self.weights, dtype=np.float64)
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise BadDistribution("empirical multiples and weights must be finite and >= 0")
        if math.fsum(self.weights) <= 0:
            raise BadDistribution("empirical weights must not all be zero")
        if not (math.isfinite(self.dispersion) and self.dispersion >= 0):
            raise BadDistribution(f"dispersion must be >= 0, got {self.dispersion}")

    @classmethod
    def from_csv(cls, path: Path, dispersion: float = 0.0) -> EmpiricalCsv:
        try:
            frame = pd.read_csv(path)
        except (pd.errors.EmptyDataError, pd.errors.ParserError) as exc:
            raise BadDistribution(f"cannot parse {path}: {exc}") from exc
        if "multiple" not in frame.columns:
            raise BadDistribution(f"{path}: header must contain 'multiple'")
        if "weight" not in frame.columns:
            frame["weight"] = 1.0
        try:
            multiples = frame["multiple"].astype(float)
            weights = frame["weight"].fillna(1.0).astype(float)
        except ValueError as exc:
            raise BadDistribution(f"{path}: non-numeric value ({exc})") from exc
        logger.info("Loaded empirical distribution: path=%s rows=%d", path, len(frame))
        return cls(tuple(multiples.tolist()), tuple(weights.tolist()), dispersion)

    @property
    def probabilities(self) -> FloatArray:
        w = np.asarray(self.weights, dtype=np.float64)
        return w / w.sum()

    @property
    def mean(self) -> float:
        return float(np.dot(self.probabilities, self.multiples))

    def sample(self, rng: np.random.Generator, size: int) -> FloatArray:
        fund_mean = rng.choice(np.asarray(self.multiples), p=self.probabilities)
        s = self.dispersion
        return fund_mean * rng.lognormal(-0.5 * s * s, s, size)


# ---- Study configuration ----


@dataclass(frozen=True)
class SimConfig:
    seed: int
    n_funds: int
    investments_per_fund: int
    params: ModelParams

    def __post_init__(self) -> None:
        if not (0 <= self.seed < SEED_LIMIT):
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.n_funds < 1:
            raise ValidationError(f"n_funds must be >= 1, got {self.n_funds}")
        if self.investments_per_fund < 1:
            raise ValidationError(
                f"investments_per_fund must be >= 1, got {self.investments_per_fund}"
            )


def sample_cohort(config: SimConfig, dist: OutcomeDistribution) -> list[FloatArray]:
    return [
        dist.sample(fund_rng(config.seed, i), config.investments_per_fund)
        for i in range(config.n_funds)
    ]


# ---- One fund ----


class FundResult(NamedTuple):
    bank_multiple: float
    uw_net: float
    events: tuple[LedgerEvent, ...]


@dataclass(frozen=True)
class FundTerms:
    """Per-parameter pieces shared by every fund of a study."""

    params: ModelParams
    contract: DinContract
    face: float
    premiums: tuple[LedgerEvent, ...]
    closeout_day: int

    @classmethod
    def from_params(cls, params: ModelParams) -> FundTerms:
        face = insured_face(params)
        contract = DinContract(
            face=face,
            premium_rate=params.premium_rate,
            equity_share=params.equity_share,
            coverage=params.coverage,
            term_years=params.horizon_years,
        )
        premiums = tuple(
            transfer(
                year * DAYS_PER_YEAR,
                EventTag.PREMIUM_PAID,
                AccountId.BANK,
                AccountId.UNDERWRITER,
                premium,
            )
            for year, premium in enumerate(
                premium_schedule(contract, params.deal_duration_years)
            )
            if premium > 0
        )
        return cls(
            params=params,
            contract=contract,
            face=float(face),
            premiums=premiums,
            closeout_day=round(params.deal_duration_years * DAYS_PER_YEAR),
        )


def _fund_values(multiples: Sequence[float] | FloatArray) -> FloatArray:
    values = np.asarray(multiples, dtype=np.float64)
    if values.size == 0:
        raise EmptyInput("a fund needs at least one investment")
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise BadDistribution("investment multiples must be finite and >= 0")
    return values


def _baseline_ledger(values: FloatArray, terms: FundTerms) -> tuple[Ledger, LedgerEvent | None]:
    """Premiums, closeout split, DIN payout and funds carry in one posting pass."""
    params, contract, closeout = terms.params, terms.contract, terms.closeout_day
    unit_face = terms.face / values.size
    defaulted = values < 1.0
    survivor_value = to_money(float(values[~defaulted].sum()) * unit_face)
    default_value = to_money(float(values[defaulted].sum()) * unit_face)
    default_face = to_money(int(defaulted.sum()) * unit_face)
    if default_face > 0:
        # quantising can lift an exit just under face onto face
        default_value = min(default_value, default_face - QUANTUM)

    equity = closeout_equity_share(contract, survivor_value)
    events: list[LedgerEvent] = [
        *terms.premiums,
        make_event(
            closeout,
            EventTag.EQUITY_SHARE,
            [
                (AccountId.PORTFOLIO_COMPANIES, -survivor_value),
                (AccountId.BANK, survivor_value - equity),
                (AccountId.UNDERWRITER, equity),
            ],
        ),
    ]

    payout: LedgerEvent | None = None
    if default_face > 0:
        claim = din_payout(replace(contract, face=default_face), default_value)
        payout = payout_event(closeout, claim.insured_receives, insured=AccountId.BANK)
        events.append(payout)
        events.append(
            transfer(
                closeout,
                EventTag.ASSET_TRANSFER,
                AccountId.PORTFOLIO_COMPANIES,
                AccountId.UNDERWRITER,
                claim.underwriter_receives_asset,
            )
        )

    carry = to_money(
        params.funds_cost_rate
        * invested_funds(params, float(values.mean()))
        * params.deal_duration_years
    )
    if carry > 0:
        events.append(
            transfer(
                closeout,
                EventTag.FUNDS_CARRY,
                AccountId.UNDERWRITER,
                AccountId.EXTERNAL_SINK,
                carry,
            )
        )

    opening = make_ledger({AccountId.PORTFOLIO_COMPANIES: survivor_value + default_value})
    return post_events(opening, events), payout


def _result(ledger: Ledger, params: ModelParams) -> FundResult:
    return FundResult(
        bank_multiple=float(ledger.balance(AccountId.BANK)) / params.original_capital,
        uw_net=float(ledger.balance(AccountId.UNDERWRITER)),
        events=ledger.log,
    )


def simulate_fund(
    multiples: Sequence[float] | FloatArray,
    params: ModelParams,
    with_clawback: bool,
    terms: FundTerms | None = None,
) -> FundResult:
    """Post one fund's premiums, closeout and optional lien through a ledger."""
    terms = terms if terms is not None else FundTerms.from_params(params)
    ledger, payout = _baseline_ledger(_fund_values(multiples), terms)
    if with_clawback:
        ledger = _claw_back(ledger, payout, params)
    return _result(ledger, params)


def _claw_back(ledger: Ledger, payout: LedgerEvent | None, params: ModelParams) -> Ledger:
    """Attach a lien on the payout and close it during the negotiation window."""
    if payout is None or params.clawback_rate <= 0:
        return ledger
    bank = ledger.balance(AccountId.BANK)
    case = attach_lien(
        payout,
        params.clawback_rate,
        DEFAULT_LIEN_HORIZON_MONTHS,
        firm_assets=max(ZERO, bank),
    )
    if bank >= case.accrued_value or not params.limited_liability:
        case, _ = settle(case, SettlementOffer.cash(case.accrued_value))
    else:
        case, _ = bankruptcy(case)
    return post_events(ledger, case.events)


# ---- Studies ----


class FundRun(NamedTuple):
    fund: int
    rho: float
    bank_baseline: float
    bank_clawback: float
    uw_net: float


def run_study(
    config: SimConfig, dist: OutcomeDistribution, threads: int = THREADS
) -> list[FundRun]:
    """Simulate every fund with and without the lien; ordered by fund index."""
    params = config.params
    terms = FundTerms.from_params(params)

    def run_fund(index: int) -> FundRun:
        multiples = dist.sample(fund_rng(config.seed, index), config.investments_per_fund)
        ledger, payout = _baseline_ledger(_fund_values(multiples), terms)
        cured = _claw_back(ledger, payout, params)
        return FundRun(
            fund=index,
            rho=float(multiples.mean()),
            bank_baseline=float(ledger.balance(AccountId.BANK)) / params.original_capital,
            bank_clawback=float(cured.balance(AccountId.BANK)) / params.original_capital,
            uw_net=float(cured.balance(AccountId.UNDERWRITER)),
        )

    workers = max(1, min(threads, config.n_funds))
    logger.info(
        "Monte Carlo study: seed=%d funds=%d investments=%d workers=%d",
        config.seed,
        config.n_funds,
        config.investments_per_fund,
        workers,
    )
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_fund, range(config.n_funds)))


class Summary(NamedTuple):
    count: int
    mean: float
    q05: float
    q25: float
    q50: float
    q75: float
    q95: float
    above_break_even: float


def summarize(values: Sequence[float] | FloatArray, break_even: float = BANK_BREAK_EVEN) -> Summary:
    """Mean, linear-interpolated quantiles, share of runs past break-even."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput("cannot summarise zero runs")
    q05, q25, q50, q75, q95 = (float(q) for q in np.quantile(arr, QUANTILES))
    return Summary(
        count=int(arr.size),
        mean=float(arr.mean()),
        q05=q05,
        q25=q25,
        q50=q50,
        q75=q75,
        q95=q95,
        above_break_even=float(np.mean(arr > break_even)),
    )
