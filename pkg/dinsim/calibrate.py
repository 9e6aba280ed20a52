"""Solvers for the clawback rate, the zero-invested-funds crossing and the
anchor fit.

All searches are deterministic: grid search over a fixed product grid, then
coordinate bisection with ties broken by knob order. Anchors are soft targets;
a report always carries every residual, met or missed.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from dinsim.model import (
    ModelParams,
    bank_return,
    default_grid,
    flows,
    invested_funds,
    invested_per_face,
    perverse_incentive_gap,
)
from dinsim.shared.constants import MOC_MAX, REFERENCE_CLAWBACK_RATE
from dinsim.shared.error_handling import (
    AppError,
    InfeasibleBounds,
    NoCrossing,
    NotBracketed,
    NotMonotone,
    ValidationError,
)
from dinsim.shared.output import format_float

logger = logging.getLogger(__name__)

SLACK = 1e-9
CLAWBACK_TOL = 1e-6
RHO_STAR_TOL = 1e-4
FIT_RHO_STAR_TOL = 1e-7
CONVERGED_NORM = 0.05
MIN_SWEEP_GAIN = 1e-4
LINE_SEARCH_STEPS = 24
STATICS_DEADBAND = 2e-6

# ---- Bisection ----


def bisect_threshold(
    fn: Callable[[float], float],
    epsilon: float,
    lo: float,
    hi: float,
    tol: float = CLAWBACK_TOL,
    check_points: int = 8,
) -> float:
    """Smallest x in [lo, hi] with fn(x) >= epsilon, for non-decreasing fn."""
    target = epsilon - SLACK
    f_hi = fn(hi)
    if f_hi < target:
        raise NotBracketed(f"value at upper bound {hi:g} is {f_hi:.6g}, below {epsilon:g}")
    if check_points > 1:
        samples = [fn(x) for x in np.linspace(lo, hi, check_points)]
        if any(b < a - SLACK for a, b in itertools.pairwise(samples)):
            raise NotMonotone(f"function is not non-decreasing on [{lo:g}, {hi:g}]")
    if fn(lo) >= target:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fn(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def _net_at_zero(params: ModelParams) -> Callable[[float], float]:
    """Underwriter net at total failure as a function of the clawback rate."""
    f = flows(params, 0.0, clawback_rate=0.0)
    payouts = float(f.payouts[0])
    cap = max(0.0, float(f.bank[0]))
    base = float(f.underwriter[0])
    face = params.face

    if params.limited_liability:
        return lambda rate: face * (base + min(rate * payouts, cap))
    return lambda rate: face * (base + rate * payouts)


def solve_clawback_rate(
    params: ModelParams, epsilon: float = 0.0, tol: float = CLAWBACK_TOL
) -> float:
    if epsilon < 0:
        raise ValidationError(f"epsilon must be >= 0, got {epsilon}")
    return bisect_threshold(_net_at_zero(params), epsilon, 0.0, 1.0, tol)


def find_rho_star(
    params: ModelParams, grid: Sequence[float] | None = None, tol: float = RHO_STAR_TOL
) -> float:
    """Smallest ρ at which the underwriter carries no invested funds."""
    rho = np.asarray(default_grid() if grid is None else grid, dtype=np.float64)
    if rho.size == 0:
        raise NoCrossing("empty rho grid")
    curve = invested_per_face(params, rho) * params.face
    if np.any(np.diff(curve) > SLACK):
        raise NotMonotone("invested funds increase somewhere on the rho grid")
    zero = np.flatnonzero(curve <= 0)
    if zero.size == 0:
        raise NoCrossing(
            f"invested funds stay positive up to rho={rho[-1]:g} (last {curve[-1]:.6g})"
        )
    first = int(zero[0])
    if first == 0:
        return float(rho[0])
    return bisect_threshold(
        lambda x: -invested_funds(params, x),
        0.0,
        float(rho[first - 1]),
        float(rho[first]),
        tol,
        check_points=0,
    )


# ---- Anchors ----


METRICS: dict[str, Callable[[ModelParams], float]] = {
    "bank_at_zero": lambda p: bank_return(p, 0.0, clawback_rate=0.0),
    "gap": perverse_incentive_gap,
    "rho_star": lambda p: find_rho_star(p, tol=FIT_RHO_STAR_TOL),
    "clawback_rate": solve_clawback_rate,
}


@dataclass(frozen=True)
class Anchor:
    name: str
    metric: str
    target: float
    tolerance: float

    def __post_init__(self) -> None:
        if self.metric not in METRICS:
            raise ValidationError(
                f"anchor {self.name}: unknown metric {self.metric!r} "
                f"(expected one of {', '.join(sorted(METRICS))})"
            )
        if not self.tolerance > 0:
            raise ValidationError(f"anchor {self.name}: tolerance must be > 0")


DEFAULT_ANCHORS: tuple[Anchor, ...] = (
    Anchor("bank_at_zero", "bank_at_zero", 29.0, 0.5),
    Anchor("gap_64", "gap", 0.64, 0.05),
    Anchor("rho_star", "rho_star", 2.275, 0.005),
    Anchor("clawback_rate_reference", "clawback_rate", REFERENCE_CLAWBACK_RATE, 0.02),
)


class AnchorResult(NamedTuple):
    anchor: Anchor
    value: float
    residual: float

    @property
    def normalised(self) -> float:
        return abs(self.residual) / self.anchor.tolerance

    @property
    def within(self) -> bool:
        return abs(self.residual) <= self.anchor.tolerance


def evaluate_anchor(anchor: Anchor, params: ModelParams) -> AnchorResult:
    try:
        value = METRICS[anchor.metric](params)
    except AppError as exc:
        logger.debug("Anchor metric failed: anchor=%s reason=%s", anchor.name, exc.message)
        return AnchorResult(anchor, math.nan, math.inf)
    return AnchorResult(anchor, value, value - anchor.target)


Score = tuple[float, float]


def _score(results: Sequence[AnchorResult]) -> Score:
    norms = [r.normalised for r in results]
    return max(norms), math.fsum(n * n for n in norms)


# ---- Fit ----

KNOB_BOUNDS: dict[str, tuple[float, float]] = {
    "moc": (30.0, MOC_MAX),
    "deal_duration_years": (0.5, 10.0),
    "winner_multiple": (1.0, 3.0),
    "funds_cost_rate": (0.0, 0.10),
    "reserve_stress": (1.0, 4.0),
}


@dataclass(frozen=True)
class CalibrationReport:
    params: ModelParams
    results: tuple[AnchorResult, ...]
    converged: bool
    iterations: int
    free_knobs: tuple[str, ...] = ()
    clawback_rate_solution: float | None = None

    @property
    def residuals(self) -> dict[str, float]:
        return {r.anchor.name: r.residual for r in self.results}

    def to_text(self) -> str:
        lines = [
            f"converged = {str(self.converged).lower()}",
            f"iterations = {self.iterations}",
            f"free_knobs = {','.join(self.free_knobs)}",
        ]
        for name in ModelParams.__dataclass_fields__:
            value = getattr(self.params, name)
            text = str(value).lower() if isinstance(value, bool) else format_float(value)
            lines.append(f"params.{name} = {text}")
        for r in self.results:
            prefix = f"anchor.{r.anchor.name}"
            lines += [
                f"{prefix}.metric = {r.anchor.metric}",
                f"{prefix}.target = {format_float(r.anchor.target)}",
                f"{prefix}.value = {format_float(r.value)}",
                f"{prefix}.residual = {format_float(r.residual)}",
                f"{prefix}.tolerance = {format_float(r.anchor.tolerance)}",
                f"{prefix}.within = {str(r.within).lower()}",
            ]
        solution = (
            "none"
            if self.clawback_rate_solution is None
            else format_float(self.clawback_rate_solution)
        )
        lines.append(f"clawback_rate_solution = {solution}")
        return "".join(f"{line}\n" for line in lines)


def resolve_bounds(
    free_knobs: Iterable[str],
    base: ModelParams,
    bounds: Mapping[str, tuple[float, float]] | None = None,
) -> dict[str, tuple[float, float]]:
    knobs = sorted(set(free_knobs))
    if not knobs:
        raise InfeasibleBounds("at least one free knob is required")
    unknown = [k for k in knobs if k not in KNOB_BOUNDS]
    if unknown:
        raise InfeasibleBounds(
            f"unknown knob(s) {', '.join(unknown)}; choose from {', '.join(KNOB_BOUNDS)}"
        )
    merged = {**KNOB_BOUNDS, **(bounds or {})}
    resolved: dict[str, tuple[float, float]] = {}
    for knob in knobs:
        lo, hi = (float(v) for v in merged[knob])
        if knob == "deal_duration_years":
            hi = min(hi, float(base.horizon_years))
        if lo > hi:
            raise InfeasibleBounds(f"{knob}: lower bound {lo:g} exceeds upper bound {hi:g}")
        try:
            replace(base, **{knob: lo})
            replace(base, **{knob: hi})
        except ValidationError as exc:
            raise InfeasibleBounds(
                f"{knob}: bounds [{lo:g}, {hi:g}] violate {exc.message}"
            ) from exc
        resolved[knob] = (lo, hi)
    return resolved


class _Objective:
    def __init__(
        self, base: ModelParams, knobs: Sequence[str], anchors: Sequence[Anchor]
    ) -> None:
        self.base = base
        self.knobs = tuple(knobs)
        self.anchors = tuple(anchors)
        self.evaluations = 0

    def params(self, values: Sequence[float]) -> ModelParams:
        return replace(self.base, **dict(zip(self.knobs, values, strict=True)))

    def results(self, values: Sequence[float]) -> tuple[AnchorResult, ...]:
        self.evaluations += 1
        params = self.params(values)
        return tuple(evaluate_anchor(a, params) for a in self.anchors)

    def score(self, values: Sequence[float]) -> Score:
        return _score(self.results(values))


def _line_search(
    objective: _Objective, values: list[float], index: int, lo: float, hi: float
) -> float:
    """Shrink a bracket on one knob by comparing mirrored points."""

    def at(x: float) -> Score:
        trial = list(values)
        trial[index] = x
        return objective.score(trial)

    for _ in range(LINE_SEARCH_STEPS):
        mid = 0.5 * (lo + hi)
        h = 0.125 * (hi - lo)
        if at(mid - h) <= at(mid + h):
            hi = mid + h
        else:
            lo = mid - h
    return 0.5 * (lo + hi)


def fit_anchors(
    anchors: Sequence[Anchor],
    free_knobs: Iterable[str],
    *,
    base: ModelParams | None = None,
    bounds: Mapping[str, tuple[float, float]] | None = None,
    grid_points: int = 10,
    max_sweeps: int = 40,
) -> CalibrationReport:
    base = base or ModelParams()
    anchors = tuple(anchors)
    if not anchors:
        raise ValidationError("at least one anchor is required")
    names = [a.name for a in anchors]
    if len(set(names)) != len(names):
        raise ValidationError(f"anchor names must be unique: {', '.join(names)}")
    if grid_points < 2:
        raise ValidationError(f"grid_points must be >= 2, got {grid_points}")

    ranges = resolve_bounds(free_knobs, base, bounds)
    knobs = tuple(ranges)
    objective = _Objective(base, knobs, anchors)

    start = [float(getattr(base, k)) for k in knobs]
    initial = objective.results(start)
    if all(r.within for r in initial):
        logger.info("Anchors already met by base params: anchors=%d", len(anchors))
        return CalibrationReport(base, initial, True, 0, knobs)

    axes = [np.linspace(lo, hi, grid_points).tolist() for lo, hi in ranges.values()]
    spacing = [(hi - lo) / (grid_points - 1) for lo, hi in ranges.values()]
    best = list(start)
    best_score = _score(initial)
    for candidate in itertools.product(*axes):
        score = objective.score(candidate)
        if (score, tuple(candidate)) < (best_score, tuple(best)):
            best, best_score = list(candidate), score

    iterations = 0
    for _ in range(max_sweeps):
        if best_score[0] < CONVERGED_NORM:
            break
        iterations += 1
        previous = best_score
        for i, (lo, hi) in enumerate(ranges.values()):
            x = _line_search(
                objective,
                best,
                i,
                max(lo, best[i] - spacing[i]),
                min(hi, best[i] + spacing[i]),
            )
            trial = list(best)
            trial[i] = x
            score = objective.score(trial)
            if score < best_score:
                best, best_score = trial, score
        gain = (previous[0] - best_score[0], previous[1] - best_score[1])
        if gain[0] < MIN_SWEEP_GAIN and gain[1] < MIN_SWEEP_GAIN:
            break

    fitted = objective.params(best)
    results = objective.results(best)
    converged = all(r.within for r in results)
    logger.info(
        "Fit finished: converged=%s sweeps=%d evaluations=%d max_norm=%.4g",
        converged,
        iterations,
        objective.evaluations,
        best_score[0],
    )
    return CalibrationReport(fitted, results, converged, iterations, knobs)


def calibrate(
    anchors: Sequence[Anchor],
    free_knobs: Iterable[str],
    *,
    base: ModelParams | None = None,
    grid_points: int = 10,
    max_sweeps: int = 40,
) -> CalibrationReport:
    """Fit the anchors, then solve the clawback rate on the fitted knobs."""
    report = fit_anchors(
        anchors, free_knobs, base=base, grid_points=grid_points, max_sweeps=max_sweeps
    )
    try:
        solution: float | None = solve_clawback_rate(report.params)
    except AppError as exc:
        logger.warning("Clawback rate unsolved on fitted knobs: %s", exc.message)
        solution = None
    return replace(report, clawback_rate_solution=solution)


# ---- Comparative statics ----


class StaticsRow(NamedTuple):
    knob: str
    lower: float
    upper: float
    rate_at_lower: float
    rate_at_upper: float

    @property
    def direction(self) -> str:
        diff = self.rate_at_upper - self.rate_at_lower
        if abs(diff) < STATICS_DEADBAND:
            return "0"
        return "+" if diff > 0 else "-"


STATICS_KNOBS: tuple[str, ...] = ("premium_rate", "funds_cost_rate")
# a knob at zero is nudged by step * this absolute unit instead of scaled
STATICS_ZERO_UNIT = 0.10


def comparative_statics(params: ModelParams, step: float = 0.10) -> list[StaticsRow]:
    """Direction of the solved clawback rate when each knob is scaled by 1 ± step.

    A knob sitting at zero cannot be scaled, so it moves to ``step * STATICS_ZERO_UNIT``
    on the upper side and stays at zero on the lower side.
    """
    rows: list[StaticsRow] = []
    for knob in STATICS_KNOBS:
        value = float(getattr(params, knob))
        if value == 0:
            lower, upper = 0.0, step * STATICS_ZERO_UNIT
        else:
            lower, upper = value * (1.0 - step), value * (1.0 + step)
        rows.append(
            StaticsRow(
                knob,
                lower,
                upper,
                solve_clawback_rate(replace(params, **{knob: lower})),
                solve_clawback_rate(replace(params, **{knob: upper})),
            )
        )
    return rows
