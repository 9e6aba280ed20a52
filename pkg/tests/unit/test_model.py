"""Tests for the closed-form return model."""

from __future__ import annotations

from decimal import Decimal

import numpy as np
import pytest

from dinsim.model import (
    EmpiricalTemplate,
    ModelParams,
    TwoPointTemplate,
    bank_curve,
    bank_return,
    default_grid,
    insured_face,
    invested_funds,
    perverse_incentive_gap,
    sweep,
    underwriter_cashflow,
)
from dinsim.shared.error_handling import MocOutOfRange, NonPositiveDenominator, ValidationError

# Closed-form oracle regime: B(ρ) = M(1 - pD + ρ((1 - e) - 1/g)).
ORACLE = ModelParams(moc=30, deal_duration_years=10, winner_multiple=1.5, clawback_rate=0.0)


class TestModelParams:
    @pytest.mark.parametrize("moc", [2, 30, 43, 47])
    def test_moc_accepted(self, moc: float) -> None:
        assert ModelParams(moc=moc).moc == moc

    @pytest.mark.parametrize("moc", [1.9, 47.1, 48])
    def test_moc_rejected(self, moc: float) -> None:
        with pytest.raises(MocOutOfRange):
            ModelParams(moc=moc)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"deal_duration_years": 0},
            {"deal_duration_years": 11},
            {"winner_multiple": 0},
            {"premium_rate": 1.2},
            {"coverage": 0},
            {"reserve_stress": 0.5},
            {"original_capital": 0},
        ],
    )
    def test_invariants(self, kwargs: dict[str, float]) -> None:
        with pytest.raises(ValidationError):
            ModelParams(**kwargs)  # type: ignore[arg-type]


class TestInsuredFace:
    def test_face_is_moc_times_capital(self) -> None:
        assert insured_face(ModelParams(moc=43)) == Decimal(43)
        assert insured_face(ModelParams(moc=30)) == Decimal(30)
        assert insured_face(ModelParams(moc=30, original_capital=2.5)) == Decimal(75)


class TestBankReturn:
    def test_closed_form(self) -> None:
        assert bank_return(ORACLE, 1.0) == pytest.approx(10.0)

    def test_conservation_without_fees(self) -> None:
        params = ModelParams(premium_rate=0, equity_share=0, clawback_rate=0, winner_multiple=1)
        assert bank_return(params, 1.0) == pytest.approx(params.moc)

    def test_matches_formula_on_grid(self) -> None:
        rho = np.linspace(0, 1.5, 16)
        expected = 30 * (1 - 0.5 + rho * (0.5 - 1 / 1.5))
        assert bank_curve(ORACLE, rho) == pytest.approx(expected)

    def test_fitted_knobs_hit_29x(self, fitted_params: ModelParams) -> None:
        assert bank_return(fitted_params, 0.0, clawback_rate=0.0) == pytest.approx(29, abs=0.5)

    def test_clawback_off_is_identical(self) -> None:
        grid = default_grid()
        assert np.array_equal(bank_curve(ORACLE, grid), bank_curve(ORACLE, grid, clawback_rate=0))

    def test_clawback_never_raises_bank_return(self, default_params: ModelParams) -> None:
        grid = default_grid()
        cured = bank_curve(default_params, grid)
        baseline = bank_curve(default_params, grid, clawback_rate=0.0)
        assert np.all(cured <= baseline)

    def test_negative_rho_rejected(self) -> None:
        with pytest.raises(ValidationError):
            bank_return(ORACLE, -0.1)


class TestUnderwriterCashflow:
    def test_closed_form_at_one(self) -> None:
        flow = underwriter_cashflow(ORACLE, 1.0)
        assert flow.per_dollar == pytest.approx(0.5 + 0.5 - (1 - 1 / 1.5))
        assert flow.net == pytest.approx(flow.per_dollar * 30)

    def test_total_failure_loses_half(self) -> None:
        assert underwriter_cashflow(ORACLE, 0.0).per_dollar == pytest.approx(-0.5)

    def test_carry_charged_on_invested_funds(self) -> None:
        params = ModelParams(funds_cost_rate=0.03, deal_duration_years=5, clawback_rate=0.0)
        free = underwriter_cashflow(ModelParams(deal_duration_years=5, clawback_rate=0.0), 0.0)
        carried = underwriter_cashflow(params, 0.0)
        # invested = 1 - pD = 0.75 per unit face, carried for 5 years at 3%
        assert carried.invested_funds == pytest.approx(0.75 * 43)
        assert free.per_dollar - carried.per_dollar == pytest.approx(0.03 * 0.75 * 5)

    def test_return_on_invested_undefined_without_funds(self) -> None:
        flow = underwriter_cashflow(ORACLE, 4.0)
        assert flow.invested_funds == 0
        assert flow.return_on_invested is None

    def test_floor_at_total_failure(self, default_params: ModelParams) -> None:
        face = default_params.face
        net = underwriter_cashflow(default_params, 0.0).net
        assert -1e-9 * face <= net <= 0.15 * face


class TestInvestedFunds:
    def test_zero_beyond_crossing(self, fitted_params: ModelParams) -> None:
        assert invested_funds(fitted_params, 2.28) == 0
        assert invested_funds(fitted_params, 2.27) > 0

    def test_stress_scales_crossing(self) -> None:
        # crossing at s * g * (1 - pD)
        params = ModelParams(winner_multiple=2.0, premium_rate=0.0, reserve_stress=2.0)
        assert invested_funds(params, 3.9) > 0
        assert invested_funds(params, 4.0) == 0


class TestPerverseIncentiveGap:
    def test_closed_form(self) -> None:
        assert perverse_incentive_gap(ORACLE) == pytest.approx(1.0)

    def test_flat_curve(self) -> None:
        assert perverse_incentive_gap(ModelParams(winner_multiple=2.0)) == pytest.approx(0.0)

    def test_fitted_knobs_hit_64_percent(self, fitted_params: ModelParams) -> None:
        assert perverse_incentive_gap(fitted_params) == pytest.approx(0.64, abs=0.05)

    def test_ignores_clawback_rate(self) -> None:
        assert perverse_incentive_gap(ModelParams(clawback_rate=0.9)) == pytest.approx(
            perverse_incentive_gap(ModelParams(clawback_rate=0.0))
        )

    def test_non_positive_denominator(self) -> None:
        with pytest.raises(NonPositiveDenominator):
            perverse_incentive_gap(ModelParams(equity_share=1.0, winner_multiple=1.5))


class TestTemplates:
    @pytest.mark.parametrize("rho", [0.0, 0.3, 0.9, 1.5, 2.5])
    def test_two_point_mean_preserved(self, rho: float) -> None:
        split = TwoPointTemplate(1.8).split(np.array([rho]))
        assert split.default_value[0] + split.survivor_value[0] == pytest.approx(rho)

    def test_two_point_below_face_winners_default(self) -> None:
        split = TwoPointTemplate(0.8).split(np.array([0.4]))
        assert split.default_weight[0] == 1.0
        assert split.default_value[0] == pytest.approx(0.4)

    def test_empirical_mean_preserved(self) -> None:
        template = EmpiricalTemplate((0.0, 0.5, 2.0, 5.0), (4, 3, 2, 1))
        split = template.split(np.array([0.8, 1.6]))
        assert split.default_value + split.survivor_value == pytest.approx([0.8, 1.6])
        assert sum(template.weights) == pytest.approx(1.0)

    def test_empirical_two_point_agrees_at_its_mean(self) -> None:
        params = ModelParams(winner_multiple=1.8)
        empirical = EmpiricalTemplate((0.0, 1.8), (0.5, 0.5))
        expected = bank_return(params, 0.9)
        assert bank_return(params, 0.9, template=empirical) == pytest.approx(expected)

    def test_empirical_rejects_negative_weights(self) -> None:
        with pytest.raises(ValidationError):
            EmpiricalTemplate((1.0, 2.0), (1.0, -1.0))


class TestSweep:
    def test_default_grid(self) -> None:
        grid = default_grid()
        assert len(grid) == 801
        assert grid[0] == 0.0
        assert grid[-1] == 8.0
        assert grid[227] == 2.27

    def test_single_point_matches_anchor(self, fitted_params: ModelParams) -> None:
        (point,) = sweep(fitted_params, [0.0])
        assert point.bank_multiple == pytest.approx(29, abs=0.5)
        assert point.insured_face == Decimal("46.55")

    def test_empty_grid(self, default_params: ModelParams) -> None:
        assert sweep(default_params, []) == []

    def test_full_grid_shape(self, default_params: ModelParams) -> None:
        points = sweep(default_params)
        assert len(points) == 801
        assert all(b.rho > a.rho for a, b in zip(points, points[1:], strict=False))
        assert all(p.uw_invested_funds >= 0 for p in points)

    def test_unsorted_grid_rejected(self, default_params: ModelParams) -> None:
        with pytest.raises(ValidationError):
            sweep(default_params, [1.0, 0.5])

    def test_return_on_invested(self, default_params: ModelParams) -> None:
        low, high = sweep(default_params, [0.5, 7.0])
        assert low.uw_return_on_invested == pytest.approx(
            low.uw_per_dollar_insured * 43 / float(low.uw_invested_funds)
        )
        assert high.uw_return_on_invested is None
        assert high.uw_return_on_invested_clawback is None
