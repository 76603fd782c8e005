"""Tests for the outlier-count hypothesis tests and their sequencing."""

from __future__ import annotations

import numpy as np
import pytest

from ufe_engine.design_data import SingleFactorData, TwoFactorData
from ufe_engine.estimators import fit_single_effects, fit_two, single_factor_residuals
from ufe_engine.exceptions import DegenerateGroupError, InvalidInputError, SequencingError
from ufe_engine.udist import Interval, acceptance_interval
from ufe_engine.uhtest import (
    COMMON_SIGMA,
    HOMOGENEITY_SIGMA,
    NORMALITY,
    CountingRule,
    Decision,
    ResidualDiagnostics,
    TestOutcome,
    collapsed_sigma,
    common_sigma,
    count_test,
    diagnose_residuals,
    homogeneity_effects,
    homogeneity_main_effect,
    homogeneity_sigma,
    interaction_test,
    residual_normality,
)


def test_count_test_counts_strict_exceedances() -> None:
    result = count_test([0.1, 3.0, -2.5, 0.0], Interval(-1.0, 1.0), CountingRule(0.05))
    assert result.count == 2
    assert result.violations == (2, 3)
    assert result.decision is Decision.REJECT


def test_count_test_keeps_boundary_points_inside() -> None:
    result = count_test([1.0, -1.0, 0.5], Interval(-1.0, 1.0), CountingRule(0.05))
    assert result.count == 0
    assert result.violations == ()
    assert result.decision is Decision.FAIL_TO_REJECT


def test_count_test_rejects_empty_sample() -> None:
    with pytest.raises(InvalidInputError):
        count_test([], Interval(-1.0, 1.0), CountingRule())


@pytest.mark.parametrize(
    ("alpha", "m", "expected"),
    [(0.05, 1, 1), (0.05, 15, 1), (0.05, 20, 1), (0.05, 21, 2), (0.1, 30, 3), (0.5, 7, 4)],
)
def test_counting_rule_threshold(alpha: float, m: int, expected: int) -> None:
    assert CountingRule(alpha).threshold(m) == expected


def test_counting_rule_validates_alpha_and_size() -> None:
    with pytest.raises(InvalidInputError):
        CountingRule(0.0)
    with pytest.raises(InvalidInputError):
        CountingRule(1.0)
    with pytest.raises(InvalidInputError):
        CountingRule(0.05).threshold(0)


def test_residual_normality_on_first_level(example1: SingleFactorData) -> None:
    """Test sigma_10 and its acceptance interval for the first reference dataset."""
    result = residual_normality(single_factor_residuals(example1)[0], group="1")
    assert result.sigma == pytest.approx(1.114, abs=1e-3)
    assert result.outcome.name == f"{NORMALITY}:1"
    assert result.outcome.decision is Decision.FAIL_TO_REJECT
    ai = result.outcome.ai_table[0][0]
    assert (ai.lo, ai.hi) == pytest.approx((-2.251, 2.251), abs=1e-3)
    assert result.outcome.ai_rows == ("sigma10",)
    assert result.outcome.ai_cols == ("e1",)


def test_residual_normality_flags_an_outlier() -> None:
    result = residual_normality([0.0] * 9 + [10.0], group="2")
    assert result.outcome.rejected
    assert result.outcome.violations() == {("e2", "sigma20"): (10,)}


@pytest.mark.parametrize("residuals", [[0.5], [0.0, 0.0, 0.0]])
def test_residual_normality_degenerate_groups(residuals: list[float]) -> None:
    with pytest.raises(DegenerateGroupError) as excinfo:
        residual_normality(residuals, group="21")
    assert excinfo.value.group == "21"


def test_homogeneity_sigma_passes_on_reference_data(example1: SingleFactorData) -> None:
    outcome = homogeneity_sigma(single_factor_residuals(example1))
    assert outcome.name == HOMOGENEITY_SIGMA
    assert outcome.decision is Decision.FAIL_TO_REJECT
    assert len(outcome.details) == 6
    assert outcome.ai_rows == ("sigma10", "sigma20", "sigma30")
    assert outcome.ai_cols == ("e1", "e2", "e3")


def test_homogeneity_sigma_rejects_scaled_group(example1: SingleFactorData) -> None:
    groups = list(single_factor_residuals(example1))
    groups[2] = groups[2] * 100.0
    outcome = homogeneity_sigma(groups)
    assert outcome.rejected
    assert ("e3", "sigma10") in outcome.violations()


def test_homogeneity_sigma_needs_two_groups() -> None:
    with pytest.raises(InvalidInputError):
        homogeneity_sigma([[1.0, -1.0]])


def test_common_sigma_requires_homogeneity_first(example1: SingleFactorData) -> None:
    groups = single_factor_residuals(example1)
    with pytest.raises(SequencingError):
        common_sigma(groups)
    rejected = TestOutcome(HOMOGENEITY_SIGMA, Decision.REJECT, ())
    with pytest.raises(SequencingError, match="rejected"):
        common_sigma(groups, homogeneity=rejected)


def test_common_sigma_pools_residuals(example1: SingleFactorData) -> None:
    groups = single_factor_residuals(example1)
    outcome, sigma0 = common_sigma(groups, homogeneity=homogeneity_sigma(groups))
    assert outcome.name == COMMON_SIGMA
    assert sigma0 == pytest.approx(1.165, abs=1e-3)
    ai = outcome.ai_table[0][0]
    assert (ai.lo, ai.hi) == pytest.approx((-2.353, 2.353), abs=1e-3)


def test_diagnose_residuals_validates_reference_data(example1: SingleFactorData) -> None:
    diagnostics = diagnose_residuals(single_factor_residuals(example1))
    assert diagnostics.validated
    assert diagnostics.blocked is None
    assert diagnostics.require_validated() == pytest.approx(1.165, abs=1e-3)
    assert [g.sigma for g in diagnostics.groups] == pytest.approx([1.114, 1.320, 1.094], abs=1e-3)


def test_diagnose_residuals_stops_at_normality() -> None:
    diagnostics = diagnose_residuals([[1.0, -1.0, 1.0, -1.0], [0.0] * 9 + [10.0]])
    assert diagnostics.blocked == NORMALITY
    assert diagnostics.homogeneity is None
    assert diagnostics.sigma0 is None
    with pytest.raises(SequencingError, match=NORMALITY):
        diagnostics.require_validated()


def test_diagnose_residuals_stops_at_homogeneity(example1: SingleFactorData) -> None:
    groups = list(single_factor_residuals(example1))
    groups[2] = groups[2] * 100.0
    diagnostics = diagnose_residuals(groups)
    assert diagnostics.blocked == HOMOGENEITY_SIGMA
    assert diagnostics.common is None
    assert not diagnostics.validated


def test_diagnostics_refuse_sigma0_without_passing_tests() -> None:
    with pytest.raises(SequencingError):
        ResidualDiagnostics(groups=(), sigma0=1.0)


def test_diagnostics_serialize(example1: SingleFactorData) -> None:
    diagnostics = diagnose_residuals(single_factor_residuals(example1))
    assert ResidualDiagnostics.from_dict(diagnostics.to_dict()) == diagnostics


def test_homogeneity_of_effects(example1: SingleFactorData) -> None:
    """Test the effect table and violations of the first reference dataset."""
    diagnostics = diagnose_residuals(single_factor_residuals(example1))
    fit = fit_single_effects(example1, diagnostics.require_validated())
    sigmas = [g.sigma for g in diagnostics.groups]
    outcome = homogeneity_effects(example1, fit.a_values, sigmas, fit.mu.value)
    assert outcome.rejected
    assert outcome.violations() == {
        ("z1", "a30"): (3,),
        ("z2", "a30"): (1, 2),
        ("z3", "a10"): (2, 3, 5),
        ("z3", "a20"): (2, 3, 5),
    }
    a10_z1 = outcome.ai_table[0][0]
    assert (a10_z1.lo, a10_z1.hi) == pytest.approx((-1.623, 2.879), abs=1e-3)
    assert outcome.constants == (("mu0", pytest.approx(3.674)),)


def test_homogeneity_effects_validates_arguments(example1: SingleFactorData) -> None:
    with pytest.raises(InvalidInputError):
        homogeneity_effects(example1, [0.0, 0.0], [1.0, 1.0, 1.0])
    with pytest.raises(DegenerateGroupError):
        homogeneity_effects(example1, [0.0, 0.0, 0.0], [1.0, 0.0, 1.0])
    with pytest.raises(InvalidInputError, match="centers must be finite"):
        homogeneity_effects(example1, [0.0, float("nan"), 0.0], [1.0, 1.0, 1.0])


def test_effects_table_is_the_means_table_moved_by_mu0(example1: SingleFactorData) -> None:
    """Test AI(mu_j0, sigma_i0) - mu0 equals AI(a_j0, sigma_i0) for a_j0 = mu_j0 - mu0."""
    sigmas = [1.114, 1.320, 1.094]
    mu0 = 3.674
    means = [4.302, 4.5, 2.6]
    by_means = homogeneity_effects(example1, means, sigmas, 0.0, parameter="mu")
    by_effects = homogeneity_effects(example1, [m - mu0 for m in means], sigmas, mu0)
    for mean_row, effect_row in zip(by_means.ai_table, by_effects.ai_table):
        for mean_iv, effect_iv in zip(mean_row, effect_row):
            moved = mean_iv.shifted(-mu0)
            assert moved.lo == pytest.approx(effect_iv.lo, abs=1e-9)
            assert moved.hi == pytest.approx(effect_iv.hi, abs=1e-9)
    assert by_means.decision is by_effects.decision
    assert by_means.ai_table[0][1] == acceptance_interval(4.302, 1.320, 0.05)


def test_homogeneity_decision_is_shift_invariant(example1: SingleFactorData) -> None:
    shifted = SingleFactorData(tuple(tuple(v + 250.0 for v in row) for row in example1.obs))
    sigmas = [1.114, 1.320, 1.094]
    base = homogeneity_effects(example1, [0.628, 0.826, -1.074], sigmas, 3.674)
    moved = homogeneity_effects(shifted, [0.628, 0.826, -1.074], sigmas, 253.674)
    assert moved.decision is base.decision
    assert moved.violations() == base.violations()


def test_collapsed_sigma_is_spread_about_own_mean() -> None:
    assert collapsed_sigma([1.0, 3.0, 5.0, 7.0]) == pytest.approx(np.sqrt(5.0))


def test_main_effect_tests(example3: TwoFactorData) -> None:
    fit = fit_two(example3, True, 7.4294664)
    factor_a = homogeneity_main_effect(example3, "A", fit)
    assert factor_a.name == "main-effect-A"
    assert factor_a.violations() == {("zA1", "a20"): (2, 4, 5, 6), ("zA2", "a10"): (1, 3, 4, 5)}
    factor_b = homogeneity_main_effect(example3, "B", fit)
    assert factor_b.decision is Decision.FAIL_TO_REJECT
    assert factor_b.ai_rows == ("b10", "b20")
    assert factor_b.ai_cols == ("zB1", "zB2")


def test_main_effect_needs_two_factor_fit(
    example1: SingleFactorData, example3: TwoFactorData
) -> None:
    fit = fit_single_effects(example1, 1.0)
    with pytest.raises(InvalidInputError):
        homogeneity_main_effect(example3, "A", fit)


def test_interaction_test(example3: TwoFactorData) -> None:
    fit = fit_two(example3, True, 7.4294664)
    outcome = interaction_test(example3, fit)
    assert outcome.name == "interaction-AB"
    assert outcome.rejected
    assert outcome.violations() == {("z(2,1)", "ab21"): (2,)}
    assert outcome.ai_rows == ("ab0=0",)
    assert len(outcome.ai_table) == 1
    assert outcome.ai_cols == ("z(1,1)", "z(1,2)", "z(2,1)", "z(2,2)")
    ai = outcome.ai_table[0][2]
    assert (ai.lo, ai.hi) == pytest.approx((-11.109, 11.109), abs=1e-3)


def test_interaction_test_passes_on_balanced_reference(example2: TwoFactorData) -> None:
    outcome = interaction_test(example2, fit_two(example2, True, 1.938))
    assert outcome.decision is Decision.FAIL_TO_REJECT


def test_interaction_test_needs_interaction_fit(example2: TwoFactorData) -> None:
    with pytest.raises(InvalidInputError):
        interaction_test(example2, fit_two(example2, False, 1.938))


def test_outcome_serializes(example3: TwoFactorData) -> None:
    outcome = interaction_test(example3, fit_two(example3, True, 7.4294664))
    assert TestOutcome.from_dict(outcome.to_dict()) == outcome
