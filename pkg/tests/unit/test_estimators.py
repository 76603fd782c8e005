"""Tests for the single- and two-factor estimators."""

from __future__ import annotations

import numpy as np
import pytest

from ufe_engine.design_data import SingleFactorData, TwoFactorData
from ufe_engine.estimators import (
    DesignKind,
    EffectFit,
    FitMethod,
    Objective,
    ParameterLayout,
    Recommendation,
    best_cell,
    build_design,
    expected_response,
    fit_single_effects,
    fit_single_means,
    fit_two,
    fit_two_balanced,
    fit_two_unbalanced,
    single_factor_residuals,
    two_factor_residuals,
)
from ufe_engine.exceptions import InvalidInputError, WrongPathError

F = 2.019827  # 95% half-width per unit of scale


def test_single_factor_means_and_effects(example1: SingleFactorData) -> None:
    """Test the single-factor fit of the first reference dataset."""
    assert fit_single_means(example1).mu_i == pytest.approx((4.302, 4.5, 2.6), abs=1e-9)
    fit = fit_single_effects(example1, 1.165)
    assert fit.design is DesignKind.SINGLE
    assert fit.mu.value == pytest.approx(3.674, abs=1e-9)
    assert fit.a_values == pytest.approx((0.628, 0.826, -1.074), abs=1e-9)
    assert fit.b is None
    assert fit.ab is None


def test_single_factor_scales(example1: SingleFactorData) -> None:
    fit = fit_single_effects(example1, 1.165)
    assert fit.mu.dist.sigma == pytest.approx(1.165)
    assert [e.dist.sigma for e in fit.a] == pytest.approx(
        [2 * (1 - 5 / 15) * 1.165, 2 * (1 - 4 / 15) * 1.165, 2 * (1 - 6 / 15) * 1.165]
    )
    assert fit.a[0].half_width == pytest.approx(3.137, abs=1e-3)
    assert fit.a[1].half_width == pytest.approx(3.451, abs=1e-3)
    assert fit.mu.half_width == pytest.approx(2.353, abs=1e-3)
    assert fit.level_means is not None
    assert fit.level_means[0].ci.midpoint == pytest.approx(4.302)


def test_single_factor_effects_sum_to_zero_with_weights(example1: SingleFactorData) -> None:
    fit = fit_single_effects(example1, 1.0)
    weighted = sum(m * a for m, a in zip(example1.replicates, fit.a_values))
    assert weighted == pytest.approx(0.0, abs=1e-12)


def test_fit_rejects_bad_sigma0(example1: SingleFactorData) -> None:
    with pytest.raises(InvalidInputError):
        fit_single_effects(example1, 0.0)


def test_balanced_closed_form(example2: TwoFactorData) -> None:
    """Test the balanced 2 x 2 interaction fit of the second reference dataset."""
    fit = fit_two_balanced(example2, True, 1.938)
    assert fit.method is FitMethod.CLOSED_FORM
    assert fit.mu.value == pytest.approx(45.75, abs=1e-9)
    assert fit.a_values == pytest.approx((-2.26667, 2.26667), abs=1e-5)
    assert fit.b_values == pytest.approx((-0.48333, 0.48333), abs=1e-5)
    assert fit.ab_value(0, 0) == pytest.approx(0.03333, abs=1e-5)
    assert fit.ab_value(1, 0) == pytest.approx(-0.03333, abs=1e-5)
    for est in (fit.mu, fit.a[0], fit.b[1], fit.ab[1][1]):
        assert est.half_width == pytest.approx(1.938 * F, abs=1e-4)


def test_balanced_scales_for_larger_designs() -> None:
    cells = tuple(tuple((float(i + j), float(i * j) + 1.0) for j in range(4)) for i in range(3))
    fit = fit_two_balanced(TwoFactorData(cells), True, 1.0)
    assert fit.a[0].dist.sigma == pytest.approx(2 * (1 - 1 / 3))
    assert fit.b[0].dist.sigma == pytest.approx(2 * (1 - 1 / 4))
    assert fit.ab[0][0].dist.sigma == pytest.approx(4 * (1 - 1 / 3 - 1 / 4 + 1 / 12))


def test_closed_form_refuses_unbalanced_data(example3: TwoFactorData) -> None:
    with pytest.raises(WrongPathError, match="equal replicates"):
        fit_two_balanced(example3, True, 7.429)


def test_unbalanced_matrix_fit(example3: TwoFactorData) -> None:
    """Test the weighted-constraint fit of the unbalanced reference dataset."""
    fit = fit_two(example3, True, 7.4294664)
    assert fit.method is FitMethod.MATRIX
    assert fit.mu.value == pytest.approx(56.818, abs=1e-3)
    assert fit.a_values == pytest.approx((11.852, -14.222), abs=1e-3)
    assert fit.b_values == pytest.approx((-2.040, 1.700), abs=1e-3)
    ab = [[fit.ab_value(i, j) for j in range(2)] for i in range(2)]
    assert ab == [
        [pytest.approx(-4.630, abs=1e-3), pytest.approx(4.630, abs=1e-3)],
        [pytest.approx(6.944, abs=1e-3), pytest.approx(-4.630, abs=1e-3)],
    ]
    assert fit.mu.half_width == pytest.approx(6.6694, abs=1e-3)
    assert fit.a[0].half_width == pytest.approx(10.004, abs=1e-3)
    assert fit.ab[0][0].half_width == pytest.approx(15.006, abs=1e-3)
    assert fit.q_row_abs_sums == pytest.approx(
        (4 / 9, 2 / 3, 2 / 3, 2 / 3, 2 / 3, 1.0, 1.0, 1.0, 1.0), abs=1e-6
    )


def test_matrix_fit_reproduces_cell_means(example3: TwoFactorData) -> None:
    fit = fit_two_unbalanced(example3, True, 1.0)
    for i in range(2):
        for j in range(2):
            assert expected_response(fit, i, j) == pytest.approx(example3.cell_mean(i, j))


def test_matrix_fit_meets_weighted_constraints(example3: TwoFactorData) -> None:
    system = build_design(example3, True)
    fit = fit_two_unbalanced(example3, True, 1.0)
    np.testing.assert_allclose(system.c @ np.array(fit.coefficients()), 0.0, atol=1e-9)


def test_matrix_and_closed_form_estimates_agree_on_balanced_data(
    example2: TwoFactorData,
) -> None:
    closed = fit_two(example2, True, 1.0, method="closed-form")
    matrix = fit_two(example2, True, 1.0, method=FitMethod.MATRIX)
    assert matrix.method is FitMethod.MATRIX
    np.testing.assert_allclose(matrix.coefficients(), closed.coefficients(), atol=1e-9)


def test_additive_fit_without_interaction(example2: TwoFactorData) -> None:
    fit = fit_two(example2, False, 1.0)
    assert fit.design is DesignKind.TWO_NO_INTERACTION
    assert fit.ab is None
    assert fit.ab_value(0, 0) == 0.0
    assert fit.a_values == pytest.approx((-2.26667, 2.26667), abs=1e-5)


def test_build_design_shapes(example3: TwoFactorData) -> None:
    system = build_design(example3, True)
    assert system.x.shape == (11, 9)
    assert system.c.shape == (6, 9)
    assert (system.x.sum(axis=1) == 4).all()
    assert not system.dvec.any()
    additive = build_design(example3, False)
    assert additive.x.shape == (11, 5)
    assert additive.c.shape == (2, 5)


def test_build_design_constraint_weights(example3: TwoFactorData) -> None:
    system = build_design(example3, True)
    np.testing.assert_allclose(system.c[0, 1:3], [6 / 11, 5 / 11])
    np.testing.assert_allclose(system.c[1, 3:5], [5 / 11, 6 / 11])
    # row for level 2 of A: cells (2,1) and (2,2)
    np.testing.assert_allclose(system.c[3, 7:9], [2 / 11, 3 / 11])
    # row for level 1 of B: cells (1,1) and (2,1)
    np.testing.assert_allclose(system.c[4, [5, 7]], [3 / 11, 2 / 11])


def test_parameter_layout() -> None:
    layout = ParameterLayout(2, 3, True)
    assert layout.size == 12
    assert layout.names()[layout.ab(1, 0)] == "ab21"
    assert layout.names()[layout.b(2)] == "b3"
    with pytest.raises(InvalidInputError):
        ParameterLayout(2, 3, False).ab(0, 0)


def test_parameter_layout_names_stay_distinct_past_nine_levels() -> None:
    layout = ParameterLayout(11, 11, True)
    names = layout.names()
    assert len(set(names)) == layout.size
    assert names[layout.ab(0, 10)] == "ab1,11"
    assert names[layout.ab(10, 0)] == "ab11,1"


def test_named_estimates_follow_layout_order(example3: TwoFactorData) -> None:
    fit = fit_two(example3, True, 7.429)
    named = dict(fit.named_estimates())
    assert list(named) == list(ParameterLayout(2, 2, True).names())
    assert named["ab21"].value == pytest.approx(6.944, abs=1e-3)
    assert named["b2"] is fit.b[1]


def test_named_estimates_of_single_factor_fit(example1: SingleFactorData) -> None:
    names = [name for name, _ in fit_single_effects(example1, 1.165).named_estimates()]
    assert names == ["mu1", "mu2", "mu3", "mu", "a1", "a2", "a3"]


def test_single_factor_residuals_center_each_level(example1: SingleFactorData) -> None:
    residuals = single_factor_residuals(example1)
    assert [len(r) for r in residuals] == [5, 4, 6]
    assert all(abs(float(r.sum())) < 1e-12 for r in residuals)
    assert residuals[0][2] == pytest.approx(1.988)


def test_two_factor_residuals(example3: TwoFactorData) -> None:
    residuals = two_factor_residuals(example3, interaction=True)
    np.testing.assert_allclose(residuals[0], [-1.0, 11.0, -10.0], atol=1e-12)
    np.testing.assert_allclose(residuals[2], [-5.5, 5.5], atol=1e-12)
    additive = two_factor_residuals(example3, interaction=False)
    assert [len(r) for r in additive] == [3, 3, 2, 3]


def test_best_cell_for_both_objectives(example3: TwoFactorData) -> None:
    fit = fit_two(example3, True, 7.4294664)
    larger = best_cell(fit, Objective.LARGER)
    assert (larger.level_a, larger.level_b) == (0, 1)
    assert larger.expected == pytest.approx(75.0)
    smaller = best_cell(fit, "smaller")
    assert (smaller.level_a, smaller.level_b) == (1, 1)
    assert smaller.expected == pytest.approx(39.6667, abs=1e-4)


def test_best_cell_ties_go_to_first_level() -> None:
    d = SingleFactorData(((1.0, 3.0), (2.0, 2.0), (0.0, 1.0)))
    fit = fit_single_effects(d, 1.0)
    assert best_cell(fit, Objective.LARGER).level_a == 0
    assert best_cell(fit, Objective.SMALLER).level_a == 2
    assert best_cell(fit, Objective.SMALLER).level_b is None


def test_expected_response_validates_indices(example1: SingleFactorData) -> None:
    fit = fit_single_effects(example1, 1.0)
    assert expected_response(fit, 1) == pytest.approx(4.5)
    with pytest.raises(InvalidInputError):
        expected_response(fit, 3)
    with pytest.raises(InvalidInputError):
        expected_response(fit, 0, 0)


def test_fit_and_recommendation_serialize(example3: TwoFactorData) -> None:
    fit = fit_two(example3, True, 7.4294664)
    assert EffectFit.from_dict(fit.to_dict()) == fit
    rec = best_cell(fit, Objective.LARGER)
    assert Recommendation.from_dict(rec.to_dict()) == rec
