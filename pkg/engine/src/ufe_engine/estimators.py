"""Estimators for uncertain fixed-effects models.

Single-factor fits and balanced two-factor fits use closed forms. Unbalanced
two-factor fits (and balanced ones on request) go through the constrained
least-squares solve in :mod:`ufe_engine.linsolve`, where every estimator's
scale is the absolute row sum of Q = (X^T X)^+ X^T times sigma0.

All reported distributions are plug-in: the location of each estimator's
law is the estimate itself.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Any, ClassVar, Optional, Union

import numpy as np

from .design_data import SingleFactorData, TwoFactorData, cell_index_name
from .exceptions import InvalidInputError, WrongPathError
from .linsolve import DenseMatrix, solve_constrained_ls
from .udist import Interval, NormalUncertain, confidence_interval

logger = logging.getLogger(__name__)

DEFAULT_CONFIDENCE = 0.95


class DesignKind(str, enum.Enum):
    SINGLE = "single"
    TWO_NO_INTERACTION = "two-no-interaction"
    TWO_INTERACTION = "two-interaction"


class FitMethod(str, enum.Enum):
    AUTO = "auto"
    CLOSED_FORM = "closed-form"
    MATRIX = "matrix"


class Objective(str, enum.Enum):
    LARGER = "larger"
    SMALLER = "smaller"


@dataclass(frozen=True)
class Estimate:
    """A point estimate with its estimator distribution and confidence interval."""

    value: float
    dist: NormalUncertain
    ci: Interval

    @property
    def half_width(self) -> float:
        return self.ci.half_width

    def to_dict(self) -> dict[str, Any]:
        return {"value": self.value, "dist": self.dist.to_dict(), "ci": self.ci.to_list()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Estimate:
        return cls(
            float(data["value"]),
            NormalUncertain.from_dict(data["dist"]),
            Interval.from_list(data["ci"]),
        )


def _estimate(value: float, scale: float, sigma0: float, confidence: float) -> Estimate:
    sigma = float(scale) * sigma0
    value = float(value)
    return Estimate(
        value, NormalUncertain(value, sigma), confidence_interval(value, sigma, confidence)
    )


def _require_sigma0(sigma0: float) -> float:
    sigma0 = float(sigma0)
    if not np.isfinite(sigma0) or sigma0 <= 0.0:
        raise InvalidInputError(f"sigma0 must be a finite value > 0, got {sigma0!r}")
    return sigma0


@dataclass(frozen=True)
class CellMeansFit:
    """Per-level means mu_i of a single-factor design."""

    mu_i: tuple[float, ...]

    def to_dict(self) -> dict[str, Any]:
        return {"mu_i": list(self.mu_i)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CellMeansFit:
        return cls(tuple(float(x) for x in data["mu_i"]))


@dataclass(frozen=True)
class EffectFit:
    """Estimated UFE parameters.

    Attributes:
        design: Which model was fitted.
        mu: Overall mean.
        a: Effects of factor A, one per level.
        b: Effects of factor B (two-factor designs only).
        ab: Interaction effects, r x s (interaction model only).
        sigma0: Common error scale the distributions were built from.
        confidence: Confidence level of every interval.
        method: ``closed-form`` or ``matrix``.
        q_row_abs_sums: Absolute row sums of Q in parameter order (matrix path only).
        level_means: Per-level means with their intervals (single factor only).
    """

    design: DesignKind
    mu: Estimate
    a: tuple[Estimate, ...]
    sigma0: float
    confidence: float
    method: FitMethod = FitMethod.CLOSED_FORM
    b: Optional[tuple[Estimate, ...]] = None
    ab: Optional[tuple[tuple[Estimate, ...], ...]] = None
    q_row_abs_sums: Optional[tuple[float, ...]] = None
    level_means: Optional[tuple[Estimate, ...]] = None

    @property
    def a_values(self) -> tuple[float, ...]:
        return tuple(e.value for e in self.a)

    @property
    def b_values(self) -> tuple[float, ...]:
        return tuple(e.value for e in self.b or ())

    def ab_value(self, i: int, j: int) -> float:
        return self.ab[i][j].value if self.ab is not None else 0.0

    def coefficients(self) -> tuple[float, ...]:
        """Estimates in parameter-layout order: mu, a_i, b_j, (ab)_ij row-major."""
        values = [self.mu.value, *self.a_values, *self.b_values]
        for row in self.ab or ():
            values.extend(e.value for e in row)
        return tuple(values)

    def named_estimates(self) -> tuple[tuple[str, Estimate], ...]:
        """Every estimate with its parameter name, level means first, then layout order."""
        layout = ParameterLayout(len(self.a), len(self.b or ()), self.ab is not None)
        estimates = [self.mu, *self.a, *(self.b or ())]
        for row in self.ab or ():
            estimates.extend(row)
        means = tuple((f"mu{k + 1}", e) for k, e in enumerate(self.level_means or ()))
        return means + tuple(zip(layout.names(), estimates))

    def to_dict(self) -> dict[str, Any]:
        return {
            "design": self.design.value,
            "method": self.method.value,
            "sigma0": self.sigma0,
            "confidence": self.confidence,
            "mu": self.mu.to_dict(),
            "a": [e.to_dict() for e in self.a],
            "b": None if self.b is None else [e.to_dict() for e in self.b],
            "ab": None if self.ab is None else [[e.to_dict() for e in row] for row in self.ab],
            "q_row_abs_sums": None if self.q_row_abs_sums is None else list(self.q_row_abs_sums),
            "level_means": (
                None if self.level_means is None else [e.to_dict() for e in self.level_means]
            ),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EffectFit:
        def many(items: Any) -> Optional[tuple[Estimate, ...]]:
            return None if items is None else tuple(Estimate.from_dict(x) for x in items)

        ab = data.get("ab")
        q = data.get("q_row_abs_sums")
        return cls(
            design=DesignKind(data["design"]),
            method=FitMethod(data.get("method", FitMethod.CLOSED_FORM.value)),
            sigma0=float(data["sigma0"]),
            confidence=float(data["confidence"]),
            mu=Estimate.from_dict(data["mu"]),
            a=many(data["a"]) or (),
            b=many(data.get("b")),
            ab=None if ab is None else tuple(many(row) or () for row in ab),
            q_row_abs_sums=None if q is None else tuple(float(x) for x in q),
            level_means=many(data.get("level_means")),
        )


@dataclass(frozen=True)
class ParameterLayout:
    """Column positions of the coefficients in the two-factor design matrix."""

    levels_a: int
    levels_b: int
    interaction: bool

    mu: ClassVar[int] = 0

    @property
    def size(self) -> int:
        r, s = self.levels_a, self.levels_b
        return 1 + r + s + (r * s if self.interaction else 0)

    def a(self, i: int) -> int:
        return 1 + i

    def b(self, j: int) -> int:
        return 1 + self.levels_a + j

    def ab(self, i: int, j: int) -> int:
        if not self.interaction:
            raise InvalidInputError("layout has no interaction block")
        return 1 + self.levels_a + self.levels_b + i * self.levels_b + j

    def names(self) -> tuple[str, ...]:
        r, s = self.levels_a, self.levels_b
        names = ["mu", *(f"a{i + 1}" for i in range(r)), *(f"b{j + 1}" for j in range(s))]
        if self.interaction:
            names.extend(f"ab{cell_index_name(i, j, r, s)}" for i in range(r) for j in range(s))
        return tuple(names)


@dataclass(frozen=True, eq=False)
class DesignSystem:
    """Incidence matrix, weighted sum-to-zero constraints and layout for one dataset."""

    x: DenseMatrix
    c: DenseMatrix
    dvec: DenseMatrix
    layout: ParameterLayout


def fit_single_means(d: SingleFactorData) -> CellMeansFit:
    """Least-squares estimates of the level means: mu_i = row mean."""
    return CellMeansFit(tuple(float(np.mean(d.row(i))) for i in range(d.levels)))


def fit_single_effects(
    d: SingleFactorData, sigma0: float, confidence: float = DEFAULT_CONFIDENCE
) -> EffectFit:
    """Fit the single-factor effects model z_ij = mu + a_i + e_ij.

    Args:
        d: The dataset.
        sigma0: Validated common error scale.
        confidence: Confidence level of the reported intervals.

    Returns:
        mu = grand mean with scale sigma0, a_i = mu_i - mu with scale
        2 (1 - m_i / N) sigma0, and the level means with scale sigma0.
    """
    sigma0 = _require_sigma0(sigma0)
    means = fit_single_means(d).mu_i
    grand = float(np.mean(d.values()))
    n = d.total
    a = tuple(
        _estimate(mean - grand, 2.0 * (1.0 - m / n), sigma0, confidence)
        for mean, m in zip(means, d.replicates)
    )
    return EffectFit(
        design=DesignKind.SINGLE,
        mu=_estimate(grand, 1.0, sigma0, confidence),
        a=a,
        sigma0=sigma0,
        confidence=confidence,
        level_means=tuple(_estimate(mean, 1.0, sigma0, confidence) for mean in means),
    )


def _balanced_cube(d: TwoFactorData) -> np.ndarray:
    if not d.balanced:
        raise WrongPathError(
            f"closed-form estimators need equal replicates, got m={d.cell_replicates}; "
            "use fit_two_unbalanced"
        )
    return np.array(d.cells, dtype=float)


def _closed_form_beta(d: TwoFactorData, interaction: bool) -> np.ndarray:
    cube = _balanced_cube(d)
    grand = cube.mean()
    a = cube.mean(axis=(1, 2)) - grand
    b = cube.mean(axis=(0, 2)) - grand
    parts = [np.array([grand]), a, b]
    if interaction:
        ab = cube.mean(axis=2) - a[:, None] - b[None, :] - grand
        parts.append(ab.reshape(-1))
    return np.concatenate(parts)


def _assemble_two(
    d: TwoFactorData,
    interaction: bool,
    beta: np.ndarray,
    scales: np.ndarray,
    sigma0: float,
    confidence: float,
    method: FitMethod,
    q_row_abs_sums: Optional[np.ndarray] = None,
) -> EffectFit:
    layout = ParameterLayout(d.levels_a, d.levels_b, interaction)

    def est(k: int) -> Estimate:
        return _estimate(beta[k], scales[k], sigma0, confidence)

    ab = None
    if interaction:
        ab = tuple(
            tuple(est(layout.ab(i, j)) for j in range(d.levels_b)) for i in range(d.levels_a)
        )
    return EffectFit(
        design=DesignKind.TWO_INTERACTION if interaction else DesignKind.TWO_NO_INTERACTION,
        mu=est(layout.mu),
        a=tuple(est(layout.a(i)) for i in range(d.levels_a)),
        b=tuple(est(layout.b(j)) for j in range(d.levels_b)),
        ab=ab,
        sigma0=sigma0,
        confidence=confidence,
        method=method,
        q_row_abs_sums=None if q_row_abs_sums is None else tuple(float(x) for x in q_row_abs_sums),
    )


def fit_two_balanced(
    d: TwoFactorData,
    interaction: bool,
    sigma0: float,
    confidence: float = DEFAULT_CONFIDENCE,
) -> EffectFit:
    """Closed-form two-factor fit for a balanced design.

    Scales: mu -> 1, a_i -> 2 (1 - 1/r), b_j -> 2 (1 - 1/s) and
    (ab)_ij -> 4 (1 - 1/r - 1/s + 1/(rs)), each multiplied by sigma0.

    Raises:
        WrongPathError: If the replicate counts differ between cells.
    """
    sigma0 = _require_sigma0(sigma0)
    beta = _closed_form_beta(d, interaction)
    r, s = d.levels_a, d.levels_b
    scales = [1.0] + [2.0 * (1.0 - 1.0 / r)] * r + [2.0 * (1.0 - 1.0 / s)] * s
    if interaction:
        scales += [4.0 * (1.0 - 1.0 / r - 1.0 / s + 1.0 / (r * s))] * (r * s)
    return _assemble_two(
        d, interaction, beta, np.array(scales), sigma0, confidence, FitMethod.CLOSED_FORM
    )


def build_design(d: TwoFactorData, interaction: bool) -> DesignSystem:
    """Build X, C and d for the constrained two-factor least-squares problem.

    X holds one 0/1 incidence row per observation in (i, j, l) order. C holds
    the weighted main-effect constraints sum_i w_i. a_i = 0 and
    sum_j w_.j b_j = 0, then, with interaction, one row per level of A
    (sum_j w_ij (ab)_ij = 0) followed by one row per level of B
    (sum_i w_ij (ab)_ij = 0).
    """
    layout = ParameterLayout(d.levels_a, d.levels_b, interaction)
    r, s = d.levels_a, d.levels_b
    x = np.zeros((d.total, layout.size))
    row = 0
    for i in range(r):
        for j in range(s):
            for _ in d.cells[i][j]:
                x[row, layout.mu] = 1.0
                x[row, layout.a(i)] = 1.0
                x[row, layout.b(j)] = 1.0
                if interaction:
                    x[row, layout.ab(i, j)] = 1.0
                row += 1

    rows = []
    main_a = np.zeros(layout.size)
    for i, w in enumerate(d.weights_a):
        main_a[layout.a(i)] = float(w)
    main_b = np.zeros(layout.size)
    for j, w in enumerate(d.weights_b):
        main_b[layout.b(j)] = float(w)
    rows.extend([main_a, main_b])
    if interaction:
        weights = d.cell_weights
        for i in range(r):
            c_row = np.zeros(layout.size)
            for j in range(s):
                c_row[layout.ab(i, j)] = float(weights[i][j])
            rows.append(c_row)
        for j in range(s):
            c_row = np.zeros(layout.size)
            for i in range(r):
                c_row[layout.ab(i, j)] = float(weights[i][j])
            rows.append(c_row)
    c = np.vstack(rows)
    return DesignSystem(x, c, np.zeros(c.shape[0]), layout)


def fit_two_unbalanced(
    d: TwoFactorData,
    interaction: bool,
    sigma0: float,
    confidence: float = DEFAULT_CONFIDENCE,
) -> EffectFit:
    """Two-factor fit through the constrained least-squares solve.

    Works for balanced data too. Each estimator's scale is the absolute row
    sum of Q for its coefficient times sigma0.

    Raises:
        SolverError: If the solve fails its numerical cross-checks.
    """
    sigma0 = _require_sigma0(sigma0)
    system = build_design(d, interaction)
    solution = solve_constrained_ls(system.x, d.responses(), system.c, system.dvec)
    sums = solution.q_row_abs_sums()
    logger.debug("Q row abs sums: %s", np.round(sums, 6).tolist())
    return _assemble_two(
        d, interaction, solution.beta, sums, sigma0, confidence, FitMethod.MATRIX, sums
    )


def fit_two(
    d: TwoFactorData,
    interaction: bool,
    sigma0: float,
    confidence: float = DEFAULT_CONFIDENCE,
    method: Union[FitMethod, str] = FitMethod.AUTO,
) -> EffectFit:
    """Fit a two-factor model, choosing the closed form when the design is balanced."""
    method = FitMethod(method)
    if method is FitMethod.MATRIX or (method is FitMethod.AUTO and not d.balanced):
        return fit_two_unbalanced(d, interaction, sigma0, confidence)
    return fit_two_balanced(d, interaction, sigma0, confidence)


def single_factor_residuals(d: SingleFactorData) -> tuple[np.ndarray, ...]:
    """Residuals z_ij - mu_i grouped by level."""
    means = fit_single_means(d).mu_i
    return tuple(d.row(i) - means[i] for i in range(d.levels))


def _fitted_cells(d: TwoFactorData, interaction: bool) -> np.ndarray:
    if interaction:
        return np.array(
            [[d.cell_mean(i, j) for j in range(d.levels_b)] for i in range(d.levels_a)]
        )
    if d.balanced:
        beta = _closed_form_beta(d, interaction=False)
    else:
        system = build_design(d, interaction=False)
        beta = solve_constrained_ls(system.x, d.responses(), system.c, system.dvec).beta
    r = d.levels_a
    return beta[0] + beta[1 : 1 + r][:, None] + beta[1 + r :][None, :]


def two_factor_residuals(d: TwoFactorData, interaction: bool) -> tuple[np.ndarray, ...]:
    """Residuals z_ijl minus the fitted cell value, one group per cell in (i, j) order.

    With interaction the fitted value is the cell mean; without it the
    fitted value is mu + a_i + b_j of the additive model. No sigma0 is needed.
    """
    fitted = _fitted_cells(d, interaction)
    return tuple(
        d.cell(i, j) - fitted[i, j] for i in range(d.levels_a) for j in range(d.levels_b)
    )


def expected_response(fit: EffectFit, i: int, j: Optional[int] = None) -> float:
    """Expected response mu + a_i (+ b_j + (ab)_ij) of a level or cell."""
    if not 0 <= i < len(fit.a):
        raise InvalidInputError(f"level index {i} out of range")
    value = fit.mu.value + fit.a[i].value
    if fit.b is None:
        if j is not None:
            raise InvalidInputError("single-factor fit has no factor B")
        return value
    if j is None or not 0 <= j < len(fit.b):
        raise InvalidInputError(f"level index {j} of factor B out of range")
    return value + fit.b[j].value + fit.ab_value(i, j)


@dataclass(frozen=True)
class Recommendation:
    """Best treatment combination under a larger- or smaller-the-better objective.

    Indices are 0-based; reports show them 1-based.
    """

    objective: Objective
    level_a: int
    level_b: Optional[int]
    expected: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "objective": self.objective.value,
            "level_a": self.level_a,
            "level_b": self.level_b,
            "expected": self.expected,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Recommendation:
        level_b = data.get("level_b")
        return cls(
            Objective(data["objective"]),
            int(data["level_a"]),
            None if level_b is None else int(level_b),
            float(data["expected"]),
        )


def best_cell(fit: EffectFit, objective: Union[Objective, str]) -> Recommendation:
    """Pick the level (single factor) or cell with the best expected response.

    Ties go to the first candidate in (i, j) order.
    """
    objective = Objective(objective)
    if fit.b is None:
        candidates = [((i, None), expected_response(fit, i)) for i in range(len(fit.a))]
    else:
        candidates = [
            ((i, j), expected_response(fit, i, j))
            for i in range(len(fit.a))
            for j in range(len(fit.b))
        ]
    values = np.array([value for _, value in candidates])
    k = int(np.argmax(values) if objective is Objective.LARGER else np.argmin(values))
    (i, j), value = candidates[k]
    logger.debug("best cell for %s: (%s, %s) -> %.6f", objective.value, i, j, value)
    return Recommendation(objective, i, j, float(value))
