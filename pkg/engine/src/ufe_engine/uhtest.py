"""Uncertain hypothesis tests built on acceptance intervals and outlier counts.

Every test has the same shape: build an acceptance interval from a
hypothesised parameter, count the sample points strictly outside it, and
reject when the count reaches the counting-rule threshold. Tests must run in
order (normality, homogeneity of sigma, common sigma, then effect tests);
:class:`ResidualDiagnostics` records how far the sequence got.
"""

from __future__ import annotations

import enum
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Optional, Union

import numpy as np

from .design_data import (
    AdjustmentOrigin,
    Factor,
    SingleFactorData,
    TwoFactorData,
    adjust_cell,
    adjust_shift,
    collapse_by_factor,
    moment_sigma,
)
from .estimators import EffectFit
from .exceptions import DegenerateGroupError, InvalidInputError, SequencingError
from .udist import Interval, acceptance_interval

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.05

# Slack so that alpha * m landing exactly on an integer is not pushed up by rounding.
_CEIL_SLACK = 1e-12

NORMALITY = "normality"
HOMOGENEITY_SIGMA = "homogeneity-sigma"
COMMON_SIGMA = "common-sigma"


class Decision(str, enum.Enum):
    REJECT = "reject"
    FAIL_TO_REJECT = "fail-to-reject"


@dataclass(frozen=True)
class CountingRule:
    """Reject when at least ceil(alpha * m) points (and at least one) are outliers."""

    alpha: float = DEFAULT_ALPHA

    def __post_init__(self) -> None:
        alpha = float(self.alpha)
        if not 0.0 < alpha < 1.0:
            raise InvalidInputError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        object.__setattr__(self, "alpha", alpha)

    def threshold(self, m: int) -> int:
        if m < 1:
            raise InvalidInputError(f"sample size must be >= 1, got {m}")
        return max(1, math.ceil(self.alpha * m - _CEIL_SLACK))


class CountResult(NamedTuple):
    count: int
    violations: tuple[int, ...]
    decision: Decision


@dataclass(frozen=True)
class SampleCheck:
    """One sample counted against one acceptance interval.

    Attributes:
        sample: Sample identifier, e.g. ``z3`` or ``z(2,1)``.
        reference: Hypothesised parameter the interval was built from.
        interval: The acceptance interval.
        violations: 1-based positions of the points outside the interval.
        count: Number of violations.
        threshold: Counting-rule threshold for this sample size.
    """

    sample: str
    reference: str
    interval: Interval
    violations: tuple[int, ...]
    count: int
    threshold: int

    @property
    def rejects(self) -> bool:
        return self.count >= self.threshold

    def to_dict(self) -> dict[str, Any]:
        return {
            "sample": self.sample,
            "reference": self.reference,
            "interval": self.interval.to_list(),
            "violations": list(self.violations),
            "count": self.count,
            "threshold": self.threshold,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SampleCheck:
        return cls(
            str(data["sample"]),
            str(data["reference"]),
            Interval.from_list(data["interval"]),
            tuple(int(k) for k in data["violations"]),
            int(data["count"]),
            int(data["threshold"]),
        )


@dataclass(frozen=True)
class TestOutcome:
    """Decision of one hypothesis test.

    The AI table is laid out with one row per reference parameter and one
    column per sample, diagonal included; only the off-diagonal checks in
    ``details`` decide homogeneity tests.
    """

    __test__ = False  # not a pytest test class

    name: str
    decision: Decision
    details: tuple[SampleCheck, ...]
    ai_rows: tuple[str, ...] = ()
    ai_cols: tuple[str, ...] = ()
    ai_table: tuple[tuple[Interval, ...], ...] = ()
    sigmas: tuple[tuple[str, float], ...] = ()
    constants: tuple[tuple[str, float], ...] = field(default=())

    @property
    def rejected(self) -> bool:
        return self.decision is Decision.REJECT

    def violations(self) -> dict[tuple[str, str], tuple[int, ...]]:
        """Violating positions for every (sample, reference) check that has any."""
        return {(c.sample, c.reference): c.violations for c in self.details if c.violations}

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "decision": self.decision.value,
            "details": [c.to_dict() for c in self.details],
            "ai_rows": list(self.ai_rows),
            "ai_cols": list(self.ai_cols),
            "ai_table": [[iv.to_list() for iv in row] for row in self.ai_table],
            "sigmas": [[name, value] for name, value in self.sigmas],
            "constants": [[name, value] for name, value in self.constants],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> TestOutcome:
        return cls(
            name=str(data["name"]),
            decision=Decision(data["decision"]),
            details=tuple(SampleCheck.from_dict(c) for c in data["details"]),
            ai_rows=tuple(str(x) for x in data.get("ai_rows", ())),
            ai_cols=tuple(str(x) for x in data.get("ai_cols", ())),
            ai_table=tuple(
                tuple(Interval.from_list(iv) for iv in row) for row in data.get("ai_table", ())
            ),
            sigmas=tuple((str(n), float(v)) for n, v in data.get("sigmas", ())),
            constants=tuple((str(n), float(v)) for n, v in data.get("constants", ())),
        )


def _outcome(name: str, details: Sequence[SampleCheck], **extra: Any) -> TestOutcome:
    decision = Decision.REJECT if any(c.rejects for c in details) else Decision.FAIL_TO_REJECT
    logger.debug("%s: %s (%d checks)", name, decision.value, len(details))
    return TestOutcome(name, decision, tuple(details), **extra)


def count_test(sample: Sequence[float], ai: Interval, rule: CountingRule) -> CountResult:
    """Count the points strictly outside ai and apply the counting rule.

    Returns:
        (count, 1-based violating positions, decision).

    Raises:
        InvalidInputError: If the sample is empty.
    """
    values = np.asarray(sample, dtype=float)
    if values.size == 0:
        raise InvalidInputError("count_test needs a non-empty sample")
    outside = (values < ai.lo) | (values > ai.hi)
    violations = tuple(int(k) + 1 for k in np.flatnonzero(outside))
    rejects = len(violations) >= rule.threshold(values.size)
    decision = Decision.REJECT if rejects else Decision.FAIL_TO_REJECT
    return CountResult(len(violations), violations, decision)


def _check(
    sample_id: str, reference: str, values: Sequence[float], ai: Interval, rule: CountingRule
) -> SampleCheck:
    result = count_test(values, ai, rule)
    return SampleCheck(
        sample_id, reference, ai, result.violations, result.count, rule.threshold(len(values))
    )


def _group_sigma(group: str, residuals: Sequence[float]) -> float:
    values = np.asarray(residuals, dtype=float)
    if values.size < 2:
        raise DegenerateGroupError(group, f"needs at least 2 points, got {values.size}")
    sigma = moment_sigma(values, 0.0)
    if not sigma > 0.0:
        raise DegenerateGroupError(group, "residual scale is zero")
    return sigma


def _labels(count: int, labels: Optional[Sequence[str]]) -> tuple[str, ...]:
    if labels is None:
        return tuple(str(k + 1) for k in range(count))
    if len(labels) != count:
        raise InvalidInputError(f"expected {count} labels, got {len(labels)}")
    return tuple(str(x) for x in labels)


@dataclass(frozen=True)
class GroupNormality:
    """Normality check of one residual group: sigma_g0 and its own-AI test."""

    group: str
    sigma: float
    outcome: TestOutcome

    def to_dict(self) -> dict[str, Any]:
        return {"group": self.group, "sigma": self.sigma, "outcome": self.outcome.to_dict()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GroupNormality:
        return cls(
            str(data["group"]), float(data["sigma"]), TestOutcome.from_dict(data["outcome"])
        )


def residual_normality(
    residuals: Sequence[float], alpha: float = DEFAULT_ALPHA, group: str = "1"
) -> GroupNormality:
    """Check that a residual group looks like N(0, sigma_g0).

    sigma_g0 is the second moment about zero; the group is then counted
    against its own acceptance interval AI(0, sigma_g0).

    Raises:
        DegenerateGroupError: If the group has fewer than 2 points or zero scale.
    """
    rule = CountingRule(alpha)
    sigma = _group_sigma(group, residuals)
    ai = acceptance_interval(0.0, sigma, alpha)
    check = _check(f"e{group}", f"sigma{group}0", residuals, ai, rule)
    outcome = _outcome(
        f"{NORMALITY}:{group}",
        [check],
        ai_rows=(check.reference,),
        ai_cols=(check.sample,),
        ai_table=((ai,),),
        sigmas=((group, sigma),),
    )
    return GroupNormality(group, sigma, outcome)


def homogeneity_sigma(
    groups: Sequence[Sequence[float]],
    alpha: float = DEFAULT_ALPHA,
    labels: Optional[Sequence[str]] = None,
) -> TestOutcome:
    """Test H0: all groups share one sigma.

    Every group i is counted against AI(0, sigma_j0) for every j != i.

    Raises:
        InvalidInputError: If fewer than two groups are given.
        DegenerateGroupError: If any group is too small or has zero scale.
    """
    if len(groups) < 2:
        raise InvalidInputError("homogeneity of sigma needs at least 2 groups")
    names = _labels(len(groups), labels)
    rule = CountingRule(alpha)
    sigmas = [_group_sigma(name, g) for name, g in zip(names, groups)]
    intervals = [acceptance_interval(0.0, s, alpha) for s in sigmas]
    details = [
        _check(f"e{names[i]}", f"sigma{names[j]}0", groups[i], intervals[j], rule)
        for i in range(len(groups))
        for j in range(len(groups))
        if i != j
    ]
    return _outcome(
        HOMOGENEITY_SIGMA,
        details,
        ai_rows=tuple(f"sigma{n}0" for n in names),
        ai_cols=tuple(f"e{n}" for n in names),
        ai_table=tuple(tuple(intervals[j] for _ in names) for j in range(len(names))),
        sigmas=tuple(zip(names, sigmas)),
    )


def common_sigma(
    groups: Sequence[Sequence[float]],
    alpha: float = DEFAULT_ALPHA,
    *,
    homogeneity: Optional[TestOutcome] = None,
) -> tuple[TestOutcome, Optional[float]]:
    """Test H0: the shared sigma equals the pooled constant sigma0.

    Args:
        groups: Residual groups.
        alpha: Significance level.
        homogeneity: Outcome of :func:`homogeneity_sigma` on the same groups.

    Returns:
        The outcome and sigma0, which is None when the test rejects.

    Raises:
        SequencingError: If homogeneity of sigma has not been shown.
    """
    if homogeneity is None or homogeneity.name != HOMOGENEITY_SIGMA:
        raise SequencingError("common sigma test needs a homogeneity-of-sigma outcome first")
    if homogeneity.rejected:
        raise SequencingError("common sigma test cannot run: homogeneity of sigma was rejected")
    pooled = np.concatenate([np.asarray(g, dtype=float) for g in groups])
    sigma0 = _group_sigma("pooled", pooled)
    ai = acceptance_interval(0.0, sigma0, alpha)
    check = _check("e", "sigma0", pooled, ai, CountingRule(alpha))
    outcome = _outcome(
        COMMON_SIGMA,
        [check],
        ai_rows=("sigma0",),
        ai_cols=("e",),
        ai_table=((ai,),),
        sigmas=(("pooled", sigma0),),
    )
    return outcome, (None if outcome.rejected else sigma0)


@dataclass(frozen=True)
class ResidualDiagnostics:
    """Outcome of the validation sequence that must precede estimation.

    Attributes:
        groups: Normality result of every residual group.
        homogeneity: Homogeneity-of-sigma outcome, if reached.
        common: Common-sigma outcome, if reached.
        sigma0: Pooled scale; present only when both tests failed to reject.
        blocked: Name of the stage that rejected and stopped the sequence.
    """

    groups: tuple[GroupNormality, ...]
    homogeneity: Optional[TestOutcome] = None
    common: Optional[TestOutcome] = None
    sigma0: Optional[float] = None
    blocked: Optional[str] = None

    def __post_init__(self) -> None:
        if self.sigma0 is not None and not (
            self.homogeneity is not None
            and self.common is not None
            and not self.homogeneity.rejected
            and not self.common.rejected
        ):
            raise SequencingError("sigma0 is only valid after homogeneity and common tests pass")

    @property
    def validated(self) -> bool:
        return self.sigma0 is not None

    def require_validated(self) -> float:
        """Return sigma0 or raise if the sequence stopped early."""
        if self.sigma0 is None:
            raise SequencingError(
                f"residual validation stopped at {self.blocked or 'an unfinished stage'}; "
                "estimation and effect tests are not allowed"
            )
        return self.sigma0

    def to_dict(self) -> dict[str, Any]:
        return {
            "groups": [g.to_dict() for g in self.groups],
            "homogeneity": None if self.homogeneity is None else self.homogeneity.to_dict(),
            "common": None if self.common is None else self.common.to_dict(),
            "sigma0": self.sigma0,
            "blocked": self.blocked,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ResidualDiagnostics:
        homogeneity = data.get("homogeneity")
        common = data.get("common")
        sigma0 = data.get("sigma0")
        return cls(
            groups=tuple(GroupNormality.from_dict(g) for g in data["groups"]),
            homogeneity=None if homogeneity is None else TestOutcome.from_dict(homogeneity),
            common=None if common is None else TestOutcome.from_dict(common),
            sigma0=None if sigma0 is None else float(sigma0),
            blocked=data.get("blocked"),
        )


def diagnose_residuals(
    groups: Sequence[Sequence[float]],
    alpha: float = DEFAULT_ALPHA,
    labels: Optional[Sequence[str]] = None,
) -> ResidualDiagnostics:
    """Run normality, homogeneity of sigma and common sigma in order.

    The sequence stops at the first stage that rejects and records it in
    ``blocked``; sigma0 is only set when every stage passed.
    """
    names = _labels(len(groups), labels)
    normality = tuple(residual_normality(g, alpha, n) for n, g in zip(names, groups))
    failed = [g.group for g in normality if g.outcome.rejected]
    if failed:
        logger.info("normality rejected for group(s) %s", ", ".join(failed))
        return ResidualDiagnostics(normality, blocked=NORMALITY)

    homogeneity = homogeneity_sigma(groups, alpha, names)
    if homogeneity.rejected:
        logger.info("homogeneity of sigma rejected")
        return ResidualDiagnostics(normality, homogeneity, blocked=HOMOGENEITY_SIGMA)

    common, sigma0 = common_sigma(groups, alpha, homogeneity=homogeneity)
    if sigma0 is None:
        logger.info("common sigma rejected")
        return ResidualDiagnostics(normality, homogeneity, common, blocked=COMMON_SIGMA)
    logger.debug("residuals validated, sigma0=%.6f", sigma0)
    return ResidualDiagnostics(normality, homogeneity, common, sigma0)


def homogeneity_effects(
    d: SingleFactorData,
    centers: Sequence[float],
    sigmas: Sequence[float],
    mu0: float = 0.0,
    alpha: float = DEFAULT_ALPHA,
    *,
    name: str = "homogeneity-effects",
    parameter: str = "a",
    sample_prefix: str = "z",
    origin: Union[AdjustmentOrigin, str] = AdjustmentOrigin.SHIFT,
) -> TestOutcome:
    """Test H0: every level shares one effect (or mean, with mu0 = 0).

    Level i is shifted by mu0 and counted against AI(center_j, sigma_i0) for
    every reference j != i.

    Args:
        d: Single-factor data (or a collapsed two-factor factor).
        centers: Hypothesised centre of each level, a_j0 or mu_j0.
        sigmas: Scale sigma_i0 of each level.
        mu0: Overall level subtracted from every sample.
        alpha: Significance level.
        name: Test identifier in the outcome.
        parameter: Prefix of the reference parameter names (``a``, ``b``, ``mu``).
        sample_prefix: Prefix of the sample names.
        origin: Adjustment origin recorded for the shifted samples.

    Raises:
        InvalidInputError: If centers or sigmas do not have one entry per level.
        DegenerateGroupError: If a sigma is not positive.
    """
    r = d.levels
    if len(centers) != r or len(sigmas) != r:
        raise InvalidInputError(f"need {r} centers and {r} sigmas")
    if not all(math.isfinite(c) for c in centers):
        raise InvalidInputError("centers must be finite")
    for k, sigma in enumerate(sigmas):
        if not (math.isfinite(sigma) and sigma > 0.0):
            raise DegenerateGroupError(d.labels[k], f"sigma must be > 0, got {sigma!r}")
    rule = CountingRule(alpha)
    samples = [adjust_shift(d.obs[i], mu0, AdjustmentOrigin(origin)).values for i in range(r)]
    refs = [f"{parameter}{j + 1}0" for j in range(r)]
    cols = [f"{sample_prefix}{i + 1}" for i in range(r)]
    zero_centred = [acceptance_interval(0.0, sigmas[i], alpha) for i in range(r)]
    table = tuple(
        tuple(zero_centred[i].shifted(float(centers[j])) for i in range(r)) for j in range(r)
    )
    details = [
        _check(cols[i], refs[j], samples[i], table[j][i], rule)
        for i in range(r)
        for j in range(r)
        if i != j
    ]
    return _outcome(
        name,
        details,
        ai_rows=tuple(refs),
        ai_cols=tuple(cols),
        ai_table=table,
        sigmas=tuple((cols[i], float(sigmas[i])) for i in range(r)),
        constants=(("mu0", float(mu0)),),
    )


def collapsed_sigma(sample: Sequence[float]) -> float:
    """Scale of a collapsed factor-level sample: its standard deviation about its own mean."""
    values = np.asarray(sample, dtype=float)
    return moment_sigma(values, float(np.mean(values)))


def homogeneity_main_effect(
    d: TwoFactorData,
    which: Union[Factor, str],
    fit: EffectFit,
    alpha: float = DEFAULT_ALPHA,
) -> TestOutcome:
    """Test H0 for the main effects of one factor on collapsed samples.

    All cells sharing a level are merged, shifted by mu0 = fitted mu and
    tested with the single-factor procedure using the fitted marginal
    effects as centres.

    Raises:
        InvalidInputError: If fit carries no factor-B effects.
        DegenerateGroupError: If a collapsed level has fewer than 2 points or zero spread.
    """
    which = Factor(which)
    if fit.b is None:
        raise InvalidInputError("main-effect tests need a two-factor fit")
    collapsed = collapse_by_factor(d, which)
    centers = fit.a_values if which is Factor.A else fit.b_values
    sigmas = []
    for k in range(collapsed.levels):
        row = collapsed.row(k)
        group = f"{which.value}{k + 1}"
        if row.size < 2:
            raise DegenerateGroupError(group, f"needs at least 2 points, got {row.size}")
        sigma = collapsed_sigma(row)
        if not sigma > 0.0:
            raise DegenerateGroupError(group, "collapsed sample has zero spread")
        sigmas.append(sigma)
    origin = AdjustmentOrigin.COLLAPSED_A if which is Factor.A else AdjustmentOrigin.COLLAPSED_B
    return homogeneity_effects(
        collapsed,
        centers,
        sigmas,
        fit.mu.value,
        alpha,
        name=f"main-effect-{which.value}",
        parameter=which.value.lower(),
        sample_prefix=f"z{which.value}",
        origin=origin,
    )


def interaction_test(d: TwoFactorData, fit: EffectFit, alpha: float = DEFAULT_ALPHA) -> TestOutcome:
    """Test H0: every interaction effect is zero.

    Cell (i, j) is shifted by mu0 + a_i0 + b_j0 and counted against
    AI(0, sigma_ij0), where sigma_ij0 is the second moment of the cell's
    fitted residuals. Any rejecting cell rejects H0.

    Raises:
        InvalidInputError: If fit is not an interaction fit.
        DegenerateGroupError: If a cell has fewer than 2 points or zero residual scale.
    """
    if fit.ab is None or fit.b is None:
        raise InvalidInputError("interaction test needs an interaction fit")
    rule = CountingRule(alpha)
    details = []
    sigmas = []
    for i in range(d.levels_a):
        for j in range(d.levels_b):
            cell = f"({i + 1},{j + 1})"
            adjusted = adjust_cell(d, i, j, fit.mu.value, fit.a[i].value, fit.b[j].value)
            residuals = np.asarray(adjusted.values) - fit.ab[i][j].value
            sigma = _group_sigma(cell, residuals)
            ai = acceptance_interval(0.0, sigma, alpha)
            reference = f"ab{d.cell_name(i, j)}"
            details.append(_check(f"z{cell}", reference, adjusted.values, ai, rule))
            sigmas.append((cell, sigma))
    return _outcome(
        "interaction-AB",
        details,
        ai_rows=("ab0=0",),
        ai_cols=tuple(c.sample for c in details),
        ai_table=(tuple(c.interval for c in details),),
        sigmas=tuple(sigmas),
        constants=(("mu0", fit.mu.value),),
    )
