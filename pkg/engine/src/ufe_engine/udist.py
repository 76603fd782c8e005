"""Normal uncertainty distribution primitives.

An uncertain variable is normal, written N(e, sigma), when its uncertainty
distribution is the logistic-shaped curve

    Phi(z) = (1 + exp(pi * (e - z) / (sqrt(3) * sigma))) ** -1

This module provides that distribution, its inverse, and the two interval
constructions the estimators and tests are built on: confidence intervals
around an estimate and acceptance intervals around a hypothesised value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

from .exceptions import InvalidInputError

# sqrt(3) / pi, the scale factor between sigma and the log-odds axis.
SCALE = math.sqrt(3.0) / math.pi


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")
    return value


def _require_level(name: str, alpha: float) -> float:
    alpha = _require_finite(name, alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"{name} must lie in (0, 1), got {alpha!r}")
    return alpha


def _require_scale(sigma: float) -> float:
    sigma = _require_finite("sigma", sigma)
    if sigma <= 0.0:
        raise InvalidInputError(f"sigma must be > 0, got {sigma!r}")
    return sigma


def _logit(alpha: float) -> float:
    return math.log(alpha) - math.log1p(-alpha)


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] used for confidence and acceptance intervals."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise InvalidInputError(f"interval bounds out of order: [{self.lo}, {self.hi}]")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.hi - self.lo)

    def contains(self, value: float) -> bool:
        """Return True when value lies in the closed interval.

        Boundary points count as inside; only strict exceedances are outliers.
        """
        return self.lo <= value <= self.hi

    def shifted(self, offset: float) -> Interval:
        return Interval(self.lo + offset, self.hi + offset)

    def to_list(self) -> list[float]:
        return [self.lo, self.hi]

    @classmethod
    def from_list(cls, data: Any) -> Interval:
        lo, hi = data
        return cls(float(lo), float(hi))


@dataclass(frozen=True)
class NormalUncertain:
    """Normal uncertainty distribution N(e, sigma).

    Attributes:
        e: Location, in the same units as the data.
        sigma: Scale (> 0), in the same units as the data.
    """

    e: float
    sigma: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "e", _require_finite("e", self.e))
        object.__setattr__(self, "sigma", _require_scale(self.sigma))

    def cdf(self, z: float) -> float:
        return cdf(z, self)

    def inv(self, alpha: float) -> float:
        return inv(alpha, self)

    def to_dict(self) -> dict[str, float]:
        return {"e": self.e, "sigma": self.sigma}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> NormalUncertain:
        return cls(float(data["e"]), float(data["sigma"]))


def cdf(z: float, d: NormalUncertain) -> float:
    """Evaluate the uncertainty distribution of d at z.

    Args:
        z: Point of evaluation.
        d: The distribution.

    Returns:
        Phi(z) in (0, 1). Works on the log-odds axis so extreme standardized
        values never overflow exp().

    Raises:
        InvalidInputError: If z is not finite.
    """
    z = _require_finite("z", z)
    t = (z - d.e) / (SCALE * d.sigma)
    if t >= 0.0:
        return 1.0 / (1.0 + math.exp(-t))
    u = math.exp(t)
    return u / (1.0 + u)


def inv(alpha: float, d: NormalUncertain) -> float:
    """Inverse uncertainty distribution: e + (sqrt(3) sigma / pi) ln(alpha / (1 - alpha)).

    Raises:
        InvalidInputError: If alpha is not in (0, 1).
    """
    alpha = _require_level("alpha", alpha)
    return d.e + SCALE * d.sigma * _logit(alpha)


def ci_half_width(sigma: float, confidence: float) -> float:
    """Half-width sigma * (sqrt(3)/pi) * ln((1 + confidence) / (1 - confidence))."""
    confidence = _require_level("confidence", confidence)
    sigma = _require_scale(sigma)
    return SCALE * sigma * (math.log1p(confidence) - math.log1p(-confidence))


def confidence_interval(est: float, sigma: float, alpha: float) -> Interval:
    """Confidence interval at level alpha (e.g. 0.95) for an estimate with law N(est, sigma).

    Args:
        est: Point estimate (centre of the interval).
        sigma: Scale of the estimator's distribution.
        alpha: Confidence level in (0, 1).

    Returns:
        [est - h, est + h] with h = sigma * (sqrt(3)/pi) * ln((1 + alpha)/(1 - alpha)).
    """
    est = _require_finite("est", est)
    h = ci_half_width(sigma, alpha)
    return Interval(est - h, est + h)


def acceptance_interval(center: float, sigma: float, alpha: float) -> Interval:
    """Acceptance interval [Phi^-1(alpha/2), Phi^-1(1 - alpha/2)] of N(center, sigma).

    The two bounds are built as center -/+ the same half-width, so the
    interval is exactly symmetric about its centre.

    Args:
        center: Hypothesised location.
        sigma: Scale of the hypothesised distribution.
        alpha: Significance level in (0, 1).

    Returns:
        The acceptance interval.
    """
    center = _require_finite("center", center)
    alpha = _require_level("alpha", alpha)
    sigma = _require_scale(sigma)
    h = -SCALE * sigma * _logit(0.5 * alpha)
    return Interval(center - h, center + h)
