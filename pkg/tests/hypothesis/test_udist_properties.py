"""Hypothesis property-based tests for the normal uncertainty distribution."""

from __future__ import annotations

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from ufe_engine.udist import (
    NormalUncertain,
    acceptance_interval,
    cdf,
    confidence_interval,
    inv,
)

locations = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)
scales = st.floats(min_value=1e-2, max_value=1e2, allow_nan=False)
levels = st.floats(min_value=1e-6, max_value=1.0 - 1e-6)
standardized = st.floats(min_value=-20.0, max_value=20.0)
# Keeps cdf at least ~1e-7 away from 0 and 1 so inv is well conditioned.
invertible = st.floats(min_value=-8.0, max_value=8.0)


@given(locations, scales, invertible)
def test_inv_undoes_cdf(e: float, sigma: float, t: float) -> None:
    """Test that inv(cdf(z)) recovers z away from the saturated tails."""
    d = NormalUncertain(e, sigma)
    z = e + t * sigma
    assert inv(cdf(z, d), d) == pytest.approx(z, abs=1e-7 * max(1.0, abs(z)) + 1e-6 * sigma)


@given(locations, scales, standardized)
def test_cdf_is_symmetric_about_location(e: float, sigma: float, t: float) -> None:
    d = NormalUncertain(e, sigma)
    offset = t * sigma
    assert cdf(e + offset, d) + cdf(e - offset, d) == pytest.approx(1.0, abs=1e-9)


@given(locations, scales, standardized, standardized)
def test_cdf_is_monotone(e: float, sigma: float, t1: float, t2: float) -> None:
    d = NormalUncertain(e, sigma)
    lo, hi = sorted((t1, t2))
    assert cdf(e + lo * sigma, d) <= cdf(e + hi * sigma, d) + 1e-15


@given(locations, scales, levels)
def test_acceptance_interval_contains_center(center: float, sigma: float, alpha: float) -> None:
    ai = acceptance_interval(center, sigma, alpha)
    assert ai.contains(center)
    assert ai.midpoint == pytest.approx(center, abs=1e-9 * max(1.0, abs(center)))


@given(locations, scales, levels)
def test_acceptance_and_confidence_intervals_are_dual(
    center: float, sigma: float, alpha: float
) -> None:
    """Test that AI at significance alpha matches CI at confidence 1 - alpha."""
    ai = acceptance_interval(center, sigma, alpha)
    ci = confidence_interval(center, sigma, 1.0 - alpha)
    assert ai.half_width == pytest.approx(ci.half_width, rel=1e-6)


@given(locations, scales, levels, st.floats(min_value=-1e3, max_value=1e3))
def test_acceptance_interval_moves_with_center(
    center: float, sigma: float, alpha: float, shift: float
) -> None:
    base = acceptance_interval(center, sigma, alpha)
    moved = acceptance_interval(center + shift, sigma, alpha)
    assert moved.half_width == pytest.approx(base.half_width, rel=1e-9, abs=1e-9)


@given(
    locations,
    scales,
    st.floats(min_value=0.001, max_value=0.999, exclude_min=True, exclude_max=True),
)
def test_cdf_undoes_inv(e: float, sigma: float, alpha: float) -> None:
    """Test that cdf(inv(alpha)) recovers alpha."""
    d = NormalUncertain(e, sigma)
    assert cdf(inv(alpha, d), d) == pytest.approx(alpha, abs=1e-10)


@given(
    locations,
    scales,
    st.floats(min_value=1e-6, max_value=1.0 - 1e-6),
    st.floats(min_value=1e-6, max_value=1.0 - 1e-6),
)
def test_acceptance_interval_narrows_as_alpha_grows(
    center: float, sigma: float, alpha1: float, alpha2: float
) -> None:
    lo, hi = sorted((alpha1, alpha2))
    assume(hi - lo > 1e-6)
    wide = acceptance_interval(center, sigma, lo)
    narrow = acceptance_interval(center, sigma, hi)
    assert narrow.half_width < wide.half_width
