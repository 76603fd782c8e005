"""Hypothesis property-based tests for the pseudoinverse and constrained solve."""

from __future__ import annotations

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ufe_engine.linsolve import penrose_residuals, pinv, solve_constrained_ls


@st.composite
def conditioned_matrices(draw: st.DrawFn) -> np.ndarray:
    """Matrices with chosen rank and singular values in [0.1, 10]."""
    rows = draw(st.integers(min_value=1, max_value=6))
    cols = draw(st.integers(min_value=1, max_value=6))
    rank = draw(st.integers(min_value=0, max_value=min(rows, cols)))
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.normal(size=(rows, rows)))
    v, _ = np.linalg.qr(rng.normal(size=(cols, cols)))
    s = draw(
        arrays(np.float64, (rank,), elements=st.floats(min_value=0.1, max_value=10.0))
    )
    return (u[:, :rank] * s) @ v[:, :rank].T


@given(conditioned_matrices())
def test_pinv_satisfies_penrose_conditions(a: np.ndarray) -> None:
    scale = max(1.0, float(np.linalg.norm(a)))
    residuals = penrose_residuals(a, pinv(a, tol=1e-10))
    assert max(residuals) <= 1e-8 * scale


@given(
    arrays(
        np.float64,
        st.tuples(st.integers(1, 5), st.integers(1, 5)),
        elements=st.integers(min_value=-1000, max_value=1000).map(float),
    )
)
def test_pinv_shape_and_finiteness(a: np.ndarray) -> None:
    result = pinv(a)
    assert result.shape == (a.shape[1], a.shape[0])
    assert np.all(np.isfinite(result))


@settings(deadline=None)
@given(
    st.integers(min_value=2, max_value=4),
    st.integers(min_value=0, max_value=2**32 - 1),
)
def test_full_rank_unconstrained_solve_matches_lstsq(p: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(p + 3, p))
    z = rng.normal(size=p + 3)
    solution = solve_constrained_ls(x, z)
    expected, *_ = np.linalg.lstsq(x, z, rcond=None)
    np.testing.assert_allclose(solution.beta, expected, atol=1e-9)
    assert solution.identifiable
