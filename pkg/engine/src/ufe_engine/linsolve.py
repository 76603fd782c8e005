"""Dense linear algebra for the unbalanced (matrix) estimation path.

Sum-to-zero constraints make the incidence design matrix rank-deficient by
construction, so everything here goes through a rank-revealing SVD
pseudoinverse rather than a plain solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
import numpy.typing as npt

from .exceptions import InfeasibleConstraintsError, InvalidInputError, SolverError

logger = logging.getLogger(__name__)

DenseMatrix = npt.NDArray[np.float64]

CONSTRAINT_TOL = 1e-8
STATIONARITY_TOL = 1e-6
# Relative singular-value cutoff for the normal-equation and KKT matrices, whose
# null directions come out of the SVD at round-off level rather than exactly zero.
RANK_TOL = 1e-10


def as_matrix(a: Any, name: str = "matrix") -> DenseMatrix:
    """Return a as a finite 2-D float array."""
    m = np.array(a, dtype=float)
    if m.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return m


def _as_vector(v: Any, length: int, name: str) -> DenseMatrix:
    vec = np.array(v, dtype=float).reshape(-1)
    if vec.shape != (length,):
        raise InvalidInputError(f"{name} must have length {length}, got {vec.size}")
    if not np.all(np.isfinite(vec)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return vec


def pinv(a: Any, tol: Optional[float] = None) -> DenseMatrix:
    """Moore-Penrose pseudoinverse via the singular value decomposition.

    Args:
        a: Matrix to invert.
        tol: Relative cutoff; singular values below ``tol * sigma_max`` are
            treated as zero. Defaults to ``max(rows, cols) * eps``.

    Returns:
        A+ with shape (cols, rows).

    Raises:
        InvalidInputError: If a has non-finite entries or tol is negative.
    """
    a = as_matrix(a)
    rows, cols = a.shape
    if a.size == 0:
        return np.zeros((cols, rows))
    if tol is None:
        tol = max(rows, cols) * np.finfo(float).eps
    elif tol < 0:
        raise InvalidInputError(f"tol must be >= 0, got {tol!r}")

    u, s, vh = np.linalg.svd(a, full_matrices=False)
    smax = float(s.max()) if s.size else 0.0
    if smax == 0.0:
        return np.zeros((cols, rows))
    keep = s > tol * smax
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    result = (vh.T * inv_s) @ u.T
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(
            "pinv of %dx%d matrix: rank %d, penrose residuals %s",
            rows,
            cols,
            int(keep.sum()),
            ", ".join(f"{r:.2e}" for r in penrose_residuals(a, result)),
        )
    return result


def penrose_residuals(a: Any, a_pinv: Any) -> tuple[float, float, float, float]:
    """Frobenius norms of the four Penrose condition residuals.

    Returns:
        (||A A+ A - A||, ||A+ A A+ - A+||, ||(A A+)^T - A A+||, ||(A+ A)^T - A+ A||).
    """
    a = as_matrix(a, "a")
    g = as_matrix(a_pinv, "a_pinv")
    ag = a @ g
    ga = g @ a
    return (
        float(np.linalg.norm(ag @ a - a)),
        float(np.linalg.norm(ga @ g - g)),
        float(np.linalg.norm(ag.T - ag)),
        float(np.linalg.norm(ga.T - ga)),
    )


@dataclass(frozen=True, eq=False)
class ConstrainedLsSolution:
    """Result of an equality-constrained least-squares solve.

    Attributes:
        beta: Coefficient estimate, length p.
        lam: Lagrange multipliers, one per constraint row (not unique when
            constraints are redundant; the minimum-norm choice is returned).
        q: (X^T X)^+ X^T, shape (p, N); its absolute row sums scale the
            estimator distributions.
        constraint_residual: max |C beta - d|.
        identifiable: True when [X; C] has full column rank, so beta is unique.
    """

    beta: DenseMatrix
    lam: DenseMatrix
    q: DenseMatrix
    constraint_residual: float
    identifiable: bool

    def q_row_abs_sums(self) -> DenseMatrix:
        return np.abs(self.q).sum(axis=1)


def _rank(a: DenseMatrix) -> int:
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int((s > RANK_TOL * s[0]).sum())


def solve_constrained_ls(
    x: Any,
    z: Any,
    c: Optional[Any] = None,
    d: Optional[Any] = None,
) -> ConstrainedLsSolution:
    """Minimise ||Z - X beta||^2 subject to C beta = d.

    The augmented system [[2 X^T X, C^T], [C, 0]] [beta; lam] = [2 X^T Z; d]
    is solved with the pseudoinverse, so redundant constraint rows are
    tolerated. The closed form
    (X^T X)^+ X^T Z - 1/2 (X^T X)^+ C^T lam is then checked against the
    projection of beta onto the row space of X.

    Args:
        x: Design matrix, N x p.
        z: Responses, length N.
        c: Constraint matrix, k x p; None or empty for an unconstrained fit.
        d: Constraint right-hand side, length k; defaults to zeros.

    Returns:
        The solution with beta, lam and Q = (X^T X)^+ X^T.

    Raises:
        InvalidInputError: On inconsistent shapes or non-finite input.
        InfeasibleConstraintsError: If C beta = d cannot be met.
        SolverError: If the stationarity or closed-form cross-checks fail.
    """
    x = as_matrix(x, "x")
    n, p = x.shape
    z = _as_vector(z, n, "z")
    if c is None or np.size(c) == 0:
        c = np.zeros((0, p))
    else:
        c = as_matrix(c, "c")
        if c.shape[1] != p:
            raise InvalidInputError(f"c must have {p} columns, got {c.shape[1]}")
    k = c.shape[0]
    d = np.zeros(k) if d is None else _as_vector(d, k, "d")

    xtx = x.T @ x
    xtx_pinv = pinv(xtx, RANK_TOL)
    q = xtx_pinv @ x.T
    xtz = x.T @ z

    if k == 0:
        beta = q @ z
        lam = np.zeros(0)
    else:
        kkt = np.block([[2.0 * xtx, c.T], [c, np.zeros((k, k))]])
        rhs = np.concatenate([2.0 * xtz, d])
        sol = pinv(kkt, RANK_TOL) @ rhs
        beta, lam = sol[:p], sol[p:]

    scale = max(1.0, float(np.abs(z).max(initial=0.0)), float(np.abs(d).max(initial=0.0)))
    residual = float(np.abs(c @ beta - d).max(initial=0.0))
    if residual > CONSTRAINT_TOL * scale:
        raise InfeasibleConstraintsError(residual, CONSTRAINT_TOL * scale)

    stationarity = float(np.linalg.norm(2.0 * xtx @ beta - 2.0 * xtz + c.T @ lam))
    if stationarity > STATIONARITY_TOL * max(float(np.linalg.norm(xtz)), 1.0):
        raise SolverError(f"stationarity residual {stationarity:.3e} is too large")

    closed_form = q @ z - 0.5 * xtx_pinv @ c.T @ lam
    gap = float(np.linalg.norm(closed_form - xtx_pinv @ xtx @ beta))
    if gap > STATIONARITY_TOL * max(float(np.linalg.norm(beta)), 1.0):
        raise SolverError(f"closed-form estimate disagrees with the KKT solve by {gap:.3e}")

    identifiable = _rank(np.vstack([x, c])) == p
    if not identifiable:
        logger.info("coefficients are not identifiable; returning the minimum-norm solution")
    logger.debug(
        "constrained LS: N=%d p=%d k=%d residual=%.2e stationarity=%.2e",
        n, p, k, residual, stationarity,
    )
    return ConstrainedLsSolution(beta, lam, q, residual, identifiable)
