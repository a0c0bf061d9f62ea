"""Dense linear algebra kernels shared by the solver and diagnostics.

Matrices and vectors are plain float64 numpy arrays (row-major). Square
systems go through an LU factorization with partial pivoting; least-squares,
rank, and condition queries all come from singular values so that the
rank/conditioning story is consistent across the package.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import lu_factor, lu_solve

__all__ = [
    "SingularMatrix",
    "ZeroMatrix",
    "PIVOT_RTOL",
    "solve_square",
    "solve_least_squares",
    "numerical_rank",
    "condition_number",
]

# Relative pivot floor: a pivot |U_ii| below PIVOT_RTOL * max row norm of A
# is treated as a structural zero.
PIVOT_RTOL = 1e-12

# Absolute singular-value floor below which a matrix counts as all-zero.
ZERO_FLOOR = 1e-300


class SingularMatrix(Exception):
    """Square solve hit a pivot below the relative tolerance."""


class ZeroMatrix(Exception):
    """Every singular value sits below the absolute zero floor."""


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def _as_vector(b, rows: int) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or b.shape[0] != rows:
        raise ValueError(f"expected a vector of length {rows}, got shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise ValueError("vector entries must be finite")
    return b


def solve_square(a, b) -> np.ndarray:
    """Solve A x = b for square A by LU with partial pivoting.

    Raises SingularMatrix when any pivot falls below PIVOT_RTOL times the
    largest row norm of A, rather than returning a garbage solution.
    """
    a = _as_matrix(a)
    m, n = a.shape
    if m != n:
        raise ValueError(f"solve_square needs a square matrix, got {a.shape}")
    b = _as_vector(b, m)
    row_scale = np.abs(a).sum(axis=1).max() if m else 0.0
    if row_scale <= 0.0:
        raise SingularMatrix("all-zero matrix")
    with warnings.catch_warnings():
        # the pivot check below is the error path; scipy's warning is noise
        warnings.simplefilter("ignore")
        lu, piv = lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < PIVOT_RTOL * row_scale:
        raise SingularMatrix(
            f"pivot {pivots.min():.3e} below tolerance {PIVOT_RTOL * row_scale:.3e}"
        )
    return lu_solve((lu, piv), b, check_finite=False)


def solve_least_squares(a, b, trunc_tol: float = 1e-10) -> np.ndarray:
    """Minimum-norm least-squares solution via truncated SVD.

    Singular values below trunc_tol * sigma_max are dropped. Raises
    ZeroMatrix when the whole spectrum is numerically zero, which is the
    caller's signal that no direction carries any information.
    """
    a = _as_matrix(a)
    b = _as_vector(b, a.shape[0])
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] < ZERO_FLOOR:
        raise ZeroMatrix("matrix is numerically zero")
    keep = s > trunc_tol * s[0]
    u, s, vt = u[:, keep], s[keep], vt[keep]
    return vt.T @ ((u.T @ b) / s)


def numerical_rank(a, trunc_tol: float = 1e-10) -> int:
    """Number of singular values above trunc_tol * sigma_max (0 for a zero matrix)."""
    a = _as_matrix(a)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] < ZERO_FLOOR:
        return 0
    return int(np.sum(s > trunc_tol * s[0]))


def condition_number(a) -> float:
    """sigma_max / sigma_min; +inf when the smallest singular value is zero."""
    a = _as_matrix(a)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] < ZERO_FLOOR:
        return float("inf")
    if s[-1] <= 0.0:
        return float("inf")
    return float(s[0] / s[-1])
