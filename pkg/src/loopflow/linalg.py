"""Small dense linear algebra used by the solvers and certificates.

LU factorization with partial pivoting (LAPACK via scipy) behind an explicit
singularity threshold: a matrix counts as singular when some pivot falls
below 1e-12 times its infinity norm. Systems here are k x k with k the
number of basis cycles, so explicit inverses are affordable.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from .errors import Singular

PIVOT_RTOL = 1e-12


def inf_norm(M: np.ndarray) -> float:
    """Induced infinity norm: max absolute row sum (max |entry| for vectors)."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        return float(np.max(np.abs(M))) if M.size else 0.0
    return float(np.max(np.abs(M).sum(axis=1)))


def _lu_factor(M: np.ndarray):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise Singular("matrix has non-finite entries")
    norm = inf_norm(M)
    with warnings.catch_warnings():
        # the pivot threshold below is the singularity check; scipy's
        # exact-zero-diagonal warning would just duplicate it
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if norm == 0.0 or np.min(pivots) <= PIVOT_RTOL * norm:
        raise Singular(
            f"pivot {np.min(pivots):.3e} below threshold {PIVOT_RTOL * norm:.3e}"
        )
    return lu, piv


def lu_solve(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve M y = b by LU with partial pivoting."""
    b = np.asarray(b, dtype=float)
    return scipy.linalg.lu_solve(_lu_factor(M), b, check_finite=False)


def inf_norm_inverse(M: np.ndarray) -> float:
    """The infinity norm of M^-1, from k unit-vector solves."""
    M = np.asarray(M, dtype=float)
    inv = scipy.linalg.lu_solve(_lu_factor(M), np.eye(M.shape[0]), check_finite=False)
    return inf_norm(inv)
