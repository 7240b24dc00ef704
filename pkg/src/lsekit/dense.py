"""Dense desk-scale linear algebra: pivoted QR, pseudoinverse, null bases.

These are the oracle-grade primitives backing the reference solvers and the
test-problem generator.  Everything here densifies its input and is guarded
by the callers' size caps.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import NumericalError

__all__ = [
    "as_dense", "default_rank_tol", "numerical_rank",
    "dense_qr", "dense_pinv", "null_basis", "GivensRotation", "make_givens",
]

EPS = np.finfo(np.float64).eps


def as_dense(M):
    """Return a 2-D float array for an ndarray or anything with toarray()."""
    if hasattr(M, "toarray"):
        return M.toarray()
    return np.atleast_2d(np.asarray(M, dtype=np.float64))


def default_rank_tol(M):
    """max(nrows, ncols) * eps, to be scaled by sigma_max by the caller."""
    return max(M.shape) * EPS


def dense_qr(M, pivoting=False):
    """QR factorization M P = Q R (economic).

    Returns
    -------
    Q : (m, k) with orthonormal columns, k = min(m, n)
    R : (k, n) upper triangular; with pivoting its diagonal is
        nonincreasing in magnitude
    perm : (n,) column permutation such that M[:, perm] = Q R
    """
    M = as_dense(M)
    if M.size == 0:
        raise NumericalError("dense_qr: empty matrix")
    if pivoting:
        Q, R, perm = scipy.linalg.qr(M, mode="economic", pivoting=True)
    else:
        Q, R = scipy.linalg.qr(M, mode="economic")
        perm = np.arange(M.shape[1])
    return Q, R, perm


def numerical_rank(M, rank_tol=None):
    """Number of singular values above rank_tol * sigma_max."""
    M = as_dense(M)
    if M.size == 0:
        return 0
    s = _svdvals(M)
    if rank_tol is None:
        rank_tol = default_rank_tol(M)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_tol * s[0]))


def dense_pinv(M, rank_tol=None):
    """Moore-Penrose pseudoinverse via SVD.

    Singular values below ``rank_tol * sigma_max`` are treated as zero.
    """
    M = as_dense(M)
    if rank_tol is None:
        rank_tol = default_rank_tol(M)
    if rank_tol < 0:
        raise ValueError("rank_tol must be >= 0")
    U, s, Vt = _svd(M)
    if len(s) == 0 or s[0] == 0.0:
        return np.zeros((M.shape[1], M.shape[0]))
    r = int(np.count_nonzero(s > rank_tol * s[0]))
    return (Vt[:r].T / s[:r]) @ U[:, :r].T


def null_basis(M, rank_tol=None):
    """2-orthonormal basis for the null space of M, as columns of an array.

    The returned array has shape (ncols, ncols - rank(M)); zero columns for
    a trivial null space.
    """
    M = as_dense(M)
    n = M.shape[1]
    if rank_tol is None:
        rank_tol = default_rank_tol(M)
    U, s, Vt = _svd(M)
    if len(s) == 0 or s[0] == 0.0:
        r = 0
    else:
        r = int(np.count_nonzero(s > rank_tol * s[0]))
    return Vt[r:].T.copy() if r < n else np.zeros((n, 0))


def _svd(M):
    try:
        return np.linalg.svd(M, full_matrices=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise NumericalError(f"SVD did not converge: {exc}") from exc


def _svdvals(M):
    try:
        return np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise NumericalError(f"SVD did not converge: {exc}") from exc


class GivensRotation(NamedTuple):
    """Plane rotation (c, s) with c^2 + s^2 = 1."""
    c: float
    s: float

    def apply(self, a, b):
        return self.c * a + self.s * b, -self.s * a + self.c * b


def make_givens(a, b):
    """Rotation zeroing b against a; returns (rotation, r) with r = hypot(a, b).

    Stable form of c = a/r, s = b/r; handles a = b = 0.
    """
    r = np.hypot(a, b)
    if r == 0.0:
        return GivensRotation(1.0, 0.0), 0.0
    return GivensRotation(a / r, b / r), r
