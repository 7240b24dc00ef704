"""Dense desk-scale reference solvers for the constrained problem.

Classical factorization-based methods (null space, direct elimination,
augmented system) plus the dense weighted-pseudoinverse oracle.  All paths
densify their inputs and are guarded by a size cap; they exist to
cross-validate the iterative solvers, not to scale.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .dense import as_dense, dense_pinv, dense_qr, null_basis
from .errors import (InconsistentConstraintsError, NumericalError,
                     RankDeficiencyError, SizeCapError)

__all__ = [
    "solve_nullspace", "solve_direct_elim", "solve_augmented",
    "weighted_pinv_apply", "SIZE_CAP",
]

SIZE_CAP = 5000  # maximum m + n + p any dense path will densify

CONSISTENCY_RTOL = 1e-8


def _check_cap(m, n, p):
    if m + n + p > SIZE_CAP:
        raise SizeCapError(
            f"dense reference solver refused: m+n+p = {m + n + p} > {SIZE_CAP}")


def _dense_problem(problem):
    A = as_dense(problem.A)
    C = as_dense(problem.C)
    _check_cap(A.shape[0], A.shape[1], C.shape[0])
    return A, C, np.asarray(problem.b, float), np.asarray(problem.d, float)


def solve_nullspace(problem):
    """Null space method: x = x0 + Z y, columns of Z spanning N(C).

    Requires Cx = d to be consistent.  When the stacked (A; C) is
    rank-deficient the minimum-norm y is selected, which makes the result
    the minimum 2-norm solution.
    """
    A, C, b, d = _dense_problem(problem)
    Cpinv = dense_pinv(C)
    x0 = Cpinv @ d
    dnorm = np.linalg.norm(d)
    resid = np.linalg.norm(C @ x0 - d)
    if resid > CONSISTENCY_RTOL * max(dnorm, 1e-300) and dnorm > 0:
        raise InconsistentConstraintsError(
            f"constraints inconsistent: ||C C^+ d - d|| = {resid:.3e} "
            f"exceeds {CONSISTENCY_RTOL:.0e} * ||d||")
    Z = null_basis(C)
    if Z.shape[1] == 0:
        return x0
    y = dense_pinv(A @ Z) @ (b - A @ x0)
    return x0 + Z @ y


def solve_direct_elim(problem):
    """Direct elimination via a pivoted QR of C selecting a nonsingular C1."""
    A, C, b, d = _dense_problem(problem)
    p, n = C.shape
    if p > n:
        raise RankDeficiencyError("C has more rows than columns")
    _, R, perm = dense_qr(C, pivoting=True)
    diag = np.abs(np.diag(R)[:p])
    if p == 0:
        raise RankDeficiencyError("C is empty")
    if diag[-1] <= max(C.shape) * np.finfo(float).eps * max(diag[0], 1e-300):
        raise RankDeficiencyError(
            "C is numerically rank deficient; use solve_nullspace instead")
    C1, C2 = C[:, perm[:p]], C[:, perm[p:]]
    A1, A2 = A[:, perm[:p]], A[:, perm[p:]]
    C1_inv_d = np.linalg.solve(C1, d)
    if n == p:
        x = np.zeros(n)
        x[perm] = C1_inv_d
        return x
    At = A2 - A1 @ np.linalg.solve(C1, C2)
    y2 = dense_pinv(At) @ (b - A1 @ C1_inv_d)
    y1 = np.linalg.solve(C1, d - C2 @ y2)
    x = np.zeros(n)
    x[perm[:p]] = y1
    x[perm[p:]] = y2
    return x


def solve_augmented(problem, return_full=False):
    """Lagrange-multiplier augmented system, solved by dense LU.

    Solves the symmetric indefinite block system in (x, r, lambda) with
    r = b - Ax; requires the full (m+n+p) system to be nonsingular.
    """
    A, C, b, d = _dense_problem(problem)
    m, n = A.shape
    p = C.shape[0]
    K = np.zeros((m + n + p, m + n + p))
    K[:n, n:n + m] = A.T
    K[:n, n + m:] = C.T
    K[n:n + m, :n] = A
    K[n:n + m, n:n + m] = np.eye(m)
    K[n + m:, :n] = C
    rhs = np.concatenate([np.zeros(n), b, d])
    try:
        sol = scipy.linalg.solve(K, rhs)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"augmented system is singular: {exc}") from exc
    if not np.all(np.isfinite(sol)) or \
            np.linalg.norm(K @ sol - rhs) > 1e-6 * max(np.linalg.norm(rhs), 1.0):
        raise NumericalError("augmented system is singular or ill-conditioned")
    x, r, lam = sol[:n], sol[n:n + m], sol[n + m:]
    return (x, r, lam) if return_full else x


def weighted_pinv_apply(K, L, g):
    """Apply the weighted pseudoinverse: the minimum 2-norm solution of
    min ||L x|| over the minimizers of ||K x - g||.

    Dense oracle form (I - (L P_{N(K)})^+ L) K^+ g.
    """
    K = as_dense(K)
    L = as_dense(L)
    _check_cap(L.shape[0], K.shape[1], K.shape[0])
    g = np.asarray(g, dtype=np.float64)
    Kp = dense_pinv(K)
    PN = np.eye(K.shape[1]) - Kp @ K
    y = Kp @ g
    return y - dense_pinv(L @ PN) @ (L @ y)
