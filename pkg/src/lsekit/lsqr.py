"""LSQR and the inner solvers used by the outer Krylov iterations.

``lsqr_solve`` is a standard Golub-Kahan based LSQR returning the minimum
2-norm least squares solution.  On top of it sit the two inner-solve
helpers needed at every outer step of the decomposed solvers:

* ``GramInnerSolver`` applies G^+ C^T (G = A^T A + C^T C) by solving the
  vertically stacked system [C; A] x ~ (u; 0), without ever forming G.
* ``PinvSolver`` applies C^+.

Both support an iterative mode (LSQR at a configurable tolerance) and a
direct-dense mode that factorizes once and reuses the factorization across
all inner solves of an outer iteration loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dense import as_dense, dense_pinv
from .errors import DimensionError
from .sparse import CsrMatrix

__all__ = [
    "InnerSolverConfig", "StackedOperator", "LsqrResult", "lsqr_solve",
    "GramInnerSolver", "PinvSolver", "solve_inner_G", "solve_inner_C",
]


@dataclass(frozen=True)
class InnerSolverConfig:
    """Inner least squares solve settings.

    tol is the relative LSQR stopping tolerance; mode "direct" replaces the
    iterative solve by a cached dense pseudoinverse (the tau = 0 setting).
    """

    tol: float = 1e-12
    max_iters: int | None = None
    mode: str = "iterative"  # "iterative" | "direct"

    def __post_init__(self):
        if self.tol < 0:
            raise ValueError("tol must be >= 0")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.mode not in ("iterative", "direct"):
            raise ValueError(f"unknown inner mode {self.mode!r}")


class _MatOp:
    """Adapter giving a dense array the matvec/rmatvec interface."""

    def __init__(self, M):
        self.M = np.atleast_2d(np.asarray(M, dtype=np.float64))
        self.shape = self.M.shape

    def matvec(self, x):
        return self.M @ x

    def rmatvec(self, y):
        return self.M.T @ y


def as_operator(M):
    if hasattr(M, "matvec") and hasattr(M, "rmatvec"):
        return M
    return _MatOp(M)


class StackedOperator:
    """The vertically stacked operator [top; bottom], applied implicitly."""

    def __init__(self, top, bottom):
        self.top = as_operator(top)
        self.bottom = as_operator(bottom)
        if self.top.shape[1] != self.bottom.shape[1]:
            raise DimensionError("stacked operators must share a column count")
        self.shape = (self.top.shape[0] + self.bottom.shape[0],
                      self.top.shape[1])

    def matvec(self, x):
        return np.concatenate([self.top.matvec(x), self.bottom.matvec(x)])

    def rmatvec(self, y):
        p = self.top.shape[0]
        return self.top.rmatvec(y[:p]) + self.bottom.rmatvec(y[p:])


class LsqrResult(NamedTuple):
    x: np.ndarray
    iterations: int
    converged: bool
    termination: str
    rnorm: float
    arnorm: float


def lsqr_solve(M, f, cfg=InnerSolverConfig()):
    """Minimum 2-norm solution of min ||M x - f||_2 by LSQR.

    Stops when ||M^T r|| <= tol * ||M|| * ||r|| or
    ||r|| <= tol * (||f|| + ||M|| ||x||), with ||M|| accumulated from the
    bidiagonalization scalars; flags non-convergence at max_iters.
    """
    op = as_operator(M)
    m, n = op.shape
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (m,):
        raise DimensionError(f"rhs has length {len(f)}, expected {m}")
    max_iters = cfg.max_iters or 4 * min(m, n)

    x = np.zeros(n)
    beta = np.linalg.norm(f)
    if beta == 0.0:
        return LsqrResult(x, 0, True, "zero rhs", 0.0, 0.0)
    bnorm = beta
    u = f / beta
    v = op.rmatvec(u)
    alpha = np.linalg.norm(v)
    if alpha == 0.0:
        return LsqrResult(x, 0, True, "rhs orthogonal to range", beta, 0.0)
    v = v / alpha
    w = v.copy()
    phibar, rhobar = beta, alpha
    anorm2 = alpha * alpha
    rnorm, arnorm = beta, alpha * beta

    for k in range(1, max_iters + 1):
        u = op.matvec(v) - alpha * u
        beta = np.linalg.norm(u)
        if beta > 0.0:
            u = u / beta
        anorm2 += alpha * alpha + beta * beta
        v_next = op.rmatvec(u) - beta * v
        alpha_next = np.linalg.norm(v_next)
        if alpha_next > 0.0:
            v_next = v_next / alpha_next

        rho = np.hypot(rhobar, beta)
        c, s = rhobar / rho, beta / rho
        theta = s * alpha_next
        rhobar = -c * alpha_next
        phi = c * phibar
        phibar = s * phibar

        x = x + (phi / rho) * w
        w = v_next - (theta / rho) * w
        v, alpha = v_next, alpha_next

        anorm = np.sqrt(anorm2)
        rnorm = phibar
        arnorm = alpha * abs(c) * phibar
        xnorm = np.linalg.norm(x)
        if beta == 0.0 or alpha == 0.0:
            return LsqrResult(x, k, True, "breakdown (exact)", rnorm, arnorm)
        if arnorm <= cfg.tol * anorm * rnorm:
            return LsqrResult(x, k, True, "normal-equation residual", rnorm, arnorm)
        if rnorm <= cfg.tol * (bnorm + anorm * xnorm):
            return LsqrResult(x, k, True, "residual", rnorm, arnorm)

    return LsqrResult(x, max_iters, False, "max iterations", rnorm, arnorm)


class GramInnerSolver:
    """Applies G^+ C^T, G = A^T A + C^T C, via the stacked system [C; A].

    The minimum 2-norm solution of min ||[C; A] x - (u; 0)|| satisfies the
    normal equations G x = C^T u and lies in R(G), i.e. equals G^+ C^T u.
    In direct mode the dense pseudoinverse of the stacked matrix is computed
    once and reused.
    """

    def __init__(self, A, C, cfg=InnerSolverConfig()):
        self.A = as_operator(A)
        self.C = as_operator(C)
        self.cfg = cfg
        self.m = self.A.shape[0]
        self.p = self.C.shape[0]
        if cfg.mode == "direct":
            K = np.vstack([_densify(C), _densify(A)])
            self._pinv = dense_pinv(K)
        else:
            self._stacked = StackedOperator(self.C, self.A)

    def apply(self, u):
        """Return (G^+ C^T u, inner iterations used)."""
        if self.cfg.mode == "direct":
            return self._pinv @ np.concatenate([u, np.zeros(self.m)]), 0
        rhs = np.concatenate([u, np.zeros(self.m)])
        res = lsqr_solve(self._stacked, rhs, self.cfg)
        return res.x, res.iterations


class PinvSolver:
    """Applies C^+ (minimum 2-norm solution of min ||C x - v||)."""

    def __init__(self, C, cfg=InnerSolverConfig()):
        self.C = as_operator(C)
        self.cfg = cfg
        if cfg.mode == "direct":
            self._pinv = dense_pinv(_densify(C))

    def apply(self, v):
        """Return (C^+ v, inner iterations used)."""
        if self.cfg.mode == "direct":
            return self._pinv @ v, 0
        res = lsqr_solve(self.C, v, self.cfg)
        return res.x, res.iterations


def solve_inner_G(A, C, u, cfg=InnerSolverConfig()):
    """One-off G^+ C^T u (see GramInnerSolver for the looped variant)."""
    return GramInnerSolver(A, C, cfg).apply(u)[0]


def solve_inner_C(C, v, cfg=InnerSolverConfig()):
    """One-off C^+ v (see PinvSolver for the looped variant)."""
    return PinvSolver(C, cfg).apply(v)[0]


def _densify(M):
    if isinstance(M, CsrMatrix):
        return M.toarray()
    if isinstance(M, _MatOp):
        return M.M
    return as_dense(M)
