"""Decomposed Krylov solvers for the constrained least squares problem.

Two orchestrations of the component solvers:

* ``kids1_solve``: x = x1 + x2 with x1 from the generalized LSQR on
  (A, C, d) and x2 from the null-space-restricted LSQR on (A, C, b).  The
  two sub-solves are independent and may run concurrently.
* ``kids2_solve``: x = x1 + x2 with x1 the minimum-norm solution of
  min ||C x - d||, then x2 restricted-solved against the deflated right
  hand side b - A x1.  Strictly sequential.

``check_optimality`` evaluates the stationarity and minimum-norm
diagnostics that characterize the exact solution.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .dense import as_dense, null_basis
from .glsqr import glsqr_solve
from .lsqr import InnerSolverConfig, PinvSolver
from .nsr import nsr_lsqr_solve
from .problem import HistoryRecord, LseProblem, SolveReport

__all__ = ["kids1_solve", "kids2_solve", "check_optimality"]


def kids1_solve(problem, tol=1e-10, max_outer=None,
                inner_cfg=InnerSolverConfig(), reorth=False,
                x_true=None, parallel=False):
    """Decomposed solve: x1 = weighted-pseudoinverse part of d, x2 =
    null-space-restricted part of b, x = x1 + x2.

    When ``x_true`` is given the history records true relative errors of
    the combined iterates; otherwise it records the sub-solvers' residual
    quantities.
    """
    t0 = time.perf_counter()
    store = x_true is not None

    def run1():
        return glsqr_solve(problem.A, problem.C, problem.d, tol=tol,
                           max_outer=max_outer, inner_cfg=inner_cfg,
                           reorth=reorth, store_iterates=store)

    def run2():
        return nsr_lsqr_solve(problem.A, problem.C, problem.b, tol=tol,
                              max_outer=max_outer, inner_cfg=inner_cfg,
                              reorth=reorth, store_iterates=store)

    if parallel:
        with ThreadPoolExecutor(max_workers=2) as pool:
            f1, f2 = pool.submit(run1), pool.submit(run2)
            r1, r2 = f1.result(), f2.result()
    else:
        r1, r2 = run1(), run2()

    x = r1.x + r2.x
    history = _combined_history(r1, r2, x_true)
    converged = r1.converged and r2.converged
    termination = f"glsqr: {r1.termination}; nsr: {r2.termination}"
    report = SolveReport(x=x, x1=r1.x, x2=r2.x, history=history,
                         termination=termination, converged=converged,
                         iterations=max(r1.iterations, r2.iterations),
                         wall_time=time.perf_counter() - t0)
    report.extra["glsqr"] = r1
    report.extra["nsr"] = r2
    return report


def kids2_solve(problem, tol=1e-10, max_outer=None,
                inner_cfg=InnerSolverConfig(),
                x1_cfg=None, reorth=False, x_true=None):
    """Sequential decomposed solve via the plain pseudoinverse of C.

    ``x1_cfg`` controls the accuracy of the first-stage solve of
    min ||C x - d|| (defaults to ``inner_cfg``); ``inner_cfg`` controls the
    inner projections of the second stage.
    """
    t0 = time.perf_counter()
    if x1_cfg is None:
        x1_cfg = inner_cfg
    x1, n1 = PinvSolver(problem.C, x1_cfg).apply(np.asarray(problem.d, float))
    bt = np.asarray(problem.b, float) - problem.A.matvec(x1)
    store = x_true is not None
    r2 = nsr_lsqr_solve(problem.A, problem.C, bt, tol=tol,
                        max_outer=max_outer, inner_cfg=inner_cfg,
                        reorth=reorth, store_iterates=store)
    x = x1 + r2.x

    history = []
    if store:
        xt_norm = max(np.linalg.norm(x_true), 1e-300)
        iterates = r2.extra.get("iterates") or []
        for rec, x2k in zip(r2.history, iterates):
            err = np.linalg.norm(x1 + x2k - x_true) / xt_norm
            history.append(HistoryRecord(rec.iteration, err, rec.residual,
                                         rec.inner_iters, rec.matvecs + n1))
    else:
        for rec in r2.history:
            history.append(HistoryRecord(rec.iteration, None, rec.residual,
                                         rec.inner_iters, rec.matvecs + n1))

    report = SolveReport(x=x, x1=x1, x2=r2.x, history=history,
                         termination=f"nsr: {r2.termination}",
                         converged=r2.converged, iterations=r2.iterations,
                         wall_time=time.perf_counter() - t0)
    report.extra["nsr"] = r2
    report.extra["x1_iters"] = n1
    return report


def _pad(seq, k):
    if not seq:
        return None
    return seq[k] if k < len(seq) else seq[-1]


def _combined_history(r1, r2, x_true):
    """Merge the two sub-histories by outer index, padding the shorter one."""
    k_max = max(len(r1.history), len(r2.history))
    xt_norm = max(np.linalg.norm(x_true), 1e-300) if x_true is not None else None
    it1 = r1.extra.get("iterates")
    it2 = r2.extra.get("iterates")
    history = []
    for k in range(k_max):
        h1 = _pad(r1.history, k)
        h2 = _pad(r2.history, k)
        residual = max(h1.residual if h1 else 0.0, h2.residual if h2 else 0.0)
        inner = (h1.inner_iters if h1 else 0) + (h2.inner_iters if h2 else 0)
        mv = (h1.matvecs if h1 else 0) + (h2.matvecs if h2 else 0)
        err = None
        if x_true is not None:
            x1k = _pad(it1, k) if it1 else r1.x
            x2k = _pad(it2, k) if it2 else r2.x
            err = np.linalg.norm(x1k + x2k - x_true) / xt_norm
        history.append(HistoryRecord(k + 1, err, residual, inner, mv))
    return history


def check_optimality(problem, x, rank_tol=None):
    """Diagnostics characterizing the minimum 2-norm constrained solution.

    Returns a dict with the magnitudes of the constraint normal-equation
    residual ||C^T (C x - d)||, the projected stationarity
    ||P_N(C) A^T (A x - b)||, and the component of x in N(A) ∩ N(C).
    Dense desk-scale only.
    """
    A = as_dense(problem.A)
    C = as_dense(problem.C)
    b = np.asarray(problem.b, float)
    d = np.asarray(problem.d, float)
    x = np.asarray(x, float)

    constraint = np.linalg.norm(C.T @ (C @ x - d))
    Z = null_basis(C, rank_tol)
    g = A.T @ (A @ x - b)
    stationarity = np.linalg.norm(Z.T @ g) if Z.shape[1] else 0.0
    N = null_basis(np.vstack([A, C]), rank_tol)
    min_norm = np.linalg.norm(N.T @ x) if N.shape[1] else 0.0
    return {
        "constraint_residual": float(constraint),
        "projected_stationarity": float(stationarity),
        "min_norm_component": float(min_norm),
    }
