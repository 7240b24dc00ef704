"""Generalized LSQR for the weighted-pseudoinverse component.

Computes the minimum 2-norm solution of

    min ||A x||_2  s.t.  ||C x - d||_2 minimal

by a Golub-Kahan bidiagonalization of the operator x -> Cx acting on R(G)
equipped with the G-inner product, G = A^T A + C^T C.  Each outer step
applies G^+ C^T through an inner least squares solve on the stacked system
[C; A]; G is never formed.  G-norms are evaluated as
sqrt(||A s||^2 + ||C s||^2).
"""

from __future__ import annotations

import time

import numpy as np

from .lsqr import GramInnerSolver, InnerSolverConfig, as_operator
from .problem import HistoryRecord, SolveReport

__all__ = ["GlsqrState", "glsqr_init", "glsqr_step", "glsqr_solve"]

BREAKDOWN_REL = 1e-14


class GlsqrState:
    """Mutable state of the gLSQR iteration.

    Carries the current left/right vectors (u 2-normalized, v G-normalized),
    the solution iterate and update direction, and the Givens recurrence
    scalars.
    """

    def __init__(self, A, C, d, inner_cfg=InnerSolverConfig(),
                 reorth=False, store_bases=False):
        self.A = as_operator(A)
        self.C = as_operator(C)
        self.inner = GramInnerSolver(A, C, inner_cfg)
        self.reorth = reorth
        self.store_bases = store_bases or reorth
        self.n = self.A.shape[1]
        self.iteration = 0
        self.matvecs = 0
        self.inner_iters = 0
        self.terminated = False
        self.termination = None
        self.x = np.zeros(self.n)
        self.us = []
        self.vs = []
        self._Avs = []  # cached A v_j / C v_j for G-reorthogonalization
        self._Cvs = []
        self.alphas = []
        self.betas = []
        self.normT2 = 0.0
        self.arnorm = 0.0
        self.rnorm = 0.0

    def gnorm_parts(self, s):
        """(A s, C s, sqrt(s^T G s))."""
        As = self.A.matvec(s)
        Cs = self.C.matvec(s)
        self.matvecs += 2
        return As, Cs, np.sqrt(As @ As + Cs @ Cs)


def glsqr_init(A, C, d, inner_cfg=InnerSolverConfig(),
               reorth=False, store_bases=False):
    """Initialize the bidiagonalization: beta_1 u_1 = d, alpha_1 v_1 = G^+ C^T u_1."""
    st = GlsqrState(A, C, d, inner_cfg, reorth, store_bases)
    d = np.asarray(d, dtype=np.float64)
    beta1 = np.linalg.norm(d)
    st.beta1 = beta1
    if beta1 == 0.0:
        st.terminated = True
        st.termination = "zero rhs"
        return st
    st.u = d / beta1
    s, it = st.inner.apply(st.u)
    st.inner_iters += it
    st.matvecs += 1 + 4 * it
    As, Cs, alpha1 = st.gnorm_parts(s)
    if alpha1 <= BREAKDOWN_REL * (1.0 + np.linalg.norm(s)):
        st.terminated = True
        st.termination = "immediate breakdown"
        return st
    st.v = s / alpha1
    st.alpha = alpha1
    st.scale = alpha1
    st.w = st.v.copy()
    st.phibar = beta1
    st.rhobar = alpha1
    st.rnorm = beta1
    st.arnorm = alpha1 * beta1
    st.normT2 = alpha1 * alpha1
    st.alphas.append(alpha1)
    if st.store_bases:
        st.us.append(st.u.copy())
        st.vs.append(st.v.copy())
        st._Avs.append(As / alpha1)
        st._Cvs.append(Cs / alpha1)
    return st


def glsqr_step(state):
    """One bidiagonalization expansion plus the Givens/solution update."""
    st = state
    if st.terminated:
        raise RuntimeError("glsqr_step called on terminated state")
    st.iteration += 1
    tiny = BREAKDOWN_REL * st.scale

    r = st.C.matvec(st.v) - st.alpha * st.u
    st.matvecs += 1
    if st.reorth:
        for uj in st.us:
            r -= (uj @ r) * uj
    beta = np.linalg.norm(r)
    st.betas.append(beta)
    if beta <= tiny:
        _final_update(st, 0.0)
        st.terminated = True
        st.termination = "GKB breakdown (beta)"
        return st
    u_next = r / beta

    s, it = st.inner.apply(u_next)
    st.inner_iters += it
    st.matvecs += 4 * it
    s = s - beta * st.v
    if st.reorth:
        # G-orthogonalize against stored v_j using cached A v_j, C v_j
        As = st.A.matvec(s)
        Cs = st.C.matvec(s)
        st.matvecs += 2
        for vj, Avj, Cvj in zip(st.vs, st._Avs, st._Cvs):
            s -= (Avj @ As + Cvj @ Cs) * vj
    As, Cs, alpha = st.gnorm_parts(s)
    st.normT2 += st.alpha * st.alpha + beta * beta
    if alpha <= tiny:
        st.u = u_next
        _final_update(st, beta)
        st.terminated = True
        st.termination = "GKB breakdown (alpha)"
        return st
    v_next = s / alpha

    # Givens rotation folding beta into the bidiagonal factor
    rho = np.hypot(st.rhobar, beta)
    c, sn = st.rhobar / rho, beta / rho
    theta = sn * alpha
    st.rhobar = -c * alpha
    phi = c * st.phibar
    st.phibar = sn * st.phibar

    st.x = st.x + (phi / rho) * st.w
    st.w = v_next - (theta / rho) * st.w
    st.u, st.v, st.alpha = u_next, v_next, alpha
    st.alphas.append(alpha)
    if st.store_bases:
        st.us.append(u_next.copy())
        st.vs.append(v_next.copy())
        st._Avs.append(As / alpha)
        st._Cvs.append(Cs / alpha)

    st.rnorm = abs(st.phibar)
    st.arnorm = alpha * abs(c) * abs(st.phibar)
    return st


def _final_update(st, beta):
    """Fold the last column in after a breakdown; the iterate is then exact."""
    rho = np.hypot(st.rhobar, beta)
    if rho == 0.0:
        return
    c, sn = st.rhobar / rho, beta / rho
    phi = c * st.phibar
    st.phibar = sn * st.phibar
    st.x = st.x + (phi / rho) * st.w
    st.rnorm = abs(st.phibar)
    st.arnorm = 0.0


def glsqr_solve(A, C, d, tol=1e-10, max_outer=None,
                inner_cfg=InnerSolverConfig(), reorth=False,
                x_true=None, store_iterates=False):
    """Iterate gLSQR until the monitored residual drops below tol.

    The stopping rule is the LSQR-style test on the G-space normal-equation
    residual: alpha_{k+1}|c_k||phibar_{k+1}| <= tol * ||T|| * |phibar_{k+1}|,
    with ||T|| accumulated from the bidiagonalization scalars; breakdown
    terminates with the exact Krylov-subspace solution.  The per-iteration
    residual quantity is recorded in the report so other criteria can be
    applied post hoc.
    """
    t0 = time.perf_counter()
    st = glsqr_init(A, C, d, inner_cfg, reorth=reorth)
    n = st.n
    if max_outer is None:
        max_outer = 2 * n

    history = []
    iterates = [] if store_iterates else None
    xt_norm = np.linalg.norm(x_true) if x_true is not None else None

    def record(residual):
        err = None
        if x_true is not None:
            err = np.linalg.norm(st.x - x_true) / max(xt_norm, 1e-300)
        history.append(HistoryRecord(st.iteration, err, residual,
                                     st.inner_iters, st.matvecs))
        if iterates is not None:
            iterates.append(st.x.copy())

    if st.terminated:
        report = SolveReport(x=st.x, history=history, termination=st.termination,
                             converged=True, iterations=0,
                             wall_time=time.perf_counter() - t0)
        report.extra["iterates"] = iterates
        return report

    converged = False
    termination = "max iterations"
    while st.iteration < max_outer:
        glsqr_step(st)
        normT = np.sqrt(st.normT2)
        rel = st.arnorm / max(normT * st.rnorm, 1e-300)
        record(rel)
        if st.terminated:
            converged = True
            termination = st.termination
            break
        if rel <= tol or st.rnorm <= tol * st.beta1:
            converged = True
            termination = "converged"
            break

    report = SolveReport(x=st.x, history=history, termination=termination,
                         converged=converged, iterations=st.iteration,
                         wall_time=time.perf_counter() - t0)
    report.extra["iterates"] = iterates
    report.extra["inner_iters"] = st.inner_iters
    return report
