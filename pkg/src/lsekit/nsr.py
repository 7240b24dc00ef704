"""Null space restricted bidiagonalization and its LSQR-style solver.

Computes the minimum 2-norm solution of min ||A x - b|| over x in N(C).
The right Lanczos vectors are confined to N(C) by the projector
P = I - C^+ C, applied through an inner least squares solve with C (or a
cached dense pseudoinverse).  The growing lower-bidiagonal factor drives
both the solution update (via Givens rotations) and the cheap residual
and operator-norm estimates used in the stopping rule.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .lsqr import InnerSolverConfig, PinvSolver, as_operator
from .problem import HistoryRecord, SolveReport

__all__ = [
    "NullProjector", "project_null", "BidiagFactor", "NsrGkbState",
    "nsr_gkb_init", "nsr_gkb_step", "nsr_lsqr_solve", "estimate_op_norm",
]

BREAKDOWN_REL = 1e-14


class NullProjector:
    """Orthogonal projector onto N(C): y -> y - C^+ (C y)."""

    def __init__(self, C, inner_cfg=InnerSolverConfig()):
        self.C = as_operator(C)
        self.inner_cfg = inner_cfg
        self._pinv = PinvSolver(C, inner_cfg)
        self.inner_iters = 0
        self.matvecs = 0

    def project(self, y):
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.C.shape[1],):
            raise DimensionError(
                f"project: expected length {self.C.shape[1]}, got {y.shape}")
        v = self.C.matvec(y)
        self.matvecs += 1
        z, it = self._pinv.apply(v)
        self.inner_iters += it
        self.matvecs += 2 * it
        return y - z


def project_null(P, y):
    """Apply the null-space projector P to y."""
    return P.project(y)


@dataclass
class BidiagFactor:
    """Growing lower-bidiagonal factor of the restricted bidiagonalization.

    ``delta1`` is the leading norm ||b||; ``gammas`` holds the diagonal
    entries and ``deltas`` the subdiagonals delta_2, delta_3, ...  After k
    full steps the (k+1) x k matrix has gammas[:k] on the diagonal and
    deltas[:k] below it.
    """

    delta1: float = 0.0
    gammas: list = field(default_factory=list)
    deltas: list = field(default_factory=list)

    def to_dense(self, k=None):
        if k is None:
            k = len(self.gammas)
        B = np.zeros((k + 1, k))
        for i in range(k):
            B[i, i] = self.gammas[i]
            if i < len(self.deltas):
                B[i + 1, i] = self.deltas[i]
        return B


def estimate_op_norm(factor, k=None):
    """sigma_max of the bidiagonal factor; a lower bound for the restricted
    operator norm that is nondecreasing in k."""
    B = factor.to_dense(k)
    if B.size == 0:
        return 0.0
    return float(np.linalg.svd(B, compute_uv=False)[0])


class NsrGkbState:
    """Mutable state of the null space restricted bidiagonalization."""

    def __init__(self, A, projector, reorth=False, reproject=False,
                 store_bases=False):
        self.A = as_operator(A)
        self.P = projector
        self.reorth = reorth
        self.reproject = reproject
        self.store_bases = store_bases or reorth
        self.m, self.n = self.A.shape
        self.iteration = 0
        self.matvecs = 0
        self.terminated = False
        self.termination = None
        self.factor = BidiagFactor()
        self.ps = []
        self.qs = []

    @property
    def gammas(self):
        return self.factor.gammas

    @property
    def deltas(self):
        return self.factor.deltas


def nsr_gkb_init(A, C_or_projector, b, inner_cfg=InnerSolverConfig(),
                 reorth=False, reproject=False, store_bases=False):
    """Start the process: delta_1 p_1 = b, gamma_1 q_1 = P A^T p_1."""
    P = (C_or_projector if isinstance(C_or_projector, NullProjector)
         else NullProjector(C_or_projector, inner_cfg))
    st = NsrGkbState(A, P, reorth, reproject, store_bases)
    b = np.asarray(b, dtype=np.float64)
    delta1 = np.linalg.norm(b)
    st.factor.delta1 = delta1
    if delta1 == 0.0:
        st.terminated = True
        st.termination = "zero rhs"
        return st
    st.p = b / delta1
    s = st.P.project(st.A.rmatvec(st.p))
    st.matvecs += 1
    gamma1 = np.linalg.norm(s)
    if gamma1 <= BREAKDOWN_REL * (1.0 + np.linalg.norm(st.p)):
        st.terminated = True
        st.termination = "rhs orthogonal to restricted range"
        return st
    st.q = s / gamma1
    st.gamma = gamma1
    st.scale = gamma1
    st.factor.gammas.append(gamma1)
    if st.store_bases:
        st.ps.append(st.p.copy())
        st.qs.append(st.q.copy())
    return st


def nsr_gkb_step(state):
    """One expansion: new (delta_{i+1}, p_{i+1}, gamma_{i+1}, q_{i+1}).

    On breakdown (either scalar below the tolerance) the state terminates;
    the Krylov subspace is exhausted and the current subproblem solution is
    exact.  Returns the state.
    """
    st = state
    if st.terminated:
        raise RuntimeError("nsr_gkb_step called on terminated state")
    st.iteration += 1
    tiny = BREAKDOWN_REL * st.scale

    r = st.A.matvec(st.q) - st.gamma * st.p
    st.matvecs += 1
    if st.reorth:
        for pj in st.ps:
            r -= (pj @ r) * pj
    delta = np.linalg.norm(r)
    if delta <= tiny:
        st.terminated = True
        st.termination = "breakdown (delta)"
        st.last_delta = 0.0
        return st
    st.factor.deltas.append(delta)
    p_next = r / delta

    s = st.P.project(st.A.rmatvec(p_next)) - delta * st.q
    st.matvecs += 1
    if st.reorth:
        for qj in st.qs:
            s -= (qj @ s) * qj
    if st.reproject:
        s = st.P.project(s)
    gamma = np.linalg.norm(s)
    if gamma <= tiny:
        st.terminated = True
        st.termination = "breakdown (gamma)"
        st.p = p_next
        st.last_delta = delta
        return st
    st.factor.gammas.append(gamma)
    st.p, st.q, st.gamma = p_next, s / gamma, gamma
    st.last_delta = delta
    if st.store_bases:
        st.ps.append(st.p.copy())
        st.qs.append(st.q.copy())
    return st


def nsr_lsqr_solve(A, C, b, tol=1e-10, max_outer=None,
                   inner_cfg=InnerSolverConfig(), reorth=False,
                   reproject=False, x_true=None, store_iterates=False,
                   store_bases=False):
    """Minimum 2-norm solution of min ||A x - b|| over x in N(C).

    Iterates the restricted bidiagonalization with LSQR-style Givens
    updates; stops when the cheap normal-equation residual
    gamma_{k+1} delta_{k+1} |e_k^T y_k| drops below
    tol * sigma_max(B_k) * ||b||, or on breakdown (then the iterate is the
    exact solution).
    """
    t0 = time.perf_counter()
    st = nsr_gkb_init(A, C, b, inner_cfg, reorth=reorth, reproject=reproject,
                      store_bases=store_bases)
    n = st.n
    if max_outer is None:
        max_outer = 2 * min(st.m, n)
    bnorm = st.factor.delta1

    x = np.zeros(n)
    history = []
    iterates = [] if store_iterates else None
    xt_norm = np.linalg.norm(x_true) if x_true is not None else None

    def record(iteration, residual, cheap=None):
        err = None
        if x_true is not None:
            err = np.linalg.norm(x - x_true) / max(xt_norm, 1e-300)
        rec = HistoryRecord(iteration, err, residual,
                            st.P.inner_iters, st.matvecs + st.P.matvecs)
        history.append(rec)
        if iterates is not None:
            iterates.append(x.copy())
        if cheap is not None:
            cheap_residuals.append(cheap)

    cheap_residuals = []

    if st.terminated:
        report = SolveReport(x=x, history=history, termination=st.termination,
                             converged=True, iterations=0,
                             wall_time=time.perf_counter() - t0)
        report.extra["iterates"] = iterates
        report.extra["factor"] = st.factor
        return report

    z = st.q.copy()
    phibar = st.factor.delta1
    rhobar = st.gamma
    converged = False
    termination = "max iterations"
    it = 0
    while it < max_outer:
        it += 1
        nsr_gkb_step(st)
        delta = st.last_delta

        if st.terminated and st.termination == "breakdown (delta)":
            # delta_{k+1} ~ 0: fold the trivial rotation and stop exactly
            phi = np.sign(rhobar) * phibar if rhobar != 0 else phibar
            rho = abs(rhobar)
            if rho > 0:
                x = x + (phi / rho) * z
            record(it, 0.0, cheap=0.0)
            converged = True
            termination = "terminated exactly (delta breakdown)"
            break

        rho = np.hypot(rhobar, delta)
        c, sn = rhobar / rho, delta / rho
        phi = c * phibar
        phibar = sn * phibar
        y_last = phi / rho
        x = x + y_last * z

        if st.terminated:
            # gamma_{k+1} ~ 0: the updated iterate is exact
            record(it, 0.0, cheap=0.0)
            converged = True
            termination = "terminated exactly (gamma breakdown)"
            break

        gamma_next = st.gamma
        theta = sn * gamma_next
        rhobar = -c * gamma_next
        z = st.q - (theta / rho) * z

        cheap = gamma_next * delta * abs(y_last)
        opnorm = estimate_op_norm(st.factor)
        rel = cheap / max(opnorm * bnorm, 1e-300)
        record(it, rel, cheap=cheap)
        if rel <= tol:
            converged = True
            termination = "converged"
            break

    report = SolveReport(x=x, history=history, termination=termination,
                         converged=converged, iterations=it,
                         wall_time=time.perf_counter() - t0)
    report.extra["iterates"] = iterates
    report.extra["factor"] = st.factor
    report.extra["cheap_residuals"] = cheap_residuals
    report.extra["inner_iters"] = st.P.inner_iters
    if store_bases:
        report.extra["ps"] = st.ps
        report.extra["qs"] = st.qs
    return report
