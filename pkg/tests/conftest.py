"""Shared helpers: dense oracles independent of the iterative solver paths."""

import numpy as np
import pytest

from lsekit import CsrMatrix, null_basis
from lsekit.problem import LseProblem


# rank cutoff for the oracle pseudoinverses: products like L (I - K^+ K)
# carry rounding noise ~eps * kappa in their zero singular values, which the
# numpy default cutoff (1e-15) would keep
ORACLE_RCOND = 1e-10


def dense_weighted_pinv_matrix(K, L):
    """The weighted pseudoinverse as an explicit matrix (oracle form)."""
    K = np.atleast_2d(np.asarray(K, float))
    L = np.atleast_2d(np.asarray(L, float))
    Kp = np.linalg.pinv(K, rcond=ORACLE_RCOND)
    PN = np.eye(K.shape[1]) - Kp @ K
    return (np.eye(K.shape[1])
            - np.linalg.pinv(L @ PN, rcond=ORACLE_RCOND) @ L) @ Kp


def restricted_pinv_matrix(A, C):
    """A_{N(C)}^+ as an explicit matrix: W (A W)^+ with W a null basis of C."""
    A = np.atleast_2d(np.asarray(A, float))
    W = null_basis(C)
    if W.shape[1] == 0:
        return np.zeros((A.shape[1], A.shape[0]))
    return W @ np.linalg.pinv(A @ W, rcond=ORACLE_RCOND)


def lse_min_norm_oracle(A, C, b, d):
    """Minimum 2-norm constrained solution by the two dense pseudoinverses."""
    return dense_weighted_pinv_matrix(C, A) @ d + restricted_pinv_matrix(A, C) @ b


def random_problem(rng, m=10, n=15, p=6, deficient=False):
    """Random dense-backed problem; optionally rank-deficient C and A."""
    Ad = rng.standard_normal((m, n))
    Cd = rng.standard_normal((p, n))
    if deficient:
        Cd[-1] = Cd[0] * 0.5 - Cd[1]
        Ad[-1] = Ad[0] + Ad[1]
    b = rng.standard_normal(m)
    d = rng.standard_normal(p)
    problem = LseProblem(A=CsrMatrix.from_dense(Ad), C=CsrMatrix.from_dense(Cd),
                         b=b, d=d)
    return problem, Ad, Cd


def rel_err(x, x_ref):
    return np.linalg.norm(np.asarray(x) - np.asarray(x_ref)) / max(
        np.linalg.norm(x_ref), 1e-300)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
