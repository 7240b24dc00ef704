"""Generalized LSQR against the dense weighted-pseudoinverse oracle."""

import numpy as np
import pytest

from conftest import dense_weighted_pinv_matrix, rel_err
from lsekit import (CsrMatrix, InnerSolverConfig, glsqr_init, glsqr_solve,
                    glsqr_step, weighted_pinv_apply)

DIRECT = InnerSolverConfig(mode="direct")


def two_var_instance():
    A = CsrMatrix.from_dense([[1.0, 0.0]])
    C = CsrMatrix.from_dense([[1.0, 1.0]])
    return A, C, np.array([2.0])


class TestInit:
    def test_zero_rhs(self):
        A, C, _ = two_var_instance()
        st = glsqr_init(A, C, np.zeros(1), DIRECT)
        assert st.terminated
        assert np.allclose(st.x, 0.0)

    def test_hand_values(self):
        A, C, d = two_var_instance()
        st = glsqr_init(A, C, d, DIRECT)
        assert st.beta1 == pytest.approx(2.0)
        assert st.u[0] == pytest.approx(1.0)
        assert st.alpha == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(st.v, [0.0, 1.0], atol=1e-12)

    def test_v_is_g_normalized(self, rng):
        Ad = rng.standard_normal((6, 9))
        Cd = rng.standard_normal((4, 9))
        st = glsqr_init(CsrMatrix.from_dense(Ad), CsrMatrix.from_dense(Cd),
                        rng.standard_normal(4), DIRECT)
        G = Ad.T @ Ad + Cd.T @ Cd
        assert st.v @ G @ st.v == pytest.approx(1.0, abs=1e-10)


class TestStep:
    def test_one_step_reaches_solution(self):
        A, C, d = two_var_instance()
        st = glsqr_init(A, C, d, DIRECT)
        glsqr_step(st)
        # C_A^+ d = (0, 2): minimize |x1| subject to x1 + x2 = 2
        assert np.allclose(st.x, [0.0, 2.0], atol=1e-10)

    def test_u_normalized(self, rng):
        Ad = rng.standard_normal((6, 9))
        Cd = rng.standard_normal((5, 9))
        st = glsqr_init(CsrMatrix.from_dense(Ad), CsrMatrix.from_dense(Cd),
                        rng.standard_normal(5), DIRECT)
        for _ in range(3):
            if st.terminated:
                break
            glsqr_step(st)
            assert np.linalg.norm(st.u) == pytest.approx(1.0, abs=1e-10)

    def test_converges_to_oracle(self, rng):
        Ad = rng.standard_normal((8, 12))
        Cd = rng.standard_normal((5, 12))
        d = rng.standard_normal(5)
        oracle = dense_weighted_pinv_matrix(Cd, Ad) @ d
        res = glsqr_solve(CsrMatrix.from_dense(Ad), CsrMatrix.from_dense(Cd),
                          d, tol=1e-12, inner_cfg=DIRECT)
        assert rel_err(res.x, oracle) <= 1e-6


class TestOrthogonality:
    @pytest.mark.parametrize("reorth, steps, tol", [
        # orthogonality degrades near convergence without reorthogonalization,
        # so the plain run is checked over fewer steps
        (False, 5, 1e-6),
        (True, 10, 1e-10),
    ])
    def test_bases(self, rng, reorth, steps, tol):
        # tall A keeps the spectrum of the restricted operator generic, so
        # the iteration does not terminate in a handful of steps
        Ad = rng.standard_normal((30, 25))
        Cd = rng.standard_normal((12, 25))
        G = Ad.T @ Ad + Cd.T @ Cd
        st = glsqr_init(CsrMatrix.from_dense(Ad), CsrMatrix.from_dense(Cd),
                        rng.standard_normal(12), DIRECT,
                        reorth=reorth, store_bases=True)
        for _ in range(steps):
            if st.terminated:
                break
            glsqr_step(st)
        U = np.column_stack(st.us)
        V = np.column_stack(st.vs)
        k = U.shape[1]
        assert np.abs(U.T @ U - np.eye(k)).max() <= tol
        kv = V.shape[1]
        assert np.abs(V.T @ G @ V - np.eye(kv)).max() <= tol


class TestSolve:
    def test_zero_rhs(self):
        A, C, _ = two_var_instance()
        res = glsqr_solve(A, C, np.zeros(1), inner_cfg=DIRECT)
        assert np.allclose(res.x, 0.0)
        assert res.iterations == 0

    def test_gls_criterion(self, rng):
        # optimality of the generalized problem: C^T(Cx - d) annihilated on
        # N-complement and x G-orthogonal to N(C) within R(G)
        Ad = rng.standard_normal((7, 11))
        Cd = rng.standard_normal((5, 11))
        d = rng.standard_normal(5)
        res = glsqr_solve(CsrMatrix.from_dense(Ad), CsrMatrix.from_dense(Cd),
                          d, tol=1e-12, inner_cfg=DIRECT, reorth=True)
        x = res.x
        G = Ad.T @ Ad + Cd.T @ Cd
        dnorm = np.linalg.norm(d)
        # stationarity: C^T(Cx - d) = 0 (C full row rank here)
        assert np.linalg.norm(Cd.T @ (Cd @ x - d)) <= 1e-6 * dnorm
        # x^T G z = 0 for all z in N(C)
        from lsekit import null_basis
        Z = null_basis(Cd)
        assert np.linalg.norm(Z.T @ (G @ x)) <= 1e-6 * dnorm

    def test_matches_library_weighted_pinv(self, rng):
        Ad = rng.standard_normal((9, 14))
        Cd = rng.standard_normal((6, 14))
        d = rng.standard_normal(6)
        oracle = weighted_pinv_apply(Cd, Ad, d)
        res = glsqr_solve(CsrMatrix.from_dense(Ad), CsrMatrix.from_dense(Cd),
                          d, tol=1e-12, inner_cfg=DIRECT, reorth=True)
        assert rel_err(res.x, oracle) <= 1e-6

    def test_iterative_inner_mode(self, rng):
        Ad = rng.standard_normal((8, 12))
        Cd = rng.standard_normal((5, 12))
        d = rng.standard_normal(5)
        oracle = dense_weighted_pinv_matrix(Cd, Ad) @ d
        res = glsqr_solve(CsrMatrix.from_dense(Ad), CsrMatrix.from_dense(Cd),
                          d, tol=1e-10,
                          inner_cfg=InnerSolverConfig(tol=1e-13), reorth=True)
        assert rel_err(res.x, oracle) <= 1e-6
