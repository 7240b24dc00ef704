"""Decomposed solvers, optimality diagnostics, and the pseudoinverse identities."""

import numpy as np
import pytest

from conftest import (dense_weighted_pinv_matrix, lse_min_norm_oracle,
                      random_problem, rel_err, restricted_pinv_matrix)
from lsekit import (CsrMatrix, InnerSolverConfig, check_optimality, kids1_solve,
                    kids2_solve, null_basis)
from lsekit.dense import dense_pinv
from lsekit.problem import LseProblem

DIRECT = InnerSolverConfig(mode="direct")


def hand_problem():
    # constraint x1 + x2 = 2, objective ||x - (1,0)||: solution (3/2, 1/2)
    return LseProblem(A=CsrMatrix.from_dense(np.eye(2)),
                      C=CsrMatrix.from_dense([[1.0, 1.0]]),
                      b=np.array([1.0, 0.0]), d=np.array([2.0]))


class TestKids1:
    def test_hand_solution(self):
        res = kids1_solve(hand_problem(), tol=1e-12, inner_cfg=DIRECT)
        assert np.allclose(res.x, [1.5, 0.5], atol=1e-10)
        assert np.allclose(res.x1 + res.x2, res.x)
        assert res.converged

    def test_zero_data(self):
        pb = hand_problem()
        pb = LseProblem(A=pb.A, C=pb.C, b=np.zeros(2), d=np.zeros(1))
        res = kids1_solve(pb, inner_cfg=DIRECT)
        assert np.allclose(res.x, 0.0)

    def test_parallel_matches_sequential(self, rng):
        pb, _, _ = random_problem(rng)
        seq = kids1_solve(pb, tol=1e-12, inner_cfg=DIRECT, reorth=True)
        par = kids1_solve(pb, tol=1e-12, inner_cfg=DIRECT, reorth=True,
                          parallel=True)
        assert np.allclose(seq.x, par.x, atol=1e-12)

    def test_matches_dense_oracle(self, rng):
        for deficient in (False, True):
            pb, Ad, Cd = random_problem(rng, deficient=deficient)
            oracle = lse_min_norm_oracle(Ad, Cd, pb.b, pb.d)
            res = kids1_solve(pb, tol=1e-12, inner_cfg=DIRECT, reorth=True)
            assert rel_err(res.x, oracle) <= 1e-8

    def test_history_errors_with_truth(self, rng):
        pb, Ad, Cd = random_problem(rng)
        oracle = lse_min_norm_oracle(Ad, Cd, pb.b, pb.d)
        res = kids1_solve(pb, tol=1e-12, inner_cfg=DIRECT, reorth=True,
                          x_true=oracle)
        errs = [h.error for h in res.history]
        assert all(e is not None for e in errs)
        assert errs[-1] <= errs[0]


class TestKids2:
    def test_hand_solution(self):
        res = kids2_solve(hand_problem(), tol=1e-12, inner_cfg=DIRECT)
        # first stage: min-norm solution of x1 + x2 = 2 is (1,1); the
        # deflated rhs (0,-1) yields the restricted part (1/2,-1/2)
        assert np.allclose(res.x1, [1.0, 1.0], atol=1e-10)
        assert np.allclose(res.x2, [0.5, -0.5], atol=1e-10)
        assert np.allclose(res.x, [1.5, 0.5], atol=1e-10)

    def test_identity_constraints(self, rng):
        # C = I: N(C) = {0}, so x = d regardless of A and b
        d = rng.standard_normal(4)
        pb = LseProblem(A=CsrMatrix.from_dense(rng.standard_normal((3, 4))),
                        C=CsrMatrix.from_dense(np.eye(4)),
                        b=rng.standard_normal(3), d=d)
        res = kids2_solve(pb, tol=1e-12, inner_cfg=DIRECT)
        assert np.allclose(res.x, d, atol=1e-10)

    def test_agrees_with_kids1(self, rng):
        for _ in range(3):
            pb, Ad, Cd = random_problem(rng, m=12, n=18, p=7)
            r1 = kids1_solve(pb, tol=1e-12, inner_cfg=DIRECT, reorth=True)
            r2 = kids2_solve(pb, tol=1e-12, inner_cfg=DIRECT, reorth=True)
            assert rel_err(r2.x, r1.x) <= 1e-8

    def test_constraint_consistency(self, rng):
        # consistent d: the solution satisfies the constraints
        pb, Ad, Cd = random_problem(rng)
        d = Cd @ rng.standard_normal(Cd.shape[1])
        pb = LseProblem(A=pb.A, C=pb.C, b=pb.b, d=d)
        res = kids2_solve(pb, tol=1e-12, inner_cfg=DIRECT, reorth=True)
        assert np.linalg.norm(Cd @ res.x - d) <= 1e-8 * np.linalg.norm(d)


class TestCheckOptimality:
    def test_exact_solution(self):
        diags = check_optimality(hand_problem(), np.array([1.5, 0.5]))
        assert all(v <= 1e-12 for v in diags.values())

    def test_null_g_component_detected(self, rng):
        # add a unit vector from N(A) cap N(C): only the min-norm
        # diagnostic moves, and it reads exactly 1
        Ad = rng.standard_normal((4, 10))
        Cd = rng.standard_normal((3, 10))
        pb, _, _ = random_problem(rng, m=4, n=10, p=3)
        pb = LseProblem(A=CsrMatrix.from_dense(Ad), C=CsrMatrix.from_dense(Cd),
                        b=pb.b, d=pb.d)
        x = lse_min_norm_oracle(Ad, Cd, pb.b, pb.d)
        N = null_basis(np.vstack([Ad, Cd]))
        z = N[:, 0]
        base = check_optimality(pb, x)
        moved = check_optimality(pb, x + z)
        assert moved["min_norm_component"] == pytest.approx(1.0, abs=1e-8)
        assert abs(moved["constraint_residual"]
                   - base["constraint_residual"]) <= 1e-8
        assert abs(moved["projected_stationarity"]
                   - base["projected_stationarity"]) <= 1e-8

    def test_random_nonsolution_flagged(self, rng):
        pb, _, _ = random_problem(rng)
        diags = check_optimality(pb, rng.standard_normal(15))
        assert max(diags.values()) > 1e-3


class TestPseudoinverseIdentities:
    # dual characterizations of the two component operators, checked in
    # explicit matrix form on desk-size random instances

    def test_weighted_via_restricted(self, rng):
        for _ in range(5):
            Ad = rng.standard_normal((10, 15))
            Cd = rng.standard_normal((6, 15))
            CA = dense_weighted_pinv_matrix(Cd, Ad)
            R = restricted_pinv_matrix(Ad, Cd)
            lhs = (np.eye(15) - R @ Ad) @ dense_pinv(Cd)
            assert np.linalg.norm(lhs - CA) <= 1e-8

    def test_restricted_via_weighted(self, rng):
        for _ in range(5):
            Ad = rng.standard_normal((10, 15))
            Cd = rng.standard_normal((6, 15))
            G = Ad.T @ Ad + Cd.T @ Cd
            PRG = dense_pinv(G) @ G
            CA = dense_weighted_pinv_matrix(Cd, Ad)
            R = restricted_pinv_matrix(Ad, Cd)
            lhs = (PRG - CA @ Cd) @ dense_pinv(Ad)
            assert np.linalg.norm(lhs - R) <= 1e-8

    def test_deficient_instances(self, rng):
        Ad = rng.standard_normal((10, 15))
        Cd = rng.standard_normal((6, 15))
        Ad[-1] = Ad[0] + Ad[1]
        Cd[-1] = 0.5 * Cd[0]
        G = Ad.T @ Ad + Cd.T @ Cd
        PRG = dense_pinv(G) @ G
        CA = dense_weighted_pinv_matrix(Cd, Ad)
        R = restricted_pinv_matrix(Ad, Cd)
        assert np.linalg.norm(
            (np.eye(15) - R @ Ad) @ dense_pinv(Cd) - CA) <= 1e-8
        assert np.linalg.norm((PRG - CA @ Cd) @ dense_pinv(Ad) - R) <= 1e-8
