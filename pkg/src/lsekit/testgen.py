"""Reproducible constrained least squares test problems with known solutions.

Construction: pick (A, C), build an orthonormal null basis B of C, shape a
profile vector w1 into the weighted-pseudoinverse component x1, then pick
d so that x1 is exactly that component; build x2 inside N(C) and pick b so
that x2 is exactly the restricted least squares component.  The generated
minimum 2-norm solution is x1 + x2 by construction.

Also provides the first/second difference operators, a seeded sparse
matrix generator, condition numbers, and on-disk problem bundles.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dense import as_dense, default_rank_tol, null_basis, numerical_rank
from .errors import LseError, NumericalError, RankDeficiencyError
from .mmio import mm_read, mm_write
from .problem import LseProblem
from .sparse import CsrMatrix

__all__ = [
    "build_d1", "build_d2", "random_sparse", "ProfileSpec", "TestProblem",
    "generate", "condition_number", "write_bundle", "read_bundle",
    "make_problem_matrices", "GENERATOR_KINDS", "W1_PROFILES",
]

GENERATOR_KINDS = ("d1+sparse", "d2+sparse", "split-square", "from-files")
W1_PROFILES = ("ones", "ramp", "quad", "sincos", "sincos-neg")


def build_d1(n):
    """(n-1) x n forward difference stencil (1, -1)."""
    if n < 3:
        raise ValueError("build_d1 requires n >= 3")
    rows = np.repeat(np.arange(n - 1), 2)
    cols = np.ravel(np.column_stack([np.arange(n - 1), np.arange(1, n)]))
    vals = np.tile([1.0, -1.0], n - 1)
    return CsrMatrix.from_coo(n - 1, n, rows, cols, vals)


def build_d2(n):
    """(n-2) x n second difference stencil (-1, 2, -1)."""
    if n < 3:
        raise ValueError("build_d2 requires n >= 3")
    rows = np.repeat(np.arange(n - 2), 3)
    cols = np.ravel(np.column_stack(
        [np.arange(n - 2), np.arange(1, n - 1), np.arange(2, n)]))
    vals = np.tile([-1.0, 2.0, -1.0], n - 2)
    return CsrMatrix.from_coo(n - 2, n, rows, cols, vals)


def random_sparse(p, n, density, rng):
    """Random sparse p x n matrix with at least one entry per row.

    Row values are standard normal; with every row populated the matrix
    has full row rank almost surely for p < n.
    """
    if not (0 < density <= 1):
        raise ValueError("density must be in (0, 1]")
    nnz_target = max(p, int(round(density * p * n)))
    # one guaranteed entry per row, then random fill
    rows = [np.arange(p)]
    cols = [rng.integers(0, n, size=p)]
    extra = nnz_target - p
    if extra > 0:
        rows.append(rng.integers(0, p, size=extra))
        cols.append(rng.integers(0, n, size=extra))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    # drop duplicate positions, keep first occurrence
    key = rows * n + cols
    _, first = np.unique(key, return_index=True)
    rows, cols = rows[first], cols[first]
    vals = rng.standard_normal(len(rows))
    return CsrMatrix.from_coo(p, n, rows, cols, vals)


@dataclass(frozen=True)
class ProfileSpec:
    """Profile for the shaping vector w1: a named function on a uniform grid."""

    kind: str = "ones"
    lo: float | None = None
    hi: float | None = None
    samples: tuple = ()

    _DEFAULT_INTERVALS = {
        "ones": (0.0, 1.0),
        "ramp": (0.0, 1.0),
        "quad": (-1.0, 1.0),
        "sincos": (-np.pi, np.pi),
        "sincos-neg": (-np.pi, np.pi),
    }

    def evaluate(self, n):
        if n < 2:
            raise ValueError("profile needs a grid of size >= 2")
        if self.kind == "custom":
            if len(self.samples) != n:
                raise ValueError("custom profile sample count mismatch")
            return np.asarray(self.samples, dtype=np.float64)
        if self.kind not in self._DEFAULT_INTERVALS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        lo, hi = self._DEFAULT_INTERVALS[self.kind]
        if self.lo is not None:
            lo = self.lo
        if self.hi is not None:
            hi = self.hi
        t = np.linspace(lo, hi, n)
        if self.kind == "ones":
            return np.ones(n)
        if self.kind == "ramp":
            return t
        if self.kind == "quad":
            return t ** 2
        if self.kind == "sincos":
            return np.sin(2 * t) + 3 * np.cos(t)
        # displayed-formula variant with the flipped cosine sign
        return np.sin(2 * t) - 3 * np.cos(t)


@dataclass(frozen=True)
class TestProblem:
    """A problem instance with its exact minimum 2-norm solution."""

    problem: LseProblem
    x_true: np.ndarray
    x1_true: np.ndarray
    x2_true: np.ndarray
    seed: int
    generator_id: str


def generate(A, C, w1_spec=ProfileSpec("ones"), seed=0,
             allow_singular=False, generator_id="custom"):
    """Construct a test problem with known solution from matrices (A, C).

    Desk-scale: densifies C and the stacked system for null bases.  Raises
    unless N(C) is nontrivial and N(A) ∩ N(C) = {0}; pass
    ``allow_singular=True`` to replace the inverse in the shaping solve by
    a pseudoinverse (and to accept a trivial N(C), giving x2 = 0).
    """
    if not isinstance(A, CsrMatrix):
        A = CsrMatrix.from_dense(A)
    if not isinstance(C, CsrMatrix):
        C = CsrMatrix.from_dense(C)
    rng = np.random.default_rng(seed)
    Ad = as_dense(A)
    Cd = as_dense(C)
    m, n = Ad.shape
    p = Cd.shape[0]
    G = Ad.T @ Ad + Cd.T @ Cd

    B = null_basis(Cd)
    t = B.shape[1]
    if t == 0 and not allow_singular:
        raise RankDeficiencyError(
            "N(C) is trivial; the restricted component is zero "
            "(pass allow_singular=True to generate anyway)")

    # shape w1 into the weighted-pseudoinverse component
    w1 = w1_spec.evaluate(n)
    N = null_basis(np.vstack([Ad, Cd]))
    if N.shape[1]:
        w1 = w1 - N @ (N.T @ w1)
    if t:
        BtGB = B.T @ G @ B
        if numerical_rank(BtGB) < t:
            if not allow_singular:
                raise RankDeficiencyError(
                    "N(A) ∩ N(C) is nontrivial; pass allow_singular=True "
                    "to use the pseudoinverse variant")
            x1 = w1 - B @ (np.linalg.pinv(BtGB) @ (B.T @ (G @ w1)))
        else:
            x1 = w1 - B @ np.linalg.solve(BtGB, B.T @ (G @ w1))
    else:
        x1 = w1

    z1 = rng.standard_normal(p)
    if p:
        Q = scipy.linalg.orth(Cd) if np.any(Cd) else np.zeros((p, 0))
        if Q.shape[1]:
            z1 = z1 - Q @ (Q.T @ z1)
    d = Cd @ x1 + z1

    z2_raw = rng.standard_normal(m)
    if t:
        AB = Ad @ B
        w2 = AB[0, :].copy()
        NB = null_basis(AB)
        if NB.shape[1]:
            w2 = w2 - NB @ (NB.T @ w2)
        if np.linalg.norm(w2) <= 1e-12 * max(np.linalg.norm(AB[0, :]), 1.0):
            # degenerate first row; fall back to a seeded random direction
            w2 = rng.standard_normal(t)
            if NB.shape[1]:
                w2 = w2 - NB @ (NB.T @ w2)
        QAB = scipy.linalg.orth(AB) if np.any(AB) else np.zeros((m, 0))
        z2 = z2_raw - QAB @ (QAB.T @ z2_raw) if QAB.shape[1] else z2_raw
        x2 = B @ w2
    else:
        z2 = z2_raw
        x2 = np.zeros(n)
    b = Ad @ x2 + z2

    problem = LseProblem(A=A, C=C, b=b, d=d)
    return TestProblem(problem=problem, x_true=x1 + x2, x1_true=x1,
                       x2_true=x2, seed=seed, generator_id=generator_id)


def make_problem_matrices(gen, n, p, density=0.05, seed=0):
    """Build the (A, C) pair for a named generator family."""
    rng = np.random.default_rng(seed)
    if gen == "d1+sparse":
        return build_d1(n), random_sparse(p, n, density, rng)
    if gen == "d2+sparse":
        return build_d2(n), random_sparse(p, n, density, rng)
    if gen == "split-square":
        if not 0 < p < n:
            raise ValueError("split-square requires 0 < p < n")
        M = random_sparse(n, n, density, rng)
        Md = M.toarray()
        A = CsrMatrix.from_dense(Md[:, :n - p].T)
        C = CsrMatrix.from_dense(Md[:, n - p:].T)
        return A, C
    raise ValueError(f"unknown generator {gen!r}")


def condition_number(M):
    """kappa = sigma_max / sigma_min over the nonzero singular values.

    Uses a banded Gram eigensolve when the matrix is narrow-banded (the
    difference operators), otherwise a dense SVD.
    """
    if isinstance(M, CsrMatrix) and max(M.shape) > 1500 and M.bandwidth() <= 16:
        s = _banded_singular_values(M)
    else:
        Md = as_dense(M)
        try:
            s = np.linalg.svd(Md, compute_uv=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD did not converge: {exc}") from exc
    if len(s) == 0 or s[0] == 0.0:
        raise LseError("condition number undefined for a zero matrix")
    tol = default_rank_tol(M) * s[0]
    s = s[s > tol]
    return float(s[0] / s[-1])


def _banded_singular_values(M):
    """Singular values via the symmetric banded Gram of the smaller side."""
    if M.nrows > M.ncols:
        M = M.transpose()
    k = M.nrows
    w = M.bandwidth()
    band = np.zeros((2 * w + 1, k))  # lower-band storage: band[o, i] = G[i+o, i]
    rows = [(M.indices[M.indptr[i]:M.indptr[i + 1]],
             M.data[M.indptr[i]:M.indptr[i + 1]]) for i in range(k)]
    for i in range(k):
        ci, vi = rows[i]
        for o in range(0, min(2 * w, k - 1 - i) + 1):
            cj, vj = rows[i + o]
            common, ia, ib = np.intersect1d(ci, cj, return_indices=True)
            if len(common):
                band[o, i] = vi[ia] @ vj[ib]
    eigs = scipy.linalg.eig_banded(band, lower=True, eigvals_only=True)
    eigs = np.clip(eigs, 0.0, None)
    return np.sort(np.sqrt(eigs))[::-1]


def write_bundle(tp, out_dir):
    """Write a problem bundle: A.mtx, C.mtx, b.mtx, d.mtx, xtrue.mtx, meta.json."""
    os.makedirs(out_dir, exist_ok=True)
    P = tp.problem
    mm_write(os.path.join(out_dir, "A.mtx"), P.A)
    mm_write(os.path.join(out_dir, "C.mtx"), P.C)
    mm_write(os.path.join(out_dir, "b.mtx"), P.b)
    mm_write(os.path.join(out_dir, "d.mtx"), P.d)
    mm_write(os.path.join(out_dir, "xtrue.mtx"), tp.x_true)
    meta = {
        "seed": tp.seed,
        "generator_id": tp.generator_id,
        "m": P.m, "n": P.n, "p": P.p,
    }
    with open(os.path.join(out_dir, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def read_bundle(bundle_dir):
    """Read a problem bundle; returns (LseProblem, x_true or None, meta)."""
    def path(name):
        return os.path.join(bundle_dir, name)

    A = mm_read(path("A.mtx"))
    C = mm_read(path("C.mtx"))
    b = np.asarray(mm_read(path("b.mtx")), float).ravel()
    d = np.asarray(mm_read(path("d.mtx")), float).ravel()
    x_true = None
    if os.path.exists(path("xtrue.mtx")):
        x_true = np.asarray(mm_read(path("xtrue.mtx")), float).ravel()
    meta = {}
    if os.path.exists(path("meta.json")):
        with open(path("meta.json")) as fh:
            meta = json.load(fh)
    return LseProblem(A=A, C=C, b=b, d=d), x_true, meta
