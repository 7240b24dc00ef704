"""Solvers for linear least squares with linear equality constraints.

Decomposes min ||Ax - b|| subject to ||Cx - d|| minimal into a
weighted-pseudoinverse component and a null-space-restricted component,
each approximated by a Golub-Kahan based Krylov iteration, with dense
reference solvers and a reproducible test-problem generator alongside.
"""

from .dense import dense_pinv, dense_qr, make_givens, null_basis
from .errors import (DimensionError, InconsistentConstraintsError, LseError,
                     MatrixMarketError, NumericalError, RankDeficiencyError,
                     SizeCapError)
from .glsqr import glsqr_init, glsqr_solve, glsqr_step
from .kids import check_optimality, kids1_solve, kids2_solve
from .lsqr import (InnerSolverConfig, StackedOperator, lsqr_solve,
                   solve_inner_C, solve_inner_G)
from .mmio import mm_read, mm_write
from .nsr import (BidiagFactor, NullProjector, estimate_op_norm, nsr_gkb_init,
                  nsr_gkb_step, nsr_lsqr_solve, project_null)
from .problem import HistoryRecord, LseProblem, SolveReport
from .reference import (solve_augmented, solve_direct_elim, solve_nullspace,
                        weighted_pinv_apply)
from .sparse import CsrMatrix, spmv
from .testgen import (ProfileSpec, TestProblem, build_d1, build_d2,
                      condition_number, generate, make_problem_matrices,
                      random_sparse, read_bundle, write_bundle)

__version__ = "0.1.0"
