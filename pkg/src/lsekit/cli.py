"""Command line interface: solve, generate, verify, cond.

Solve runs write x.mtx, report.json, history.csv and convergence figures
into the output directory.  Exit codes: 0 success, 1 verification failure,
2 bad input, 3 dimension mismatch, 4 non-convergence (artifacts are still
written).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time

import numpy as np

from . import testgen
from .errors import (DimensionError, InconsistentConstraintsError, LseError,
                     MatrixMarketError)
from .glsqr import glsqr_solve
from .kids import check_optimality, kids1_solve, kids2_solve
from .lsqr import InnerSolverConfig
from .mmio import mm_read, mm_write
from .nsr import nsr_lsqr_solve
from .problem import LseProblem, SolveReport
from .reference import (SIZE_CAP, solve_augmented, solve_direct_elim,
                        solve_nullspace)

log = logging.getLogger("lsekit")

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_BAD_INPUT = 2
EXIT_DIMENSIONS = 3
EXIT_NO_CONVERGENCE = 4

METHODS = ("kids1", "kids2", "glsqr", "nsrlsqr", "ns", "de", "aug")


def _setup_logging():
    level = os.environ.get("LSE_LOG", "error").lower()
    logging.basicConfig(
        level={"debug": logging.DEBUG, "info": logging.INFO}.get(level,
                                                                 logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s")


def _read_vector(path):
    v = mm_read(path)
    arr = np.asarray(v, float)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise MatrixMarketError(f"{path}: expected a vector")
    return arr


def _load_problem(args):
    A = mm_read(args.A)
    C = mm_read(args.C)
    b = _read_vector(args.b)
    d = _read_vector(args.d)
    return LseProblem(A=A, C=C, b=b, d=d)


def cmd_solve(args):
    try:
        problem = _load_problem(args)
        x_true = _read_vector(args.xtrue) if args.xtrue else None
    except (OSError, MatrixMarketError, LseError) as exc:
        if isinstance(exc, DimensionError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_DIMENSIONS
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    if x_true is not None and x_true.shape != (problem.n,):
        print(f"error: xtrue has length {len(x_true)}, expected {problem.n}",
              file=sys.stderr)
        return EXIT_DIMENSIONS

    inner_cfg = InnerSolverConfig(
        tol=args.inner_tol,
        mode="direct" if args.inner_mode == "direct" else "iterative")

    t0 = time.perf_counter()
    try:
        report = _run_method(args.method, problem, args, inner_cfg, x_true)
    except DimensionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSIONS
    except (InconsistentConstraintsError, LseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    wall = time.perf_counter() - t0

    os.makedirs(args.out, exist_ok=True)
    mm_write(os.path.join(args.out, "x.mtx"), report.x)
    _write_history_csv(os.path.join(args.out, "history.csv"), report.history)
    _write_report_json(os.path.join(args.out, "report.json"),
                       args.method, problem, report, x_true, wall)
    _write_figures(args.out, report, x_true)

    if not report.converged:
        print(f"warning: {args.method} did not converge "
              f"({report.termination})", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def _run_method(method, problem, args, inner_cfg, x_true):
    common = dict(tol=args.tol, max_outer=args.max_outer,
                  inner_cfg=inner_cfg, reorth=args.reorth, x_true=x_true)
    if method == "kids1":
        return kids1_solve(problem, **common)
    if method == "kids2":
        return kids2_solve(problem, **common)
    if method == "glsqr":
        return glsqr_solve(problem.A, problem.C, problem.d, tol=args.tol,
                           max_outer=args.max_outer, inner_cfg=inner_cfg,
                           reorth=args.reorth, x_true=x_true)
    if method == "nsrlsqr":
        return nsr_lsqr_solve(problem.A, problem.C, problem.b, tol=args.tol,
                              max_outer=args.max_outer, inner_cfg=inner_cfg,
                              reorth=args.reorth, x_true=x_true)
    # dense reference methods: single-shot, empty history
    if method == "ns":
        x = solve_nullspace(problem)
    elif method == "de":
        x = solve_direct_elim(problem)
    elif method == "aug":
        x = solve_augmented(problem)
    else:
        raise LseError(f"unknown method {method!r}")
    return SolveReport(x=x, termination="direct", converged=True)


def _write_history_csv(path, history):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "error_or_residual", "inner_iters",
                         "cum_matvecs"])
        for h in history:
            writer.writerow([h.iteration, f"{h.error_or_residual:.12e}",
                             h.inner_iters, h.matvecs])


def _write_report_json(path, method, problem, report, x_true, wall):
    out = {
        "method": method,
        "m": problem.m, "n": problem.n, "p": problem.p,
        "converged": bool(report.converged),
        "termination": report.termination,
        "iterations": int(report.iterations),
        "matvecs": int(report.matvecs),
        "wall_time_s": wall,
    }
    if x_true is not None:
        xt = max(np.linalg.norm(x_true), 1e-300)
        out["final_relative_error"] = float(
            np.linalg.norm(report.x - x_true) / xt)
    if problem.m + problem.n + problem.p <= SIZE_CAP:
        out["diagnostics"] = check_optimality(problem, report.x)
    detail = {}
    if "x1_iters" in report.extra:
        detail["kids2.x1_iters"] = int(report.extra["x1_iters"])
    if "inner_iters" in report.extra:
        detail[f"{method}.inner_iters"] = int(report.extra["inner_iters"])
    if detail:
        out["detail"] = detail
    with open(path, "w") as fh:
        json.dump(out, fh, indent=2)
        fh.write("\n")


def _write_figures(out_dir, report, x_true):
    from .plotting import save_convergence_plot, save_solution_plot
    if report.history:
        save_convergence_plot(report.history,
                              os.path.join(out_dir, "convergence.png"),
                              has_truth=x_true is not None)
    save_solution_plot(report.x, os.path.join(out_dir, "solution.png"),
                       x_true=x_true)


def cmd_generate(args):
    try:
        if args.gen == "from-files":
            if not (args.A and args.C):
                raise LseError("from-files generator needs --A and --C")
            A, C = mm_read(args.A), mm_read(args.C)
        else:
            if args.n is None or args.p is None:
                raise LseError("--n and --p are required")
            A, C = testgen.make_problem_matrices(
                args.gen, args.n, args.p, density=args.density, seed=args.seed)
        tp = testgen.generate(
            A, C, w1_spec=testgen.ProfileSpec(args.w1), seed=args.seed,
            generator_id=f"{args.gen}/w1={args.w1}")
    except (OSError, MatrixMarketError, LseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    testgen.write_bundle(tp, args.out)
    print(f"wrote bundle to {args.out} "
          f"(m={tp.problem.m}, n={tp.problem.n}, p={tp.problem.p})")
    return EXIT_OK


def cmd_verify(args):
    try:
        problem, x_true, _ = testgen.read_bundle(args.bundle)
        x = _read_vector(args.x)
    except (OSError, MatrixMarketError, LseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    if x_true is None:
        print("error: bundle has no xtrue.mtx", file=sys.stderr)
        return EXIT_BAD_INPUT
    if x.shape != x_true.shape:
        print(f"error: x has length {len(x)}, expected {len(x_true)}",
              file=sys.stderr)
        return EXIT_DIMENSIONS

    rel = np.linalg.norm(x - x_true) / max(np.linalg.norm(x_true), 1e-300)
    diag = check_optimality(problem, x)
    scale = max(np.linalg.norm(problem.b), np.linalg.norm(problem.d), 1.0)
    diag_tol = 1e-6 * scale
    ok = rel <= args.rtol and all(v <= diag_tol for v in diag.values())

    print(f"{'quantity':<28}{'value':>14}  {'bound':>10}")
    print(f"{'relative error':<28}{rel:>14.4e}  {args.rtol:>10.1e}")
    for name, val in diag.items():
        print(f"{name:<28}{val:>14.4e}  {diag_tol:>10.1e}")
    print("verification " + ("PASSED" if ok else "FAILED"))
    return EXIT_OK if ok else EXIT_VERIFY_FAIL


def cmd_cond(args):
    try:
        M = mm_read(args.matrix)
        kappa = testgen.condition_number(M)
    except (OSError, MatrixMarketError, LseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    print(f"{kappa:.6g}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lsekit",
        description="Solvers and tools for least squares with equality "
                    "constraints")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve an LSE problem from files")
    ps.add_argument("--A", required=True)
    ps.add_argument("--C", required=True)
    ps.add_argument("--b", required=True)
    ps.add_argument("--d", required=True)
    ps.add_argument("--method", required=True, choices=METHODS)
    ps.add_argument("--tol", type=float, default=1e-10)
    ps.add_argument("--inner-tol", type=float, default=1e-12)
    ps.add_argument("--inner-mode", choices=("lsqr", "direct"),
                    default="lsqr")
    ps.add_argument("--max-outer", type=int, default=None)
    ps.add_argument("--xtrue", default=None)
    ps.add_argument("--reorth", action="store_true")
    ps.add_argument("--out", required=True)
    ps.set_defaults(func=cmd_solve)

    pg = sub.add_parser("generate", help="generate a test problem bundle")
    pg.add_argument("--gen", required=True, choices=testgen.GENERATOR_KINDS)
    pg.add_argument("--n", type=int, default=None)
    pg.add_argument("--p", type=int, default=None)
    pg.add_argument("--density", type=float, default=0.05)
    pg.add_argument("--w1", choices=testgen.W1_PROFILES, default="ones")
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--A", default=None, help="for --gen from-files")
    pg.add_argument("--C", default=None, help="for --gen from-files")
    pg.add_argument("--out", required=True)
    pg.set_defaults(func=cmd_generate)

    pv = sub.add_parser("verify", help="verify a solution against a bundle")
    pv.add_argument("--bundle", required=True)
    pv.add_argument("--x", required=True)
    pv.add_argument("--rtol", type=float, default=1e-6)
    pv.set_defaults(func=cmd_verify)

    pc = sub.add_parser("cond", help="print the condition number of a matrix")
    pc.add_argument("--matrix", required=True)
    pc.set_defaults(func=cmd_cond)
    return parser


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
