"""Problem and report containers shared by all solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .sparse import CsrMatrix

__all__ = ["LseProblem", "HistoryRecord", "SolveReport"]


@dataclass(frozen=True)
class LseProblem:
    """The quadruple (A, C, b, d) for min ||Ax - b|| s.t. ||Cx - d|| minimal.

    A is m x n, C is p x n; b and d have lengths m and p.
    """

    A: CsrMatrix
    C: CsrMatrix
    b: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        if self.A.ncols != self.C.ncols:
            raise DimensionError(
                f"A has {self.A.ncols} columns but C has {self.C.ncols}")
        if np.asarray(self.b).shape != (self.A.nrows,):
            raise DimensionError(
                f"b has length {len(self.b)}, expected {self.A.nrows}")
        if np.asarray(self.d).shape != (self.C.nrows,):
            raise DimensionError(
                f"d has length {len(self.d)}, expected {self.C.nrows}")

    @property
    def m(self):
        return self.A.nrows

    @property
    def n(self):
        return self.A.ncols

    @property
    def p(self):
        return self.C.nrows


@dataclass(frozen=True)
class HistoryRecord:
    """One outer iteration of a convergence history.

    ``error`` is the true relative error when ground truth was supplied,
    otherwise None.  ``residual`` is the solver's monitored residual
    quantity.  ``matvecs`` is cumulative over the whole solve.
    """

    iteration: int
    error: float | None
    residual: float
    inner_iters: int
    matvecs: int

    @property
    def error_or_residual(self):
        return self.residual if self.error is None else self.error


@dataclass
class SolveReport:
    """Outcome of a solve: solution, components, history, termination."""

    x: np.ndarray
    x1: np.ndarray | None = None
    x2: np.ndarray | None = None
    history: list[HistoryRecord] = field(default_factory=list)
    termination: str = "converged"
    converged: bool = True
    iterations: int = 0
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def matvecs(self):
        return self.history[-1].matvecs if self.history else 0
