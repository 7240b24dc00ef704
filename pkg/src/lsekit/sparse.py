"""Compressed-row sparse matrices and matrix-vector products.

The only large-scale operand in the package.  Matrices are immutable after
construction; ``matvec``/``rmatvec`` are pure, so instances can be shared
freely across threads.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, LseError

__all__ = ["CsrMatrix", "spmv"]


class CsrMatrix:
    """Real sparse matrix in compressed-row (CSR) storage.

    Parameters
    ----------
    nrows, ncols : int
        Matrix dimensions.
    indptr : array of int, shape (nrows + 1,)
        Row offsets into ``indices``/``data``.
    indices : array of int
        Column index of each stored entry; strictly increasing within a row.
    data : array of float
        Value of each stored entry.
    """

    __slots__ = ("nrows", "ncols", "indptr", "indices", "data", "_row_of")

    def __init__(self, nrows, ncols, indptr, indices, data):
        indptr = np.asarray(indptr, dtype=np.int64)
        indices = np.asarray(indices, dtype=np.int64)
        data = np.asarray(data, dtype=np.float64)
        if nrows < 0 or ncols < 0:
            raise DimensionError("negative matrix dimension")
        if indptr.shape != (nrows + 1,) or indptr[0] != 0 or indptr[-1] != len(indices):
            raise LseError("inconsistent CSR row offsets")
        if np.any(np.diff(indptr) < 0):
            raise LseError("CSR row offsets must be nondecreasing")
        if len(indices) != len(data):
            raise LseError("CSR index/value length mismatch")
        if len(indices) and (indices.min() < 0 or indices.max() >= ncols):
            raise LseError("CSR column index out of range")
        for i in range(nrows):
            row = indices[indptr[i]:indptr[i + 1]]
            if len(row) > 1 and np.any(np.diff(row) <= 0):
                raise LseError(f"column indices not strictly increasing in row {i}")
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.indptr = indptr
        self.indices = indices
        self.data = data
        # row index of each stored entry, for vectorized products
        self._row_of = np.repeat(np.arange(nrows, dtype=np.int64), np.diff(indptr))

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def nnz(self):
        return len(self.data)

    @classmethod
    def from_coo(cls, nrows, ncols, rows, cols, vals):
        """Build from coordinate triplets; duplicates are summed."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (len(rows) == len(cols) == len(vals)):
            raise LseError("COO triplet arrays must have equal length")
        if len(rows) and (rows.min() < 0 or rows.max() >= nrows
                          or cols.min() < 0 or cols.max() >= ncols):
            raise LseError("COO index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if len(rows):
            keep = np.ones(len(rows), dtype=bool)
            dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
            if np.any(dup):
                vals = vals.copy()
                # accumulate runs of duplicates into the first occurrence
                for i in np.nonzero(dup)[0]:
                    vals[i + 1] += vals[i]
                    keep[i] = False
                rows, cols, vals = rows[keep], cols[keep], vals[keep]
        indptr = np.zeros(nrows + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        indptr = np.cumsum(indptr)
        return cls(nrows, ncols, indptr, cols, vals)

    @classmethod
    def from_dense(cls, M, drop_tol=0.0):
        M = np.atleast_2d(np.asarray(M, dtype=np.float64))
        rows, cols = np.nonzero(np.abs(M) > drop_tol)
        return cls.from_coo(M.shape[0], M.shape[1], rows, cols, M[rows, cols])

    def toarray(self):
        M = np.zeros(self.shape)
        M[self._row_of, self.indices] = self.data
        return M

    def matvec(self, x):
        """y = M x."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.ncols,):
            raise DimensionError(
                f"matvec: expected length {self.ncols}, got {x.shape}")
        return np.bincount(self._row_of, weights=self.data * x[self.indices],
                           minlength=self.nrows)

    def rmatvec(self, y):
        """x = M^T y."""
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.nrows,):
            raise DimensionError(
                f"rmatvec: expected length {self.nrows}, got {y.shape}")
        return np.bincount(self.indices, weights=self.data * y[self._row_of],
                           minlength=self.ncols)

    def transpose(self):
        return CsrMatrix.from_coo(self.ncols, self.nrows,
                                  self.indices, self._row_of, self.data)

    def bandwidth(self):
        """Largest |i - j| over stored entries (0 for an empty matrix)."""
        if self.nnz == 0:
            return 0
        return int(np.abs(self.indices - self._row_of).max())

    def __repr__(self):
        return f"CsrMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"


def spmv(M, x, transpose=False):
    """Sparse matrix-vector product y = M x (or y = M^T x)."""
    return M.rmatvec(x) if transpose else M.matvec(x)
