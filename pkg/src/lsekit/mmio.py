"""Matrix Market I/O.

Supports the two formats the package exchanges on disk:

* ``matrix coordinate real general`` -> :class:`~lsekit.sparse.CsrMatrix`
* ``matrix array real general`` with one column -> 1-D vector
  (general dense matrices are also read/written for completeness)

Values are written with 17 significant digits so that write-then-read is an
exact round trip in double precision.
"""

from __future__ import annotations

import numpy as np

from .errors import MatrixMarketError
from .sparse import CsrMatrix

__all__ = ["mm_read", "mm_write"]

_BANNER = "%%MatrixMarket"


def mm_read(path):
    """Read a Matrix Market file.

    Returns a :class:`CsrMatrix` for coordinate files, a 1-D ndarray for
    array files with a single column, and a 2-D ndarray otherwise.
    """
    with open(path, "r") as fh:
        header = fh.readline()
        if not header.startswith(_BANNER):
            raise MatrixMarketError(f"{path}: missing MatrixMarket banner")
        parts = header.split()
        if len(parts) != 5:
            raise MatrixMarketError(f"{path}: malformed banner line: {header!r}")
        _, obj, fmt, field, symmetry = (p.lower() for p in parts)
        if obj != "matrix":
            raise MatrixMarketError(f"{path}: unsupported object {obj!r}")
        if field != "real":
            raise MatrixMarketError(f"{path}: unsupported field {field!r} (real only)")
        if symmetry != "general":
            raise MatrixMarketError(
                f"{path}: unsupported symmetry {symmetry!r} (general only)")

        line = fh.readline()
        while line.startswith("%"):
            line = fh.readline()
        if not line.strip():
            raise MatrixMarketError(f"{path}: missing size line")

        if fmt == "coordinate":
            return _read_coordinate(fh, line, path)
        if fmt == "array":
            return _read_array(fh, line, path)
        raise MatrixMarketError(f"{path}: unsupported format {fmt!r}")


def _read_coordinate(fh, size_line, path):
    try:
        nrows, ncols, nnz = (int(t) for t in size_line.split())
    except ValueError as exc:
        raise MatrixMarketError(f"{path}: bad coordinate size line") from exc
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    k = 0
    for line in fh:
        if not line.strip() or line.startswith("%"):
            continue
        if k >= nnz:
            raise MatrixMarketError(f"{path}: more entries than declared ({nnz})")
        toks = line.split()
        try:
            i, j, v = int(toks[0]), int(toks[1]), float(toks[2])
        except (IndexError, ValueError) as exc:
            raise MatrixMarketError(f"{path}: bad entry line {line!r}") from exc
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            raise MatrixMarketError(
                f"{path}: index ({i},{j}) out of bounds for {nrows}x{ncols}")
        rows[k], cols[k], vals[k] = i - 1, j - 1, v
        k += 1
    if k != nnz:
        raise MatrixMarketError(f"{path}: expected {nnz} entries, found {k}")
    if not np.all(np.isfinite(vals)):
        raise MatrixMarketError(f"{path}: non-finite value in matrix data")
    return CsrMatrix.from_coo(nrows, ncols, rows, cols, vals)


def _read_array(fh, size_line, path):
    try:
        nrows, ncols = (int(t) for t in size_line.split())
    except ValueError as exc:
        raise MatrixMarketError(f"{path}: bad array size line") from exc
    vals = []
    for line in fh:
        if not line.strip() or line.startswith("%"):
            continue
        try:
            vals.append(float(line.split()[0]))
        except (IndexError, ValueError) as exc:
            raise MatrixMarketError(f"{path}: bad array value line {line!r}") from exc
    if len(vals) != nrows * ncols:
        raise MatrixMarketError(
            f"{path}: expected {nrows * ncols} values, found {len(vals)}")
    data = np.asarray(vals, dtype=np.float64)
    if not np.all(np.isfinite(data)):
        raise MatrixMarketError(f"{path}: non-finite value in array data")
    if ncols == 1:
        return data
    # array format is column-major
    return data.reshape((ncols, nrows)).T.copy()


def mm_write(path, obj):
    """Write a CsrMatrix (coordinate format) or ndarray (array format)."""
    if isinstance(obj, CsrMatrix):
        _write_coordinate(path, obj)
        return
    arr = np.asarray(obj, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise MatrixMarketError("mm_write: only matrices and vectors supported")
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix array real general\n")
        fh.write(f"{arr.shape[0]} {arr.shape[1]}\n")
        for col in arr.T:
            for v in col:
                fh.write(f"{v:.17g}\n")


def _write_coordinate(path, M):
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{M.nrows} {M.ncols} {M.nnz}\n")
        rows = M._row_of
        for i, j, v in zip(rows, M.indices, M.data):
            fh.write(f"{i + 1} {j + 1} {v:.17g}\n")
