"""Minimal immutable sparse matrix in coordinate form with cached
compressed views.  Enough for assembling, exporting and checking the LP;
the solver builds its own column-compressed copy."""
from __future__ import annotations

import numpy as np


class SparseMatrix:
    def __init__(self, nrows: int, ncols: int, rows, cols, vals):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("triplet arrays must have identical shape")
        if rows.size and (rows.min() < 0 or rows.max() >= nrows):
            raise ValueError("row index out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= ncols):
            raise ValueError("column index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            # Coalesce duplicate coordinates so every consumer sees one
            # entry per (row, col); exact zeros after summing are dropped.
            new_group = np.empty(rows.size, dtype=bool)
            new_group[0] = True
            np.logical_or(rows[1:] != rows[:-1], cols[1:] != cols[:-1],
                          out=new_group[1:])
            if not new_group.all():
                starts = np.flatnonzero(new_group)
                vals = np.add.reduceat(vals, starts)
                rows, cols = rows[starts], cols[starts]
            keep = vals != 0.0
            if not keep.all():
                rows, cols, vals = rows[keep], cols[keep], vals[keep]
        self.nrows = nrows
        self.ncols = ncols
        self.rows = np.ascontiguousarray(rows)
        self.cols = np.ascontiguousarray(cols)
        self.vals = np.ascontiguousarray(vals)
        for a in (self.rows, self.cols, self.vals):
            a.flags.writeable = False
        self._csc = None

    @property
    def nnz(self) -> int:
        return self.vals.size

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """A @ x via bincount over row ids; independent of any solver code."""
        if x.shape != (self.ncols,):
            raise ValueError(f"x has shape {x.shape}, expected ({self.ncols},)")
        if self.nnz == 0:
            return np.zeros(self.nrows)
        return np.bincount(self.rows, weights=self.vals * x[self.cols],
                           minlength=self.nrows)

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        """A.T @ y."""
        if y.shape != (self.nrows,):
            raise ValueError(f"y has shape {y.shape}, expected ({self.nrows},)")
        if self.nnz == 0:
            return np.zeros(self.ncols)
        return np.bincount(self.cols, weights=self.vals * y[self.rows],
                           minlength=self.ncols)

    def csc(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(indptr, row indices, values) in column-compressed order."""
        if self._csc is None:
            order = np.lexsort((self.rows, self.cols))
            indices = self.rows[order]
            data = self.vals[order]
            indptr = np.zeros(self.ncols + 1, dtype=np.int64)
            np.add.at(indptr, self.cols[order] + 1, 1)
            np.cumsum(indptr, out=indptr)
            self._csc = (indptr, np.ascontiguousarray(indices),
                         np.ascontiguousarray(data))
        return self._csc

    def row_slice(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """(column indices, values) of row i; rows are stored sorted."""
        lo = np.searchsorted(self.rows, i, side="left")
        hi = np.searchsorted(self.rows, i, side="right")
        return self.cols[lo:hi], self.vals[lo:hi]


def vstack(top: SparseMatrix, bottom: SparseMatrix) -> SparseMatrix:
    if top.ncols != bottom.ncols:
        raise ValueError("column counts differ")
    return SparseMatrix(
        top.nrows + bottom.nrows, top.ncols,
        np.concatenate([top.rows, bottom.rows + top.nrows]),
        np.concatenate([top.cols, bottom.cols]),
        np.concatenate([top.vals, bottom.vals]),
    )


class TripletBuilder:
    """Accumulates (row, col, val) entries; zero values are dropped."""

    def __init__(self):
        self._rows: list[np.ndarray] = []
        self._cols: list[np.ndarray] = []
        self._vals: list[np.ndarray] = []

    def add(self, row, col, val):
        self.add_many(np.atleast_1d(row), np.atleast_1d(col), np.atleast_1d(val))

    def add_many(self, rows, cols, vals):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        rows, cols, vals = np.broadcast_arrays(rows, cols, vals)
        keep = vals != 0.0
        if not keep.all():
            rows, cols, vals = rows[keep], cols[keep], vals[keep]
        if vals.size:
            self._rows.append(np.ascontiguousarray(rows))
            self._cols.append(np.ascontiguousarray(cols))
            self._vals.append(np.ascontiguousarray(vals))

    def build(self, nrows: int, ncols: int) -> SparseMatrix:
        if not self._vals:
            empty = np.empty(0)
            return SparseMatrix(nrows, ncols, empty, empty, empty)
        return SparseMatrix(nrows, ncols,
                            np.concatenate(self._rows),
                            np.concatenate(self._cols),
                            np.concatenate(self._vals))
