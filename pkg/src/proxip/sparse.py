"""Compressed sparse column matrices.

This is the storage format used throughout the package: constraint matrices
are general CSC, while symmetric matrices (the quadratic cost and the KKT
system) keep only their upper triangle, diagonal included.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SparseMatrixCsc", "StructureError"]

INDEX_DTYPE = np.int32


class StructureError(ValueError):
    """Raised for malformed sparse structure (bad pointers, indices, shapes)."""


def _as_index_array(a, name: str) -> np.ndarray:
    arr = np.asarray(a)
    if arr.size == 0:
        return np.zeros(arr.shape, dtype=INDEX_DTYPE)
    if arr.dtype.kind not in "iu":
        raise StructureError(f"{name} must be an integer array")
    return np.ascontiguousarray(arr, dtype=INDEX_DTYPE)


class SparseMatrixCsc:
    """A real matrix in compressed sparse column form.

    ``col_ptr`` has length ``ncols + 1`` with ``col_ptr[0] == 0``; the row
    indices of column ``j`` are ``row_idx[col_ptr[j]:col_ptr[j+1]]``, strictly
    increasing within the column.
    """

    __slots__ = ("nrows", "ncols", "col_ptr", "row_idx", "values", "_entry_cols")

    def __init__(self, nrows, ncols, col_ptr, row_idx, values, check: bool = True):
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.col_ptr = _as_index_array(col_ptr, "col_ptr")
        self.row_idx = _as_index_array(row_idx, "row_idx")
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        self._entry_cols = None
        if check:
            self._validate()

    def _validate(self):
        if self.nrows < 0 or self.ncols < 0:
            raise StructureError("negative dimension")
        if self.col_ptr.shape != (self.ncols + 1,):
            raise StructureError(
                f"col_ptr has length {self.col_ptr.size}, expected {self.ncols + 1}"
            )
        if self.col_ptr[0] != 0:
            raise StructureError("col_ptr[0] must be 0")
        if np.any(np.diff(self.col_ptr) < 0):
            raise StructureError("col_ptr must be non-decreasing")
        nnz = int(self.col_ptr[-1])
        if self.row_idx.size != nnz or self.values.size != nnz:
            raise StructureError("col_ptr[-1] must equal len(row_idx) == len(values)")
        if nnz:
            if self.row_idx.min() < 0 or self.row_idx.max() >= self.nrows:
                raise StructureError("row index out of range")
            for j in range(self.ncols):
                lo, hi = self.col_ptr[j], self.col_ptr[j + 1]
                col = self.row_idx[lo:hi]
                if col.size > 1 and np.any(np.diff(col) <= 0):
                    raise StructureError(
                        f"row indices not strictly increasing in column {j}"
                    )

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_triplets(cls, nrows, ncols, rows, cols, vals) -> "SparseMatrixCsc":
        """Build from COO triplets; duplicate entries are summed."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (rows.size == cols.size == vals.size):
            raise StructureError("triplet arrays must have equal length")
        if rows.size and (
            rows.min() < 0 or rows.max() >= nrows or cols.min() < 0 or cols.max() >= ncols
        ):
            raise StructureError("triplet index out of range")
        key = cols * max(nrows, 1) + rows
        order = np.argsort(key, kind="stable")
        key = key[order]
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            uniq_mask = np.empty(rows.size, dtype=bool)
            uniq_mask[0] = True
            np.not_equal(key[1:], key[:-1], out=uniq_mask[1:])
            idx = np.flatnonzero(uniq_mask)
            summed = np.add.reduceat(vals, idx) if idx.size else vals[:0]
            rows, cols, vals = rows[idx], cols[idx], summed
        counts = np.bincount(cols, minlength=ncols)
        col_ptr = np.zeros(ncols + 1, dtype=INDEX_DTYPE)
        np.cumsum(counts, out=col_ptr[1:])
        return cls(nrows, ncols, col_ptr, rows, vals)

    @classmethod
    def from_dense(cls, dense, keep_upper: bool = False) -> "SparseMatrixCsc":
        """Build from a dense array, dropping exact zeros.

        With ``keep_upper`` only entries on or above the diagonal are kept,
        which is the storage convention for symmetric matrices.
        """
        a = np.asarray(dense, dtype=np.float64)
        if a.ndim != 2:
            raise StructureError("dense input must be 2-D")
        mask = a != 0.0
        if keep_upper:
            mask &= np.triu(np.ones(a.shape, dtype=bool))
        rows, cols = np.nonzero(mask)
        return cls.from_triplets(a.shape[0], a.shape[1], rows, cols, a[rows, cols])

    @classmethod
    def empty(cls, nrows, ncols) -> "SparseMatrixCsc":
        return cls(nrows, ncols, np.zeros(ncols + 1, dtype=INDEX_DTYPE), [], [])

    @classmethod
    def identity(cls, n, scale: float = 1.0) -> "SparseMatrixCsc":
        return cls(
            n,
            n,
            np.arange(n + 1, dtype=INDEX_DTYPE),
            np.arange(n, dtype=INDEX_DTYPE),
            np.full(n, float(scale)),
        )

    # -- basic properties ---------------------------------------------------

    @property
    def nnz(self) -> int:
        return int(self.col_ptr[-1])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def entry_cols(self) -> np.ndarray:
        """Column index of every stored entry (cached)."""
        if self._entry_cols is None:
            self._entry_cols = np.repeat(
                np.arange(self.ncols, dtype=INDEX_DTYPE), np.diff(self.col_ptr)
            )
        return self._entry_cols

    def copy(self) -> "SparseMatrixCsc":
        return SparseMatrixCsc(
            self.nrows,
            self.ncols,
            self.col_ptr.copy(),
            self.row_idx.copy(),
            self.values.copy(),
            check=False,
        )

    def same_pattern(self, other: "SparseMatrixCsc") -> bool:
        return (
            self.shape == other.shape
            and np.array_equal(self.col_ptr, other.col_ptr)
            and np.array_equal(self.row_idx, other.row_idx)
        )

    def is_upper_triangular(self) -> bool:
        return bool(np.all(self.row_idx <= self.entry_cols()))

    # -- dense conversion / products -----------------------------------------

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        out[self.row_idx, self.entry_cols()] = self.values
        return out

    def to_dense_symmetric(self) -> np.ndarray:
        """Expand an upper-triangle-stored symmetric matrix to full dense."""
        up = self.to_dense()
        return up + np.triu(up, 1).T

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """y = A @ x."""
        x = np.asarray(x, dtype=np.float64)
        y = np.zeros(self.nrows)
        if self.nnz:
            np.add.at(y, self.row_idx, self.values * x[self.entry_cols()])
        return y

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        """y = A.T @ x."""
        x = np.asarray(x, dtype=np.float64)
        if not self.nnz:
            return np.zeros(self.ncols)
        prod = self.values * x[self.row_idx]
        csum = np.concatenate(([0.0], np.cumsum(prod)))
        return csum[self.col_ptr[1:]] - csum[self.col_ptr[:-1]]

    def symvec(self, x: np.ndarray) -> np.ndarray:
        """y = S @ x where S is the symmetric matrix stored as this upper triangle."""
        cols = self.entry_cols()
        diag_mask = self.row_idx == cols
        y = self.matvec(x) + self.rmatvec(x)
        if np.any(diag_mask):
            np.add.at(
                y,
                self.row_idx[diag_mask],
                -self.values[diag_mask] * np.asarray(x)[self.row_idx[diag_mask]],
            )
        return y

    def diagonal(self) -> np.ndarray:
        n = min(self.nrows, self.ncols)
        d = np.zeros(n)
        mask = self.row_idx == self.entry_cols()
        d[self.row_idx[mask]] = self.values[mask]
        return d

    def to_csr_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (row_ptr, col_idx, value_perm) describing the CSR view.

        ``value_perm`` maps CSR entry order back into ``values`` so updated
        values can be regathered without rebuilding the structure.
        """
        order = np.argsort(self.row_idx, kind="stable")
        col_idx = self.entry_cols()[order]
        counts = np.bincount(self.row_idx, minlength=self.nrows)
        row_ptr = np.zeros(self.nrows + 1, dtype=INDEX_DTYPE)
        np.cumsum(counts, out=row_ptr[1:])
        return row_ptr, col_idx.astype(INDEX_DTYPE), order.astype(INDEX_DTYPE)

    def __repr__(self) -> str:
        return f"SparseMatrixCsc({self.nrows}x{self.ncols}, nnz={self.nnz})"
