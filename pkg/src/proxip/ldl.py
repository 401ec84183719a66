"""Sparse pivot-free LDL' factorization of symmetric quasi-definite matrices.

The symbolic phase runs once per sparsity pattern: it applies a fill-reducing
permutation, builds the elimination tree, and fixes the pattern of L, so the
numeric phase can refactorize repeatedly into preallocated buffers without
pivoting or memory growth. Pivots that come out zero or with the wrong sign
raise :class:`QuasiDefiniteError`; the caller decides how to perturb and
retry.

The numeric inner loops live in a compiled extension when available; set
``PROXIP_PURE_PYTHON=1`` to force the NumPy fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .ordering import inverse_permutation
from .sparse import INDEX_DTYPE, SparseMatrixCsc, StructureError

if os.environ.get("PROXIP_PURE_PYTHON"):
    from . import _ldlkern_py as _kern
else:
    try:
        from . import _ldlkern as _kern  # type: ignore[attr-defined]
    except ImportError:
        from . import _ldlkern_py as _kern

KERNEL_BACKEND: str = _kern.BACKEND

SIGN_TOLERANCE = 1e-14

__all__ = [
    "KERNEL_BACKEND",
    "LdlFactorization",
    "QuasiDefiniteError",
    "SymbolicFactorization",
    "ldl_solve",
    "numeric_factorize",
    "symbolic_factorize",
]


class QuasiDefiniteError(ArithmeticError):
    """A pivot was zero or had the wrong sign during the pivot-free elimination.

    ``column`` is the failing column in elimination (permuted) order;
    ``original_column`` is the same column in the input ordering.
    """

    def __init__(self, column: int, original_column: int):
        super().__init__(f"pivot failure at elimination column {column}")
        self.column = int(column)
        self.original_column = int(original_column)


@dataclass
class SymbolicFactorization:
    """Reusable symbolic analysis of one symmetric sparsity pattern."""

    n: int
    perm: np.ndarray
    perm_inv: np.ndarray
    etree: np.ndarray  # parent per permuted column, -1 marks a root
    l_col_counts: np.ndarray  # off-diagonal count per column of L
    l_col_ptr: np.ndarray
    l_pattern: np.ndarray  # row indices of L, fixed across refactorizations
    # permuted-matrix plumbing reused by every numeric factorization
    b_col_ptr: np.ndarray = field(repr=False)
    b_row_idx: np.ndarray = field(repr=False)
    b_gather: np.ndarray = field(repr=False)  # input values -> permuted values
    b_entry_cols: np.ndarray = field(repr=False)
    pattern_col_ptr: np.ndarray = field(repr=False)
    pattern_row_idx: np.ndarray = field(repr=False)

    @property
    def l_nnz(self) -> int:
        return int(self.l_col_ptr[-1])


@dataclass
class LdlFactorization:
    """Numeric factors: permuted input = L @ diag(d) @ L.T with unit L."""

    symbolic: SymbolicFactorization
    l_values: np.ndarray
    d: np.ndarray
    # scratch reused across refactorizations
    _lnz: np.ndarray = field(repr=False)
    _flag: np.ndarray = field(repr=False)
    _pattern: np.ndarray = field(repr=False)
    _y: np.ndarray = field(repr=False)
    _b_values: np.ndarray = field(repr=False)
    _col_scale: np.ndarray = field(repr=False)
    _signs: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.symbolic.n

    def l_dense(self) -> np.ndarray:
        sym = self.symbolic
        out = np.eye(sym.n)
        for j in range(sym.n):
            rows = sym.l_pattern[sym.l_col_ptr[j]:sym.l_col_ptr[j + 1]]
            out[rows, j] = self.l_values[sym.l_col_ptr[j]:sym.l_col_ptr[j + 1]]
        return out


def _empty_factorization(symbolic: SymbolicFactorization) -> LdlFactorization:
    nnz = symbolic.l_nnz
    n = symbolic.n
    return LdlFactorization(
        symbolic=symbolic,
        l_values=np.zeros(nnz),
        d=np.zeros(n),
        _lnz=np.zeros(n, dtype=INDEX_DTYPE),
        _flag=np.zeros(n, dtype=INDEX_DTYPE),
        _pattern=np.zeros(n, dtype=INDEX_DTYPE),
        _y=np.zeros(n),
        _b_values=np.zeros(symbolic.b_row_idx.size),
        _col_scale=np.zeros(n),
        _signs=np.zeros(n, dtype=np.int8),
    )


def _check_square_upper(pattern: SparseMatrixCsc):
    if pattern.nrows != pattern.ncols:
        raise StructureError("symmetric pattern must be square")
    if not pattern.is_upper_triangular():
        raise StructureError("symmetric matrices are stored as their upper triangle")


def symbolic_factorize(pattern: SparseMatrixCsc, perm: np.ndarray) -> SymbolicFactorization:
    """Elimination tree, column counts, and the exact fill pattern of L.

    ``pattern`` is the upper triangle of the symmetric matrix; ``perm`` the
    fill-reducing permutation to apply. After this call every memory need of
    the numeric phase is known.
    """
    _check_square_upper(pattern)
    n = pattern.ncols
    perm = np.asarray(perm, dtype=INDEX_DTYPE)
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise StructureError("perm must be a permutation of 0..n-1")
    perm_inv = inverse_permutation(perm)

    # Permuted upper triangle B with B[r, c] drawn from pattern entries.
    pi = perm_inv[pattern.row_idx]
    pj = perm_inv[pattern.entry_cols()]
    rows = np.minimum(pi, pj)
    cols = np.maximum(pi, pj)
    order = np.argsort(cols.astype(np.int64) * max(n, 1) + rows, kind="stable")
    b_row = np.ascontiguousarray(rows[order], dtype=INDEX_DTYPE)
    b_cols_expanded = cols[order]
    counts = np.bincount(b_cols_expanded, minlength=n)
    b_ptr = np.zeros(n + 1, dtype=INDEX_DTYPE)
    np.cumsum(counts, out=b_ptr[1:])

    # Elimination tree and column counts of L (one pass over rows of B).
    parent = np.full(n, -1, dtype=INDEX_DTYPE)
    flag = np.full(n, -1, dtype=INDEX_DTYPE)
    l_counts = np.zeros(n, dtype=INDEX_DTYPE)
    b_row_list = b_row.tolist()
    b_ptr_list = b_ptr.tolist()
    for k in range(n):
        flag[k] = k
        for p in range(b_ptr_list[k], b_ptr_list[k + 1]):
            i = b_row_list[p]
            while flag[i] != k:
                if parent[i] == -1:
                    parent[i] = k
                l_counts[i] += 1
                flag[i] = k
                i = parent[i]

    l_ptr = np.zeros(n + 1, dtype=INDEX_DTYPE)
    np.cumsum(l_counts, out=l_ptr[1:])

    # Second pass records the row indices of L explicitly.
    l_rows = np.zeros(int(l_ptr[-1]), dtype=INDEX_DTYPE)
    lnz = np.zeros(n, dtype=INDEX_DTYPE)
    flag[:] = -1
    for k in range(n):
        flag[k] = k
        for p in range(b_ptr_list[k], b_ptr_list[k + 1]):
            i = b_row_list[p]
            while flag[i] != k:
                l_rows[l_ptr[i] + lnz[i]] = k
                lnz[i] += 1
                flag[i] = k
                i = parent[i]

    return SymbolicFactorization(
        n=n,
        perm=perm,
        perm_inv=perm_inv,
        etree=parent,
        l_col_counts=l_counts,
        l_col_ptr=l_ptr,
        l_pattern=l_rows,
        b_col_ptr=b_ptr,
        b_row_idx=b_row,
        b_gather=np.ascontiguousarray(order, dtype=INDEX_DTYPE),
        b_entry_cols=np.repeat(np.arange(n, dtype=INDEX_DTYPE), counts),
        pattern_col_ptr=pattern.col_ptr.copy(),
        pattern_row_idx=pattern.row_idx.copy(),
    )


def numeric_factorize(
    matrix: SparseMatrixCsc,
    symbolic: SymbolicFactorization,
    expected_signs: np.ndarray,
    out: LdlFactorization | None = None,
) -> LdlFactorization:
    """Refactorize using a precomputed symbolic analysis.

    ``expected_signs`` gives, per column of the *input* ordering, the sign the
    corresponding pivot must take (+1 on the positive-definite block, -1 on
    the negative-definite one). Passing ``out`` reuses its buffers so the call
    allocates nothing. Raises :class:`QuasiDefiniteError` on the first pivot
    that is zero or disagrees with its expected sign.
    """
    _check_square_upper(matrix)
    n = symbolic.n
    if matrix.ncols != n:
        raise StructureError("matrix does not match the symbolic factorization")
    if not np.array_equal(matrix.col_ptr, symbolic.pattern_col_ptr) or not np.array_equal(
        matrix.row_idx, symbolic.pattern_row_idx
    ):
        raise StructureError("matrix pattern differs from the analyzed pattern")
    if not np.all(np.isfinite(matrix.values)):
        raise StructureError("matrix values must be finite")
    signs = np.asarray(expected_signs)
    if signs.shape != (n,):
        raise StructureError("expected_signs must have one entry per column")

    fact = out if out is not None else _empty_factorization(symbolic)
    np.take(matrix.values, symbolic.b_gather, out=fact._b_values)
    np.take(signs.astype(np.int8), symbolic.perm, out=fact._signs)

    # Symmetric row/column scale of the permuted matrix, for the sign test.
    fact._col_scale[:] = 0.0
    absvals = np.abs(fact._b_values)
    np.maximum.at(fact._col_scale, symbolic.b_row_idx, absvals)
    np.maximum.at(fact._col_scale, symbolic.b_entry_cols, absvals)

    status = _kern.factor(
        n,
        symbolic.b_col_ptr,
        symbolic.b_row_idx,
        fact._b_values,
        symbolic.etree,
        symbolic.l_col_ptr,
        symbolic.l_pattern,
        fact.l_values,
        fact.d,
        fact._lnz,
        fact._flag,
        fact._pattern,
        fact._y,
        fact._signs,
        fact._col_scale,
        SIGN_TOLERANCE,
    )
    if status >= 0:
        raise QuasiDefiniteError(status, int(symbolic.perm[status]))
    return fact


def ldl_solve(
    fact: LdlFactorization,
    rhs: np.ndarray,
    out: np.ndarray | None = None,
    work: np.ndarray | None = None,
) -> np.ndarray:
    """Solve K x = rhs given the factorization of the permuted K.

    ``out`` and ``work`` are optional length-n buffers; when provided the call
    performs no allocation. ``rhs`` is never modified.
    """
    sym = fact.symbolic
    n = sym.n
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape != (n,):
        raise StructureError(f"rhs has length {rhs.size}, expected {n}")
    w = work if work is not None else np.empty(n)
    x = out if out is not None else np.empty(n)
    np.take(rhs, sym.perm, out=w)
    _kern.solve_inplace(n, sym.l_col_ptr, sym.l_pattern, fact.l_values, fact.d, w)
    x[sym.perm] = w
    return x
