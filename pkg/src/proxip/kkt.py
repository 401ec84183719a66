"""Assembly and factorization of the reduced regularized KKT system.

After eliminating the slack direction with the diagonal scaling W = S / Z,
every Newton solve works on the quasi-definite matrix

    [ P + rho*I   A'          G'            ]
    [ A           -delta*I    0             ]
    [ G           0           -(W + delta*I)]

stored as its upper triangle. The sparsity pattern is fixed at setup, so
each iteration only rewrites the numeric values in place and refactorizes
with the cached symbolic analysis. Pivot failures perturb the factorization
regularization by a fixed factor and retry a bounded number of times.
"""

from __future__ import annotations

import numpy as np

from .ldl import (
    LdlFactorization,
    QuasiDefiniteError,
    SymbolicFactorization,
    _empty_factorization,
    ldl_solve,
    numeric_factorize,
    symbolic_factorize,
)
from .ordering import amd_ordering
from .sparse import INDEX_DTYPE, SparseMatrixCsc

__all__ = ["KktSystem", "FactorizationFailed"]


class FactorizationFailed(ArithmeticError):
    """Raised when the factorization keeps failing after all retries."""


class KktSystem:
    """Owns the reduced KKT matrix, its symbolic analysis, and all buffers."""

    def __init__(self, P: SparseMatrixCsc, A: SparseMatrixCsc, G: SparseMatrixCsc):
        self.n = P.ncols
        self.p = A.nrows
        self.m = G.nrows
        dim = self.n + self.p + self.m
        self.dim = dim

        rows, cols, sections = self._build_pattern(P, A, G)
        vals = np.zeros(rows.size)
        self.matrix = SparseMatrixCsc.from_triplets(dim, dim, rows, cols, vals)
        # from_triplets sorts entries; recover where each triplet landed
        key_sorted = (
            self.matrix.entry_cols().astype(np.int64) * dim + self.matrix.row_idx
        )
        key_triplet = cols.astype(np.int64) * dim + rows
        lookup = np.argsort(key_sorted, kind="stable")
        pos = np.searchsorted(key_sorted[lookup], key_triplet)
        dest = lookup[pos].astype(INDEX_DTYPE)
        (self._p_dest, self._diag1_dest, self._a_dest, self._diag2_dest,
         self._g_dest, self._diag3_dest) = [dest[sl] for sl in sections]
        self._diag1_all = np.concatenate(
            [self._p_dest[P.row_idx == P.entry_cols()], self._diag1_dest]
        )

        self._a_gather = self._a_csr[2]
        self._g_gather = self._g_csr[2]
        self._buf_a = np.empty(self._a_gather.size)
        self._buf_g = np.empty(self._g_gather.size)
        self._buf_w = np.empty(self.m)

        self.expected_signs = np.concatenate(
            [np.ones(self.n, dtype=np.int8), -np.ones(self.p + self.m, dtype=np.int8)]
        )
        perm = amd_ordering(self.matrix)
        self.symbolic: SymbolicFactorization = symbolic_factorize(self.matrix, perm)
        self.factorization: LdlFactorization = _empty_factorization(self.symbolic)
        self._sol_work = np.empty(dim)
        self._resid = np.empty(dim)
        self._corr = np.empty(dim)
        self._rowscale = np.empty(dim)

    # -- pattern -------------------------------------------------------------

    def _build_pattern(self, P, A, G):
        n, p, m = self.n, self.p, self.m
        a_row_ptr, a_cols, a_gather = A.to_csr_arrays()
        g_row_ptr, g_cols, g_gather = G.to_csr_arrays()
        self._a_csr = (a_row_ptr, a_cols, a_gather)
        self._g_csr = (g_row_ptr, g_cols, g_gather)

        p_rows = P.row_idx
        p_cols = P.entry_cols()
        # diagonal entries of the (1,1) block missing from P's pattern
        present = np.zeros(n, dtype=bool)
        present[p_rows[p_rows == p_cols]] = True
        missing = np.flatnonzero(~present)

        at_rows = a_cols  # entry of A at (i, k) appears at (k, n + i)
        at_cols = n + np.repeat(np.arange(p, dtype=INDEX_DTYPE), np.diff(a_row_ptr))
        gt_rows = g_cols
        gt_cols = n + p + np.repeat(np.arange(m, dtype=INDEX_DTYPE), np.diff(g_row_ptr))

        blocks = [
            (p_rows, p_cols),
            (missing, missing),
            (at_rows, at_cols),
            (np.arange(n, n + p), np.arange(n, n + p)),
            (gt_rows, gt_cols),
            (np.arange(n + p, n + p + m), np.arange(n + p, n + p + m)),
        ]
        rows = np.concatenate([np.asarray(r, dtype=np.int64) for r, _ in blocks])
        cols = np.concatenate([np.asarray(c, dtype=np.int64) for _, c in blocks])
        sections = []
        start = 0
        for r, _ in blocks:
            sections.append(slice(start, start + len(r)))
            start += len(r)
        return rows, cols, sections

    # -- numeric refresh and factorization ------------------------------------

    def refresh(self, P: SparseMatrixCsc, A: SparseMatrixCsc, G: SparseMatrixCsc,
                delta: float, rho: float, W: np.ndarray):
        """Rewrite all numeric values in place for the given data and weights."""
        vals = self.matrix.values
        vals[self._p_dest] = P.values
        vals[self._diag1_dest] = 0.0
        vals[self._diag1_all] += rho
        np.take(A.values, self._a_gather, out=self._buf_a)
        vals[self._a_dest] = self._buf_a
        np.take(G.values, self._g_gather, out=self._buf_g)
        vals[self._g_dest] = self._buf_g
        vals[self._diag2_dest] = -delta
        np.add(W, delta, out=self._buf_w)
        np.negative(self._buf_w, out=self._buf_w)
        vals[self._diag3_dest] = self._buf_w

    def factorize(
        self,
        P: SparseMatrixCsc,
        A: SparseMatrixCsc,
        G: SparseMatrixCsc,
        delta: float,
        rho: float,
        W: np.ndarray,
        retry_factor: float,
        retry_max: int,
    ) -> tuple[float, float, int]:
        """Factorize the refreshed KKT matrix, perturbing and retrying on failure.

        Only the regularization used inside the factorization grows on retry;
        the caller's penalty parameters are untouched. Returns the effective
        (delta, rho) of the successful factorization and the retry count.
        """
        delta_f, rho_f = delta, rho
        for attempt in range(retry_max + 1):
            self.refresh(P, A, G, delta_f, rho_f, W)
            try:
                numeric_factorize(
                    self.matrix, self.symbolic, self.expected_signs, out=self.factorization
                )
                return delta_f, rho_f, attempt
            except QuasiDefiniteError:
                delta_f *= retry_factor
                rho_f *= retry_factor
        raise FactorizationFailed(
            f"factorization failed after {retry_max} regularization retries"
        )

    # With slack/dual ratios spanning many orders of magnitude late in a run,
    # a single pivot-free factorization pass loses a few digits in the mildly
    # scaled rows; cheap residual-driven refinement against the same factors
    # restores them. The stop test is componentwise: a row is converged when
    # its residual is at rounding level relative to that row's own content.
    REFINE_TOL = 1e-14
    REFINE_MAX = 3

    def solve_into(self, rhs: np.ndarray, out: np.ndarray) -> np.ndarray:
        """Solve the factorized system into a preallocated vector.

        The triangular solves are followed by up to REFINE_MAX rounds of
        iterative refinement; the factorization is never redone.
        """
        ldl_solve(self.factorization, rhs, out=out, work=self._sol_work)
        if self.dim == 0:
            return out
        for _ in range(self.REFINE_MAX):
            self._apply_into(out, self._resid, absolute=False)
            np.subtract(rhs, self._resid, out=self._resid)
            self._apply_into(out, self._rowscale, absolute=True)
            self._rowscale += np.abs(rhs)
            self._rowscale += 1e-300
            if float(np.max(np.abs(self._resid) / self._rowscale)) <= self.REFINE_TOL:
                break
            ldl_solve(self.factorization, self._resid, out=self._corr, work=self._sol_work)
            out += self._corr
        return out

    def _apply_into(self, x: np.ndarray, out: np.ndarray, absolute: bool):
        """out = K_sym @ x (or |K_sym| @ |x|) for the assembled upper triangle."""
        mat = self.matrix
        out[:] = 0.0
        if not mat.nnz:
            return
        vals = np.abs(mat.values) if absolute else mat.values
        xx = np.abs(x) if absolute else x
        np.add.at(out, mat.row_idx, vals * xx[mat.entry_cols()])
        prod = vals * xx[mat.row_idx]
        csum = np.concatenate(([0.0], np.cumsum(prod)))
        out += csum[mat.col_ptr[1:]] - csum[mat.col_ptr[:-1]]
        diag_mask = mat.row_idx == mat.entry_cols()
        np.subtract.at(
            out,
            mat.row_idx[diag_mask],
            vals[diag_mask] * xx[mat.row_idx[diag_mask]],
        )
