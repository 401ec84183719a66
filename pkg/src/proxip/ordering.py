"""Fill-reducing symmetric ordering.

Classical quotient-graph minimum degree with the approximate external degree
bound, element absorption, and deterministic lowest-index tie-breaking. Dense
rows are not postponed; the target problem sizes do not need it.
"""

from __future__ import annotations

import heapq

import numpy as np

from .sparse import INDEX_DTYPE, SparseMatrixCsc, StructureError

__all__ = ["amd_ordering", "inverse_permutation"]


def inverse_permutation(perm: np.ndarray) -> np.ndarray:
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size, dtype=perm.dtype)
    return inv


def _adjacency(pattern: SparseMatrixCsc) -> list[set[int]]:
    """Symmetrized off-diagonal adjacency sets from an upper-triangle pattern."""
    n = pattern.ncols
    if pattern.nrows != n:
        raise StructureError("ordering requires a square pattern")
    if not pattern.is_upper_triangular():
        raise StructureError("symmetric patterns must be given as their upper triangle")
    adj: list[set[int]] = [set() for _ in range(n)]
    cols = pattern.entry_cols()
    for i, j in zip(pattern.row_idx.tolist(), cols.tolist()):
        if i != j:
            adj[i].add(j)
            adj[j].add(i)
    return adj


def amd_ordering(pattern: SparseMatrixCsc) -> np.ndarray:
    """Approximate-minimum-degree permutation for a symmetric sparsity pattern.

    Returns ``perm`` such that eliminating the permuted matrix in natural
    order tends to produce little fill. Deterministic: equal degrees break
    toward the lowest node index.
    """
    n = pattern.ncols
    if n == 0:
        return np.empty(0, dtype=INDEX_DTYPE)
    var_adj = _adjacency(pattern)

    elem_vars: dict[int, set[int]] = {}  # element id -> variable set
    var_elems: list[set[int]] = [set() for _ in range(n)]
    alive = np.ones(n, dtype=bool)
    degree = np.array([len(a) for a in var_adj], dtype=np.int64)

    heap: list[tuple[int, int]] = [(int(degree[v]), v) for v in range(n)]
    heapq.heapify(heap)
    order: list[int] = []
    next_elem = 0

    def approx_degree(v: int) -> int:
        d = len(var_adj[v])
        for e in var_elems[v]:
            d += len(elem_vars[e]) - 1
        return min(d, n - len(order) - 1) if n - len(order) - 1 > 0 else 0

    while len(order) < n:
        while True:
            d, p = heapq.heappop(heap)
            if alive[p] and d == degree[p]:
                break
        alive[p] = False
        order.append(p)

        # Merge the pivot's adjacent elements and variables into a new element.
        new_vars = set(var_adj[p])
        for e in sorted(var_elems[p]):
            new_vars |= elem_vars.pop(e)
        new_vars.discard(p)
        new_vars = {v for v in new_vars if alive[v]}

        absorbed = var_elems[p]
        if new_vars:
            eid = next_elem
            next_elem += 1
            elem_vars[eid] = new_vars
            for v in new_vars:
                var_elems[v] -= absorbed
                var_elems[v].add(eid)
                var_adj[v].discard(p)
                var_adj[v] -= new_vars
                degree[v] = approx_degree(v)
                heapq.heappush(heap, (int(degree[v]), v))
        var_adj[p] = set()
        var_elems[p] = set()

    perm = np.array(order, dtype=INDEX_DTYPE)
    return perm
