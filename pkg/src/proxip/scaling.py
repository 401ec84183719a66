"""Diagonal problem equilibration and exact unscaling of solutions.

The scaling loop (after Ruiz) drives every nonzero row and column of the
stacked symmetric data

    [ P  A'  G' ]
    [ A  0   0  ]
    [ G  0   0  ]

toward unit infinity norm by repeatedly multiplying with the reciprocal
square roots of the current row norms. A separate positive factor rescales
the objective so the duality-gap test stays well conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import Iterate, QpProblem
from .sparse import StructureError

__all__ = ["Equilibration", "ruiz_equilibrate", "scale_into", "unscale_solution"]


@dataclass
class Equilibration:
    """Diagonal scaling factors mapping original data to scaled data.

    All entries are strictly positive; the identity equilibration (all ones,
    cost scale one) leaves a problem bit-identical.
    """

    d_x: np.ndarray
    d_y: np.ndarray
    d_z: np.ndarray
    c_scale: float
    passes: int = 0

    @classmethod
    def identity(cls, n: int, p: int, m: int) -> "Equilibration":
        return cls(np.ones(n), np.ones(p), np.ones(m), 1.0, 0)

    def is_identity(self) -> bool:
        return (
            self.c_scale == 1.0
            and np.all(self.d_x == 1.0)
            and np.all(self.d_y == 1.0)
            and np.all(self.d_z == 1.0)
        )


def _stacked_row_norms(problem: QpProblem, d_x, d_y, d_z) -> np.ndarray:
    """Infinity norm of every row of the stacked data under current scaling."""
    n, p, m = problem.num_vars, problem.num_eq, problem.num_ineq
    norms = np.zeros(n + p + m)
    P, A, G = problem.P, problem.A, problem.G
    if P.nnz:
        v = np.abs(P.values) * d_x[P.row_idx] * d_x[P.entry_cols()]
        np.maximum.at(norms, P.row_idx, v)
        np.maximum.at(norms, P.entry_cols(), v)
    if A.nnz:
        v = np.abs(A.values) * d_y[A.row_idx] * d_x[A.entry_cols()]
        np.maximum.at(norms, n + A.row_idx, v)
        np.maximum.at(norms, A.entry_cols(), v)
    if G.nnz:
        v = np.abs(G.values) * d_z[G.row_idx] * d_x[G.entry_cols()]
        np.maximum.at(norms, n + p + G.row_idx, v)
        np.maximum.at(norms, G.entry_cols(), v)
    return norms


def _compute_factors(problem: QpProblem, equil: Equilibration, max_iters: int, tol: float):
    """Run the scaling passes, mutating the factor vectors of ``equil``."""
    n, p, m = problem.num_vars, problem.num_eq, problem.num_ineq
    d_x, d_y, d_z = equil.d_x, equil.d_y, equil.d_z
    passes = 0
    for _ in range(max_iters):
        norms = _stacked_row_norms(problem, d_x, d_y, d_z)
        nz = norms > 0.0
        if not np.any(nz) or np.max(np.abs(norms[nz] - 1.0)) <= tol:
            break
        f = np.ones_like(norms)
        f[nz] = 1.0 / np.sqrt(norms[nz])
        d_x *= f[:n]
        d_y *= f[n:n + p]
        d_z *= f[n + p:]
        passes += 1
    equil.passes = passes


def scale_into(problem: QpProblem, scaled: QpProblem, equil: Equilibration,
               max_iters: int, tol: float):
    """Equilibrate ``problem`` writing results into preallocated ``scaled``/``equil``.

    ``scaled`` must share the sparsity patterns of ``problem``; only its value
    arrays and vectors are overwritten, so repeated data updates reuse the
    same storage.
    """
    _compute_factors(problem, equil, max_iters, tol)
    n = problem.num_vars
    d_x, d_y, d_z = equil.d_x, equil.d_y, equil.d_z
    P, A, G = problem.P, problem.A, problem.G

    np.multiply(P.values, d_x[P.row_idx], out=scaled.P.values)
    scaled.P.values *= d_x[P.entry_cols()]
    np.multiply(A.values, d_y[A.row_idx], out=scaled.A.values)
    scaled.A.values *= d_x[A.entry_cols()]
    np.multiply(G.values, d_z[G.row_idx], out=scaled.G.values)
    scaled.G.values *= d_x[G.entry_cols()]
    np.multiply(problem.c, d_x, out=scaled.c)
    np.multiply(problem.b, d_y, out=scaled.b)
    np.multiply(problem.h, d_z, out=scaled.h)

    col_norms = np.zeros(n)
    if P.nnz:
        np.maximum.at(col_norms, P.entry_cols(), np.abs(scaled.P.values))
        np.maximum.at(col_norms, P.row_idx, np.abs(scaled.P.values))
    mean_col = float(col_norms.mean()) if n else 0.0
    c_inf = float(np.max(np.abs(scaled.c))) if n else 0.0
    equil.c_scale = 1.0 / max(1.0, mean_col, c_inf)
    scaled.P.values *= equil.c_scale
    scaled.c *= equil.c_scale


def ruiz_equilibrate(
    problem: QpProblem, max_iters: int = 10, tol: float = 1e-3
) -> tuple[QpProblem, Equilibration]:
    """Equilibrate problem data; returns the scaled problem and the factors.

    Stops once every nonzero stacked row norm lies within ``tol`` of one, or
    after ``max_iters`` passes. The cost scale is applied last:
    ``1 / max(1, mean column norm of scaled P, inf-norm of scaled c)``.
    """
    if problem.has_boxes():
        raise StructureError("equilibrate after box bounds are expanded")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    n, p, m = problem.num_vars, problem.num_eq, problem.num_ineq
    scaled = replace(
        problem,
        P=problem.P.copy(),
        c=problem.c.copy(),
        A=problem.A.copy(),
        b=problem.b.copy(),
        G=problem.G.copy(),
        h=problem.h.copy(),
    )
    equil = Equilibration.identity(n, p, m)
    scale_into(problem, scaled, equil, max_iters, tol)
    return scaled, equil


def unscale_solution(equil: Equilibration, scaled: Iterate) -> Iterate:
    """Map an iterate of the scaled problem back to original coordinates."""
    if scaled.x.size != equil.d_x.size or scaled.y.size != equil.d_y.size or (
        scaled.s.size != equil.d_z.size or scaled.z.size != equil.d_z.size
    ):
        raise StructureError("iterate dimensions do not match the equilibration")
    inv_c = 1.0 / equil.c_scale
    return Iterate(
        x=equil.d_x * scaled.x,
        s=scaled.s / equil.d_z,
        y=inv_c * equil.d_y * scaled.y,
        z=inv_c * equil.d_z * scaled.z,
    )


def unscale_into(equil: Equilibration, scaled: Iterate, out: Iterate) -> Iterate:
    """Allocation-free variant of :func:`unscale_solution` writing into ``out``."""
    np.multiply(equil.d_x, scaled.x, out=out.x)
    np.divide(scaled.s, equil.d_z, out=out.s)
    inv_c = 1.0 / equil.c_scale
    np.multiply(equil.d_y, scaled.y, out=out.y)
    out.y *= inv_c
    np.multiply(equil.d_z, scaled.z, out=out.z)
    out.z *= inv_c
    return out
