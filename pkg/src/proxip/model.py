"""Problem, settings, and result types for the QP solver.

A problem is

    minimize    0.5 x' P x + c' x
    subject to  A x = b,  G x <= h,  l <= x <= u

with P positive semi-definite and stored as its upper triangle. Box bounds
are optional and get rewritten as general inequality rows during setup.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .sparse import SparseMatrixCsc, StructureError

__all__ = [
    "Iterate",
    "ProximalState",
    "QpProblem",
    "Settings",
    "SolveResult",
    "Status",
    "StepInfo",
    "TerminationInfo",
]


class Status(enum.Enum):
    SOLVED = "Solved"
    ITERATION_LIMIT = "IterationLimit"
    TIME_LIMIT = "TimeLimit"
    NUMERICAL_ERROR = "NumericalError"

    def __str__(self) -> str:
        return self.value


def _vec(v, length: int, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(v, dtype=np.float64)
    if arr.shape != (length,):
        raise StructureError(f"{name} has shape {arr.shape}, expected ({length},)")
    return arr


@dataclass
class QpProblem:
    """Immutable problem data; the solver never mutates it."""

    P: SparseMatrixCsc
    c: np.ndarray
    A: SparseMatrixCsc | None = None
    b: np.ndarray | None = None
    G: SparseMatrixCsc | None = None
    h: np.ndarray | None = None
    l: np.ndarray | None = None
    u: np.ndarray | None = None
    obj_constant: float = 0.0
    name: str = ""

    def __post_init__(self):
        n = self.P.ncols
        if self.P.nrows != n:
            raise StructureError("P must be square")
        if not self.P.is_upper_triangular():
            raise StructureError("P must be stored as its upper triangle")
        self.c = _vec(self.c, n, "c")
        if self.A is None:
            self.A = SparseMatrixCsc.empty(0, n)
        if self.G is None:
            self.G = SparseMatrixCsc.empty(0, n)
        if self.A.ncols != n or self.G.ncols != n:
            raise StructureError("A and G must have one column per variable")
        self.b = _vec(self.b if self.b is not None else [], self.A.nrows, "b")
        self.h = _vec(self.h if self.h is not None else [], self.G.nrows, "h")
        for mat, vec, nm in ((self.P, None, "P"), (self.A, self.b, "A"), (self.G, self.h, "G")):
            if not np.all(np.isfinite(mat.values)):
                raise StructureError(f"{nm} contains non-finite values")
        if not np.all(np.isfinite(self.c)):
            raise StructureError("c contains non-finite values")
        if not (np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.h))):
            raise StructureError("b and h must be finite")
        if self.l is not None:
            self.l = _vec(self.l, n, "l")
            if np.any(np.isnan(self.l)):
                raise StructureError("l contains NaN")
        if self.u is not None:
            self.u = _vec(self.u, n, "u")
            if np.any(np.isnan(self.u)):
                raise StructureError("u contains NaN")
        if self.l is not None and self.u is not None:
            both = np.isfinite(self.l) & np.isfinite(self.u)
            if np.any(self.l[both] > self.u[both]):
                raise StructureError("box bounds must satisfy l <= u")

    @property
    def num_vars(self) -> int:
        return self.P.ncols

    @property
    def num_eq(self) -> int:
        return self.A.nrows

    @property
    def num_ineq(self) -> int:
        return self.G.nrows

    def has_boxes(self) -> bool:
        return (self.l is not None and np.any(np.isfinite(self.l))) or (
            self.u is not None and np.any(np.isfinite(self.u))
        )

    def expand_boxes(self) -> "QpProblem":
        """Rewrite finite box bounds as inequality rows appended to (G, h).

        Upper bounds come first (x_i <= u_i), then lower bounds (-x_i <= -l_i);
        infinite bounds are dropped. Returns self when there is nothing to do.
        """
        if not self.has_boxes():
            if self.l is None and self.u is None:
                return self
            return replace(self, l=None, u=None)
        n = self.num_vars
        rows = []
        cols = []
        vals = []
        rhs = []
        nb = 0
        if self.u is not None:
            for i in np.flatnonzero(np.isfinite(self.u)):
                rows.append(nb)
                cols.append(int(i))
                vals.append(1.0)
                rhs.append(float(self.u[i]))
                nb += 1
        if self.l is not None:
            for i in np.flatnonzero(np.isfinite(self.l)):
                rows.append(nb)
                cols.append(int(i))
                vals.append(-1.0)
                rhs.append(-float(self.l[i]))
                nb += 1
        box = SparseMatrixCsc.from_triplets(nb, n, rows, cols, vals)
        g_new = _vstack(self.G, box)
        h_new = np.concatenate([self.h, np.asarray(rhs)])
        return replace(self, G=g_new, h=h_new, l=None, u=None)

    def objective(self, x: np.ndarray) -> float:
        return 0.5 * float(x @ self.P.symvec(x)) + float(self.c @ x) + self.obj_constant


def _vstack(top: SparseMatrixCsc, bottom: SparseMatrixCsc) -> SparseMatrixCsc:
    if top.ncols != bottom.ncols:
        raise StructureError("column mismatch in vstack")
    rows = np.concatenate([top.row_idx, bottom.row_idx + top.nrows])
    cols = np.concatenate([top.entry_cols(), bottom.entry_cols()])
    vals = np.concatenate([top.values, bottom.values])
    return SparseMatrixCsc.from_triplets(top.nrows + bottom.nrows, top.ncols, rows, cols, vals)


@dataclass
class Settings:
    """Solver tolerances and algorithm constants."""

    eps_abs: float = 1e-8
    eps_rel: float = 1e-9
    max_iter: int = 250
    tau: float = 0.995  # fraction-to-boundary scaling of step sizes
    delta0: float = 1e-4
    rho0: float = 1e-6
    delta_min: float = 1e-10
    rho_min: float = 1e-10
    reg_retry_factor: float = 100.0
    reg_retry_max: int = 10
    ruiz_iters: int = 10
    ruiz_tol: float = 1e-3
    time_limit: float | None = None

    def __post_init__(self):
        if self.eps_abs <= 0:
            raise ValueError("eps_abs must be positive")
        if self.eps_rel < 0:
            raise ValueError("eps_rel must be non-negative")
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")
        for nm in ("delta0", "rho0", "delta_min", "rho_min"):
            if getattr(self, nm) <= 0:
                raise ValueError(f"{nm} must be positive")
        if self.delta_min > self.delta0 or self.rho_min > self.rho0:
            raise ValueError("regularization floors must not exceed initial values")
        if self.reg_retry_factor <= 1:
            raise ValueError("reg_retry_factor must exceed 1")
        if self.max_iter < 1 or self.reg_retry_max < 0 or self.ruiz_iters < 0:
            raise ValueError("counts must be non-negative (max_iter >= 1)")
        if self.time_limit is not None and self.time_limit < 0:
            raise ValueError("time_limit must be non-negative")


@dataclass
class Iterate:
    """Primal/dual point: x primal, s inequality slacks, y equality duals,
    z inequality duals (s, z strictly positive while iterating)."""

    x: np.ndarray
    s: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def copy(self) -> "Iterate":
        return Iterate(self.x.copy(), self.s.copy(), self.y.copy(), self.z.copy())


@dataclass
class ProximalState:
    """Proximal center and multiplier estimates with their penalty weights."""

    xi: np.ndarray
    lam: np.ndarray
    nu: np.ndarray
    delta: float
    rho: float


@dataclass
class StepInfo:
    """Per-iteration diagnostics exposed through the solve trace."""

    iteration: int
    dx: np.ndarray
    dy: np.ndarray
    dz: np.ndarray
    ds: np.ndarray
    alpha_p: float
    alpha_d: float
    alpha_p_affine: float
    alpha_d_affine: float
    sigma: float
    mu: float
    eta: float
    delta: float
    rho: float
    delta_factored: float
    rho_factored: float
    factor_retries: int


@dataclass
class TerminationInfo:
    converged: bool
    primal_res: float
    dual_res: float
    duality_gap: float


@dataclass
class SolveResult:
    status: Status
    iterate: Iterate
    primal_res: float
    dual_res: float
    duality_gap: float
    iterations: int
    setup_time: float
    solve_time: float
    objective: float = 0.0

    @property
    def x(self) -> np.ndarray:
        return self.iterate.x

    @property
    def y(self) -> np.ndarray:
        return self.iterate.y

    @property
    def z(self) -> np.ndarray:
        return self.iterate.z

    @property
    def s(self) -> np.ndarray:
        return self.iterate.s
