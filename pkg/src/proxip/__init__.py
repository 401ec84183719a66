"""proxip: a sparse convex quadratic programming solver.

Solves

    minimize    0.5 x' P x + c' x
    subject to  A x = b,  G x <= h,  l <= x <= u

with a regularized interior-point method whose multiplier estimates and
penalty parameters follow a proximal update rule, so linearly dependent
constraints and rank-deficient objectives are handled without modification.
The KKT systems are solved by a pivot-free sparse LDL' factorization with a
fill-reducing ordering; the sparsity analysis is done once per structure and
reused across solves and data updates.
"""

__version__ = "0.1.0"

from .ldl import (
    KERNEL_BACKEND,
    LdlFactorization,
    QuasiDefiniteError,
    SymbolicFactorization,
    ldl_solve,
    numeric_factorize,
    symbolic_factorize,
)
from .model import (
    Iterate,
    ProximalState,
    QpProblem,
    Settings,
    SolveResult,
    Status,
    StepInfo,
)
from .ordering import amd_ordering
from .qps import QpsFile, QpsParseError, emit_qps, load_qps, parse_qps, to_problem
from .scaling import Equilibration, ruiz_equilibrate, unscale_solution
from .solver import (
    SolverInstance,
    centering_parameter,
    check_termination,
    corrector_rhs,
    setup,
    solve_qp,
    step_size,
    update_estimates,
)
from .sparse import SparseMatrixCsc, StructureError

__all__ = [
    "KERNEL_BACKEND",
    "Equilibration",
    "Iterate",
    "LdlFactorization",
    "ProximalState",
    "QpProblem",
    "QpsFile",
    "QpsParseError",
    "QuasiDefiniteError",
    "Settings",
    "SolveResult",
    "SolverInstance",
    "SparseMatrixCsc",
    "Status",
    "StepInfo",
    "StructureError",
    "SymbolicFactorization",
    "amd_ordering",
    "centering_parameter",
    "check_termination",
    "corrector_rhs",
    "emit_qps",
    "ldl_solve",
    "load_qps",
    "numeric_factorize",
    "parse_qps",
    "ruiz_equilibrate",
    "setup",
    "solve_qp",
    "step_size",
    "symbolic_factorize",
    "to_problem",
    "unscale_solution",
    "update_estimates",
    "__version__",
]
