"""Compare the compiled and pure Python factorization kernels.

Times the numeric LDL' refactorization and the triangular solve on random
quasi-definite KKT-like matrices of growing size, then times a full solve on
each committed benchmark problem with both backends. Run as

    python benchmarks/bench_backends.py
"""

import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from proxip import Settings, SparseMatrixCsc, ldl_solve, numeric_factorize, symbolic_factorize
from proxip import _ldlkern_py
import proxip.ldl as ldl_mod

try:
    from proxip import _ldlkern

    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False


def random_quasi_definite(rng, n1, n2, density):
    B1 = rng.standard_normal((n1, n1)) * (rng.random((n1, n1)) < density)
    B2 = rng.standard_normal((n2, n2)) * (rng.random((n2, n2)) < density)
    C = rng.standard_normal((n2, n1)) * (rng.random((n2, n1)) < density)
    K = np.zeros((n1 + n2, n1 + n2))
    K[:n1, :n1] = B1 @ B1.T + np.eye(n1)
    K[n1:, n1:] = -(B2 @ B2.T + np.eye(n2))
    K[n1:, :n1] = C
    K[:n1, n1:] = C.T
    return K


def time_kernel(backend, mat, sym, signs, rhs, repeats):
    saved = ldl_mod._kern
    ldl_mod._kern = backend
    try:
        fact = numeric_factorize(mat, sym, signs)
        t0 = time.perf_counter()
        for _ in range(repeats):
            numeric_factorize(mat, sym, signs, out=fact)
        t_factor = (time.perf_counter() - t0) / repeats
        out = np.empty(rhs.size)
        work = np.empty(rhs.size)
        t0 = time.perf_counter()
        for _ in range(repeats):
            ldl_solve(fact, rhs, out=out, work=work)
        t_solve = (time.perf_counter() - t0) / repeats
    finally:
        ldl_mod._kern = saved
    return t_factor, t_solve


def kernel_table():
    rng = np.random.default_rng(0)
    print(f"{'dim':>6} {'nnz(L)':>8} {'factor py':>12} {'solve py':>12}", end="")
    if HAVE_COMPILED:
        print(f" {'factor ext':>12} {'solve ext':>12} {'speedup':>8}")
    else:
        print()
    for n in (50, 100, 200, 400):
        n1 = n // 2
        K = random_quasi_definite(rng, n1, n - n1, density=0.05)
        mat = SparseMatrixCsc.from_dense(np.triu(K), keep_upper=True)
        sym = symbolic_factorize(mat, np.random.default_rng(1).permutation(n))
        signs = np.concatenate([np.ones(n1), -np.ones(n - n1)])
        rhs = rng.standard_normal(n)
        repeats = max(3, 2000 // n)
        tf_py, ts_py = time_kernel(_ldlkern_py, mat, sym, signs, rhs, repeats)
        row = f"{n:>6} {sym.l_nnz:>8} {tf_py * 1e3:>10.3f}ms {ts_py * 1e3:>10.3f}ms"
        if HAVE_COMPILED:
            tf_c, ts_c = time_kernel(_ldlkern, mat, sym, signs, rhs, repeats)
            row += f" {tf_c * 1e3:>10.3f}ms {ts_c * 1e3:>10.3f}ms {tf_py / tf_c:>7.1f}x"
        print(row)


def solver_table():
    from proxip import load_qps
    from proxip.solver import SolverInstance

    fixture_dir = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "qps"
    if not fixture_dir.is_dir():
        return
    print()
    print(f"{'problem':>10} {'iters':>6} {'python':>12}", end="")
    if HAVE_COMPILED:
        print(f" {'compiled':>12} {'speedup':>8}")
    else:
        print()
    for path in sorted(fixture_dir.iterdir()):
        prob = load_qps(path)
        times = {}
        iters = 0
        for name, backend in (("python", _ldlkern_py),) + (
            (("compiled", _ldlkern),) if HAVE_COMPILED else ()
        ):
            saved = ldl_mod._kern
            ldl_mod._kern = backend
            try:
                t0 = time.perf_counter()
                inst = SolverInstance(prob, Settings())
                res = inst.solve()
                times[name] = time.perf_counter() - t0
                iters = res.iterations
            finally:
                ldl_mod._kern = saved
        row = f"{path.stem:>10} {iters:>6} {times['python'] * 1e3:>10.2f}ms"
        if HAVE_COMPILED:
            row += (
                f" {times['compiled'] * 1e3:>10.2f}ms"
                f" {times['python'] / times['compiled']:>7.1f}x"
            )
        print(row)


if __name__ == "__main__":
    print(f"compiled kernels available: {HAVE_COMPILED}")
    kernel_table()
    solver_table()
