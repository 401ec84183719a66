"""Acceptance suite: one test per release criterion, each printing a verdict.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
PASS lines. Expected values come from independent oracles (dense LAPACK
solves, brute-force active-set enumeration, direct norm recomputation),
never from the code paths under test.
"""

import gc
import tracemalloc
from dataclasses import replace

import numpy as np

from oracles import kkt_full_matrix
from proxip import (
    Settings,
    SolverInstance,
    SparseMatrixCsc,
    Status,
    centering_parameter,
    check_termination,
    corrector_rhs,
    ldl_solve,
    numeric_factorize,
    solve_qp,
    step_size,
    symbolic_factorize,
)
from proxip.bench import BenchmarkRecord, failure_rate, performance_profile, run_corpus
from proxip.scaling import _stacked_row_norms, ruiz_equilibrate
from conftest import (
    FIXTURE_DIR,
    make_badly_scaled_qp,
    make_random_qp,
    random_quasi_definite,
)

HIGH = dict(eps_abs=1e-8, eps_rel=1e-9)


def _report(name: str, ok: bool, detail: str = ""):
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}{'  (' + detail + ')' if detail else ''}")
    assert ok, f"{name} failed: {detail}"


def _suite_problems(duplicate_eq=False, rank_deficient=False):
    """The 200-problem random convex QP suite (seeded, deterministic)."""
    rng = np.random.default_rng(20240817)
    conds = [1.0, 1e2, 1e4, 1e6]
    problems = []
    for i in range(200):
        n = int(rng.integers(5, 101))
        p = int(rng.integers(1, min(31, max(2, n))))
        m = int(rng.integers(1, 61))
        problems.append(
            make_random_qp(
                rng,
                n,
                p,
                m,
                cond=conds[i % 4],
                rank_frac=0.8 if rank_deficient else 1.0,
                duplicate_eq=duplicate_eq,
            )
        )
    return problems


def test_random_suite_all_solved_and_certified():
    st = Settings(**HIGH)
    failures = []
    for i, prob in enumerate(_suite_problems()):
        res = solve_qp(prob, st)
        info = check_termination(prob, res.iterate, st)
        if res.status is not Status.SOLVED or not info.converged:
            failures.append((i, res.status.value, info))
    _report(
        "random-suite-200",
        not failures,
        f"{200 - len(failures)}/200 solved at eps_abs=1e-8, eps_rel=1e-9",
    )


def test_degeneracy_robustness():
    st = Settings(**HIGH)
    failures = []
    for i, prob in enumerate(_suite_problems(duplicate_eq=True, rank_deficient=True)):
        res = solve_qp(prob, st)
        info = check_termination(prob, res.iterate, st)
        if res.status is not Status.SOLVED or not info.converged:
            failures.append((i, res.status.value))
    _report(
        "degenerate-suite-200",
        not failures,
        "duplicated equality rows + rank-deficient quadratics all solved",
    )


def test_factorization_against_dense_oracle():
    rng = np.random.default_rng(99)
    worst_recon = 0.0
    worst_solve = 0.0
    for _ in range(100):
        n1 = int(rng.integers(1, 76))
        n2 = int(rng.integers(1, 76))
        K = random_quasi_definite(rng, n1, n2, density=0.2)
        n = n1 + n2
        mat = SparseMatrixCsc.from_dense(np.triu(K), keep_upper=True)
        sym = symbolic_factorize(mat, rng.permutation(n))
        fact = numeric_factorize(
            mat, sym, np.concatenate([np.ones(n1), -np.ones(n2)])
        )
        L = fact.l_dense()
        recon = L @ np.diag(fact.d) @ L.T
        target = K[np.ix_(sym.perm, sym.perm)]
        worst_recon = max(
            worst_recon, np.max(np.abs(recon - target)) / np.max(np.abs(K))
        )
        rhs = rng.standard_normal(n)
        x = ldl_solve(fact, rhs)
        oracle = np.linalg.solve(K, rhs)
        worst_solve = max(
            worst_solve,
            np.linalg.norm(x - oracle) / max(np.linalg.norm(oracle), 1e-30),
        )
    ok = worst_recon <= 1e-10 and worst_solve <= 1e-9
    _report(
        "factorization-oracle-100",
        ok,
        f"worst reconstruction {worst_recon:.2e}, worst solve {worst_solve:.2e}",
    )


def test_equilibration_window_and_scaling_invariance():
    rng = np.random.default_rng(424242)
    worst = 0.0
    max_passes = 0
    lo, hi = np.inf, 0.0
    for _ in range(50):
        n = int(rng.integers(5, 31))
        p = int(rng.integers(1, 8))
        m = int(rng.integers(1, 12))
        prob = make_badly_scaled_qp(rng, n, p, m)
        vals = np.abs(
            np.concatenate([prob.P.values, prob.A.values, prob.G.values])
        )
        vals = vals[vals > 0]
        lo, hi = min(lo, vals.min()), max(hi, vals.max())
        scaled, eq = ruiz_equilibrate(prob, max_iters=10, tol=1e-3)
        norms = _stacked_row_norms(prob, eq.d_x, eq.d_y, eq.d_z)
        nz = norms > 0
        worst = max(worst, np.max(np.abs(norms[nz] - 1.0)))
        max_passes = max(max_passes, eq.passes)
    window_ok = worst <= 0.01 and max_passes <= 10
    assert lo >= 1e-6 and hi <= 1e6  # corpus honors the stated entry range

    # an ill-conditioned fixture must solve with and without equilibration
    st_on = Settings(**HIGH)
    st_off = Settings(ruiz_iters=0, **HIGH)
    fixture = make_random_qp(np.random.default_rng(5), 20, 4, 10, cond=1e6)
    res_on = solve_qp(fixture, st_on)
    res_off = solve_qp(fixture, st_off)
    both = (
        res_on.status is Status.SOLVED
        and res_off.status is Status.SOLVED
        and check_termination(fixture, res_on.iterate, st_on).converged
        and check_termination(fixture, res_off.iterate, st_off).converged
    )
    _report(
        "equilibration",
        window_ok and both,
        f"worst row-norm deviation {worst:.4f} in <= {max_passes} passes; "
        "ill-conditioned fixture solved with and without scaling",
    )


def test_benchmark_subset_failure_rate_zero():
    st = Settings(eps_abs=1e-3, eps_rel=1e-4, time_limit=1000.0)
    records = run_corpus(FIXTURE_DIR, st)
    assert len(records) >= 10
    rate = failure_rate(records)
    for r in records:
        assert r.solved, r
    _report(
        "benchmark-subset",
        rate == 0.0,
        f"{len(records)} committed problems, failure rate {rate:.2f} % at low accuracy",
    )


def test_harness_arithmetic():
    def rec(problem, status="Solved"):
        return BenchmarkRecord(problem, status, 1.0, 0.0, 1, 0.0, 0.0, 0.0)

    r1 = [rec(f"p{i}") for i in range(137)] + [rec("f", "IterationLimit")]
    ok_072 = f"{failure_rate(r1):.2f}" == "0.72"
    r6 = [rec(f"p{i}") for i in range(132)] + [rec(f"f{i}", "TimeLimit") for i in range(6)]
    ok_435 = f"{failure_rate(r6):.2f}" == "4.35"

    thetas, curves = performance_profile({"s": {"p1": 1.0, "p2": 3.0}})
    single_ok = bool(np.all(curves["s"] == 1.0))  # lone solver is fastest everywhere
    t2, c2 = performance_profile(
        {"fast": {"p": 1.0}, "slow": {"p": 2.0}}, thetas=np.array([1.0, 2.0])
    )
    pair_ok = (
        c2["fast"].tolist() == [1.0, 1.0] and c2["slow"].tolist() == [0.0, 1.0]
    )
    _, c3 = performance_profile(
        {"s": {"p1": 1.0, "p2": None, "p3": 2.0, "p4": None}}
    )
    failures_ok = bool(np.all(c3["s"] <= 0.5))
    monotone_ok = bool(np.all(np.diff(c3["s"]) >= 0.0))
    ok = ok_072 and ok_435 and single_ok and pair_ok and failures_ok and monotone_ok
    _report(
        "harness-arithmetic",
        ok,
        "1/138 -> 0.72 %, 6/138 -> 4.35 %, profile examples and monotonicity",
    )


def test_lifecycle_contract():
    rng = np.random.default_rng(77)
    prob = make_random_qp(rng, 30, 6, 15)
    st = Settings(**HIGH)

    inst = SolverInstance(prob, st)
    inst.solve()
    new_c = prob.c * 1.5 + 0.1
    new_pvals = prob.P.values * 1.25
    inst.update(P=new_pvals, c=new_c)
    r_upd = inst.solve()

    prob2 = replace(
        prob, P=SparseMatrixCsc(prob.P.nrows, prob.P.ncols, prob.P.col_ptr,
                                prob.P.row_idx, new_pvals), c=new_c
    )
    r_fresh = solve_qp(prob2, st)
    vec_ok = (
        np.max(np.abs(r_upd.x - r_fresh.x)) <= 1e-12
        and np.max(np.abs(r_upd.y - r_fresh.y)) <= 1e-12
        and np.max(np.abs(r_upd.z - r_fresh.z)) <= 1e-12
        and np.max(np.abs(r_upd.s - r_fresh.s)) <= 1e-12
        and r_upd.iterations == r_fresh.iterations
    )

    # allocation instrumentation: repeated update/solve cycles retain no heap
    inst2 = SolverInstance(prob, st)
    inst2.solve()  # warm up lazy caches
    buffers = (
        inst2.kkt.matrix.values,
        inst2.kkt.factorization.l_values,
        inst2.kkt.factorization.d,
        inst2._rhs,
        inst2._sol,
        inst2.scaled.P.values,
    )
    ids_before = [id(b) for b in buffers]
    gc.collect()
    tracemalloc.start()
    snap1 = tracemalloc.take_snapshot()
    for _ in range(3):
        inst2.update(c=new_c)
        inst2.solve()
    gc.collect()
    snap2 = tracemalloc.take_snapshot()
    tracemalloc.stop()
    retained = sum(s.size_diff for s in snap2.compare_to(snap1, "filename"))
    ids_ok = [id(b) for b in buffers] == ids_before
    alloc_ok = retained <= 64 * 1024  # tracemalloc bookkeeping noise allowance
    _report(
        "lifecycle",
        vec_ok and ids_ok and alloc_ok,
        f"update==fresh to 1e-12; retained heap growth {retained} B across 3 update/solve cycles",
    )


def test_algorithmic_unit_properties():
    # formula-forced examples
    ok = step_size(np.array([1.0, 2.0]), np.array([-1.0, -4.0]), 0.995) == 0.4975
    ok &= step_size(np.array([1.0]), np.array([-0.1]), 0.995) == 1.0
    ok &= step_size(np.ones(2), np.zeros(2), 0.995) == 1.0
    sigma, mu, eta = centering_parameter(
        np.array([1.0]), np.array([1.0]), np.array([-0.5]), np.array([-0.5]), 1.0, 1.0
    )
    ok &= sigma == 0.015625 and mu == 1.0 and eta == 0.25
    sigma0, _, eta0 = centering_parameter(
        np.array([1.0]), np.array([1.0]), np.array([-1.0]), np.array([-1.0]), 1.0, 1.0
    )
    ok &= sigma0 == 0.0 and eta0 == 0.0
    rs = corrector_rhs(
        np.array([1.0]), np.array([1.0]), np.array([-1.0]), np.array([-1.0]), 0.1, 1.0
    )
    ok &= rs.tolist() == [-1.9]

    # iterate invariants and Newton consistency across a sample of the suite
    rng = np.random.default_rng(31337)
    st = Settings(ruiz_iters=0, **HIGH)
    worst_newton = 0.0
    positivity_ok = True
    ftb_ok = True
    for _ in range(15):
        n = int(rng.integers(5, 41))
        p = int(rng.integers(1, 8))
        m = int(rng.integers(1, 21))
        prob = make_random_qp(rng, n, p, m)
        inst = SolverInstance(prob, st)
        sc = inst.scaled
        Pd = sc.P.to_dense_symmetric()
        A = sc.A.to_dense()
        G = sc.G.to_dense()
        tau = st.tau
        checks = []

        def trace(step, start, cand, prox):
            checks.append((step, start, cand))

        res = inst.solve(trace=trace)
        assert res.status is Status.SOLVED
        for step, start, cand in checks:
            positivity_ok &= bool(np.all(cand.s > 0) and np.all(cand.z > 0))
            ftb_ok &= bool(
                np.all(cand.s >= (1 - tau) * start.s * (1 - 1e-12))
                and np.all(cand.z >= (1 - tau) * start.z * (1 - 1e-12))
            )
            if step.factor_retries == 0:
                J = kkt_full_matrix(
                    Pd, A, G, start.s, start.z, step.delta_factored, step.rho_factored
                )
                r_x = -(Pd @ start.x + sc.c + A.T @ start.y + G.T @ start.z)
                r_y = sc.b - A @ start.x
                r_z = sc.h - G @ start.x - start.s
                ds_dz_affine = (
                    -start.s * start.z
                    + step.sigma * step.mu
                    - (start.s * step.dz + start.z * step.ds)
                )
                r_s = -start.s * start.z - ds_dz_affine + step.sigma * step.mu
                direction = np.concatenate([step.dx, step.dy, step.dz, step.ds])
                r = np.concatenate([r_x, r_y, r_z, r_s])
                # normwise backward error of the operators the step applies:
                # the full system and the slack-elimination scaling S/Z, whose
                # norm dominates the factorized matrix late in a run
                W = start.s / start.z
                op_norm = np.linalg.norm(J, np.inf)
                if W.size:
                    op_norm = max(op_norm, float(np.max(W)) + step.delta_factored)
                denom = op_norm * np.max(np.abs(direction)) + np.max(np.abs(r)) + 1e-300
                resid = np.max(np.abs(J @ direction - r)) / denom
                worst_newton = max(worst_newton, resid)
    ok = bool(ok) and positivity_ok and ftb_ok and worst_newton <= 1e-8
    _report(
        "unit-properties",
        ok,
        f"formula examples exact; worst Newton residual {worst_newton:.2e}; "
        "positivity and fraction-to-boundary held on every iteration",
    )
