"""Regenerate the frontend parity fixtures by running the solver core.

Each fixture stores the problem data, the settings, and the exact results of
the core's setup/solve (and optionally update/solve) so the TypeScript tests
can assert bit-for-bit equality: JSON float serialization round-trips IEEE
doubles exactly in both directions.

Usage: python3 tools/gen_fixtures.py    (from the frontend/ directory)
"""

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "src"))

from proxip import QpProblem, Settings, SolverInstance, SparseMatrixCsc, load_qps

OUT = Path(__file__).resolve().parents[1] / "fixtures"
QPS_DIR = Path(__file__).resolve().parents[2] / "tests" / "fixtures" / "qps"


def csc_json(mat: SparseMatrixCsc) -> dict:
    return {
        "nrows": int(mat.nrows),
        "ncols": int(mat.ncols),
        "colPtr": mat.col_ptr.tolist(),
        "rowIdx": mat.row_idx.tolist(),
        "values": mat.values.tolist(),
    }


def bound_json(v):
    if v is None:
        return None
    return [None if not np.isfinite(x) else float(x) for x in v]


def problem_json(prob: QpProblem) -> dict:
    return {
        "P": csc_json(prob.P),
        "c": prob.c.tolist(),
        "A": csc_json(prob.A),
        "b": prob.b.tolist(),
        "G": csc_json(prob.G),
        "h": prob.h.tolist(),
        "l": bound_json(prob.l),
        "u": bound_json(prob.u),
    }


def result_json(res) -> dict:
    return {
        "status": res.status.value,
        "iterations": res.iterations,
        "x": res.x.tolist(),
        "y": res.y.tolist(),
        "z": res.z.tolist(),
        "s": res.s.tolist(),
        "primal_res": res.primal_res,
        "dual_res": res.dual_res,
        "duality_gap": res.duality_gap,
        "objective": res.objective,
    }


def synthetic_problems():
    dense = SparseMatrixCsc.from_dense
    yield (
        "scalar-unconstrained",
        QpProblem(P=dense([[1.0]], keep_upper=True), c=np.zeros(1)),
        {},
        None,
    )
    yield (
        "equality-qp",
        QpProblem(
            P=dense(np.eye(2), keep_upper=True),
            c=np.zeros(2),
            A=dense([[1.0, 1.0]]),
            b=np.array([1.0]),
        ),
        {},
        {"c": [0.25, -0.5]},
    )
    yield (
        "active-inequality",
        QpProblem(
            P=dense([[1.0]], keep_upper=True),
            c=np.zeros(1),
            G=dense([[-1.0]]),
            h=np.array([-1.0]),
        ),
        {},
        None,
    )
    yield (
        "boxed",
        QpProblem(
            P=dense(np.diag([1.0, 2.0]), keep_upper=True),
            c=np.array([2.0, -4.0]),
            l=np.array([1.0, -np.inf]),
            u=np.array([5.0, 1.5]),
        ),
        {},
        {"u": [4.0, 0.5]},
    )
    rng = np.random.default_rng(12345)
    n, p, m = 8, 2, 4
    B = rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.5)
    Pd = B @ B.T + np.eye(n)
    A = rng.standard_normal((p, n))
    G = rng.standard_normal((m, n))
    xbar = rng.standard_normal(n)
    yield (
        "random-dense-8",
        QpProblem(
            P=dense(Pd, keep_upper=True),
            c=rng.standard_normal(n),
            A=dense(A),
            b=A @ xbar,
            G=dense(G),
            h=G @ xbar + rng.random(m) + 0.1,
        ),
        {"epsAbs": 1e-6, "epsRel": 1e-7},
        {"c": rng.standard_normal(n).tolist()},
    )


def settings_from(opts: dict) -> Settings:
    kw = {}
    if opts.get("lowAccuracy"):
        kw["eps_abs"], kw["eps_rel"] = 1e-3, 1e-4
    if "epsAbs" in opts:
        kw["eps_abs"] = opts["epsAbs"]
    if "epsRel" in opts:
        kw["eps_rel"] = opts["epsRel"]
    if "maxIter" in opts:
        kw["max_iter"] = opts["maxIter"]
    if opts.get("noRuiz"):
        kw["ruiz_iters"] = 0
    return Settings(**kw)


def main():
    OUT.mkdir(exist_ok=True)
    synthetic = []
    for name, prob, opts, update in synthetic_problems():
        inst = SolverInstance(prob, settings_from(opts))
        first = result_json(inst.solve())
        entry = {
            "name": name,
            "problem": problem_json(prob),
            "settings": opts,
            "expected": first,
        }
        if update is not None:
            inst.update(**{k: np.asarray(v, dtype=float) for k, v in update.items()})
            entry["update"] = update
            entry["expectedAfterUpdate"] = result_json(inst.solve())
        synthetic.append(entry)

    qps = []
    for path in sorted(QPS_DIR.iterdir()):
        prob = load_qps(path)
        opts = {"lowAccuracy": True}
        res = SolverInstance(prob, settings_from(opts)).solve()
        qps.append(
            {
                "file": str(path.relative_to(QPS_DIR.parents[2])),
                "settings": opts,
                "expected": result_json(res),
            }
        )

    payload = {"synthetic": synthetic, "qps": qps}
    (OUT / "parity.json").write_text(json.dumps(payload, indent=2))
    print(f"wrote {OUT / 'parity.json'}: {len(synthetic)} synthetic, {len(qps)} qps")


if __name__ == "__main__":
    main()
