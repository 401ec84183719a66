"""Corpus runner, failure statistics, and performance profiles.

Benchmarks use only the solver's internally measured setup and solve times.
Residuals in each record are recomputed from the returned iterate against the
original problem data, never copied out of the solver loop.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .model import Settings, Status
from .qps import load_qps
from .solver import SolverInstance, check_termination

__all__ = [
    "BenchmarkRecord",
    "run_corpus",
    "failure_rate",
    "performance_profile",
    "profile_to_csv",
    "sort_by_solver_time",
    "records_to_json",
    "records_from_json",
]

FAILED_TIME_SENTINEL = float("inf")


@dataclass
class BenchmarkRecord:
    problem: str
    status: str
    solve_time: float
    setup_time: float
    iterations: int
    primal_res: float
    dual_res: float
    gap: float
    note: str = ""

    @property
    def solved(self) -> bool:
        return self.status == Status.SOLVED.value

    @property
    def total_time(self) -> float:
        return self.setup_time + self.solve_time


def solve_file(path, settings: Settings) -> BenchmarkRecord:
    """Solve one QPS file and report recomputed residuals."""
    name = Path(path).stem
    try:
        problem = load_qps(path)
        inst = SolverInstance(problem, settings)
        result = inst.solve()
        verified = check_termination(problem.expand_boxes(), result.iterate, settings)
        return BenchmarkRecord(
            problem=name,
            status=result.status.value,
            solve_time=result.solve_time,
            setup_time=result.setup_time,
            iterations=result.iterations,
            primal_res=verified.primal_res,
            dual_res=verified.dual_res,
            gap=verified.duality_gap,
        )
    except Exception as exc:  # corrupt file, structural error, ...
        return BenchmarkRecord(
            problem=name,
            status=Status.NUMERICAL_ERROR.value,
            solve_time=0.0,
            setup_time=0.0,
            iterations=0,
            primal_res=float("inf"),
            dual_res=float("inf"),
            gap=float("inf"),
            note=f"{type(exc).__name__}: {exc}",
        )


def run_corpus(directory, settings: Settings, jobs: int = 1) -> list[BenchmarkRecord]:
    """Solve every .qps/.QPS file in a directory, in lexicographic name order.

    Each problem is solved independently under the per-problem time limit in
    ``settings``; unreadable files produce a NumericalError record with a note
    and the run continues. Results keep the deterministic input order even
    when solved in parallel worker slots.
    """
    paths = sorted(
        (p for p in Path(directory).iterdir() if p.suffix.lower() == ".qps"),
        key=lambda p: p.name,
    )
    if jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_solve_file_task, [(str(p), settings) for p in paths]))
    return [solve_file(p, settings) for p in paths]


def _solve_file_task(args) -> BenchmarkRecord:
    return solve_file(args[0], args[1])


def failure_rate(records: list[BenchmarkRecord]) -> float:
    """Percentage of records whose status is not Solved (two-decimal display)."""
    if not records:
        raise ValueError("failure rate of an empty record list is undefined")
    failed = sum(1 for r in records if not r.solved)
    return 100.0 * failed / len(records)


def format_failure_rate(records: list[BenchmarkRecord]) -> str:
    return f"{failure_rate(records):.2f} %"


def performance_profile(
    results: dict[str, dict[str, float | None]],
    thetas: np.ndarray | None = None,
) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Cumulative distributions of per-problem time ratios to the fastest solver.

    ``results`` maps solver name to {problem: time}, with None marking a
    failure (its ratio is treated as infinite). Every solver must cover the
    same problem set. Returns the evaluation grid and one curve per solver:
    curve[i] = fraction of problems whose ratio is <= thetas[i].
    """
    if not results:
        raise ValueError("need at least one solver")
    solvers = list(results)
    problems = sorted(results[solvers[0]])
    for s in solvers[1:]:
        if sorted(results[s]) != problems:
            raise ValueError("solvers must share an identical problem list")
    if not problems:
        raise ValueError("empty problem list")
    if thetas is None:
        thetas = np.logspace(0.0, 4.0, 401)
    thetas = np.asarray(thetas, dtype=np.float64)

    ratios = {s: np.empty(len(problems)) for s in solvers}
    for j, prob in enumerate(problems):
        times = [results[s][prob] for s in solvers]
        finite = [t for t in times if t is not None]
        t_min = min(finite) if finite else None
        for s, t in zip(solvers, times):
            if t is None or t_min is None:
                ratios[s][j] = np.inf
            elif t_min == 0.0:
                ratios[s][j] = 1.0 if t == 0.0 else np.inf
            else:
                ratios[s][j] = t / t_min

    curves = {
        s: (ratios[s][None, :] <= thetas[:, None]).mean(axis=1) for s in solvers
    }
    return thetas, curves


def profile_to_csv(thetas: np.ndarray, curves: dict[str, np.ndarray]) -> str:
    """CSV rendering: header row, theta column first, one column per solver."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    names = list(curves)
    writer.writerow(["theta"] + names)
    for i, theta in enumerate(thetas):
        writer.writerow([repr(float(theta))] + [repr(float(curves[s][i])) for s in names])
    return buf.getvalue()


def sort_by_solver_time(records: list[BenchmarkRecord]) -> list[tuple[str, float]]:
    """Per-problem (name, time) table ascending by time.

    Ties order lexicographically by name; failed problems go last with an
    infinite sentinel time, themselves in name order.
    """
    solved = sorted(
        ((r.problem, r.solve_time) for r in records if r.solved),
        key=lambda t: (t[1], t[0]),
    )
    failed = sorted((r.problem, FAILED_TIME_SENTINEL) for r in records if not r.solved)
    return solved + failed


def time_table_to_csv(table: list[tuple[str, float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["problem", "solve_time"])
    for name, t in table:
        writer.writerow([name, repr(float(t))])
    return buf.getvalue()


def records_to_json(records: list[BenchmarkRecord], solver: str = "proxip") -> str:
    """Strict JSON (non-finite floats become null so any parser can read it)."""
    def clean(rec: dict) -> dict:
        return {
            k: (None if isinstance(v, float) and not np.isfinite(v) else v)
            for k, v in rec.items()
        }

    return json.dumps(
        {"solver": solver, "records": [clean(asdict(r)) for r in records]},
        indent=2,
        allow_nan=False,
    )


def records_from_json(text: str) -> tuple[str, list[BenchmarkRecord]]:
    data = json.loads(text)
    records = []
    for raw in data["records"]:
        rec = {k: (float("inf") if v is None else v) for k, v in raw.items()}
        records.append(BenchmarkRecord(**rec))
    return data["solver"], records
