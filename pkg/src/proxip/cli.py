"""Command line interface: solve single files, benchmark corpora, build profiles.

Exit code is 0 only if every requested problem reached Solved status.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (
    BenchmarkRecord,
    format_failure_rate,
    performance_profile,
    profile_to_csv,
    records_from_json,
    records_to_json,
    run_corpus,
    sort_by_solver_time,
    time_table_to_csv,
)
from .model import Settings, Status
from .qps import load_qps
from .solver import SolverInstance

LOW_ACCURACY = (1e-3, 1e-4)


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--eps-abs", type=float, default=None, help="absolute tolerance")
    p.add_argument("--eps-rel", type=float, default=None, help="relative tolerance")
    p.add_argument("--max-iter", type=int, default=None, help="iteration limit")
    p.add_argument("--time-limit", type=float, default=None, help="per-problem wall clock limit [s]")
    p.add_argument("--no-ruiz", action="store_true", help="disable data equilibration")
    p.add_argument(
        "--low-accuracy",
        action="store_true",
        help=f"use eps_abs={LOW_ACCURACY[0]:g}, eps_rel={LOW_ACCURACY[1]:g}",
    )
    p.add_argument("--json", type=Path, default=None, metavar="PATH", help="write JSON results")
    p.add_argument("--csv", type=Path, default=None, metavar="PATH", help="write CSV results")


def settings_from_args(args, default_time_limit=None) -> Settings:
    kw = {}
    if args.low_accuracy:
        kw["eps_abs"], kw["eps_rel"] = LOW_ACCURACY
    if args.eps_abs is not None:
        kw["eps_abs"] = args.eps_abs
    if args.eps_rel is not None:
        kw["eps_rel"] = args.eps_rel
    if args.max_iter is not None:
        kw["max_iter"] = args.max_iter
    kw["time_limit"] = args.time_limit if args.time_limit is not None else default_time_limit
    if args.no_ruiz:
        kw["ruiz_iters"] = 0
    return Settings(**kw)


def _cmd_solve(args) -> int:
    settings = settings_from_args(args)
    problem = load_qps(args.file)
    inst = SolverInstance(problem, settings)
    result = inst.solve()
    payload = {
        "problem": Path(args.file).stem,
        "status": result.status.value,
        "iterations": result.iterations,
        "setup_time": result.setup_time,
        "solve_time": result.solve_time,
        "primal_res": result.primal_res,
        "dual_res": result.dual_res,
        "duality_gap": result.duality_gap,
        "objective": result.objective,
        "x": result.x.tolist(),
        "y": result.y.tolist(),
        "z": result.z.tolist(),
        "s": result.s.tolist(),
    }
    if args.json:
        args.json.write_text(json.dumps(payload, indent=2))
    if args.csv:
        record = BenchmarkRecord(
            problem=payload["problem"],
            status=result.status.value,
            solve_time=result.solve_time,
            setup_time=result.setup_time,
            iterations=result.iterations,
            primal_res=result.primal_res,
            dual_res=result.dual_res,
            gap=result.duality_gap,
        )
        args.csv.write_text(time_table_to_csv(sort_by_solver_time([record])))
    print(
        f"{payload['problem']}: {result.status.value} in {result.iterations} iterations, "
        f"objective {result.objective:.10g}, "
        f"residuals p={result.primal_res:.3e} d={result.dual_res:.3e} "
        f"gap={result.duality_gap:.3e}, "
        f"time {result.setup_time + result.solve_time:.4f}s"
    )
    return 0 if result.status is Status.SOLVED else 1


def _cmd_bench(args) -> int:
    settings = settings_from_args(args, default_time_limit=1000.0)
    records = run_corpus(args.directory, settings, jobs=args.jobs)
    for rec in records:
        extra = f"  ({rec.note})" if rec.note else ""
        print(
            f"{rec.problem:<12} {rec.status:<15} iters={rec.iterations:<4} "
            f"time={rec.total_time:.4f}s p={rec.primal_res:.2e} "
            f"d={rec.dual_res:.2e} gap={rec.gap:.2e}{extra}"
        )
    if records:
        print(f"failure rate: {format_failure_rate(records)} ({len(records)} problems)")
    else:
        print("no .qps files found")
    if args.json:
        args.json.write_text(records_to_json(records, solver=args.solver_name))
    if args.csv:
        args.csv.write_text(time_table_to_csv(sort_by_solver_time(records)))
    return 0 if all(r.solved for r in records) else 1


def _cmd_profile(args) -> int:
    results = {}
    for path in args.results:
        solver, records = records_from_json(Path(path).read_text())
        name = solver if solver not in results else Path(path).stem
        results[name] = {
            r.problem: (r.total_time if r.solved else None) for r in records
        }
    thetas, curves = performance_profile(results)
    csv_text = profile_to_csv(thetas, curves)
    if args.csv:
        args.csv.write_text(csv_text)
    else:
        sys.stdout.write(csv_text)
    for name, curve in curves.items():
        print(f"# {name}: fastest on {100.0 * curve[0]:.1f}% of problems, "
              f"solved within 10x on {100.0 * curve[np.searchsorted(thetas, 10.0)]:.1f}%",
              file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="proxip", description="Sparse convex quadratic programming solver"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one QPS file")
    p_solve.add_argument("file", type=Path)
    _add_solver_flags(p_solve)
    p_solve.set_defaults(func=_cmd_solve)

    p_bench = sub.add_parser("bench", help="solve every QPS file in a directory")
    p_bench.add_argument("directory", type=Path)
    p_bench.add_argument("--jobs", type=int, default=1, help="parallel worker slots")
    p_bench.add_argument("--solver-name", default="proxip", help="label stored in JSON output")
    _add_solver_flags(p_bench)
    p_bench.set_defaults(func=_cmd_bench)

    p_prof = sub.add_parser("profile", help="performance profile from bench JSON files")
    p_prof.add_argument("results", nargs="+", type=Path)
    p_prof.add_argument("--csv", type=Path, default=None, metavar="PATH")
    p_prof.set_defaults(func=_cmd_profile)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
