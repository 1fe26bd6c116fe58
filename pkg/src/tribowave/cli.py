"""Command-line interface: approximate functions, solve the built-in
problems, run M-sweeps, and regenerate the benchmark tables.

Output discipline: everything nondeterministic (timings, timestamps) lives
on comment lines starting with '#'; the CSV bodies of two identical
invocations are byte-identical.  Files are written atomically (temp file
plus rename).  TRIBOWAVE_THREADS caps bench parallelism; 0 (the default)
means serial.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .approx import Expansion, approx_max_error, project
from .basis import BasisConfig, build_basis
from .problems import (DEFAULT_PERTURBATION_EPS, BUILTIN_NAMES, BenchmarkProblem,
                       UnknownProblemError, builtin)
from .report import (DEFAULT_GRID_SIZE, ErrorReport, emit, max_abs_error,
                     max_residual, run_report)
from .solver import SolverError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3
EXIT_SOLVER_ERROR = 4

APPROX_FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sinc": lambda t: math.sin(t) / t if t != 0.0 else 1.0,
    "tlogt": lambda t: t * math.log(t) if t > 0.0 else 0.0,
}


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tribowave-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _deliver(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        _write_atomic(out, text)


def _fmt(x: float) -> str:
    return f"{x:.9E}"


def _parse_m_list(raw: str) -> list[int]:
    try:
        values = [int(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad M list {raw!r}; expected e.g. 2,4,6")
    if not values:
        raise argparse.ArgumentTypeError("M list is empty")
    return values


def _thread_count() -> int:
    raw = os.environ.get("TRIBOWAVE_THREADS", "0")
    try:
        return max(0, int(raw))
    except ValueError:
        return 0


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_list(args) -> int:
    problems = [builtin(name) for name in BUILTIN_NAMES]
    if args.json:
        payload = [{"name": p.name, "description": p.description,
                    "order": p.spec.order, "exact_solution": p.exact is not None,
                    "table_M": list(p.table_m_values)} for p in problems]
        print(json.dumps(payload, indent=2))
    else:
        for p in problems:
            print(f"{p.name}: {p.description}")
    return EXIT_OK


def cmd_approx(args) -> int:
    g = APPROX_FUNCTIONS[args.function]
    basis = build_basis(BasisConfig(args.k, args.M))
    expansion = project(g, basis, quad_order=args.quad_order)
    grid = np.linspace(0.0, 1.0, args.grid)
    approx_vals = expansion.evaluate_many(grid)

    lines = [f"# function = {args.function}",
             f"# k = {args.k}",
             f"# M = {args.M}",
             f"# gram_condition = {expansion.gram_condition:.6E}",
             "# coefficients = " + ",".join(_fmt(c) for c in expansion.coeffs),
             "t,g,approx,abs_error"]
    for t, a in zip(grid, approx_vals):
        gv = g(float(t))
        err = abs(gv - a) if math.isfinite(gv) else float("nan")
        lines.append(f"{_fmt(t)},{_fmt(gv)},{_fmt(a)},{_fmt(err)}")
    _deliver("\n".join(lines) + "\n", args.out)
    if args.out is not None:
        print("# coefficients = " + ",".join(_fmt(c) for c in expansion.coeffs))
        print(f"# max_abs_error = {approx_max_error(expansion, g, args.grid):.6E}")
        print(f"# wrote {args.out}")
    return EXIT_OK


def _load_problem(args) -> BenchmarkProblem:
    if args.problem != "perturbation" and getattr(args, "eps", None) is not None:
        raise UnknownProblemError("--eps only applies to the perturbation problem")
    eps = getattr(args, "eps", None)
    return builtin(args.problem, eps=eps if eps is not None else 1.0 / 32.0)


def _report_comments(report: ErrorReport) -> list[str]:
    abs_err = "" if report.max_abs_error is None else f"{report.max_abs_error:.6E}"
    res_err = "" if report.max_residual is None else f"{report.max_residual:.6E}"
    return [f"# problem = {report.problem}",
            f"# k = {report.k}",
            f"# M = {report.M}",
            f"# max_abs_error = {abs_err}",
            f"# max_residual = {res_err}",
            f"# iterations = {report.iterations}",
            f"# wall_time_ms = {report.wall_time_ms:.3f}",
            f"# condition_estimate = {report.condition_estimate:.6E}",
            f"# grid_size = {report.grid_size}"]


def cmd_solve(args) -> int:
    problem = _load_problem(args)
    try:
        report, sol = run_report(problem, args.k, args.M, tol=args.tol,
                                 max_iter=args.max_iter, grid_size=args.grid)
    except (SolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER_ERROR
    if sol is None:
        print(f"error: {report.error}", file=sys.stderr)
        return EXIT_SOLVER_ERROR

    grid = np.linspace(0.0, 1.0, args.grid)
    values = sol.evaluate_many(grid)
    header = "t,approx,exact,abs_error" if problem.exact else "t,approx"
    lines = _report_comments(report) + [header]
    for t, v in zip(grid, values):
        if problem.exact:
            ev = problem.exact(float(t))
            lines.append(f"{_fmt(t)},{_fmt(v)},{_fmt(ev)},{_fmt(abs(ev - v))}")
        else:
            lines.append(f"{_fmt(t)},{_fmt(v)}")
    _deliver("\n".join(lines) + "\n", args.out)
    if args.out is not None:
        for comment in _report_comments(report):
            print(comment)
        print(f"# wrote {args.out}")
    if not sol.converged:
        print(f"warning: not converged after {sol.iterations} iterations "
              f"(last change {sol.history[-1]:.3e})", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _sweep_rows(problem: BenchmarkProblem, k: int, m_values: Sequence[int],
                grid_size: int, workers: int) -> list[ErrorReport]:
    def one(m: int) -> ErrorReport:
        return run_report(problem, k, m, grid_size=grid_size)[0]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, m_values))
    return [one(m) for m in m_values]


def _sweep_text(reports: Sequence[ErrorReport]) -> str:
    # timings go in the comment header so the body stays byte-identical
    comments = ["# generated = " + time.strftime("%Y-%m-%dT%H:%M:%S"),
                "# wall_time_ms = " + " ".join(
                    f"M{r.M}:{r.wall_time_ms:.1f}" for r in reports)]
    return "\n".join(comments) + "\n" + emit(reports, "csv", include_wall_time=False)


def cmd_sweep(args) -> int:
    problem = _load_problem(args)
    reports = _sweep_rows(problem, args.k, args.m_list, args.grid,
                          max(1, _thread_count()))
    _deliver(_sweep_text(reports), args.out)
    if args.out is not None:
        print(f"# wrote {args.out}")
    return EXIT_OK


def _bench_problem(name: str, grid_size: int, workers: int
                   ) -> tuple[list[ErrorReport], list[dict]]:
    """Sweep one benchmark and evaluate its acceptance rows."""
    rows: list[ErrorReport] = []
    checks: list[dict] = []
    variants = ([builtin(name, eps=e) for e in DEFAULT_PERTURBATION_EPS]
                if name == "perturbation" else [builtin(name)])
    for problem in variants:
        reports = _sweep_rows(problem, 1, problem.table_m_values, grid_size, workers)
        rows.extend(reports)
        by_m = {r.M: r for r in reports}
        for target in problem.acceptance:
            report = by_m[target.M]
            value = (report.max_abs_error if target.metric == "abs"
                     else report.max_residual)
            ok = value is not None and value <= target.bound
            checks.append({"problem": problem.label, "k": 1, "M": target.M,
                           "metric": target.metric, "value": value,
                           "threshold": target.bound,
                           "status": "PASS" if ok else "FAIL"})
    return rows, checks


def cmd_bench(args) -> int:
    names = [args.only] if args.only else list(BUILTIN_NAMES)
    for name in names:
        if name not in BUILTIN_NAMES:
            print(f"error: unknown problem {name!r}", file=sys.stderr)
            return EXIT_USAGE
    os.makedirs(args.out_dir, exist_ok=True)
    workers = _thread_count()
    all_checks: list[dict] = []
    for name in names:
        rows, checks = _bench_problem(name, args.grid, max(1, workers))
        _write_atomic(os.path.join(args.out_dir, f"{name}.csv"), _sweep_text(rows))
        all_checks.extend(checks)

    lines = ["problem,k,M,metric,value,threshold,status"]
    for c in all_checks:
        value = "" if c["value"] is None else f"{c['value']:.5E}"
        lines.append(f"{c['problem']},{c['k']},{c['M']},{c['metric']},"
                     f"{value},{c['threshold']:.5E},{c['status']}")
    summary = "\n".join(lines) + "\n"
    _write_atomic(os.path.join(args.out_dir, "summary.csv"), summary)
    sys.stdout.write(summary)
    failed = [c for c in all_checks if c["status"] != "PASS"]
    print(f"# {len(all_checks) - len(failed)}/{len(all_checks)} acceptance rows pass")
    return EXIT_OK if not failed else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tribowave",
        description="Tribonacci wavelet collocation: function approximation "
                    "and singular boundary value problem benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="list the built-in problems")
    p_list.add_argument("--json", action="store_true", help="machine-readable output")
    p_list.set_defaults(func=cmd_list)

    p_approx = sub.add_parser("approx", help="project a built-in function onto the basis")
    p_approx.add_argument("function", choices=sorted(APPROX_FUNCTIONS))
    p_approx.add_argument("--k", type=int, default=1)
    p_approx.add_argument("--M", type=int, default=5)
    p_approx.add_argument("--grid", type=int, default=DEFAULT_GRID_SIZE)
    p_approx.add_argument("--quad-order", type=int, default=32)
    p_approx.add_argument("--out", default=None)
    p_approx.set_defaults(func=cmd_approx)

    p_solve = sub.add_parser("solve", help="solve one built-in problem")
    p_solve.add_argument("problem", choices=BUILTIN_NAMES)
    p_solve.add_argument("--k", type=int, default=1)
    p_solve.add_argument("--M", type=int, default=8)
    p_solve.add_argument("--tol", type=float, default=1e-12)
    p_solve.add_argument("--max-iter", type=int, default=20)
    p_solve.add_argument("--eps", type=float, default=None,
                         help="perturbation parameter (perturbation problem only)")
    p_solve.add_argument("--grid", type=int, default=DEFAULT_GRID_SIZE)
    p_solve.add_argument("--out", default=None)
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="solve one problem over several M values")
    p_sweep.add_argument("problem", choices=BUILTIN_NAMES)
    p_sweep.add_argument("--k", type=int, default=1)
    p_sweep.add_argument("--M-list", dest="m_list", type=_parse_m_list,
                         default=[4, 6, 8], help="comma-separated M values")
    p_sweep.add_argument("--eps", type=float, default=None)
    p_sweep.add_argument("--grid", type=int, default=DEFAULT_GRID_SIZE)
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_bench = sub.add_parser("bench", help="regenerate the benchmark tables")
    p_bench.add_argument("--out-dir", default="bench-out")
    p_bench.add_argument("--only", default=None, help="run a single problem")
    p_bench.add_argument("--grid", type=int, default=DEFAULT_GRID_SIZE)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnknownProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER_ERROR


if __name__ == "__main__":
    sys.exit(main())
