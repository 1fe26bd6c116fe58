"""Error metrics, M-sweeps, and table emission.

Two metrics mirror how the benchmarks are scored: the max absolute error
against a closed-form solution on a uniform grid, and the max residual of
the canonical-form operator applied to the computed solution (used when no
closed form exists).  Wall time is recorded for reference but never part of
any assertion; it is hardware noise.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .basis import BasisConfig
from .problems import BenchmarkProblem
from .solver import ProblemSpec, SolverConfig, SolverError, WaveletSolution, solve

DEFAULT_GRID_SIZE = 1001

CSV_COLUMNS = ("problem", "k", "M", "max_abs_error", "max_residual",
               "iterations", "wall_time_ms", "condition_estimate", "grid_size")


@dataclass
class ErrorReport:
    """One sweep row.  ``max_abs_error`` is None when no closed form exists;
    ``error`` carries a solver failure message and never reaches the CSV."""

    problem: str
    k: int
    M: int
    max_abs_error: float | None
    max_residual: float | None
    iterations: int
    wall_time_ms: float
    condition_estimate: float
    grid_size: int
    error: str | None = None


def max_abs_error(sol: WaveletSolution, exact: Callable[[float], float],
                  grid_size: int = DEFAULT_GRID_SIZE) -> float:
    """Sup-norm gap to the exact solution on a uniform grid with endpoints."""
    ts = np.linspace(0.0, 1.0, grid_size)
    exact_vals = np.array([exact(t) for t in ts])
    return float(np.abs(sol.evaluate_many(ts) - exact_vals).max())


def max_residual(sol: WaveletSolution, spec: ProblemSpec,
                 grid_size: int = DEFAULT_GRID_SIZE) -> float:
    """Sup-norm of the canonical-form operator applied to the solution.

    The grid is uniform with endpoints, except t = 0 is dropped whenever a
    linear coefficient is singular there (the operator is undefined at the
    origin for those problems).
    """
    ts = np.linspace(0.0, 1.0, grid_size)
    if spec.has_singular_coefficient():
        ts = ts[1:]
    values = sol.evaluate_many(ts)
    top = sol.evaluate_many(ts, deriv=spec.order)
    lower = [sol.evaluate_many(ts, deriv=p) for p in range(spec.order)]
    worst = 0.0
    for i, t in enumerate(ts):
        r = top[i]
        for p, c in enumerate(spec.linear_coeffs):
            r += c(t) * lower[p][i]
        r += spec.g(t, values[i]) - spec.forcing(t)
        worst = max(worst, abs(r))
    return worst


def run_report(problem: BenchmarkProblem, k: int, m: int, *,
               tol: float = 1e-12, max_iter: int = 20,
               grid_size: int = DEFAULT_GRID_SIZE
               ) -> tuple[ErrorReport, WaveletSolution | None]:
    """Solve one configuration and score it."""
    config = SolverConfig(basis=BasisConfig(k, m), tol=tol, max_iter=max_iter,
                          initial_guess=problem.default_guess)
    start = time.perf_counter()
    try:
        sol = solve(problem.spec, problem.bcs, config)
    except SolverError as exc:
        elapsed = (time.perf_counter() - start) * 1e3
        report = ErrorReport(problem=problem.label, k=k, M=m,
                             max_abs_error=None, max_residual=None,
                             iterations=0, wall_time_ms=elapsed,
                             condition_estimate=math.inf, grid_size=grid_size,
                             error=str(exc))
        return report, None
    elapsed = (time.perf_counter() - start) * 1e3
    abs_err = (max_abs_error(sol, problem.exact, grid_size)
               if problem.exact is not None else None)
    res_err = max_residual(sol, problem.spec, grid_size)
    report = ErrorReport(problem=problem.label, k=k, M=m,
                         max_abs_error=abs_err, max_residual=res_err,
                         iterations=sol.iterations, wall_time_ms=elapsed,
                         condition_estimate=sol.condition_estimate,
                         grid_size=grid_size)
    return report, sol


def sweep(problem: BenchmarkProblem, k: int, m_values: Sequence[int], *,
          tol: float = 1e-12, max_iter: int = 20,
          grid_size: int = DEFAULT_GRID_SIZE) -> list[ErrorReport]:
    """One report per M, in the given order; failures are captured per row
    and the sweep keeps going."""
    if not m_values:
        raise ValueError("m_values must be nonempty")
    return [run_report(problem, k, m, tol=tol, max_iter=max_iter,
                       grid_size=grid_size)[0] for m in m_values]


def _fmt(value: float | None) -> str:
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return "" if value is None else ("inf" if value > 0 else "-inf")
    return f"{value:.5E}"


def _row_fields(r: ErrorReport, include_wall_time: bool) -> list[str]:
    return [r.problem, str(r.k), str(r.M), _fmt(r.max_abs_error),
            _fmt(r.max_residual), str(r.iterations),
            _fmt(r.wall_time_ms) if include_wall_time else "",
            _fmt(r.condition_estimate), str(r.grid_size)]


def emit(reports: Sequence[ErrorReport], format: str = "csv", *,
         include_wall_time: bool = True) -> str:
    """Render reports as CSV or a Markdown pipe table.

    Floats use 6 significant digits in scientific notation; unavailable
    fields are left empty.  ``include_wall_time=False`` blanks the timing
    column so repeated runs emit byte-identical bodies.
    """
    if format == "csv":
        lines = [",".join(CSV_COLUMNS)]
        for r in reports:
            lines.append(",".join(_row_fields(r, include_wall_time)))
        return "\n".join(lines) + "\n"
    if format == "markdown":
        lines = ["| " + " | ".join(CSV_COLUMNS) + " |",
                 "|" + "|".join([" --- "] * len(CSV_COLUMNS)) + "|"]
        for r in reports:
            lines.append("| " + " | ".join(_row_fields(r, include_wall_time)) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {format!r}; use 'csv' or 'markdown'")


def parse_csv(text: str) -> list[ErrorReport]:
    """Inverse of csv emission (numeric fields at their printed precision)."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if lines[0] != ",".join(CSV_COLUMNS):
        raise ValueError("unexpected CSV header")
    out = []
    for ln in lines[1:]:
        parts = ln.split(",")
        out.append(ErrorReport(
            problem=parts[0], k=int(parts[1]), M=int(parts[2]),
            max_abs_error=float(parts[3]) if parts[3] else None,
            max_residual=float(parts[4]) if parts[4] else None,
            iterations=int(parts[5]),
            wall_time_ms=float(parts[6]) if parts[6] else 0.0,
            condition_estimate=float(parts[7]) if parts[7] else math.inf,
            grid_size=int(parts[8])))
    return out
