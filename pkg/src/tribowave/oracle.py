"""Independent reference solver for the benchmark problems.

Nothing here touches the wavelet machinery: the ODE is discretized by
finite differences on a mesh graded toward the origin (where the singular
coefficients live), the nonlinear system is solved by damped Newton, and two
nested meshes are combined by Richardson extrapolation.  Equations with
coefficients like 1/t or 1/t^2 are multiplied through by t to that power, so
every row stays bounded as the mesh flows into the origin.

Pointwise truncation on the smoothly graded mesh has a clean 1/N^2 expansion,
which Richardson promotes to roughly 1/N^4; with N >= 4096 intervals that is
far below the tolerances the oracle is trusted for.  Where a closed form
exists, the tests validate the oracle against it before it is used as ground
truth for anything else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import spsolve

from .problems import BenchmarkProblem
from .solver import DirichletBoth, NeumannRobin, ThirdOrderIVP, ThirdOrderMixed

DEFAULT_INTERVALS = 4096
GRADING_EXPONENT = 2.0
NEWTON_MAX_ITER = 40
NEWTON_TOL = 1e-12


class OracleError(RuntimeError):
    """Newton failed to converge; comparisons must be skipped, never passed."""


@dataclass
class OracleSolution:
    """Tabulated reference solution with a spline evaluator."""

    ts: np.ndarray
    values: np.ndarray
    newton_iterations: int
    intervals: int

    def __post_init__(self):
        self._spline = CubicSpline(self.ts, self.values)

    def evaluate(self, t):
        return self._spline(t)

    __call__ = evaluate


def graded_mesh(intervals: int, exponent: float = GRADING_EXPONENT) -> np.ndarray:
    """Mesh t_i = (i/N)^exponent, clustered at the origin."""
    xi = np.arange(intervals + 1) / intervals
    return xi ** exponent


def stencil_weights(ts: np.ndarray, center: int, window: slice, deriv: int) -> np.ndarray:
    """Finite-difference weights for one derivative at ts[center] from the
    nodes in ``window`` (exact for polynomials of degree < window size)."""
    pts = ts[window] - ts[center]
    p = len(pts)
    if deriv >= p:
        raise ValueError(f"need more than {p} points for derivative {deriv}")
    vander = np.vander(pts, p, increasing=True).T
    rhs = np.zeros(p)
    rhs[deriv] = math.factorial(deriv)
    return np.linalg.solve(vander, rhs)


def _interior_windows(ts: np.ndarray, width: int) -> np.ndarray:
    """Start index of the stencil window for every node (clipped at the ends)."""
    n = len(ts)
    centers = np.arange(n)
    starts = np.clip(centers - (width - 1) // 2, 0, n - width)
    return starts


def _batched_weights(ts: np.ndarray, nodes: np.ndarray, starts: np.ndarray,
                     width: int, derivs: tuple[int, ...]) -> dict[int, np.ndarray]:
    """Stencil weights for many nodes at once (stacked Vandermonde solves)."""
    offsets = np.arange(width)
    cols = starts[nodes, None] + offsets[None, :]
    local = ts[cols] - ts[nodes, None]
    vander = local[:, None, :] ** np.arange(width)[None, :, None]
    out = {}
    for d in derivs:
        rhs = np.zeros((len(nodes), width))
        rhs[:, d] = math.factorial(d)
        out[d] = np.linalg.solve(vander, rhs[:, :, None])[:, :, 0]
    return out


def _boundary_condition_rows(problem: BenchmarkProblem, ts: np.ndarray):
    """(row, cols, weights, rhs) tuples for each boundary condition."""
    n = len(ts) - 1
    bcs = problem.bcs
    rows = []
    if isinstance(bcs, DirichletBoth):
        rows.append((0, np.array([0]), np.array([1.0]), bcs.left))
        rows.append((n, np.array([n]), np.array([1.0]), bcs.right))
    elif isinstance(bcs, NeumannRobin):
        w = stencil_weights(ts, 0, slice(0, 3), 1)
        rows.append((0, np.arange(3), w, bcs.slope_at_zero))
        cols = np.arange(n - 2, n + 1)
        w1 = stencil_weights(ts, n, slice(n - 2, n + 1), 1)
        weights = bcs.robin_b * w1
        weights[-1] += bcs.robin_a
        rows.append((n, cols, weights, bcs.robin_rhs))
    elif isinstance(bcs, ThirdOrderIVP):
        rows.append((0, np.array([0]), np.array([1.0]), bcs.value))
        rows.append((1, np.arange(4), stencil_weights(ts, 0, slice(0, 4), 1), bcs.slope))
        rows.append((2, np.arange(5), stencil_weights(ts, 0, slice(0, 5), 2), bcs.curvature))
    elif isinstance(bcs, ThirdOrderMixed):
        rows.append((0, np.array([0]), np.array([1.0]), bcs.value_at_zero))
        rows.append((1, np.arange(4), stencil_weights(ts, 0, slice(0, 4), 1), bcs.slope_at_zero))
        rows.append((n, np.array([n]), np.array([1.0]), bcs.value_at_one))
    else:
        raise OracleError(f"unsupported boundary conditions {bcs!r}")
    return rows


def _assemble_linear(problem: BenchmarkProblem, ts: np.ndarray):
    """Constant part of the discrete system.

    Returns (linear_matrix, rhs, ode_rows, ode_nodes, row_scale) where the
    residual is linear_matrix @ u - rhs + scaled nonlinear term.
    """
    spec = problem.spec
    order = spec.order
    n = len(ts) - 1
    size = n + 1
    q = problem.singular_power

    if order == 2:
        nodes = np.arange(1, n)
        row_of = nodes
        width = 3
    else:
        nodes = np.arange(2, n)
        row_of = nodes + 1 if isinstance(problem.bcs, ThirdOrderIVP) else nodes
        width = 5

    starts = _interior_windows(ts, width)
    weights = _batched_weights(ts, nodes, starts, width, tuple(range(1, order + 1)))
    tvals = ts[nodes]
    scale = tvals ** q

    data, rows, cols = [], [], []
    offsets = np.arange(width)
    colmat = starts[nodes, None] + offsets[None, :]

    block = scale[:, None] * weights[order]
    for p in range(1, order):
        cp = np.array([spec.linear_coeffs[p](t) for t in tvals])
        block = block + (scale * cp)[:, None] * weights[p]
    rows.append(np.repeat(row_of, width))
    cols.append(colmat.ravel())
    data.append(block.ravel())

    c0 = np.array([spec.linear_coeffs[0](t) for t in tvals])
    rows.append(row_of)
    cols.append(nodes)
    data.append(scale * c0)

    rhs = np.zeros(size)
    rhs[row_of] = scale * np.array([spec.forcing(t) for t in tvals])

    for row, bc_cols, bc_weights, bc_rhs in _boundary_condition_rows(problem, ts):
        rows.append(np.full(len(bc_cols), row))
        cols.append(bc_cols)
        data.append(bc_weights)
        rhs[row] = bc_rhs

    matrix = sparse.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size))

    # equilibrate: stencil weights near the origin reach 1/h^2 ~ N^4, which
    # wrecks the sparse solve; scaling each equation to unit max magnitude
    # leaves the solution unchanged and keeps the Newton steps accurate
    rownorm = np.maximum.reduceat(np.abs(matrix.data), matrix.indptr[:-1])
    matrix = sparse.diags(1.0 / rownorm) @ matrix
    rhs = rhs / rownorm
    scale = scale / rownorm[row_of]
    return matrix, rhs, row_of, nodes, scale


def _newton(problem: BenchmarkProblem, ts: np.ndarray) -> tuple[np.ndarray, int]:
    spec = problem.spec
    matrix, rhs, ode_rows, ode_nodes, scale = _assemble_linear(problem, ts)
    tvals = ts[ode_nodes]
    g = spec.g
    g_s = spec.partial_s()

    def residual(u: np.ndarray) -> np.ndarray:
        r = matrix @ u - rhs
        gv = np.array([g(t, s) for t, s in zip(tvals, u[ode_nodes])])
        r[ode_rows] += scale * gv
        return r

    u = np.full(len(ts), float(problem.default_guess))
    r = residual(u)
    rnorm = float(np.abs(r).max())
    size = len(ts)
    for iteration in range(1, NEWTON_MAX_ITER + 1):
        gsv = np.array([g_s(t, s) for t, s in zip(tvals, u[ode_nodes])])
        jac = matrix + sparse.csr_matrix(
            (scale * gsv, (ode_rows, ode_nodes)), shape=(size, size))
        step = spsolve(jac.tocsc(), -r)
        if float(np.abs(step).max()) <= NEWTON_TOL * (1.0 + float(np.abs(u).max())):
            return u + step, iteration
        lam = 1.0
        while True:
            trial = u + lam * step
            r_trial = residual(trial)
            t_norm = float(np.abs(r_trial).max()) if np.isfinite(r_trial).all() else math.inf
            if t_norm <= (1.0 - 0.25 * lam) * rnorm:
                break
            lam *= 0.5
            if lam < 2 ** -30:
                # no descent left: with equilibrated rows this only happens
                # once the residual sits at the roundoff floor
                if rnorm <= 1e-10:
                    return u, iteration
                raise OracleError(
                    f"damped Newton stalled at iteration {iteration} "
                    f"(residual {rnorm:.3e})")
        u, r, rnorm = trial, r_trial, t_norm
    if rnorm <= 1e-10:
        return u, NEWTON_MAX_ITER
    raise OracleError(f"damped Newton did not converge in {NEWTON_MAX_ITER} "
                      f"iterations (residual {rnorm:.3e})")


def solve_reference(problem: BenchmarkProblem,
                    intervals: int = DEFAULT_INTERVALS) -> OracleSolution:
    """Graded-mesh FD solve at N and 2N intervals, Richardson-extrapolated.

    The two meshes nest exactly, so the extrapolation is pointwise on the
    coarse mesh and lifts the second-order scheme to roughly fourth order.
    """
    if intervals < 4096:
        raise ValueError(f"oracle needs >= 4096 intervals, got {intervals}")
    coarse_ts = graded_mesh(intervals)
    fine_ts = graded_mesh(2 * intervals)
    coarse, it_coarse = _newton(problem, coarse_ts)
    fine, it_fine = _newton(problem, fine_ts)
    extrapolated = (4.0 * fine[::2] - coarse) / 3.0
    return OracleSolution(ts=coarse_ts, values=extrapolated,
                          newton_iterations=max(it_coarse, it_fine),
                          intervals=intervals)
