"""Quasilinearized wavelet collocation for singular boundary value problems.

The highest derivative of the unknown is expanded in the wavelet basis, the
expansion is integrated analytically (picking up integration constants), the
constants are eliminated through the boundary conditions so everything stays
affine in the coefficient vector, and the linearized equation is enforced at
interior collocation points.  The nonlinear term is handled by
quasilinearization: Newton's method in function space, replacing g(t, s) by
its first-order expansion around the previous iterate.

Problems are normalized to the canonical form

    s^(order)(t) + sum_p c_p(t) s^(p)(t) + g(t, s(t)) = f(t)

with the singular linear part in the c_p and everything nonlinear in g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from . import linalg
from .basis import BasisConfig, Wavelet, build_basis


class SolverError(RuntimeError):
    """Assembly or linear solve failed during an iteration."""


class NonFiniteTermError(SolverError):
    """A problem function returned a non-finite value at a collocation point."""

    def __init__(self, kind: str, point: float, value: float, iterate: int | None = None):
        where = f" (iterate {iterate})" if iterate is not None else ""
        super().__init__(f"non-finite {kind} value {value!r} at t={point!r}{where}")
        self.kind = kind
        self.point = point
        self.iterate = iterate


class UnsupportedBoundaryCondition(ValueError):
    pass


# ---------------------------------------------------------------------------
# problem description
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearCoefficient:
    """Coefficient function c_p(t) of s^(p) in the linear part.

    ``singular_at_zero`` marks coefficients like 2/t that cannot be evaluated
    at the origin; residual grids then start strictly inside the interval.
    """

    fn: Callable[[float], float]
    singular_at_zero: bool = False

    def __call__(self, t: float) -> float:
        return self.fn(t)


def _fd_partial(g: Callable[[float, float], float]) -> Callable[[float, float], float]:
    """Central finite-difference fallback for the s-derivative of g."""

    def g_s(t: float, s: float) -> float:
        h = 1e-6 * (1.0 + abs(s))
        return (g(t, s + h) - g(t, s - h)) / (2.0 * h)

    return g_s


@dataclass(frozen=True)
class ProblemSpec:
    """Canonical-form problem: order, linear part, nonlinear term, forcing."""

    order: int
    linear_coeffs: tuple[LinearCoefficient, ...]
    g: Callable[[float, float], float]
    g_s: Callable[[float, float], float] | None = None
    forcing: Callable[[float], float] = staticmethod(lambda t: 0.0)

    def __post_init__(self):
        if self.order not in (2, 3):
            raise ValueError(f"order must be 2 or 3, got {self.order}")
        if len(self.linear_coeffs) != self.order:
            raise ValueError(
                f"need one linear coefficient per derivative below the top: "
                f"expected {self.order}, got {len(self.linear_coeffs)}")

    def partial_s(self) -> Callable[[float, float], float]:
        """Analytic s-derivative of g when supplied, else a central difference."""
        return self.g_s if self.g_s is not None else _fd_partial(self.g)

    def has_singular_coefficient(self) -> bool:
        return any(c.singular_at_zero for c in self.linear_coeffs)


# ---------------------------------------------------------------------------
# boundary conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DirichletBoth:
    """s(0) = left, s(1) = right."""

    left: float
    right: float
    order = 2


@dataclass(frozen=True)
class NeumannRobin:
    """s'(0) = slope_at_zero and robin_a*s(1) + robin_b*s'(1) = robin_rhs."""

    slope_at_zero: float
    robin_a: float
    robin_b: float
    robin_rhs: float
    order = 2

    def __post_init__(self):
        if not self.robin_a > 0:
            raise UnsupportedBoundaryCondition(
                f"robin_a must be positive, got {self.robin_a}")
        if self.robin_b < 0:
            raise UnsupportedBoundaryCondition(
                f"robin_b must be nonnegative, got {self.robin_b}")


@dataclass(frozen=True)
class ThirdOrderIVP:
    """s(0), s'(0), s''(0) all prescribed."""

    value: float
    slope: float
    curvature: float
    order = 3


@dataclass(frozen=True)
class ThirdOrderMixed:
    """s(0), s'(0) at the left and s(1) at the right."""

    value_at_zero: float
    slope_at_zero: float
    value_at_one: float
    order = 3


BoundaryConditions = Union[DirichletBoth, NeumannRobin, ThirdOrderIVP, ThirdOrderMixed]


@dataclass(frozen=True)
class SolverConfig:
    basis: BasisConfig
    tol: float = 1e-12
    max_iter: int = 20
    #: Constant c means the starting iterate is the constant function c.
    initial_guess: float | Callable[[float], float] = 0.0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")

    def guess_fn(self) -> Callable[[float], float]:
        if callable(self.initial_guess):
            return self.initial_guess
        c = float(self.initial_guess)
        return lambda t: c


# ---------------------------------------------------------------------------
# affine solution shape
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineForm:
    """value(t; rho) = base(t) + sum_j weights[j](t) * rho[j], affine in rho."""

    base: Callable[[float], float]
    weights: tuple[Callable[[float], float], ...]

    def value(self, t: float, rho: np.ndarray) -> float:
        return self.base(t) + sum(w(t) * r for w, r in zip(self.weights, rho))


def _factorials(order: int) -> list[float]:
    return [float(math.factorial(i)) for i in range(order + 1)]


class SolutionShape:
    """Affine forms for s, s', ..., s^(order) with the integration constants
    eliminated through the boundary conditions.

    Writing s(t) = sum_i C_i t^i / i! + sum_j rho_j P^order W_j(t), each
    constant resolves to an affine function of rho using the end values
    P^p W_j(1); every derivative level is then itself affine in rho.
    """

    def __init__(self, basis: Sequence[Wavelet], bcs: BoundaryConditions):
        self.basis = tuple(basis)
        self.bcs = bcs
        self.order = bcs.order
        size = len(self.basis)
        # p-fold integrals of every member at t = 1, p = 1..order
        end = {p: np.array([w.integral(p, 1.0) for w in self.basis])
               for p in range(1, self.order + 1)}
        cbase = np.zeros(self.order)
        cweights = np.zeros((self.order, size))
        if isinstance(bcs, DirichletBoth):
            cbase[0] = bcs.left
            cbase[1] = bcs.right - bcs.left
            cweights[1] = -end[2]
        elif isinstance(bcs, NeumannRobin):
            a, b = bcs.robin_a, bcs.robin_b
            cbase[1] = bcs.slope_at_zero
            cbase[0] = (bcs.robin_rhs - (a + b) * bcs.slope_at_zero) / a
            cweights[0] = -(b * end[1] + a * end[2]) / a
        elif isinstance(bcs, ThirdOrderIVP):
            cbase[:] = (bcs.value, bcs.slope, bcs.curvature)
        elif isinstance(bcs, ThirdOrderMixed):
            cbase[0] = bcs.value_at_zero
            cbase[1] = bcs.slope_at_zero
            cbase[2] = 2.0 * (bcs.value_at_one - bcs.value_at_zero - bcs.slope_at_zero)
            cweights[2] = -2.0 * end[3]
        else:
            raise UnsupportedBoundaryCondition(f"unknown boundary conditions {bcs!r}")
        self.constant_base = cbase
        self.constant_weights = cweights
        self._fact = _factorials(self.order)

    def constants(self, rho: np.ndarray) -> np.ndarray:
        """Resolved integration constants C_0..C_(order-1) for a coefficient vector."""
        return self.constant_base + self.constant_weights @ np.asarray(rho, dtype=float)

    def base_values(self, deriv: int, ts: np.ndarray) -> np.ndarray:
        """Coefficient-free part of s^(deriv) on a grid."""
        ts = np.asarray(ts, dtype=float)
        out = np.zeros_like(ts)
        for i in range(deriv, self.order):
            out += self.constant_base[i] * ts ** (i - deriv) / self._fact[i - deriv]
        return out

    def weight_matrix(self, deriv: int, ts: np.ndarray) -> np.ndarray:
        """Matrix whose (l, j) entry is the rho_j weight of s^(deriv)(ts[l])."""
        ts = np.asarray(ts, dtype=float)
        p = self.order - deriv
        if p == 0:
            cols = [w.evaluate_many(ts) for w in self.basis]
        else:
            cols = [w.integral_many(p, ts) for w in self.basis]
        out = np.column_stack(cols)
        for i in range(deriv, self.order):
            out += np.outer(ts ** (i - deriv) / self._fact[i - deriv],
                            self.constant_weights[i])
        return out

    def affine_form(self, deriv: int) -> AffineForm:
        """Per-derivative affine form with scalar callables (slow path)."""
        self._check_deriv(deriv)

        def base(t: float) -> float:
            return float(self.base_values(deriv, np.array([t]))[0])

        def weight(j: int) -> Callable[[float], float]:
            def w(t: float) -> float:
                return float(self.weight_matrix(deriv, np.array([t]))[0, j])
            return w

        return AffineForm(base, tuple(weight(j) for j in range(len(self.basis))))

    def evaluate_many(self, rho: np.ndarray, ts: np.ndarray, deriv: int = 0) -> np.ndarray:
        self._check_deriv(deriv)
        return self.base_values(deriv, ts) + self.weight_matrix(deriv, ts) @ rho

    def evaluate(self, rho: np.ndarray, t: float, deriv: int = 0) -> float:
        return float(self.evaluate_many(rho, np.array([float(t)]), deriv)[0])

    def _check_deriv(self, deriv: int) -> None:
        if not (0 <= deriv <= self.order):
            raise ValueError(f"derivative order {deriv} outside 0..{self.order}")


def shape_solution(basis: Sequence[Wavelet], bcs: BoundaryConditions) -> SolutionShape:
    """Eliminate the integration constants against the boundary conditions."""
    return SolutionShape(basis, bcs)


# ---------------------------------------------------------------------------
# collocation
# ---------------------------------------------------------------------------

def collocation_points(config: BasisConfig) -> np.ndarray:
    """t_l = (2l - 1) / (2^k M): one point per unknown, strictly inside (0, 1)."""
    size = config.basis_size
    return (2.0 * np.arange(1, size + 1) - 1.0) / (2.0 * size)


@dataclass
class LinearizedODE:
    """One quasilinearization step: a linear ODE in the next iterate.

    s^(order) + sum_p c_p(t) s^(p) + zero_order(t) * s = rhs(t), where the
    zero-order coefficient and right-hand side close over the previous
    iterate.
    """

    order: int
    linear_coeffs: tuple[LinearCoefficient, ...]
    zero_order: Callable[[float], float]
    rhs: Callable[[float], float]


def quasilinearize(spec: ProblemSpec, previous: Callable[[float], float],
                   iterate: int | None = None) -> LinearizedODE:
    """First-order expansion of g around the previous iterate.

    g(t, s) is replaced by g(t, s_r) + g_s(t, s_r)(s - s_r); the known parts
    move to the right-hand side.
    """
    g = spec.g
    g_s = spec.partial_s()
    f = spec.forcing

    def checked(kind: str, value: float, t: float) -> float:
        if not math.isfinite(value):
            raise NonFiniteTermError(kind, t, value, iterate)
        return value

    def zero_order(t: float) -> float:
        return checked("g_s", float(g_s(t, previous(t))), t)

    def rhs(t: float) -> float:
        s_prev = previous(t)
        gv = checked("g", float(g(t, s_prev)), t)
        gsv = checked("g_s", float(g_s(t, s_prev)), t)
        return float(f(t)) - gv + gsv * s_prev

    return LinearizedODE(spec.order, spec.linear_coeffs, zero_order, rhs)


def _coefficient_rows(linearized: LinearizedODE, points: np.ndarray
                      ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Evaluate all coefficient functions at the collocation points.

    Returns (cvals[p, l], qvals[l], rhsvals[l]); evaluation failures are
    re-raised with the offending row index attached.
    """
    npts = len(points)
    cvals = np.zeros((linearized.order, npts))
    qvals = np.zeros(npts)
    rhsvals = np.zeros(npts)
    for l, t in enumerate(points):
        try:
            for p, c in enumerate(linearized.linear_coeffs):
                cvals[p, l] = c(t)
            qvals[l] = linearized.zero_order(t)
            rhsvals[l] = linearized.rhs(t)
        except NonFiniteTermError:
            raise
        except Exception as exc:
            raise SolverError(f"coefficient evaluation failed at row {l} "
                              f"(t={t!r}): {exc}") from exc
    if not np.isfinite(cvals).all():
        bad = int(np.argwhere(~np.isfinite(cvals))[0][1])
        raise NonFiniteTermError("linear coefficient", float(points[bad]),
                                 float(cvals[:, bad][~np.isfinite(cvals[:, bad])][0]))
    return cvals, qvals, rhsvals


def assemble_system(linearized: LinearizedODE, basis: Sequence[Wavelet],
                    points: np.ndarray, shape: SolutionShape
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Collocation matrix and right-hand side for one linearized solve.

    Row l enforces the linearized equation at t_l; column j carries the
    rho_j weight through every derivative's affine form.
    """
    if len(points) != len(basis):
        raise ValueError(f"{len(points)} collocation points for {len(basis)} unknowns")
    weight = {d: shape.weight_matrix(d, points) for d in range(shape.order + 1)}
    base = {d: shape.base_values(d, points) for d in range(shape.order)}
    return _assemble_from_parts(linearized, points, weight, base)


def _assemble_from_parts(linearized, points, weight, base):
    cvals, qvals, rhsvals = _coefficient_rows(linearized, points)
    a = weight[linearized.order].copy()
    b = rhsvals.copy()
    for p in range(linearized.order):
        a += cvals[p][:, None] * weight[p]
        b -= cvals[p] * base[p]
    a += qvals[:, None] * weight[0]
    b -= qvals * base[0]
    return a, b


# ---------------------------------------------------------------------------
# the full iteration
# ---------------------------------------------------------------------------

@dataclass
class WaveletSolution:
    """Converged (or best-effort) collocation solution.

    ``history`` holds the sup-norm change of the iterate at the collocation
    points, one entry per iteration; ``constants`` the resolved integration
    constants after each iteration.
    """

    shape: SolutionShape
    rho: np.ndarray
    converged: bool
    iterations: int
    history: list[float]
    constants: list[np.ndarray]
    condition_estimate: float
    collocation_pts: np.ndarray = field(repr=False, default=None)

    @property
    def order(self) -> int:
        return self.shape.order

    @property
    def config(self) -> BasisConfig:
        return self.shape.basis[0].config

    def evaluate(self, t: float, deriv: int = 0) -> float:
        return self.shape.evaluate(self.rho, t, deriv)

    def evaluate_many(self, ts: np.ndarray, deriv: int = 0) -> np.ndarray:
        return self.shape.evaluate_many(self.rho, ts, deriv)

    __call__ = evaluate


def solve(spec: ProblemSpec, bcs: BoundaryConditions, config: SolverConfig) -> WaveletSolution:
    """Run the quasilinearization loop until the iterate stops moving.

    Each pass linearizes g around the current iterate, assembles the
    collocation system, solves it, and rebuilds the iterate; it stops when
    the sup-norm change at the collocation points drops to ``config.tol`` or
    the iteration budget runs out (the best iterate is still returned, with
    ``converged`` False).
    """
    if spec.order != bcs.order:
        raise ValueError(f"problem order {spec.order} does not match "
                         f"boundary-condition arity {bcs.order}")
    basis = build_basis(config.basis)
    points = collocation_points(config.basis)
    shape = shape_solution(basis, bcs)
    # the affine forms at the collocation points never change across iterations
    weight = {d: shape.weight_matrix(d, points) for d in range(shape.order + 1)}
    base = {d: shape.base_values(d, points) for d in range(shape.order)}

    guess = config.guess_fn()
    current_vals = np.array([float(guess(t)) for t in points])
    current_fn: Callable[[float], float] = guess

    rho = np.zeros(len(basis))
    history: list[float] = []
    constants: list[np.ndarray] = []
    converged = False
    a = None
    for r in range(config.max_iter):
        linearized = quasilinearize(spec, current_fn, iterate=r)
        try:
            a, b = _assemble_from_parts(linearized, points, weight, base)
            rho = linalg.lu_solve(a, b)
        except linalg.SingularMatrixError as exc:
            raise SolverError(f"collocation matrix singular at iterate {r} "
                              f"(elimination row {exc.row})") from exc
        constants.append(shape.constants(rho))
        new_vals = base[0] + weight[0] @ rho
        change = float(np.abs(new_vals - current_vals).max())
        history.append(change)
        current_vals = new_vals
        rho_now = rho.copy()
        current_fn = lambda t, _r=rho_now: shape.evaluate(_r, t)  # noqa: E731
        if change <= config.tol:
            converged = True
            break
    cond = linalg.condition_estimate(a) if a is not None else math.inf
    return WaveletSolution(shape=shape, rho=rho, converged=converged,
                           iterations=len(history), history=history,
                           constants=constants, condition_estimate=cond,
                           collocation_pts=points)


def eval_solution(sol: WaveletSolution, t: float, deriv: int = 0) -> float:
    """Value of the solution (or one of its derivatives) at t."""
    return sol.evaluate(t, deriv)
