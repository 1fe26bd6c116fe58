"""Built-in benchmark problems: Lane-Emden and Emden-Fowler type equations
plus a linear singular perturbation problem, with closed-form solutions where
known and published target errors for the documented (k, M) configurations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .solver import (BoundaryConditions, DirichletBoth, LinearCoefficient,
                     NeumannRobin, ProblemSpec, ThirdOrderIVP, ThirdOrderMixed)


class UnknownProblemError(KeyError):
    pass


@dataclass(frozen=True)
class AcceptanceTarget:
    """One benchmark gate: metric at a given M must come in under bound."""

    M: int
    metric: str  # "abs" or "residual"
    bound: float


@dataclass
class BenchmarkProblem:
    name: str
    description: str
    spec: ProblemSpec
    bcs: BoundaryConditions
    #: Closed-form solution, when one is known.
    exact: Callable[[float], float] | None
    #: Exact solution and its derivatives up to the problem order, for
    #: transcription validation (substituting them into the ODE must give
    #: zero residual).
    exact_derivatives: tuple[Callable[[float], float], ...] | None
    default_guess: float
    table_m_values: tuple[int, ...]
    #: Published max errors for k=1 at each tabulated M (absolute error where
    #: a closed form exists, residual error otherwise).
    reference_errors: dict[int, float]
    acceptance: tuple[AcceptanceTarget, ...]
    eps: float | None = None
    #: Highest power of 1/t appearing in the linear coefficients; reference
    #: solvers scale the equation by t**singular_power near the origin.
    singular_power: int = 0

    @property
    def label(self) -> str:
        if self.eps is None:
            return self.name
        return f"{self.name}(eps={self.eps:g})"

    def residual(self, t: float, s: float, derivs: Sequence[float]) -> float:
        """Canonical-form residual given s^(order), ..., s' values.

        ``derivs[p]`` is s^(p+1)(t) for p = 0..order-1.
        """
        value = derivs[self.spec.order - 1]
        for p, c in enumerate(self.spec.linear_coeffs):
            value += c(t) * (s if p == 0 else derivs[p - 1])
        return value + self.spec.g(t, s) - self.spec.forcing(t)


def _lane_emden_5() -> BenchmarkProblem:
    exact = lambda t: math.sqrt(3.0 / (3.0 + t * t))
    d1 = lambda t: -math.sqrt(3.0) * t * (3.0 + t * t) ** -1.5
    d2 = lambda t: math.sqrt(3.0) * (2.0 * t * t - 3.0) * (3.0 + t * t) ** -2.5
    spec = ProblemSpec(
        order=2,
        linear_coeffs=(
            LinearCoefficient(lambda t: 0.0),
            LinearCoefficient(lambda t: 2.0 / t, singular_at_zero=True),
        ),
        g=lambda t, s: s ** 5,
        g_s=lambda t, s: 5.0 * s ** 4,
    )
    return BenchmarkProblem(
        name="lane-emden-5",
        description="s'' + (2/t) s' + s^5 = 0, s'(0) = 0, s(1) = sqrt(3)/2; "
                    "equilibrium of a polytropic gas sphere, exact solution "
                    "sqrt(3/(3+t^2))",
        spec=spec,
        bcs=NeumannRobin(0.0, 1.0, 0.0, math.sqrt(0.75)),
        exact=exact,
        exact_derivatives=(exact, d1, d2),
        default_guess=1.0,
        table_m_values=(2, 4, 6, 8, 9),
        reference_errors={2: 1.77828e-3, 4: 2.85214e-5, 6: 2.67767e-5,
                          8: 2.17433e-7, 9: 6.90402e-8},
        acceptance=(AcceptanceTarget(6, "abs", 2e-5),
                    AcceptanceTarget(8, "abs", 1e-6)),
        singular_power=1,
    )


def _thermal_explosion() -> BenchmarkProblem:
    b = 3.0 - 2.0 * math.sqrt(2.0)
    c = 4.0 - 2.0 * math.sqrt(2.0)
    exact = lambda t: 2.0 * math.log(c / (b * t * t + 1.0))
    d1 = lambda t: -4.0 * b * t / (b * t * t + 1.0)
    d2 = lambda t: -4.0 * b * (1.0 - b * t * t) / (b * t * t + 1.0) ** 2
    spec = ProblemSpec(
        order=2,
        linear_coeffs=(
            LinearCoefficient(lambda t: 0.0),
            LinearCoefficient(lambda t: 1.0 / t, singular_at_zero=True),
        ),
        g=lambda t, s: math.exp(s),
        g_s=lambda t, s: math.exp(s),
    )
    return BenchmarkProblem(
        name="thermal-explosion",
        description="s'' + (1/t) s' + exp(s) = 0, s'(0) = 0, s(1) = 0; heat "
                    "balance in a long cylindrical vessel, exact solution "
                    "2 log((4-2*sqrt(2))/((3-2*sqrt(2)) t^2 + 1))",
        spec=spec,
        bcs=NeumannRobin(0.0, 1.0, 0.0, 0.0),
        exact=exact,
        exact_derivatives=(exact, d1, d2),
        default_guess=0.0,
        table_m_values=(2, 4, 6, 8, 9),
        reference_errors={2: 1.41529e-3, 4: 4.63284e-6, 6: 5.68708e-6,
                          8: 2.0193e-8, 9: 5.88003e-9},
        acceptance=(AcceptanceTarget(6, "abs", 1e-5),
                    AcceptanceTarget(8, "abs", 1e-6)),
        singular_power=1,
    )


def _membrane_cap() -> BenchmarkProblem:
    spec = ProblemSpec(
        order=2,
        linear_coeffs=(
            LinearCoefficient(lambda t: 0.0),
            LinearCoefficient(lambda t: 3.0 / t, singular_at_zero=True),
        ),
        g=lambda t, s: 1.0 / (8.0 * s * s) - 0.5,
        g_s=lambda t, s: -1.0 / (4.0 * s ** 3),
    )
    return BenchmarkProblem(
        name="membrane-cap",
        description="s'' + (3/t) s' + 1/(8 s^2) - 1/2 = 0, s'(0) = 0, "
                    "s(1) = 1; radial stress in a shallow membrane cap, no "
                    "closed-form solution",
        spec=spec,
        bcs=NeumannRobin(0.0, 1.0, 0.0, 1.0),
        exact=None,
        exact_derivatives=None,
        default_guess=0.5,
        table_m_values=(4, 5),
        reference_errors={4: 3.90847e-7, 5: 4.01346e-8},
        acceptance=(AcceptanceTarget(4, "residual", 1e-5),
                    AcceptanceTarget(5, "residual", 1e-6)),
        singular_power=1,
    )


def _efte_first() -> BenchmarkProblem:
    exact = lambda t: math.log1p(t ** 3)
    d1 = lambda t: 3.0 * t * t / (1.0 + t ** 3)
    d2 = lambda t: (6.0 * t - 3.0 * t ** 4) / (1.0 + t ** 3) ** 2
    d3 = lambda t: (6.0 - 42.0 * t ** 3 + 6.0 * t ** 6) / (1.0 + t ** 3) ** 3
    spec = ProblemSpec(
        order=3,
        linear_coeffs=(
            LinearCoefficient(lambda t: 0.0),
            LinearCoefficient(lambda t: 6.0 / (t * t), singular_at_zero=True),
            LinearCoefficient(lambda t: 6.0 / t, singular_at_zero=True),
        ),
        g=lambda t, s: -6.0 * (10.0 + 2.0 * t ** 3 + t ** 6) * math.exp(-3.0 * s),
        g_s=lambda t, s: 18.0 * (10.0 + 2.0 * t ** 3 + t ** 6) * math.exp(-3.0 * s),
    )
    return BenchmarkProblem(
        name="efte-first",
        description="s''' + (6/t) s'' + (6/t^2) s' = 6 (10 + 2 t^3 + t^6) "
                    "exp(-3 s), s(0) = s'(0) = s''(0) = 0; third-order "
                    "Emden-Fowler equation, exact solution log(1 + t^3)",
        spec=spec,
        bcs=ThirdOrderIVP(0.0, 0.0, 0.0),
        exact=exact,
        exact_derivatives=(exact, d1, d2, d3),
        default_guess=0.0,
        table_m_values=(4, 5, 7, 9, 11),
        reference_errors={4: 3.77157e-4, 5: 1.39582e-4, 7: 5.81953e-6,
                          9: 3.64928e-7, 11: 8.17307e-8},
        acceptance=(AcceptanceTarget(7, "abs", 1e-4),
                    AcceptanceTarget(11, "abs", 1e-6)),
        singular_power=2,
    )


def _efte_second() -> BenchmarkProblem:
    exact = lambda t: t ** 3 * math.exp(t)
    d1 = lambda t: (3.0 * t * t + t ** 3) * math.exp(t)
    d2 = lambda t: (6.0 * t + 6.0 * t * t + t ** 3) * math.exp(t)
    d3 = lambda t: (6.0 + 18.0 * t + 9.0 * t * t + t ** 3) * math.exp(t)

    def forcing(t: float) -> float:
        et = math.exp(t)
        return -(t ** 6) * math.exp(2.0 * t) + (7.0 * t * t + 6.0 * t - 6.0) * et

    spec = ProblemSpec(
        order=3,
        linear_coeffs=(
            LinearCoefficient(lambda t: 0.0),
            LinearCoefficient(lambda t: 0.0),
            LinearCoefficient(lambda t: -2.0 / t, singular_at_zero=True),
        ),
        g=lambda t, s: -(s * s + s),
        g_s=lambda t, s: -(2.0 * s + 1.0),
        forcing=forcing,
    )
    return BenchmarkProblem(
        name="efte-second",
        description="s''' - (2/t) s'' = s^2 + s - t^6 e^(2t) + 7 t^2 e^t "
                    "+ 6 t e^t - 6 e^t, s(0) = s'(0) = 0, s(1) = e; "
                    "third-order Emden-Fowler equation, exact solution t^3 e^t",
        spec=spec,
        bcs=ThirdOrderMixed(0.0, 0.0, math.e),
        exact=exact,
        exact_derivatives=(exact, d1, d2, d3),
        default_guess=0.0,
        table_m_values=(4, 5, 7, 9, 11),
        reference_errors={4: 1.23202e-4, 5: 4.6141e-5, 7: 1.11937e-6,
                          9: 4.23564e-6, 11: 6.19893e-9},
        acceptance=(AcceptanceTarget(7, "abs", 1e-5),
                    AcceptanceTarget(11, "abs", 1e-7)),
        singular_power=1,
    )


#: Published max errors for the perturbation problem at M = 10, 12, 14,
#: keyed by epsilon.
PERTURBATION_REFERENCE = {
    1.0 / 32.0: {10: 4.52493e-7, 12: 5.63276e-8, 14: 5.75644e-9},
    1.0 / 64.0: {10: 3.80832e-6, 12: 3.21547e-7, 14: 2.79873e-8},
    1.0 / 128.0: {10: 5.04751e-5, 12: 2.2555e-6, 14: 3.00767e-7},
}

PERTURBATION_ACCEPTANCE_BOUNDS = {
    1.0 / 32.0: 1e-7,
    1.0 / 64.0: 1e-6,
    1.0 / 128.0: 1e-5,
}

DEFAULT_PERTURBATION_EPS = (1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0)


def _perturbation(eps: float) -> BenchmarkProblem:
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    root = math.sqrt(eps)
    exact = lambda t: t + math.exp(-t / root)
    d1 = lambda t: 1.0 - math.exp(-t / root) / root
    d2 = lambda t: math.exp(-t / root) / eps
    # -eps s'' + s = t, normalized so the leading coefficient is one:
    # s'' - s/eps = -t/eps
    spec = ProblemSpec(
        order=2,
        linear_coeffs=(
            LinearCoefficient(lambda t: -1.0 / eps),
            LinearCoefficient(lambda t: 0.0),
        ),
        g=lambda t, s: 0.0,
        g_s=lambda t, s: 0.0,
        forcing=lambda t: -t / eps,
    )
    reference = PERTURBATION_REFERENCE.get(eps, {})
    bound = PERTURBATION_ACCEPTANCE_BOUNDS.get(eps)
    acceptance = (AcceptanceTarget(14, "abs", bound),) if bound else ()
    return BenchmarkProblem(
        name="perturbation",
        description="-eps s'' + s = t, s(0) = 1, s(1) = 1 + exp(-1/sqrt(eps)); "
                    "linear singular perturbation problem with a boundary "
                    "layer of width sqrt(eps) at t = 0, exact solution "
                    "t + exp(-t/sqrt(eps))",
        spec=spec,
        bcs=DirichletBoth(1.0, 1.0 + math.exp(-1.0 / root)),
        exact=exact,
        exact_derivatives=(exact, d1, d2),
        default_guess=0.0,
        table_m_values=(10, 12, 14),
        reference_errors=dict(reference),
        acceptance=acceptance,
        eps=eps,
        singular_power=0,
    )


_BUILDERS = {
    "lane-emden-5": _lane_emden_5,
    "thermal-explosion": _thermal_explosion,
    "membrane-cap": _membrane_cap,
    "efte-first": _efte_first,
    "efte-second": _efte_second,
}

BUILTIN_NAMES: tuple[str, ...] = (
    "lane-emden-5", "thermal-explosion", "membrane-cap",
    "efte-first", "efte-second", "perturbation",
)


def builtin(name: str, eps: float = 1.0 / 32.0) -> BenchmarkProblem:
    """Fully populated benchmark problem by name.

    ``eps`` only applies to the perturbation problem and defaults to 1/32.
    """
    if name == "perturbation":
        return _perturbation(eps)
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise UnknownProblemError(
            f"unknown problem {name!r}; choose from {', '.join(BUILTIN_NAMES)}"
        ) from None


def reference_oracle(problem: BenchmarkProblem, grid_size: int = 4096):
    """High-resolution reference solution by a method independent of the
    wavelet solver (graded-mesh finite differences with damped Newton and
    Richardson extrapolation).  See :mod:`tribowave.oracle`.
    """
    from .oracle import solve_reference
    return solve_reference(problem, grid_size)
