"""Semi-orthogonal tribonacci wavelet basis, L2 function approximation, and
a quasilinearization collocation solver for singular boundary value problems
on [0, 1]."""

from .basis import BasisConfig, PiecewiseFn, Wavelet, build_basis, normalization, tribonacci
from .approx import Expansion, GramMatrix, approx_max_error, gram_matrix, inner_products, project
from .polyalg import Polynomial
from .problems import BUILTIN_NAMES, BenchmarkProblem, builtin, reference_oracle
from .report import ErrorReport, emit, max_abs_error, max_residual, sweep
from .solver import (BoundaryConditions, DirichletBoth, LinearCoefficient, NeumannRobin,
                     ProblemSpec, SolverConfig, ThirdOrderIVP, ThirdOrderMixed,
                     WaveletSolution, collocation_points, eval_solution, quasilinearize,
                     shape_solution, solve)

__version__ = "0.1.0"

__all__ = [
    "BASIS_VERSION", "BasisConfig", "BenchmarkProblem", "BoundaryConditions",
    "BUILTIN_NAMES", "DirichletBoth", "ErrorReport", "Expansion", "GramMatrix",
    "LinearCoefficient", "NeumannRobin", "PiecewiseFn", "Polynomial", "ProblemSpec",
    "SolverConfig", "ThirdOrderIVP", "ThirdOrderMixed", "Wavelet", "WaveletSolution",
    "approx_max_error", "build_basis", "builtin", "collocation_points", "emit",
    "eval_solution", "gram_matrix", "inner_products", "max_abs_error", "max_residual",
    "normalization", "project", "quasilinearize", "reference_oracle", "shape_solution",
    "solve", "sweep", "tribonacci",
]
