"""L2 projection of a function onto the wavelet basis.

Projection coefficients solve D B = G where D is the Gram matrix of the
basis and G holds the inner products of the target function with each
member.  D is assembled exactly (rational arithmetic, then one square root
per entry); G uses composite Gauss-Legendre quadrature restricted to each
member's support, so the only quadrature error comes from the target
function itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import linalg
from .basis import BasisConfig, Wavelet, build_basis, exact_inner_rational

#: Each support is split into this many equal panels before quadrature.
PANELS_PER_SUPPORT = 8
DEFAULT_QUAD_ORDER = 32


class QuadratureError(ValueError):
    """The sampled function returned a non-finite value; ``abscissa`` says where."""

    def __init__(self, abscissa: float, value: float):
        super().__init__(f"non-finite sample {value!r} at t={abscissa!r}")
        self.abscissa = abscissa


class GramSolveError(RuntimeError):
    """The Gram system could not be solved; carries a condition estimate."""

    def __init__(self, condition: float):
        super().__init__(f"Gram matrix singular to working precision "
                         f"(condition estimate {condition:.3e})")
        self.condition = condition


class GramMatrix:
    """Gram matrix of a basis: block diagonal with one M x M block per
    subinterval, every diagonal entry exactly 1.

    ``blocks[n-1][i][j]`` keeps the exact rational core of each entry (the
    full entry is the core divided by sqrt(z_i * z_j)); ``dense`` is the
    floating-point matrix used for solves.
    """

    def __init__(self, config: BasisConfig, blocks, z_values, dense: np.ndarray):
        self.config = config
        self.blocks = blocks
        self.z_values = z_values
        self.dense = dense

    @property
    def size(self) -> int:
        return self.config.basis_size

    def exact_rational(self, i: int, j: int) -> Fraction:
        """Rational core of entry (i, j); exactly 0 across subintervals."""
        m = self.config.M
        if i // m != j // m:
            return Fraction(0)
        return self.blocks[i // m][i % m][j % m]


def gram_matrix(basis: Sequence[Wavelet]) -> GramMatrix:
    """Exact pairwise inner products of the basis members.

    Every block is integrated independently in rational arithmetic; blocks
    come out identical because the members are affine copies of each other.
    """
    config = basis[0].config
    m = config.M
    z_values = tuple(w.z for w in basis[:m])
    norms = np.array([1.0 / math.sqrt(z) for z in z_values])
    blocks = []
    dense = np.zeros((config.basis_size, config.basis_size))
    for block_idx in range(config.subintervals):
        members = basis[block_idx * m:(block_idx + 1) * m]
        block = [[Fraction(0)] * m for _ in range(m)]
        for i in range(m):
            for j in range(i, m):
                r = exact_inner_rational(members[i], members[j])
                block[i][j] = r
                block[j][i] = r
        blocks.append(tuple(tuple(row) for row in block))
        fblock = np.array([[float(block[i][j]) for j in range(m)] for i in range(m)])
        fblock *= np.outer(norms, norms)
        lo = block_idx * m
        dense[lo:lo + m, lo:lo + m] = fblock
    return GramMatrix(config, tuple(blocks), z_values, dense)


def panel_nodes(lo: float, hi: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [lo, hi].

    Nodes are strictly interior to each panel, so endpoint singularities of
    the integrand are never sampled.
    """
    x, w = leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mids[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def inner_products(g: Callable[[float], float], basis: Sequence[Wavelet],
                   quad_order: int = DEFAULT_QUAD_ORDER) -> np.ndarray:
    """Inner products of g with every basis member.

    Composite Gauss-Legendre of the given order over PANELS_PER_SUPPORT
    panels per support.  Panel and node order are fixed, so the summation
    is bit-reproducible.
    """
    if quad_order < 1:
        raise ValueError(f"quad_order must be >= 1, got {quad_order}")
    out = np.zeros(len(basis))
    sample_cache: dict[tuple[float, float], tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    for idx, wav in enumerate(basis):
        key = (wav._flo, wav._fhi)
        if key not in sample_cache:
            nodes, weights = panel_nodes(key[0], key[1], PANELS_PER_SUPPORT, quad_order)
            gvals = np.empty_like(nodes)
            for i, t in enumerate(nodes):
                v = float(g(t))
                if not math.isfinite(v):
                    raise QuadratureError(t, v)
                gvals[i] = v
            sample_cache[key] = (nodes, weights, gvals)
        nodes, weights, gvals = sample_cache[key]
        out[idx] = float(np.sum(weights * gvals * wav.evaluate_many(nodes)))
    return out


@dataclass
class Expansion:
    """Coefficient vector over a basis configuration, evaluable as a function."""

    config: BasisConfig
    coeffs: np.ndarray
    gram_condition: float | None = field(default=None, compare=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.config.basis_size,):
            raise ValueError(f"expected {self.config.basis_size} coefficients, "
                             f"got shape {self.coeffs.shape}")

    def evaluate(self, t: float) -> float:
        """Sum of the M members whose support contains t."""
        basis = build_basis(self.config)
        n = self.config.subinterval_of(t)
        lo = (n - 1) * self.config.M
        return sum(self.coeffs[j] * basis[j].evaluate(t)
                   for j in range(lo, lo + self.config.M))

    def evaluate_many(self, ts: np.ndarray) -> np.ndarray:
        basis = build_basis(self.config)
        ts = np.asarray(ts, dtype=float)
        out = np.zeros_like(ts)
        for c, w in zip(self.coeffs, basis):
            if c != 0.0:
                out += c * w.evaluate_many(ts)
        return out

    __call__ = evaluate


def project(g: Callable[[float], float], basis: Sequence[Wavelet],
            quad_order: int = DEFAULT_QUAD_ORDER) -> Expansion:
    """L2-project g onto the basis by solving the Gram system.

    The Gram matrix is factorized (never inverted explicitly); the returned
    expansion carries a 1-norm condition estimate of the Gram matrix as a
    diagnostic, since the blocks grow ill-conditioned quickly with M.
    """
    gm = gram_matrix(basis)
    rhs = inner_products(g, basis, quad_order)
    cond = linalg.condition_estimate(gm.dense)
    try:
        coeffs = linalg.lu_solve(gm.dense, rhs)
    except linalg.SingularMatrixError as exc:
        raise GramSolveError(cond) from exc
    return Expansion(basis[0].config, coeffs, gram_condition=cond)


def approx_max_error(expansion: Expansion, g: Callable[[float], float],
                     grid_size: int) -> float:
    """Max absolute gap between g and the expansion on a uniform grid.

    Grid points where g comes back non-finite are skipped, which is how
    callers mark removable singularities.
    """
    if grid_size < 2:
        raise ValueError(f"grid_size must be >= 2, got {grid_size}")
    ts = np.linspace(0.0, 1.0, grid_size)
    approx = expansion.evaluate_many(ts)
    worst = 0.0
    for t, a in zip(ts, approx):
        gv = float(g(t))
        if not math.isfinite(gv):
            continue
        worst = max(worst, abs(gv - a))
    return worst
