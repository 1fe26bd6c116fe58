"""Small dense linear-algebra kernel: LU with partial pivoting plus a 1-norm
condition estimate.  Systems here are tiny (at most a few dozen rows), so the
factorization is single-threaded and deterministic by construction."""

from __future__ import annotations

import math

import numpy as np

#: A pivot below this multiple of the matrix inf-norm is treated as zero.
PIVOT_RTOL = 1e-14


class SingularMatrixError(RuntimeError):
    """Factorization hit a negligible pivot; ``row`` is the elimination step."""

    def __init__(self, row: int, message: str | None = None):
        super().__init__(message or f"singular pivot at elimination row {row}")
        self.row = row


def lu_factor(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """LU factorization with partial pivoting, LAPACK-style packed output.

    Returns (lu, ipiv) where lu holds U in the upper triangle and the unit
    lower-triangular multipliers below it, and ipiv[k] is the row swapped
    with row k at step k.
    """
    lu = np.array(a, dtype=float)
    if lu.ndim != 2 or lu.shape[0] != lu.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {lu.shape}")
    if not np.isfinite(lu).all():
        raise ValueError("matrix contains non-finite entries")
    n = lu.shape[0]
    anorm = float(np.abs(lu).sum(axis=1).max()) if n else 0.0
    ipiv = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) <= PIVOT_RTOL * anorm or lu[p, k] == 0.0:
            raise SingularMatrixError(k)
        if p != k:
            lu[[k, p], :] = lu[[p, k], :]
        ipiv[k] = p
        lu[k + 1:, k] /= lu[k, k]
        if k + 1 < n:
            lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, ipiv


def solve_factored(factored: tuple[np.ndarray, np.ndarray], b: np.ndarray) -> np.ndarray:
    """Back-substitution for one or more right-hand sides (columns of b)."""
    lu, ipiv = factored
    n = lu.shape[0]
    x = np.array(b, dtype=float)
    vector = x.ndim == 1
    if vector:
        x = x[:, None]
    if x.shape[0] != n:
        raise ValueError(f"right-hand side length {x.shape[0]} != matrix size {n}")
    for k in range(n):
        p = ipiv[k]
        if p != k:
            x[[k, p], :] = x[[p, k], :]
    for k in range(n):
        x[k + 1:, :] -= np.outer(lu[k + 1:, k], x[k, :])
    for k in range(n - 1, -1, -1):
        x[k, :] /= lu[k, k]
        x[:k, :] -= np.outer(lu[:k, k], x[k, :])
    return x[:, 0] if vector else x


def lu_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a x = b by LU with partial pivoting.

    Raises SingularMatrixError (carrying the elimination row) when a pivot
    falls below PIVOT_RTOL times the matrix norm.
    """
    return solve_factored(lu_factor(a), b)


def condition_estimate(a: np.ndarray) -> float:
    """1-norm condition number; the systems are small enough to invert.

    Returns +inf when the factorization detects singularity.
    """
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 1.0
    try:
        factored = lu_factor(a)
    except SingularMatrixError:
        return math.inf
    inv = solve_factored(factored, np.eye(a.shape[0]))
    norm_a = float(np.abs(a).sum(axis=0).max())
    norm_inv = float(np.abs(inv).sum(axis=0).max())
    return norm_a * norm_inv
