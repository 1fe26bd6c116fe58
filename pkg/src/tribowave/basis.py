"""Tribonacci polynomials and the semi-orthogonal wavelet family built on them.

The basis at resolution level k splits [0, 1] into 2^(k-1) dyadic
subintervals.  On subinterval n the members are scaled, normalized tribonacci
polynomials of orders m = 0 .. M-1:

    W[n,m](t) = 2^((k-1)/2) * T_m(2^(k-1) t - n + 1) / sqrt(z_m)

inside the subinterval and 0 elsewhere, where z_m is the integral of T_m^2
over [0, 1].  Members on different subintervals have disjoint supports and
are therefore exactly orthogonal; members sharing a subinterval are not.

Supports are half-open on the right, except the last subinterval which also
contains t = 1 so that boundary conditions at 1 see a defined basis.

All generating formulas here are applied literally; the family is produced
from the definition above, never from a transcribed table of special cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .polyalg import Polynomial


@lru_cache(maxsize=None)
def tribonacci(order: int) -> Polynomial:
    """Tribonacci polynomial T_l.

    T_0 = 1, T_1 = t, T_2 = t^2, and T_l = t^2 T_(l-1) + t T_(l-2) + T_(l-3)
    for l >= 3.  Degree is 2l - 2 for l >= 2.
    """
    if order < 0:
        raise ValueError(f"tribonacci order must be >= 0, got {order}")
    if order == 0:
        return Polynomial([1])
    if order == 1:
        return Polynomial([0, 1])
    if order == 2:
        return Polynomial([0, 0, 1])
    t = Polynomial.variable()
    t2 = t * t
    return t2 * tribonacci(order - 1) + t * tribonacci(order - 2) + tribonacci(order - 3)


@lru_cache(maxsize=None)
def normalization(m: int) -> Fraction:
    """Exact z_m, the integral of T_m(t)^2 over [0, 1]."""
    p = tribonacci(m)
    return (p * p).definite_integral(0, 1)


@dataclass(frozen=True)
class BasisConfig:
    """Resolution level k and polynomial order count M."""

    k: int
    M: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"resolution level k must be >= 1, got {self.k}")
        if self.M < 1:
            raise ValueError(f"order count M must be >= 1, got {self.M}")

    @property
    def subintervals(self) -> int:
        return 2 ** (self.k - 1)

    @property
    def basis_size(self) -> int:
        return self.subintervals * self.M

    def flat_index(self, n: int, m: int) -> int:
        """Flattened position of member (n, m): row-major over subintervals."""
        if not (1 <= n <= self.subintervals):
            raise ValueError(f"subinterval index n={n} out of range 1..{self.subintervals}")
        if not (0 <= m < self.M):
            raise ValueError(f"polynomial order m={m} out of range 0..{self.M - 1}")
        return (n - 1) * self.M + m

    def support(self, n: int) -> tuple[Fraction, Fraction]:
        """Exact dyadic endpoints of subinterval n."""
        width = Fraction(1, self.subintervals)
        return (n - 1) * width, n * width

    def subinterval_of(self, t: float) -> int:
        """Index n of the subinterval whose support contains t in [0, 1]."""
        n = int(t * self.subintervals) + 1
        return min(max(n, 1), self.subintervals)


class PiecewiseFn:
    """Piecewise polynomial: zero before the first breakpoint, ``pieces[i]``
    on [breakpoints[i], breakpoints[i+1]), ``tail`` from the last breakpoint
    onward.  Breakpoints and coefficients are exact rationals."""

    __slots__ = ("breakpoints", "pieces", "tail", "_fbreaks")

    def __init__(self, breakpoints: Sequence[Fraction], pieces: Sequence[Polynomial],
                 tail: Polynomial):
        breakpoints = tuple(Fraction(b) for b in breakpoints)
        if any(b1 >= b2 for b1, b2 in zip(breakpoints, breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(pieces) != len(breakpoints) - 1:
            raise ValueError("need exactly one piece per breakpoint gap")
        self.breakpoints = breakpoints
        self.pieces = tuple(pieces)
        self.tail = tail
        self._fbreaks = tuple(float(b) for b in breakpoints)

    def antiderivative(self) -> "PiecewiseFn":
        """Antiderivative with lower limit 0, continuous across breakpoints."""
        running = Fraction(0)
        new_pieces = []
        for poly, lo, hi in zip(self.pieces, self.breakpoints, self.breakpoints[1:]):
            f = poly.antiderivative()
            new_pieces.append(f + Polynomial.constant(running - f.evaluate_exact(lo)))
            running += f.evaluate_exact(hi) - f.evaluate_exact(lo)
        ftail = self.tail.antiderivative()
        last = self.breakpoints[-1]
        new_tail = ftail + Polynomial.constant(running - ftail.evaluate_exact(last))
        return PiecewiseFn(self.breakpoints, new_pieces, new_tail)

    def _piece_at(self, t: float) -> Polynomial | None:
        if t < self._fbreaks[0]:
            return None
        for poly, hi in zip(self.pieces, self._fbreaks[1:]):
            if t < hi:
                return poly
        return self.tail

    def evaluate(self, t: float) -> float:
        poly = self._piece_at(t)
        return 0.0 if poly is None else poly.evaluate(t)

    def evaluate_exact(self, x: Fraction) -> Fraction:
        x = Fraction(x)
        if x < self.breakpoints[0]:
            return Fraction(0)
        for poly, hi in zip(self.pieces, self.breakpoints[1:]):
            if x < hi:
                return poly.evaluate_exact(x)
        return self.tail.evaluate_exact(x)

    def evaluate_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        out = np.zeros_like(ts)
        from numpy.polynomial import polynomial as npoly

        segments = list(zip(self.pieces, self._fbreaks[:-1], self._fbreaks[1:]))
        for poly, lo, hi in segments:
            mask = (ts >= lo) & (ts < hi)
            if mask.any():
                out[mask] = npoly.polyval(ts[mask], poly._fcoeffs)
        mask = ts >= self._fbreaks[-1]
        if mask.any():
            out[mask] = npoly.polyval(ts[mask], self.tail._fcoeffs)
        return out


class Wavelet:
    """One basis member W[n,m] with its precomputed piecewise antiderivatives.

    The inner tribonacci polynomial is kept in the local variable
    y = 2^(k-1) t - n + 1 and composed with the affine map at evaluation time;
    the expanded global-variable form is produced once to build the exact
    antiderivative pieces.
    """

    __slots__ = ("config", "n", "m", "support_lo", "support_hi", "closes_right",
                 "inner_poly", "z", "scale", "norm", "amplitude", "global_poly",
                 "_antiderivs", "_flo", "_fhi")

    MAX_INTEGRATION_ORDER = 3

    def __init__(self, config: BasisConfig, n: int, m: int):
        config.flat_index(n, m)  # range check
        self.config = config
        self.n = n
        self.m = m
        self.support_lo, self.support_hi = config.support(n)
        self._flo = float(self.support_lo)
        self._fhi = float(self.support_hi)
        self.closes_right = n == config.subintervals
        self.inner_poly = tribonacci(m)
        self.z = normalization(m)
        self.scale = math.sqrt(2.0 ** (config.k - 1))
        self.norm = 1.0 / math.sqrt(self.z)
        self.amplitude = self.scale * self.norm
        stretch = Fraction(config.subintervals)
        self.global_poly = self.inner_poly.compose_affine(stretch, Fraction(1 - n))
        antiderivs = []
        fn = PiecewiseFn([self.support_lo, self.support_hi],
                         [self.global_poly], Polynomial.zero())
        for _ in range(self.MAX_INTEGRATION_ORDER):
            fn = fn.antiderivative()
            antiderivs.append(fn)
        self._antiderivs = tuple(antiderivs)

    def __repr__(self) -> str:
        return f"Wavelet(k={self.config.k}, n={self.n}, m={self.m})"

    def contains(self, t: float) -> bool:
        if self.closes_right and t == self._fhi:
            return True
        return self._flo <= t < self._fhi

    def evaluate(self, t: float) -> float:
        """W[n,m](t); zero off-support, half-open on the right except at t=1."""
        if not self.contains(t):
            return 0.0
        y = self.config.subintervals * t - (self.n - 1)
        return self.amplitude * self.inner_poly.evaluate(y)

    def evaluate_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        mask = (ts >= self._flo) & (ts < self._fhi)
        if self.closes_right:
            mask |= ts == self._fhi
        out = np.zeros_like(ts)
        if mask.any():
            from numpy.polynomial import polynomial as npoly
            y = self.config.subintervals * ts[mask] - (self.n - 1)
            out[mask] = self.amplitude * npoly.polyval(y, self.inner_poly._fcoeffs)
        return out

    def integral(self, p: int, t: float) -> float:
        """p-fold iterated integral of the wavelet from 0, evaluated at t.

        Zero before the support, a degree (deg + p) polynomial inside, and a
        degree (p - 1) polynomial tail after the support.
        """
        if not (1 <= p <= self.MAX_INTEGRATION_ORDER):
            raise ValueError(f"integration order must be 1..{self.MAX_INTEGRATION_ORDER}, got {p}")
        return self.amplitude * self._antiderivs[p - 1].evaluate(t)

    def integral_many(self, p: int, ts: np.ndarray) -> np.ndarray:
        if not (1 <= p <= self.MAX_INTEGRATION_ORDER):
            raise ValueError(f"integration order must be 1..{self.MAX_INTEGRATION_ORDER}, got {p}")
        return self.amplitude * self._antiderivs[p - 1].evaluate_many(ts)

    def antiderivative_pieces(self, p: int) -> PiecewiseFn:
        """Unnormalized piecewise antiderivative (multiply by ``amplitude``)."""
        return self._antiderivs[p - 1]


@lru_cache(maxsize=None)
def build_basis(config: BasisConfig) -> tuple[Wavelet, ...]:
    """All basis members in flat-index order (n outer, m inner)."""
    return tuple(
        Wavelet(config, n, m)
        for n in range(1, config.subintervals + 1)
        for m in range(config.M)
    )


def exact_inner_rational(wi: Wavelet, wj: Wavelet) -> Fraction:
    """Rational core of the inner product of two members at the same level.

    The full inner product is this value divided by sqrt(z_i * z_j); in
    particular it is exactly z_m on the diagonal and exactly 0 for members
    with disjoint supports.
    """
    if wi.config != wj.config:
        raise ValueError("members belong to different basis configurations")
    lo = max(wi.support_lo, wj.support_lo)
    hi = min(wi.support_hi, wj.support_hi)
    if lo >= hi:
        return Fraction(0)
    prod = wi.global_poly * wj.global_poly
    return Fraction(wi.config.subintervals) * prod.definite_integral(lo, hi)
