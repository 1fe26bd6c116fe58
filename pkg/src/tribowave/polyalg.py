"""Exact univariate polynomial arithmetic over the rationals.

Coefficients are `fractions.Fraction` throughout, so normalization constants
and Gram entries are computed without quadrature or rounding error.  Floating
point enters only at evaluation time (`Polynomial.evaluate`).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

Scalar = Union[int, Fraction]

#: Hard cap on polynomial degree.  The basis polynomials have degree
#: 2m - 2 (m >= 2), so anything past this cap indicates a runaway recurrence
#: or an accidental huge product.
MAX_DEGREE = 64


class DegreeCapError(ValueError):
    """An operation produced a polynomial of degree above MAX_DEGREE."""


class Polynomial:
    """Dense polynomial in one variable with exact rational coefficients.

    ``coeffs[i]`` is the coefficient of ``t**i``.  Trailing zeros are trimmed
    on construction; the zero polynomial is stored as ``(Fraction(0),)``.
    Instances are immutable and hashable.
    """

    __slots__ = ("coeffs", "_fcoeffs")

    def __init__(self, coeffs: Iterable[Scalar]):
        cs = [c if isinstance(c, Fraction) else Fraction(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs:
            cs = [Fraction(0)]
        if len(cs) - 1 > MAX_DEGREE:
            raise DegreeCapError(
                f"polynomial degree {len(cs) - 1} exceeds cap {MAX_DEGREE}"
            )
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "_fcoeffs", tuple(float(c) for c in cs))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- construction helpers ------------------------------------------------

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls([0])

    @classmethod
    def constant(cls, c: Scalar) -> "Polynomial":
        return cls([c])

    @classmethod
    def variable(cls) -> "Polynomial":
        """The monomial t."""
        return cls([0, 1])

    # -- basic queries -------------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree of the trimmed polynomial; the zero polynomial has degree 0."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0 and self.degree > 0:
                continue
            if i == 0:
                terms.append(str(c))
            elif i == 1:
                terms.append(f"{c}*t")
            else:
                terms.append(f"{c}*t^{i}")
        return "Polynomial(" + " + ".join(terms) + ")"

    # -- ring operations -----------------------------------------------------

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial(out)

    def __neg__(self) -> "Polynomial":
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            a, b = self.coeffs, other.coeffs
            out = [Fraction(0)] * (len(a) + len(b) - 1)
            for i, ca in enumerate(a):
                if ca == 0:
                    continue
                for j, cb in enumerate(b):
                    out[i + j] += ca * cb
            return Polynomial(out)
        if isinstance(other, (int, Fraction)):
            return Polynomial([c * other for c in self.coeffs])
        return NotImplemented

    __rmul__ = __mul__

    # -- calculus ------------------------------------------------------------

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial.zero()
        return Polynomial([i * c for i, c in enumerate(self.coeffs)][1:])

    def antiderivative(self, order: int = 1) -> "Polynomial":
        """Repeated antiderivative with all integration constants zero."""
        if order < 1:
            raise ValueError(f"antiderivative order must be >= 1, got {order}")
        p = self
        for _ in range(order):
            p = Polynomial([Fraction(0)] + [c / (i + 1) for i, c in enumerate(p.coeffs)])
        return p

    def definite_integral(self, a: Scalar, b: Scalar) -> Fraction:
        """Exact value of the integral of the polynomial from a to b."""
        f = self.antiderivative()
        return f.evaluate_exact(Fraction(b)) - f.evaluate_exact(Fraction(a))

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, t: float) -> float:
        """Horner evaluation in double precision."""
        acc = 0.0
        for c in reversed(self._fcoeffs):
            acc = acc * t + c
        return acc

    def evaluate_exact(self, x: Scalar) -> Fraction:
        x = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def compose_affine(self, a: Scalar, b: Scalar) -> "Polynomial":
        """Exact expansion of p(a*t + b)."""
        inner = Polynomial([Fraction(b), Fraction(a)])
        acc = Polynomial.zero()
        for c in reversed(self.coeffs):
            acc = acc * inner + Polynomial.constant(c)
        return acc
