"""Truncated Taylor (jet) arithmetic.

A Jet stores the scaled derivatives coeffs[n] = f^(n)(x0)/n! of a scalar
function at a single point. All derivative-hungry quantities in this
package (Wronskians, log-derivative potentials, PDE residuals) are built
from jet arithmetic, so no finite differencing enters anywhere.

Coefficients may be real or complex (plane-wave seeds need complex jets).
Arithmetic silently truncates at the jet's order, which is exact for the
retained coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: jets with |constant term| below this are treated as singular divisors
DIV_THRESHOLD = 1e-300


class JetMismatchError(ValueError):
    """Operands have different centers or orders."""


class SingularJetError(ZeroDivisionError):
    """Division by a jet whose constant term vanishes."""


@dataclass(frozen=True)
class Jet:
    center: float
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs))
        if c.ndim != 1:
            raise ValueError("jet coefficients must be one-dimensional")
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def value(self):
        return self.coeffs[0]

    def deriv(self, n: int = 1):
        """n-th derivative value at the center."""
        if n > self.order:
            raise ValueError(f"jet of order {self.order} has no derivative {n}")
        return self.coeffs[n] * math.factorial(n)

    @staticmethod
    def constant(v, center: float, order: int) -> "Jet":
        c = np.zeros(order + 1, dtype=np.result_type(type(v), float))
        c[0] = v
        return Jet(center, c)

    def _check(self, other: "Jet"):
        if self.center != other.center or self.order != other.order:
            raise JetMismatchError(
                f"jet mismatch: center {self.center} vs {other.center}, "
                f"order {self.order} vs {other.order}"
            )

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.center, self.coeffs + other.coeffs)
        c = self.coeffs.astype(np.result_type(self.coeffs.dtype, np.asarray(other).dtype))
        c[0] = c[0] + other
        return Jet(self.center, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.center, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            full = np.convolve(self.coeffs, other.coeffs)
            return Jet(self.center, full[: self.order + 1])
        return Jet(self.center, self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return _div(self, other)
        return Jet(self.center, self.coeffs / other)

    def __rtruediv__(self, other):
        return Jet.constant(other, self.center, self.order) / self

    def derivative(self) -> "Jet":
        """Jet of f', one order lower."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        n = np.arange(1, self.order + 1)
        return Jet(self.center, self.coeffs[1:] * n)

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot extend a jet by truncation")
        return Jet(self.center, self.coeffs[: order + 1])


def _div(a: Jet, b: Jet) -> Jet:
    b0 = b.coeffs[0]
    if abs(b0) < DIV_THRESHOLD:
        raise SingularJetError(
            f"division by jet with vanishing constant term at x={b.center}"
        )
    out = np.zeros(a.order + 1, dtype=np.result_type(a.coeffs.dtype, b.coeffs.dtype))
    for n in range(a.order + 1):
        acc = a.coeffs[n]
        if n:
            acc = acc - np.dot(b.coeffs[1 : n + 1], out[n - 1 :: -1])
        out[n] = acc / b0
    return Jet(a.center, out)


def jet_exp(rate: float, x0: float, order: int, unit: bool = False) -> Jet:
    """Jet of exp(rate*x) at x0; with unit=True the e^{rate*x0} prefactor
    is dropped (constant term 1), useful when the scale is tracked
    separately as a log gauge."""
    c = np.empty(order + 1)
    c[0] = 1.0 if unit else math.exp(rate * x0)
    for n in range(1, order + 1):
        c[n] = c[n - 1] * rate / n
    return Jet(x0, c)


def jet_log_d2(a: Jet) -> float:
    """Second derivative of log a at the center: 2*a2/a0 - (a1/a0)^2."""
    if a.order < 2:
        raise ValueError("jet_log_d2 needs order >= 2")
    a0 = a.coeffs[0]
    if not a0 > 0:
        raise ValueError("jet_log_d2 requires a positive constant term")
    r1 = a.coeffs[1] / a0
    return 2.0 * (a.coeffs[2] / a0) - r1 * r1


def _det_laplace(m) -> Jet:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    acc = None
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        term = m[0][j] * _det_laplace(minor)
        if j % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def jet_det(matrix) -> Jet:
    """Determinant of a square matrix of jets (shared center and order).

    LU with partial pivoting on the constant terms; 3x3 and smaller go
    through the branch-free cofactor expansion, and a singular pivot
    falls back to it as well (legitimate for sign-indefinite taus that
    cross zero).
    """
    m = [list(row) for row in matrix]
    n = len(m)
    if n == 0:
        raise ValueError("empty matrix")
    if n <= 3:
        return _det_laplace(m)
    try:
        return _det_lu(m)
    except SingularJetError:
        if n > 8:
            raise
        return _det_laplace(m)


def _det_lu(m) -> Jet:
    n = len(m)
    sign = 1.0
    det = None
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(m[i][k].coeffs[0]))
        if p != k:
            m[k], m[p] = m[p], m[k]
            sign = -sign
        piv = m[k][k]
        det = piv if det is None else det * piv
        for i in range(k + 1, n):
            f = m[i][k] / piv
            for j in range(k + 1, n):
                m[i][j] = m[i][j] - f * m[k][j]
    return det * sign
