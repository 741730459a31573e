"""Truncated Taylor arithmetic for exact low-order derivatives.

A :class:`Jet` holds normalized Taylor coefficients ``c[k] = f^{(k)}(x0)/k!``
for k = 0..order, broadcast over numpy arrays.  Only the operations needed by
the window closed forms are provided.
"""

from __future__ import annotations

from math import factorial

import numpy as np


class Jet:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @classmethod
    def variable(cls, x, order: int) -> "Jet":
        x = np.asarray(x, dtype=float)
        c = np.zeros((order + 1,) + x.shape)
        c[0] = x
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, v, like: "Jet") -> "Jet":
        c = np.zeros_like(like.c)
        c[0] = v
        return cls(c)

    def derivative(self, k: int) -> np.ndarray:
        """k-th derivative at the expansion point."""
        return self.c[k] * factorial(k)

    def derivatives(self) -> np.ndarray:
        return np.stack([self.derivative(k) for k in range(self.order + 1)])

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self)

    def __add__(self, other):
        other = self._coerce(other)
        return Jet(self.c + other.c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * np.asarray(other, dtype=float))
        n = self.order
        out = np.zeros(np.broadcast_shapes(self.c.shape, other.c.shape))
        for k in range(n + 1):
            for j in range(k + 1):
                out[k] += self.c[j] * other.c[k - j]
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / np.asarray(other, dtype=float))
        return self * other.recip()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.recip()

    # composition ----------------------------------------------------------
    def compose(self, fderivs) -> "Jet":
        """f(self) given the derivatives f, f', ..., f^(n) at self.c[0]."""
        n = self.order
        delta = Jet(self.c.copy())
        delta.c[0] = 0.0
        out = np.zeros_like(self.c)
        out[0] = fderivs[0]
        power = None
        for k in range(1, n + 1):
            power = delta if power is None else power * delta
            out = out + (fderivs[k] / factorial(k)) * power.c
        return Jet(out)

    def recip(self) -> "Jet":
        x = self.c[0]
        d = [(-1) ** k * factorial(k) / x ** (k + 1) for k in range(self.order + 1)]
        return self.compose(d)

    def exp(self) -> "Jet":
        e = np.exp(self.c[0])
        return self.compose([e] * (self.order + 1))

    def cos(self) -> "Jet":
        x = self.c[0]
        cyc = [np.cos(x), -np.sin(x), -np.cos(x), np.sin(x)]
        return self.compose([cyc[k % 4] for k in range(self.order + 1)])

    def sin(self) -> "Jet":
        x = self.c[0]
        cyc = [np.sin(x), np.cos(x), -np.sin(x), -np.cos(x)]
        return self.compose([cyc[k % 4] for k in range(self.order + 1)])

    def sech(self) -> "Jet":
        # 2 e^{-|u|} / (1 + e^{-2|u|}) is sech on the whole line; choose the
        # sign per point so the exponentials never overflow.
        sgn = np.where(self.c[0] >= 0, 1.0, -1.0)
        u = self * sgn
        e1 = (-u).exp()
        e2 = (u * -2.0).exp()
        return (e1 * 2.0) / (e2 + 1.0)

    def logistic(self) -> "Jet":
        """sigma(u) = 1/(1+e^{-u}) with derivatives as polynomials in sigma."""
        x = self.c[0]
        sig = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                       np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
        # P_0(s) = s, P_{k+1}(s) = P_k'(s) s (1 - s)
        poly = np.polynomial.Polynomial([0.0, 1.0])
        base = np.polynomial.Polynomial([0.0, 1.0, -1.0])
        d = []
        for _ in range(self.order + 1):
            d.append(poly(sig))
            poly = poly.deriv() * base
        return self.compose(d)
