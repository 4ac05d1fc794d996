"""Truncated bivariate Taylor polynomials ("jets") with batch dimensions.

A jet of order ``N`` at a point stores ``c[i, j]`` with ``i + j <= N`` so that

    F(u + du, v + dv) = sum c[i, j] du**i dv**j + O(|d|**(N+1)).

Coefficients live in an array of shape ``(N+1, N+1, *batch)`` and may be
real or complex. All geometric quantities are built from jets, which makes
derivatives of composite expressions exact up to rounding.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np


def _mask(order: int) -> np.ndarray:
    i, j = np.indices((order + 1, order + 1))
    return i + j <= order


class Jet:
    __slots__ = ("c", "order")

    def __init__(self, c: np.ndarray, order: int | None = None):
        c = np.asarray(c)
        m = c.shape[0]
        if order is None:
            order = m - 1
        if order < m - 1:
            c = c[: order + 1, : order + 1]
        mask = _mask(order).reshape((order + 1, order + 1) + (1,) * (c.ndim - 2))
        self.c = np.where(mask, c, 0)
        self.order = order

    # constructors
    @classmethod
    def constant(cls, value, order: int) -> "Jet":
        value = np.asarray(value)
        c = np.zeros((order + 1, order + 1) + value.shape, dtype=np.result_type(value, float))
        c[0, 0] = value
        return cls(c, order)

    @classmethod
    def variable(cls, value, which: str, order: int) -> "Jet":
        """The coordinate ``u`` or ``v`` expanded at ``value``."""
        jet = cls.constant(np.asarray(value, dtype=float), order)
        if order >= 1:
            if which == "u":
                jet.c[1, 0] = 1.0
            elif which == "v":
                jet.c[0, 1] = 1.0
            else:
                raise ValueError("which must be 'u' or 'v'")
        return jet

    @classmethod
    def from_partials(cls, partials: dict, order: int, batch_shape=()) -> "Jet":
        """Build from ``{(a, b): d^{a+b} F / du^a dv^b}``."""
        first = next(iter(partials.values()))
        c = np.zeros((order + 1, order + 1) + tuple(batch_shape), dtype=np.result_type(first, float))
        for (a, b), val in partials.items():
            if a + b <= order:
                c[a, b] = np.asarray(val) / (math.factorial(a) * math.factorial(b))
        return cls(c, order)

    # accessors
    @property
    def value(self):
        return self.c[0, 0]

    @property
    def batch_shape(self):
        return self.c.shape[2:]

    def partial(self, a: int, b: int):
        if a + b > self.order:
            raise ValueError(f"jet of order {self.order} has no partial of order {a + b}")
        return math.factorial(a) * math.factorial(b) * self.c[a, b]

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.c[: order + 1, : order + 1], order)

    def d(self, which: str) -> "Jet":
        """Partial derivative; the result has order ``N - 1``."""
        n = self.order
        if n == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        k = np.arange(1, n + 1).reshape((-1,) + (1,) * (self.c.ndim - 1))
        if which == "u":
            c = self.c[1:, :n] * k
        else:
            c = self.c[:n, 1:] * np.moveaxis(k, 0, 1)
        return Jet(c, n - 1)

    def du(self):
        return self.d("u")

    def dv(self):
        return self.d("v")

    def dz(self) -> "Jet":
        """``(d/du - i d/dv) / 2``."""
        return (self.du() - 1j * self.dv()) * 0.5

    def dzbar(self) -> "Jet":
        return (self.du() + 1j * self.dv()) * 0.5

    def integrate_u(self) -> "Jet":
        """Antiderivative in ``u`` with zero constant, truncated to the same order."""
        n = self.order
        c = np.zeros_like(self.c)
        k = np.arange(1, n + 1).reshape((-1,) + (1,) * (self.c.ndim - 1))
        c[1:] = self.c[:n] / k
        return Jet(c, n)

    def real(self) -> "Jet":
        return Jet(self.c.real, self.order)

    def imag(self) -> "Jet":
        return Jet(self.c.imag, self.order)

    def conj(self) -> "Jet":
        return Jet(np.conj(self.c), self.order)

    # arithmetic
    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(np.asarray(other), self.order)

    def _expand(self, arr):
        return np.asarray(arr)[None, None]

    def __add__(self, other):
        if isinstance(other, Jet):
            n = min(self.order, other.order)
            return Jet(self.truncate(n).c + other.truncate(n).c, n)
        c = self.c.astype(np.result_type(self.c, np.asarray(other)), copy=True)
        c[0, 0] = c[0, 0] + other
        return Jet(c, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * self._expand(other), self.order)
        n = min(self.order, other.order)
        a = self.truncate(n).c
        b = other.truncate(n).c
        m = n + 1
        shape = (m, m) + np.broadcast_shapes(a.shape[2:], b.shape[2:])
        out = np.zeros(shape, dtype=np.result_type(a, b))
        for k in range(m):
            for l in range(m - k):
                ak = a[k, l]
                if not np.any(ak):
                    continue
                out[k:, l:] += ak * b[: m - k, : m - l]
        return Jet(out, n)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.c / self._expand(other), self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            out = Jet.constant(np.ones(self.batch_shape), self.order)
            for _ in range(p):
                out = out * self
            return out
        return self.power(p)

    # composition with scalar functions
    def compose(self, derivs: Sequence) -> "Jet":
        """``g(self)`` from ``derivs[k] = g^{(k)}(self.value)`` for ``k <= order``."""
        n = self.order
        delta = Jet(self.c.copy(), n)
        delta.c[0, 0] = 0
        out = Jet.constant(np.asarray(derivs[0]), n)
        power = None
        for k in range(1, n + 1):
            power = delta if power is None else power * delta
            out = out + power * (np.asarray(derivs[k]) / math.factorial(k))
        return out

    def apply(self, g: Callable, derivs_of: Callable) -> "Jet":
        return self.compose(derivs_of(self.value, self.order))

    def reciprocal(self) -> "Jet":
        a = self.value
        return self.compose([(-1) ** k * math.factorial(k) * a ** (-(k + 1)) for k in range(self.order + 1)])

    def power(self, p: float) -> "Jet":
        a = self.value
        derivs = []
        coef = 1.0
        for k in range(self.order + 1):
            derivs.append(coef * a ** (p - k))
            coef *= p - k
        return self.compose(derivs)

    def sqrt(self) -> "Jet":
        return self.power(0.5)

    def exp(self) -> "Jet":
        e = np.exp(self.value)
        return self.compose([e] * (self.order + 1))

    def log(self) -> "Jet":
        a = self.value
        derivs = [np.log(a)] + [(-1) ** (k - 1) * math.factorial(k - 1) * a ** (-k) for k in range(1, self.order + 1)]
        return self.compose(derivs)

    def sin(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        cyc = [s, c, -s, -c]
        return self.compose([cyc[k % 4] for k in range(self.order + 1)])

    def cos(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        cyc = [c, -s, -c, s]
        return self.compose([cyc[k % 4] for k in range(self.order + 1)])

    def cosh(self) -> "Jet":
        s, c = np.sinh(self.value), np.cosh(self.value)
        return self.compose([c if k % 2 == 0 else s for k in range(self.order + 1)])

    def sinh(self) -> "Jet":
        s, c = np.sinh(self.value), np.cosh(self.value)
        return self.compose([s if k % 2 == 0 else c for k in range(self.order + 1)])

    def __repr__(self):
        return f"Jet(order={self.order}, batch={self.batch_shape})"


# vector helpers (vectors are lists of three jets)


def vdot(a: Sequence[Jet], b: Sequence[Jet]) -> Jet:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def vcross(a: Sequence[Jet], b: Sequence[Jet]) -> list[Jet]:
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def vscale(a: Sequence[Jet], s) -> list[Jet]:
    return [x * s for x in a]


def vadd(a, b):
    return [x + y for x, y in zip(a, b)]


def vsub(a, b):
    return [x - y for x, y in zip(a, b)]


def vd(a: Sequence[Jet], which: str) -> list[Jet]:
    return [x.d(which) for x in a]


def values(a: Sequence[Jet]) -> np.ndarray:
    """Stack the values of a vector jet along a trailing axis of length 3."""
    return np.stack([np.asarray(x.value) for x in a], axis=-1)


def coordinates(z, order: int) -> tuple[Jet, Jet]:
    """Jets of the chart coordinates ``u`` and ``v`` at complex points ``z``."""
    z = np.asarray(z, dtype=complex)
    return Jet.variable(z.real, "u", order), Jet.variable(z.imag, "v", order)


def complex_jet(derivs: Sequence, order: int) -> Jet:
    """Jet of a holomorphic ``F`` from ``derivs[n] = F^{(n)}(z)``.

    The coefficient of ``du**a dv**b`` is ``binom(a+b, b) i**b F^{(a+b)} / (a+b)!``.
    """
    first = np.asarray(derivs[0])
    c = np.zeros((order + 1, order + 1) + first.shape, dtype=complex)
    for n in range(order + 1):
        dn = np.asarray(derivs[n]) / math.factorial(n)
        for b in range(n + 1):
            c[n - b, b] = math.comb(n, b) * (1j ** b) * dn
    return Jet(c, order)
