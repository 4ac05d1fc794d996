"""Rational functions and 1-forms on the Riemann sphere.

Polynomials are stored as tuples of coefficients in ascending degree. When
every coefficient is an ``int`` or ``Fraction`` the arithmetic stays exact
(used by :mod:`willmore_lab.bundle_count`); otherwise coefficients are
complex floats and zero tests use a relative tolerance.

The chart at infinity is always ``w = 1/z`` with ``dz = -dw/w**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _gk
from .errors import NoConvergence, PathHitsPole, PoleAtPoint, ZeroForm

COEFF_TOL = 1e-12
ROOT_TOL = 1e-10


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(p) -> bool:
    return p is INF or (isinstance(p, str) and p.lower() in {"inf", "infinity", "oo"})


def as_point(p):
    """Normalise a point on the sphere: ``INF`` or a finite number."""
    if is_inf(p):
        return INF
    if isinstance(p, (int, Fraction)):
        return p
    return complex(p)


# ---------------------------------------------------------------------------
# polynomial helpers (generic over exact / float coefficients)


def _is_exact_seq(coeffs) -> bool:
    return all(isinstance(c, (int, Fraction)) and not isinstance(c, bool) for c in coeffs)


def _norm(p) -> float:
    return max((abs(c) for c in p), default=0.0)


def _trim(p, tol=COEFF_TOL):
    p = list(p)
    if _is_exact_seq(p):
        while p and p[-1] == 0:
            p.pop()
    else:
        scale = _norm(p)
        while p and abs(p[-1]) <= tol * scale:
            p.pop()
    return tuple(p)


def _add(p, q):
    n = max(len(p), len(q))
    return tuple((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n))


def _scale(p, s):
    return tuple(c * s for c in p)


def _mul(p, q):
    if not p or not q:
        return ()
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return tuple(out)


def _divmod(p, q):
    """Polynomial long division, ``q`` trimmed and non-zero."""
    p = list(p)
    if len(p) < len(q):
        return (), tuple(p)
    lead = q[-1]
    quot = [0] * (len(p) - len(q) + 1)
    for k in range(len(quot) - 1, -1, -1):
        c = p[k + len(q) - 1] / lead if not isinstance(lead, (int, Fraction)) else Fraction(p[k + len(q) - 1]) / lead
        quot[k] = c
        for j, b in enumerate(q):
            p[k + j] -= c * b
    return tuple(quot), tuple(p[: len(q) - 1])


def _deriv(p):
    return tuple(k * p[k] for k in range(1, len(p)))


def _horner(p, z):
    acc = 0 * z if isinstance(z, np.ndarray) else 0
    for c in reversed(p):
        acc = acc * z + c
    return acc


def _shift(p, a):
    """Coefficients of ``p(a + t)`` in ascending powers of ``t``."""
    out = ()
    for c in reversed(p):
        out = _add(_mul(out, (a, 1)), (c,))
    return out


def _series_div(num, den, n):
    """First ``n`` power-series coefficients of ``num / den`` (den[0] != 0)."""
    exact = _is_exact_seq(list(num) + list(den))
    d0 = Fraction(den[0]) if exact else den[0]
    out = []
    for k in range(n):
        acc = num[k] if k < len(num) else 0
        for j in range(1, min(k, len(den) - 1) + 1):
            acc -= den[j] * out[k - j]
        out.append(acc / d0)
    return out


def _deflate(p, a):
    """Synthetic division of ``p`` by ``(z - a)``; returns (quotient, remainder)."""
    if not p:
        return (), 0
    quot = [0] * (len(p) - 1)
    acc = p[-1]
    for k in range(len(p) - 2, -1, -1):
        quot[k] = acc
        acc = acc * a + p[k]
    return tuple(quot), acc


def _root_multiplicity(p, a, tol=ROOT_TOL):
    """Number of times ``(z - a)`` divides ``p`` (relative tolerance in float mode)."""
    count = 0
    exact = _is_exact_seq(p) and isinstance(a, (int, Fraction))
    while len(p) > 1:
        quot, rem = _deflate(p, a)
        if exact:
            ok = rem == 0
        else:
            # max(|a|, 1) keeps the test relative when a is at or near 0
            scale = sum(abs(c) * max(abs(a), 1.0) ** k for k, c in enumerate(p))
            ok = abs(rem) <= tol * scale
        if not ok:
            break
        p = quot
        count += 1
    return count, p


def _roots(p):
    """Roots of a float polynomial with multiplicities, clustered and polished."""
    p = _trim([complex(c) for c in p])
    if len(p) <= 1:
        return []
    raw = np.roots(np.array(p[::-1], dtype=complex))
    clusters: list[list[complex]] = []
    for r in sorted(raw, key=lambda c: (round(c.real, 6), round(c.imag, 6))):
        for cl in clusters:
            c0 = np.mean(cl)
            if abs(r - c0) <= 1e-4 * (1.0 + abs(c0)):
                cl.append(r)
                break
        else:
            clusters.append([r])
    out = []
    for cl in clusters:
        m = len(cl)
        root = complex(np.mean(cl))
        # Newton on the (m-1)-th derivative, where the root is simple
        q = p
        for _ in range(m - 1):
            q = _deriv(q)
        dq = _deriv(q)
        for _ in range(30):
            d = _horner(dq, root)
            if d == 0:
                break
            step = _horner(q, root) / d
            root -= step
            if abs(step) <= 1e-16 * (1 + abs(root)):
                break
        out.append((_clean(root), m))
    return out


def _clean(z: complex) -> complex:
    re, im = z.real, z.imag
    scale = max(abs(z), 1.0)
    if abs(im) < 1e-14 * scale:
        im = 0.0
    if abs(re) < 1e-14 * scale:
        re = 0.0
    return complex(re, im)


def _gcd_exact(p, q):
    p, q = _trim(p), _trim(q)
    while q:
        _, r = _divmod(p, q)
        p, q = q, _trim(r)
    return p


# ---------------------------------------------------------------------------


class MeromorphicFunction:
    """A reduced rational function ``num(z) / den(z)``.

    The denominator is monic after reduction. Common factors are cancelled
    exactly (Euclid) for rational coefficients and by cancelling shared
    roots within ``tol`` for floating coefficients.
    """

    __slots__ = ("num", "den", "exact", "_pf")

    def __init__(self, num: Sequence, den: Sequence = (1,), *, reduce: bool = True, tol: float = COEFF_TOL):
        num = tuple(num)
        den = tuple(den)
        self.exact = _is_exact_seq(num + den)
        if not self.exact:
            num = tuple(complex(c) for c in num)
            den = tuple(complex(c) for c in den)
        num, den = _trim(num, tol), _trim(den, tol)
        if not den:
            raise ZeroDivisionError("denominator is identically zero")
        if reduce and num:
            num, den = self._cancel(num, den)
        lead = den[-1]
        if self.exact:
            lead = Fraction(lead)
            num = tuple(Fraction(c) / lead for c in num)
            den = tuple(Fraction(c) / lead for c in den)
            num = tuple(int(c) if c.denominator == 1 else c for c in num)
            den = tuple(int(c) if c.denominator == 1 else c for c in den)
        else:
            num = tuple(c / lead for c in num)
            den = tuple(c / lead for c in den)
        self.num = num
        self.den = den
        self._pf = None

    def _cancel(self, num, den):
        if self.exact:
            g = _gcd_exact(num, den)
            if len(g) > 1:
                num, _ = _divmod(num, g)
                den, _ = _divmod(den, g)
            return _trim(num), _trim(den)
        for root, mult in _roots(den):
            for _ in range(mult):
                qn, rem = _deflate(num, root)
                scale = sum(abs(c) * abs(root) ** k for k, c in enumerate(num))
                if len(num) <= 1 or abs(rem) > ROOT_TOL * scale:
                    break
                qd, _ = _deflate(den, root)
                num, den = qn, qd
        return num, den

    # construction helpers
    @classmethod
    def constant(cls, c):
        return cls((c,))

    @classmethod
    def identity(cls):
        return cls((0, 1))

    @classmethod
    def from_roots(cls, zeros=(), poles=(), scale=1):
        """``scale * prod(z - a) / prod(z - b)`` over the given root lists."""
        num = (scale,)
        for a in zeros:
            num = _mul(num, (-a, 1))
        den = (1,)
        for b in poles:
            den = _mul(den, (-b, 1))
        return cls(num, den)

    # basic properties
    def is_zero(self) -> bool:
        return len(self.num) == 0

    @property
    def deg_num(self) -> int:
        return len(self.num) - 1

    @property
    def deg_den(self) -> int:
        return len(self.den) - 1

    def to_float(self) -> "MeromorphicFunction":
        if not self.exact:
            return self
        return MeromorphicFunction([complex(c) for c in self.num] or [0j], [complex(c) for c in self.den])

    # evaluation
    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        """Value at ``z`` (scalar or array). Raises :class:`PoleAtPoint` at a pole."""
        if is_inf(z):
            if self.deg_num > self.deg_den:
                raise PoleAtPoint("pole at infinity")
            if self.deg_num < self.deg_den or self.is_zero():
                return 0
            return self.num[-1] / self.den[-1]
        if isinstance(z, np.ndarray):
            zz = z.astype(complex)
            n = np.polyval(np.array(self.num[::-1] or (0,), dtype=complex), zz)
            d = np.polyval(np.array(self.den[::-1], dtype=complex), zz)
            if np.any(d == 0):
                raise PoleAtPoint("pole inside evaluation batch")
            return n / d
        d = _horner(self.den, z)
        if d == 0 or (not self.exact and abs(d) <= 1e-300):
            raise PoleAtPoint(f"pole at z={z!r}")
        n = _horner(self.num, z)
        if self.exact and isinstance(z, (int, Fraction)):
            return Fraction(n) / d
        return n / d

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, MeromorphicFunction):
            return other
        if isinstance(other, Number):
            return MeromorphicFunction((other,))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = _mul(self.num, other.den), _mul(other.num, self.den)
        num = _add(a, b)
        if not (self.exact and other.exact):
            # a coefficient that cancels to rounding level is zero
            floor = COEFF_TOL * max(_norm(a), _norm(b))
            num = tuple(0j if abs(c) <= floor else c for c in num)
        return MeromorphicFunction(num or (0,), _mul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return MeromorphicFunction(_scale(self.num, -1) or (0,), self.den, reduce=False)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, MeromorphicForm):
            return other * self
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return MeromorphicFunction(_mul(self.num, other.num) or (0,), _mul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return MeromorphicFunction(_mul(self.num, other.den) or (0,), _mul(self.den, other.num))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k: int):
        out = MeromorphicFunction((1,))
        base = self if k >= 0 else 1 / self
        for _ in range(abs(k)):
            out = out * base
        return out

    def derivative(self) -> "MeromorphicFunction":
        num = _add(_mul(_deriv(self.num), self.den), _scale(_mul(self.num, _deriv(self.den)), -1))
        return MeromorphicFunction(num or (0,), _mul(self.den, self.den))

    def compose_inverse(self) -> "MeromorphicFunction":
        """The function ``w -> self(1/w)``."""
        n, m = self.deg_num, self.deg_den
        num_rev = tuple(reversed(self.num))
        den_rev = tuple(reversed(self.den))
        if m >= n:
            num_rev = (0,) * (m - n) + num_rev
        else:
            den_rev = (0,) * (n - m) + den_rev
        return MeromorphicFunction(num_rev or (0,), den_rev)

    # local structure
    def order_at(self, p) -> int:
        """Zero order (positive) or minus the pole order at ``p``."""
        if self.is_zero():
            raise ZeroForm("order of the zero function is undefined")
        if is_inf(p):
            return self.deg_den - self.deg_num
        p = as_point(p)
        zn, _ = _root_multiplicity(self.num, p)
        zd, _ = _root_multiplicity(self.den, p)
        return zn - zd

    def laurent(self, p, n_terms: int):
        """Laurent data at a finite ``p``: ``(order, [c0, c1, ...])`` with
        ``f = sum c_k (z - p)**(order + k)``."""
        if is_inf(p):
            return self.compose_inverse().laurent(0, n_terms)
        p = as_point(p)
        if self.is_zero():
            return 0, [0] * n_terms
        zn, num = _root_multiplicity(self.num, p)
        zd, den = _root_multiplicity(self.den, p)
        coeffs = _series_div(_shift(num, p), _shift(den, p), n_terms)
        return zn - zd, coeffs

    def zeros(self):
        if not self.num:
            raise ZeroForm("zero function has no isolated zeros")
        out = _roots(self.to_float().num)
        if self.deg_den > self.deg_num:
            out.append((INF, self.deg_den - self.deg_num))
        return out

    def poles(self):
        out = _roots(self.to_float().den)
        if self.deg_num > self.deg_den:
            out.append((INF, self.deg_num - self.deg_den))
        return out

    def partial_fractions(self) -> "PartialFractions":
        if self._pf is None:
            self._pf = PartialFractions.of(self.to_float())
        return self._pf

    # serialisation
    def to_json(self) -> dict:
        def pairs(p):
            return [[float(complex(c).real), float(complex(c).imag)] for c in p]

        return {"num": pairs(self.num or (0,)), "den": pairs(self.den)}

    @classmethod
    def from_json(cls, data: dict) -> "MeromorphicFunction":
        return cls([complex(a, b) for a, b in data["num"]], [complex(a, b) for a, b in data["den"]])

    def __repr__(self):
        return f"MeromorphicFunction(num={list(self.num)}, den={list(self.den)})"

    def allclose(self, other: "MeromorphicFunction", tol=1e-10) -> bool:
        diff = self - other
        return diff.is_zero() or _norm(diff.num) <= tol * max(_norm(self.num), _norm(other.num), 1e-300)


Z = MeromorphicFunction.identity()


@dataclass(frozen=True)
class PartialFractions:
    """``poly(z) + sum_p sum_k c[p][k-1] (z - p)**(-k)``."""

    poly: tuple
    terms: tuple  # ((pole, (c1, c2, ...)), ...)

    @classmethod
    def of(cls, f: MeromorphicFunction) -> "PartialFractions":
        quot, _ = _divmod(f.num, f.den) if f.num else ((), ())
        terms = []
        for pole, mult in _roots(f.den):
            order, coeffs = f.laurent(pole, mult)
            n = -order
            # principal part: coefficients of (z-p)^{-n}, ..., (z-p)^{-1}
            principal = [0j] * n
            for k, c in enumerate(coeffs[:n]):
                principal[n - 1 - k] = complex(c)
            terms.append((pole, tuple(principal)))
        return cls(tuple(complex(c) for c in quot), tuple(terms))

    def residues(self):
        return {p: (c[0] if c else 0j) for p, c in self.terms}

    def derivative_eval(self, z, k: int = 0):
        """``d^k/dz^k`` of the function at ``z`` (array)."""
        z = np.asarray(z, dtype=complex)
        poly = np.array(self.poly[::-1] or (0,), dtype=complex)
        poly = np.polyder(poly, k) if k else poly
        out = np.polyval(poly, z) if poly.size else np.zeros_like(z)
        for p, coeffs in self.terms:
            t = z - p
            for n, c in enumerate(coeffs, start=1):
                if c == 0:
                    continue
                fact = (-1) ** k * math.prod(range(n, n + k))
                out = out + c * fact * t ** (-(n + k))
        return out

    def antiderivative_eval(self, z, branch: str = "real-log"):
        """A primitive at ``z``. ``branch='real-log'`` uses ``log|z-p|`` for the
        logarithmic terms (valid when every residue is real up to the caller's
        tolerance on real parts); ``'principal'`` uses the principal log."""
        z = np.asarray(z, dtype=complex)
        poly = np.array(self.poly[::-1] or (0,), dtype=complex)
        out = np.polyval(np.polyint(poly), z)
        for p, coeffs in self.terms:
            t = z - p
            for n, c in enumerate(coeffs, start=1):
                if c == 0:
                    continue
                if n == 1:
                    if branch == "real-log":
                        out = out + c.real * np.log(np.abs(t)) + 1j * c.imag * np.log(np.abs(t))
                    else:
                        out = out + c * np.log(t)
                else:
                    out = out + c * t ** (1 - n) / (1 - n)
        return out


class MeromorphicForm:
    """A meromorphic 1-form ``coefficient(z) dz`` on the Riemann sphere."""

    __slots__ = ("coefficient",)

    def __init__(self, coefficient):
        if not isinstance(coefficient, MeromorphicFunction):
            coefficient = MeromorphicFunction((coefficient,))
        self.coefficient = coefficient

    def __repr__(self):
        return f"MeromorphicForm({self.coefficient!r} dz)"

    def is_zero(self):
        return self.coefficient.is_zero()

    def __add__(self, other):
        return MeromorphicForm(self.coefficient + other.coefficient)

    def __sub__(self, other):
        return MeromorphicForm(self.coefficient - other.coefficient)

    def __neg__(self):
        return MeromorphicForm(-self.coefficient)

    def __mul__(self, other):
        if isinstance(other, MeromorphicForm):
            raise TypeError("product of two 1-forms is a quadratic differential")
        if isinstance(other, MeromorphicFunction):
            return MeromorphicForm(self.coefficient * other)
        return MeromorphicForm(self.coefficient * MeromorphicFunction((other,)))

    __rmul__ = __mul__

    def square_coefficient(self) -> MeromorphicFunction:
        """Coefficient of ``self**2`` as a quadratic differential."""
        return self.coefficient * self.coefficient

    def chart_at_infinity(self) -> MeromorphicFunction:
        """Coefficient ``h(w)`` with ``self = h(w) dw`` in the chart ``w = 1/z``."""
        w2 = MeromorphicFunction((0, 0, 1))
        return -(self.coefficient.compose_inverse() / w2)

    def _local(self, p):
        if is_inf(p):
            return self.chart_at_infinity(), 0
        return self.coefficient, as_point(p)

    def order(self, p) -> int:
        if self.is_zero():
            raise ZeroForm("order of the zero form is undefined")
        coeff, q = self._local(p)
        return coeff.order_at(q)

    def pole_order(self, p) -> int:
        return max(0, -self.order(p))

    def zero_order(self, p) -> int:
        return max(0, self.order(p))

    def residue(self, p):
        """Coefficient of ``(z - p)**-1`` (chart ``w = 1/z`` at infinity)."""
        if self.is_zero():
            return 0
        coeff, q = self._local(p)
        order = coeff.order_at(q)
        if order >= 0:
            return 0
        _, coeffs = coeff.laurent(q, -order)
        return coeffs[-order - 1]

    def poles(self):
        """``[(point, pole order), ...]`` including infinity."""
        out = [(p, m) for p, m in self.coefficient.poles() if not is_inf(p)]
        if not self.is_zero():
            k = self.pole_order(INF)
            if k:
                out.append((INF, k))
        return out

    def residue_sum(self):
        return sum(self.residue(p) for p, _ in self.poles())

    def path_integral(self, path, *, tol: float = 1e-11, clearance: float = 1e-8, max_intervals: int = 4000):
        """Contour integral along ``path`` (a :class:`Path` or a sequence of
        sample points, read as a polyline)."""
        if not isinstance(path, Path):
            path = Path.polyline(path)
        finite_poles = [p for p, _ in self.poles() if not is_inf(p)]
        if finite_poles:
            t = np.linspace(0.0, 1.0, 4097)
            pts = path.point(t)
            for p in finite_poles:
                if np.min(np.abs(pts - p)) < clearance:
                    raise PathHitsPole(f"path passes within {clearance} of pole {p}")
        coeff = self.coefficient.to_float()

        def integrand(t):
            return coeff.eval(path.point(t)) * path.tangent(t)

        total = []
        for a, b in path.breaks():
            try:
                val, _, _ = _gk.adaptive(integrand, a, b, tol=tol, max_intervals=max_intervals)
            except PoleAtPoint as exc:
                raise PathHitsPole(str(exc)) from exc
            total.append(complex(val))
        return _gk.fsum_complex(total)


@dataclass(frozen=True)
class Path:
    """A piecewise-smooth path ``t in [0, 1] -> C`` with its derivative."""

    point: Callable
    tangent: Callable
    knots: tuple = (0.0, 1.0)

    def breaks(self):
        return list(zip(self.knots[:-1], self.knots[1:]))

    @classmethod
    def circle(cls, center=0j, radius=1.0, turns=1):
        c, r = complex(center), float(radius)
        w = 2 * np.pi * turns
        return cls(lambda t: c + r * np.exp(1j * w * np.asarray(t)),
                   lambda t: 1j * w * r * np.exp(1j * w * np.asarray(t)),
                   tuple(np.linspace(0, 1, 5)))

    @classmethod
    def segment(cls, a, b):
        a, b = complex(a), complex(b)
        return cls(lambda t: a + (b - a) * np.asarray(t), lambda t: (b - a) * np.ones_like(np.asarray(t, dtype=float)))

    @classmethod
    def polyline(cls, points: Iterable):
        pts = np.asarray(list(points), dtype=complex)
        if pts.size < 2:
            raise ValueError("a polyline needs at least two samples")
        n = len(pts) - 1
        knots = tuple(np.linspace(0.0, 1.0, n + 1))

        def seg_index(t):
            return np.clip((np.asarray(t) * n).astype(int), 0, n - 1)

        def point(t):
            t = np.asarray(t, dtype=float)
            i = seg_index(t)
            local = t * n - i
            return pts[i] + (pts[i + 1] - pts[i]) * local

        def tangent(t):
            i = seg_index(t)
            return (pts[i + 1] - pts[i]) * n

        return cls(point, tangent, knots)


def residue_theorem_gap(form: MeromorphicForm, center, radius) -> float:
    """``|contour integral - 2 pi i * enclosed residues|`` on a circle."""
    enclosed = sum(form.residue(p) for p, _ in form.poles()
                   if not is_inf(p) and abs(p - center) < radius)
    val = form.path_integral(Path.circle(center, radius))
    return abs(val - 2j * np.pi * enclosed)


__all__ = [
    "INF",
    "MeromorphicForm",
    "MeromorphicFunction",
    "PartialFractions",
    "Path",
    "Z",
    "as_point",
    "is_inf",
    "residue_theorem_gap",
]
