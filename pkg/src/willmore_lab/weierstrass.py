"""Minimal immersions from Weierstrass data ``(g, omega)``.

``phi1 = (1 - g**2) omega / 2``, ``phi2 = i (1 + g**2) omega / 2``, ``phi3 = g omega``
and ``f = Re int_{z0}^{z} (phi1, phi2, phi3)``.

The primitive is evaluated in closed form from partial fractions: polynomial
part, principal parts and ``Re(c) log|z - p|`` for the simple-pole terms. This
is valid exactly when every residue is real, which is the single-valuedness
condition checked by :func:`period_check`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from .errors import MultiValued, NoRealRoot, NotAPuncture, PathHitsPole
from .jets import complex_jet
from .meromorphic import INF, MeromorphicForm, MeromorphicFunction, Path, Z, as_point, is_inf
from .surface_core import Immersion

PERIOD_TOL = 1e-9


@dataclass
class WeierstrassData:
    g: MeromorphicFunction
    omega: MeromorphicForm
    punctures: tuple
    basepoint: complex = 1.0
    name: str = "weierstrass"

    def __post_init__(self):
        self.punctures = tuple(as_point(p) for p in self.punctures)
        for p in self.punctures:
            if not is_inf(p) and abs(p - self.basepoint) < 1e-12:
                raise NotAPuncture("basepoint coincides with a puncture")


@dataclass(frozen=True)
class EndInfo:
    point: object
    branch_order: int
    pole_orders: tuple
    residues: tuple
    planar: bool
    embedded: bool

    @property
    def multiplicity(self) -> int:
        return self.branch_order + 1


def induced_forms(d: WeierstrassData) -> tuple[MeromorphicForm, MeromorphicForm, MeromorphicForm]:
    g2 = d.g * d.g
    w = d.omega.coefficient
    return (
        MeromorphicForm((1 - g2) * w * Fraction(1, 2)),
        MeromorphicForm((1 + g2) * w * 0.5j),
        MeromorphicForm(d.g * w),
    )


def conformality_identity(d: WeierstrassData) -> MeromorphicFunction:
    """``phi1**2 + phi2**2 + phi3**2`` as a coefficient (identically zero)."""
    p1, p2, p3 = induced_forms(d)
    return p1.square_coefficient() + p2.square_coefficient() + p3.square_coefficient()


def _all_pole_points(d: WeierstrassData):
    pts = list(d.punctures)
    for form in induced_forms(d):
        for p, _ in form.poles():
            if not any((is_inf(p) and is_inf(q)) or (not is_inf(p) and not is_inf(q) and abs(p - q) < 1e-9)
                       for q in pts):
                pts.append(p)
    return pts


def period_check(d: WeierstrassData) -> float:
    """``max |Re(2 pi i Res_p phi_i)|`` over all poles (genus 0: periods are residues)."""
    worst = 0.0
    for form in induced_forms(d):
        for p in _all_pole_points(d):
            r = complex(form.residue(p))
            worst = max(worst, abs((2j * math.pi * r).real))
    return worst


def end_classification(d: WeierstrassData, p, *, tol: float = 1e-9) -> EndInfo:
    p = as_point(p)
    if not any((is_inf(p) and is_inf(q)) or (not is_inf(p) and not is_inf(q) and abs(p - q) < 1e-12)
               for q in d.punctures):
        raise NotAPuncture(f"{p!r} is not a declared puncture")
    forms = induced_forms(d)
    orders = tuple(f.pole_order(p) for f in forms)
    residues = tuple(complex(f.residue(p)) for f in forms)
    top = max(orders)
    return EndInfo(
        point=p,
        branch_order=top - 2,
        pole_orders=orders,
        residues=residues,
        planar=all(abs(r) <= tol for r in residues),
        embedded=top <= 2,
    )


class WeierstrassImmersion(Immersion):
    """Analytic jets of ``f = Re int (phi1, phi2, phi3)`` from the closed-form primitive."""

    analytic = True

    def __init__(self, d: WeierstrassData, *, domain=None, scale=1.0):
        self.data = d
        self.name = d.name
        self.forms = induced_forms(d)
        self.pf = [f.coefficient.to_float().partial_fractions() for f in self.forms]
        self.punctures = tuple(p for p in d.punctures if not is_inf(p))
        self.domain = domain
        self.scale = scale
        self.normal_note = "nu = f_u x f_v / |f_u x f_v| (Gauss map composed with stereographic projection)"
        z0 = np.array([complex(d.basepoint)])
        self._f0 = np.array([pf.antiderivative_eval(z0)[0] for pf in self.pf])

    def primitive(self, z):
        z = np.asarray(z, dtype=complex)
        return np.stack([pf.antiderivative_eval(z) - c for pf, c in zip(self.pf, self._f0)], axis=-1)

    def value(self, z):
        return self.primitive(z).real

    def jet(self, z, order):
        z = np.asarray(z, dtype=complex)
        out = []
        for i, pf in enumerate(self.pf):
            derivs = [pf.antiderivative_eval(z) - self._f0[i]]
            derivs += [pf.derivative_eval(z, n - 1) for n in range(1, order + 1)]
            out.append(complex_jet(derivs, order).real())
        return out


def immersion_from_data(d: WeierstrassData, *, allow_cut: bool = False, domain=None) -> WeierstrassImmersion:
    gap = period_check(d)
    if gap > PERIOD_TOL and not allow_cut:
        raise MultiValued(f"real periods do not vanish (max {gap:.3e})")
    return WeierstrassImmersion(d, domain=domain)


def path_value(d: WeierstrassData, z, *, tol: float = 1e-12) -> np.ndarray:
    """``f(z)`` by numerical contour integration from the basepoint (oracle route).

    The straight segment is replaced by a two-leg detour when it passes too
    close to a pole; on single-valued data the result is path independent.
    """
    z0, z = complex(d.basepoint), complex(z)
    poles = [p for form in induced_forms(d) for p, _ in form.poles() if not is_inf(p)]
    pts = [z0, z]
    seg = z - z0
    for p in poles:
        t = np.clip(((p - z0) * np.conj(seg)).real / max(abs(seg) ** 2, 1e-300), 0.0, 1.0)
        dist = abs(z0 + t * seg - p)
        if dist < 0.25 * max(abs(seg), 1e-3):
            normal = 1j * seg / abs(seg)
            pts = [z0, z0 + t * seg + normal * 0.5 * max(abs(seg), 0.5), z]
            break
    out = []
    for form in induced_forms(d):
        try:
            out.append(form.path_integral(Path.polyline(pts), tol=tol).real)
        except PathHitsPole:
            raise
    return np.array(out)


# ---------------------------------------------------------------------------
# catalog data


def catenoid_data() -> WeierstrassData:
    return WeierstrassData(Z, MeromorphicForm(1 / (Z * Z)), (0, INF), 1.0, "catenoid")


def enneper_data() -> WeierstrassData:
    return WeierstrassData(Z, MeromorphicForm(MeromorphicFunction((1,))), (INF,), 0.0, "enneper")


@dataclass
class TrinoidParams:
    """Parameters of the three-ended family.

    Case 1 is selected by ``(r1, r2)``; the remaining fields are derived:
    ``a**2`` is the positive root of ``12 a^4 - (r2^2 + 3 r1^2 + 4) a^2 - r1^2 = 0``,
    ``d = (1 - r1/a)/3`` (the branch of ``a^2 (1 - 3d)^2 = r1^2`` that reduces to
    ``1/3`` at ``r1 = 0``), ``B = sqrt(3) |3a^2 - 1| / |r2|``, ``c = 0``, ``theta = 1``.
    Case 2 (``symmetric=True``) has ``a = 1/sqrt(3)``, ``d = 1`` and a free ``B``.
    """

    r1: float = 0.0
    r2: float = 2.0
    symmetric: bool = False
    B: float | None = None
    a: float = field(init=False, default=float("nan"))
    c: float = field(init=False, default=0.0)
    d: float = field(init=False, default=float("nan"))
    theta: float = field(init=False, default=1.0)

    def __post_init__(self):
        if self.symmetric:
            self.a = 1 / math.sqrt(3)
            self.d = 1.0
            if self.B is None:
                self.B = 1.0
            return
        if self.r2 == 0:
            raise NoRealRoot("r2 must be non-zero")
        q = self.r2 ** 2 + 3 * self.r1 ** 2 + 4
        a2 = (q + math.sqrt(q * q + 48 * self.r1 ** 2)) / 24
        if not a2 > 0 or abs(3 * a2 - 1) < 1e-14:
            raise NoRealRoot("no admissible root a^2 > 0 with 3a^2 != 1")
        self.a = math.sqrt(a2)
        self.d = (1 - self.r1 / self.a) / 3
        self.B = math.sqrt(3) * abs(3 * a2 - 1) / abs(self.r2)

    def residuals(self) -> tuple[float, float, float]:
        """Defects of the three defining relations (zero for case 1)."""
        a2 = self.a ** 2
        return (
            12 * a2 ** 2 - (self.r2 ** 2 + 3 * self.r1 ** 2 + 4) * a2 - self.r1 ** 2,
            a2 * (1 - 3 * self.d) ** 2 - self.r1 ** 2,
            self.B ** 2 - 3 * abs(3 * a2 - 1) ** 2 / self.r2 ** 2,
        )


def trinoid_data(p: TrinoidParams) -> WeierstrassData:
    a, c, d, B, th = p.a, p.c, p.d, p.B, p.theta
    g = MeromorphicFunction((B * d, B * c, B), (a, 1))
    w = MeromorphicFunction((a * a * th, 2 * a * th, th), (1 / 9, 0, -2 / 3, 0, 1))
    s = 1 / math.sqrt(3)
    name = f"trinoid-sym(B={B:g})" if p.symmetric else f"trinoid(r1={p.r1:g},r2={p.r2:g})"
    return WeierstrassData(g, MeromorphicForm(w), (s, -s, INF), 0.0, name)
