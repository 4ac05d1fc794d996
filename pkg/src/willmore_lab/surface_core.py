"""Differential geometry of immersions on conformal charts.

Conventions
-----------
* ``nu = f_u x f_v / |f_u x f_v|``.
* ``H = (E N - 2 F M + G L) / (2 det)`` so that ``H = (k1 + k2) / 2`` with the sign
  fixed by ``nu``; the stereographic unit sphere gets the inward normal and
  ``H = +1``.
* ``lambda = log sqrt(det g)``; on a conformal chart the metric is
  ``e**lambda |dz|**2``.
* ``phi = 2 <f_zz, nu> = (L - N) / 2 - i M`` with ``d/dz = (d/du - i d/dv) / 2``.

With these conventions ``|A|**2 = |A0|**2 + 2 H**2`` and
``|phi|**2 = |A0|**2 e**(2 lambda) / 2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateMetric, NotConformal
from .jets import Jet, coordinates, vcross, vd, vdot, values

DEGENERATE_EPS = 1e-10


class Immersion:
    """Base class for jet providers ``z -> [f1, f2, f3]`` (lists of :class:`Jet`).

    Subclasses implement :meth:`jet`. ``scale`` is the chart length scale used
    for finite-difference steps and for normalising chart-dependent outputs;
    ``punctures`` lists finite chart points excluded from the domain.
    """

    name = "immersion"
    conformal = True
    conformal_tol = 1e-6
    scale = 1.0
    punctures: tuple = ()
    domain = None  # (u0, u1, v0, v1) sampling rectangle when meaningful
    analytic = True
    normal_note = ""

    def jet(self, z, order: int) -> list[Jet]:
        raise NotImplementedError

    def value(self, z) -> np.ndarray:
        return values(self.jet(z, 0))

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class JetImmersion(Immersion):
    """Closed-form immersion given as a function of the coordinate jets ``(U, V)``."""

    def __init__(self, func: Callable, name="surface", *, conformal=True, scale=1.0,
                 punctures=(), domain=None, normal_note=""):
        self.func = func
        self.name = name
        self.conformal = conformal
        self.scale = scale
        self.punctures = tuple(punctures)
        self.domain = domain
        self.normal_note = normal_note

    def jet(self, z, order):
        U, V = coordinates(z, order)
        return list(self.func(U, V))


def plane() -> Immersion:
    return JetImmersion(lambda U, V: [U, V, U * 0.0], "plane", domain=(-1, 1, -1, 1),
                        normal_note="nu = +e3")


def round_sphere(radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> Immersion:
    """Inverse stereographic chart from the north pole; the chart normal is inward."""
    c = np.asarray(center, dtype=float)
    r = float(radius)

    def func(U, V):
        q = U * U + V * V
        inv = (q + 1.0).reciprocal()
        return [U * inv * (2 * r) + c[0], V * inv * (2 * r) + c[1], (q - 1.0) * inv * r + c[2]]

    return JetImmersion(func, f"sphere(r={r:g})", domain=(-2, 2, -2, 2),
                        normal_note="inward normal, H = +1/r")


def catenoid_closed_form() -> Immersion:
    """Unit catenoid ``(cosh s cos t, cosh s sin t, s)`` in the chart ``z = s + i t``."""

    def func(U, V):
        ch = U.cosh()
        return [ch * V.cos(), ch * V.sin(), U]

    return JetImmersion(func, "catenoid-closed", domain=(-2, 2, -math.pi, math.pi))


def torus(R: float = math.sqrt(2.0), r: float = 1.0) -> Immersion:
    """Torus of revolution in toroidal coordinates (conformal).

    ``u = sigma`` is the tube angle, ``v = sinh(eta0) * phi`` the rescaled rotation
    angle, with ``cosh(eta0) = R / r``. ``R / r = sqrt(2)`` is the Willmore torus.
    """
    if not R > r > 0:
        raise ValueError("need R > r > 0")
    a = math.sqrt(R * R - r * r)
    sh = a / r
    ch = R / r

    def func(U, V):
        inv = (ch - U.cos()).reciprocal()
        phi = V * (1.0 / sh)
        rho = inv * (a * sh)
        return [rho * phi.cos(), rho * phi.sin(), U.sin() * inv * a]

    return JetImmersion(func, f"torus(R={R:g},r={r:g})",
                        domain=(-math.pi, math.pi, -math.pi * sh, math.pi * sh))


def triaxial_ellipsoid(a=1.0, b=1.5, c=2.0) -> Immersion:
    """Latitude-longitude chart; not conformal."""

    def func(U, V):
        cv = V.cos()
        return [U.cos() * cv * a, U.sin() * cv * b, V.sin() * c]

    return JetImmersion(func, f"ellipsoid({a:g},{b:g},{c:g})", conformal=False,
                        domain=(-math.pi, math.pi, -1.2, 1.2))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


class Spheroid(Immersion):
    """Spheroid ``(a sin t cos v, a sin t sin v, c cos t)`` in isothermal coordinates.

    The conformal coordinate ``u`` satisfies ``du/dt = sqrt(a^2 cos^2 t + c^2 sin^2 t) / (a sin t)``
    with ``u = 0`` on the equator. Base points are found by Newton iteration on
    a Gauss-Legendre evaluation of ``u(t)``; jets in ``u`` come from Picard
    iteration of the ODE in jet arithmetic.
    """

    analytic = True

    def __init__(self, a: float = 1.0, c: float = 1.5):
        self.a, self.c = float(a), float(c)
        self.name = f"spheroid(a={a:g},c={c:g})"
        umax = float(self._u_of_t(np.array([math.pi - 0.3]))[0])
        self.domain = (-umax, umax, -math.pi, math.pi)

    def _g(self, t):
        return np.sqrt(self.a ** 2 * np.cos(t) ** 2 + self.c ** 2 * np.sin(t) ** 2) / (self.a * np.sin(t))

    def _u_of_t(self, t):
        t = np.asarray(t, dtype=float)
        half = 0.5 * (t - math.pi / 2)
        mid = 0.5 * (t + math.pi / 2)
        nodes = mid[..., None] + half[..., None] * _GL_X
        return half * np.sum(_GL_W * self._g(nodes), axis=-1)

    def t_of_u(self, u):
        u = np.asarray(u, dtype=float)
        t = 2 * np.arctan(np.exp(u * self.a / max(self.a, self.c)))
        for _ in range(60):
            step = (self._u_of_t(t) - u) / self._g(t)
            t = np.clip(t - step, 1e-3, math.pi - 1e-3)
            if np.all(np.abs(step) < 1e-15):
                break
        return t

    def jet(self, z, order):
        z = np.asarray(z, dtype=complex)
        U, V = coordinates(z, order)
        t0 = self.t_of_u(z.real)
        T = Jet.constant(t0, order)
        for _ in range(order + 1):
            s, c = T.sin(), T.cos()
            rate = s * self.a / (c * c * self.a ** 2 + s * s * self.c ** 2).sqrt()
            T = rate.integrate_u() + t0
        rho = T.sin() * self.a
        return [rho * V.cos(), rho * V.sin(), T.cos() * self.c]


class RigidMotion(Immersion):
    """``s * R f + t`` for a rotation ``R``, scale ``s`` and translation ``t``."""

    def __init__(self, base: Immersion, rotation=None, translation=(0, 0, 0), scale: float = 1.0):
        self.base = base
        self.R = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
        self.t = np.asarray(translation, dtype=float)
        self.s = float(scale)
        self.name = f"motion({base.name})"
        self.conformal = base.conformal
        self.scale = base.scale
        self.punctures = base.punctures
        self.domain = base.domain

    def jet(self, z, order):
        f = self.base.jet(z, order)
        out = []
        for i in range(3):
            acc = f[0] * (self.s * self.R[i, 0]) + f[1] * (self.s * self.R[i, 1]) + f[2] * (self.s * self.R[i, 2])
            out.append(acc + self.t[i])
        return out

    def value(self, z):
        return self.s * self.base.value(z) @ self.R.T + self.t

    def limit_point(self, p):
        return self.s * self.R @ self.base.limit_point(p) + self.t


# one-dimensional O(h^2) central stencils on offsets -2..2
_STENCILS = np.array([
    [0.0, 0.0, 1.0, 0.0, 0.0],
    [0.0, -0.5, 0.0, 0.5, 0.0],
    [0.0, 1.0, -2.0, 1.0, 0.0],
    [-0.5, 1.0, 0.0, -1.0, 0.5],
    [1.0, -4.0, 6.0, -4.0, 1.0],
])


class FiniteDifferenceImmersion(Immersion):
    """Jets of ``base`` rebuilt from point values by tensor central differences.

    Every partial up to order 4 is accurate to ``O(h**2)``; with
    ``richardson=True`` the ``h`` and ``h/2`` estimates are combined to
    ``O(h**4)``. ``h`` is relative to ``base.scale``.
    """

    analytic = False

    def __init__(self, base: Immersion, h: float = 1e-2, richardson: bool = False):
        self.base = base
        self.h = float(h)
        self.richardson = richardson
        self.name = f"fd({base.name},h={h:g})"
        self.conformal = base.conformal
        self.conformal_tol = max(base.conformal_tol, 1e2 * h * h)
        self.scale = base.scale
        self.punctures = base.punctures
        self.domain = base.domain

    def _partials(self, z, order, h):
        off = np.arange(-2, 3) * h
        pts = z[..., None, None] + off[:, None] + 1j * off[None, :]
        vals = self.base.value(pts)  # (..., 5, 5, 3)
        out = {}
        for a in range(order + 1):
            for b in range(order + 1 - a):
                w = np.outer(_STENCILS[a], _STENCILS[b]) / h ** (a + b)
                out[(a, b)] = np.einsum("ij,...ijk->k...", w, vals)
        return out

    def jet(self, z, order):
        if order > 4:
            raise ValueError("finite-difference jets are limited to order 4")
        z = np.asarray(z, dtype=complex)
        h = self.h * self.scale
        parts = self._partials(z, order, h)
        if self.richardson:
            fine = self._partials(z, order, h / 2)
            parts = {k: (4 * fine[k] - parts[k]) / 3 for k in parts}
        return [Jet.from_partials({k: v[i] for k, v in parts.items()}, order, z.shape) for i in range(3)]

    def value(self, z):
        return self.base.value(z)


# ---------------------------------------------------------------------------


@dataclass
class GeometryJets:
    """Jets (order ``N - 2``) of the pointwise geometry of an immersion."""

    f: list
    nu: list
    E: Jet
    F: Jet
    G: Jet
    L: Jet
    M: Jet
    N: Jet
    det: Jet
    H: Jet
    K: Jet
    lam: Jet
    phi: Jet


def geometry_jets(fj: Sequence[Jet], *, check: bool = True, scale: float = 1.0) -> GeometryJets:
    n = fj[0].order
    if n < 2:
        raise ValueError("geometry needs jets of order >= 2")
    fu, fv = vd(fj, "u"), vd(fj, "v")
    fuu, fuv, fvv = vd(fu, "u"), vd(fu, "v"), vd(fv, "v")
    normal = vcross(fu, fv)
    det = vdot(normal, normal)
    if check:
        # rank test relative to |f_u| |f_v|, so it is blind to the chart scale
        dv = np.asarray(det.value)
        ref = np.asarray(vdot(fu, fu).value) * np.asarray(vdot(fv, fv).value)
        if np.any(~np.isfinite(dv)) or np.any(~(dv > DEGENERATE_EPS ** 2 * ref)) or np.any(~(ref > 0)):
            raise DegenerateMetric("|f_u x f_v| vanishes at a sample point")
    inv_len = det.power(-0.5)
    nu = [x * inv_len for x in normal]
    E, F, G = vdot(fu, fu), vdot(fu, fv), vdot(fv, fv)
    L, M, N = vdot(fuu, nu), vdot(fuv, nu), vdot(fvv, nu)
    m = n - 2
    E, F, G, det = E.truncate(m), F.truncate(m), G.truncate(m), det.truncate(m)
    inv_det = det.reciprocal()
    H = (E * N - F * M * 2.0 + G * L) * inv_det * 0.5
    K = (L * N - M * M) * inv_det
    lam = det.log() * 0.5
    phi = (L - N) * 0.5 - M * 1j
    return GeometryJets([x.truncate(m) for x in fj], [x.truncate(m) for x in nu],
                        E, F, G, L, M, N, det, H, K, lam, phi)


@dataclass
class ChartGeometry:
    f: np.ndarray
    nu: np.ndarray
    lam: np.ndarray
    H: np.ndarray
    K: np.ndarray
    phi: np.ndarray
    A_norm_sq: np.ndarray
    tracefree_norm_sq: np.ndarray
    conformality: np.ndarray = field(default=None)

    @property
    def area_density(self):
        return np.exp(self.lam)


def conformality_defect(E, F, G):
    """``(|E - G| + 2|F|) / ((E + G) / 2)``."""
    return (np.abs(E - G) + 2 * np.abs(F)) / (0.5 * (E + G))


def _jets(s: Immersion, z, order: int) -> GeometryJets:
    return geometry_jets(s.jet(z, order), scale=s.scale)


def _check_conformal(s: Immersion, gj: GeometryJets):
    defect = conformality_defect(gj.E.value, gj.F.value, gj.G.value)
    if s.conformal and np.any(defect > s.conformal_tol):
        raise NotConformal(f"conformality defect {np.max(defect):.3e} exceeds {s.conformal_tol:g}")
    return defect


def geometry_at(s: Immersion, z, *, check_conformal: bool = True) -> ChartGeometry:
    gj = _jets(s, z, 2)
    defect = _check_conformal(s, gj) if check_conformal else conformality_defect(gj.E.value, gj.F.value, gj.G.value)
    H, K = np.real(gj.H.value), np.real(gj.K.value)
    a2 = 4 * H * H - 2 * K
    return ChartGeometry(
        f=values(gj.f), nu=values(gj.nu), lam=np.asarray(gj.lam.value),
        H=H, K=K, phi=np.asarray(gj.phi.value),
        A_norm_sq=a2, tracefree_norm_sq=a2 - 2 * H * H, conformality=defect,
    )


def laplace_beltrami(gj: GeometryJets, h: Jet) -> np.ndarray:
    """``(1/sqrt g) d_i (sqrt g g^{ij} d_j h)`` from jets (needs ``h`` of order 2)."""
    sq = gj.det.sqrt()
    inv = gj.det.reciprocal()
    gu_uu, gu_uv, gu_vv = gj.G * inv, -(gj.F * inv), gj.E * inv
    hu, hv = h.du(), h.dv()
    flux_u = sq * (gu_uu * hu + gu_uv * hv)
    flux_v = sq * (gu_uv * hu + gu_vv * hv)
    return (flux_u.du() + flux_v.dv()).value / sq.value


def willmore_operator(s: Immersion, z) -> np.ndarray:
    """``Delta H + 2 H (H**2 - K)``."""
    gj = _jets(s, z, 4)
    H, K = gj.H.value, gj.K.value
    return np.real(laplace_beltrami(gj, gj.H) + 2 * H * (H * H - K))


def _christoffel(gj: GeometryJets):
    E, F, G = gj.E, gj.F, gj.G
    Eu, Ev, Fu, Fv, Gu, Gv = E.du(), E.dv(), F.du(), F.dv(), G.du(), G.dv()
    det = (E * G - F * F).truncate(Eu.order)
    inv = det.reciprocal()
    E, F, G = E.truncate(Eu.order), F.truncate(Eu.order), G.truncate(Eu.order)
    g111 = (G * Eu - F * (Fu * 2.0 - Ev)) * inv * 0.5
    g211 = (E * (Fu * 2.0 - Ev) - F * Eu) * inv * 0.5
    g112 = (G * Ev - F * Gu) * inv * 0.5
    g212 = (E * Gu - F * Ev) * inv * 0.5
    g122 = (G * (Fv * 2.0 - Gu) - F * Gv) * inv * 0.5
    g222 = (E * Gv - F * (Fv * 2.0 - Gu)) * inv * 0.5
    return g111, g211, g112, g212, g122, g222


def codazzi_residual(s: Immersion, z) -> np.ndarray:
    """``|phi_zbar - e**lambda H_z|`` on conformal charts; on other charts the
    larger residual of the two Codazzi-Mainardi equations."""
    gj = _jets(s, z, 3)
    if s.conformal:
        lhs = gj.phi.dzbar().value
        rhs = np.exp(gj.lam.value) * gj.H.dz().value
        return np.abs(lhs - rhs)
    g111, g211, g112, g212, g122, g222 = _christoffel(gj)
    L, M, N = (x.truncate(g111.order) for x in (gj.L, gj.M, gj.N))
    r1 = gj.L.dv() - gj.M.du() - (L * g112 + M * (g212 - g111) - N * g211)
    r2 = gj.M.dv() - gj.N.du() - (L * g122 + M * (g222 - g112) - N * g212)
    return np.maximum(np.abs(r1.value), np.abs(r2.value))


def sample_grid(s: Immersion, n: int, margin: float = 0.0):
    """``n x n`` chart grid over ``s.domain`` shrunk by ``margin`` on each side."""
    u0, u1, v0, v1 = s.domain
    u = np.linspace(u0 + margin, u1 - margin, n)
    v = np.linspace(v0 + margin, v1 - margin, n)
    return (u[:, None] + 1j * v[None, :]).ravel()


def export_csv(s: Immersion, z, path) -> None:
    """Write ``z_re, z_im, H, K, lambda, phi_re, phi_im`` rows."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    geo = geometry_at(s, z)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z_re", "z_im", "H", "K", "lambda", "phi_re", "phi_im"])
        for row in zip(z.real, z.imag, geo.H, geo.K, geo.lam, geo.phi.real, geo.phi.imag):
            w.writerow([repr(float(x)) for x in row])
