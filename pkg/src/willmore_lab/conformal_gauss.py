"""Lorentz space ``R^{4,1}``, the conformal Gauss map and the quartic differential.

Points of ``R^3`` lift to the light cone, oriented spheres to the quadric
``<P, P> = 1``. The conformal Gauss map is ``Y = H X + N`` with
``X = (f, (|f|^2 - 1)/2, (|f|^2 + 1)/2)`` and ``N = (nu, <f, nu>, <f, nu>)``.

The quartic form is evaluated two ways: from the closed formula

    Q = phi H_zz - H_z (phi e^{-lambda})_z e^{lambda} + phi^2 H^2 / 4

on order-4 jets, and directly as ``<Y_zz, Y_zz>`` by central differences of
``Y``. Values are reported both raw and in the chart-free normalization
``|Q| e^{-2 lambda} l^4`` with ``l`` the local curvature radius
``sqrt(2 / |A|^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentFit, ZeroRadius
from .jets import Jet
from .meromorphic import is_inf
from .surface_core import ChartGeometry, Immersion, _check_conformal, _jets, geometry_at

SIGNATURE = np.array([1.0, 1.0, 1.0, 1.0, -1.0])
POLE_BOUND = 2.0
POLE_SLACK = 0.25


@dataclass(frozen=True)
class LorentzVec:
    components: tuple

    def __post_init__(self):
        c = tuple(float(x) for x in self.components)
        if len(c) != 5:
            raise ValueError("a Lorentz vector has five components")
        object.__setattr__(self, "components", c)

    def __array__(self, dtype=None):
        return np.asarray(self.components, dtype=dtype)

    def __getitem__(self, i):
        return self.components[i]


def inner(a, b):
    """``sum_{i<=4} a_i b_i - a_5 b_5`` along the last axis (bilinear, no conjugation)."""
    a, b = np.asarray(a), np.asarray(b)
    return np.sum(a * b * SIGNATURE, axis=-1)


def point_lift(x) -> np.ndarray:
    """Light-cone lift ``(x, (|x|^2 - 1)/2, (|x|^2 + 1)/2)``; vectorized over leading axes."""
    x = np.asarray(x, dtype=float)
    q = np.sum(x * x, axis=-1)[..., None]
    return np.concatenate([x, 0.5 * (q - 1), 0.5 * (q + 1)], axis=-1)


def sphere_lift(x0, r: float) -> np.ndarray:
    """``(1/r) (x0, (|x0|^2 - r^2 - 1)/2, (|x0|^2 - r^2 + 1)/2)``; ``r < 0`` flips orientation."""
    if r == 0:
        raise ZeroRadius("sphere radius must be non-zero")
    x0 = np.asarray(x0, dtype=float)
    q = float(np.dot(x0, x0))
    return np.concatenate([x0, [0.5 * (q - r * r - 1), 0.5 * (q - r * r + 1)]]) / r


def plane_lift(x, nu) -> np.ndarray:
    """``(nu, <x, nu>, <x, nu>)``, the limit of the sphere lift as ``H -> 0``."""
    x, nu = np.asarray(x, dtype=float), np.asarray(nu, dtype=float)
    d = np.sum(x * nu, axis=-1)[..., None]
    return np.concatenate([nu, d, d], axis=-1)


def conformal_gauss_map(geo: ChartGeometry) -> np.ndarray:
    """``Y = H X + N`` at every sample of ``geo`` (shape ``(..., 5)``)."""
    return np.asarray(geo.H)[..., None] * point_lift(geo.f) + plane_lift(geo.f, geo.nu)


def _y_jet(f: list, nu: list, H: Jet) -> list:
    """Components of ``Y`` as jets."""
    ff = f[0] * f[0] + f[1] * f[1] + f[2] * f[2]
    fn = f[0] * nu[0] + f[1] * nu[1] + f[2] * nu[2]
    out = [H * f[i] + nu[i] for i in range(3)]
    out.append(H * ((ff - 1.0) * 0.5) + fn)
    out.append(H * ((ff + 1.0) * 0.5) + fn)
    return out


def conformality_residual(s: Immersion, z, *, h: float | None = None) -> np.ndarray:
    """``max_ij |<Y_i, Y_j> - (H^2 - K) g_ij|`` relative to ``(|H^2 - K| + |K| + H^2) |g|``.

    By default ``Y_u, Y_v`` come from order-3 jets (exact up to rounding). With
    ``h`` set they are central differences of ``Y`` values, with ``O(h^2)`` error;
    ``h`` is relative to ``s.scale``.
    """
    z = np.asarray(z, dtype=complex)
    gj = _jets(s, z, 3)
    if h is None:
        f = [x.truncate(1) for x in gj.f]
        nu = [x.truncate(1) for x in gj.nu]
        Y = _y_jet(f, nu, gj.H.truncate(1))
        Yu = np.stack([np.asarray(y.du().value) for y in Y], axis=-1)
        Yv = np.stack([np.asarray(y.dv().value) for y in Y], axis=-1)
    else:
        d = h * s.scale
        Yu = (_y_values(s, z + d) - _y_values(s, z - d)) / (2 * d)
        Yv = (_y_values(s, z + 1j * d) - _y_values(s, z - 1j * d)) / (2 * d)
    H, K = np.real(gj.H.value), np.real(gj.K.value)
    c = H * H - K
    E, F, G = (np.asarray(x.value) for x in (gj.E, gj.F, gj.G))
    ref = (np.abs(c) + np.abs(K) + H * H) * (E + G) * 0.5
    ref = np.where(ref > 0, ref, 1.0)
    r = np.maximum.reduce([
        np.abs(inner(Yu, Yu) - c * E),
        np.abs(inner(Yu, Yv) - c * F),
        np.abs(inner(Yv, Yv) - c * G),
    ])
    return r / ref


def local_length(geo_A2, fallback: float = 1.0) -> np.ndarray:
    """Curvature radius ``sqrt(2 / |A|^2)``; ``fallback`` at flat points."""
    a2 = np.asarray(geo_A2, dtype=float)
    with np.errstate(divide="ignore"):
        ell = np.sqrt(2.0 / a2)
    return np.where(np.isfinite(ell) & (a2 > 0), ell, fallback)


@dataclass
class QuarticSample:
    z: np.ndarray
    Q: np.ndarray
    scaled: np.ndarray
    dbarQ: np.ndarray | None = None


def _quartic_from_jets(gj) -> np.ndarray:
    phi, H, lam = gj.phi, gj.H, gj.lam
    Hz = H.dz()
    Hzz = Hz.dz().value
    pe = (phi * (-lam).exp()).dz().value
    p, h = phi.value, H.value
    return p * Hzz - Hz.value * pe * np.exp(lam.value) + p * p * h * h / 4


def quartic_form(s: Immersion, z, *, scaled: bool = False) -> np.ndarray:
    """``Q(z)`` from the closed formula on order-4 jets.

    With ``scaled=True`` the chart-free magnitude ``|Q| e^{-2 lambda} l^4`` is returned.
    """
    z = np.asarray(z, dtype=complex)
    gj = _jets(s, z, 4)
    _check_conformal(s, gj)
    Q = _quartic_from_jets(gj)
    if not scaled:
        return Q
    return _scale_q(Q, gj, s)


def _scale_q(Q, gj, s, power: float = 4.0):
    H, K = np.real(gj.H.value), np.real(gj.K.value)
    ell = local_length(4 * H * H - 2 * K, s.scale)
    return np.abs(Q) * np.exp(-0.5 * power * np.real(gj.lam.value)) * ell ** power


def _y_values(s: Immersion, z) -> np.ndarray:
    return conformal_gauss_map(geometry_at(s, z, check_conformal=False))


def quartic_direct(s: Immersion, z, *, h: float = 1e-3) -> np.ndarray:
    """``<Y_zz, Y_zz>`` with ``Y_zz = (Y_uu - Y_vv - 2i Y_uv) / 4`` by central differences.

    ``h`` is relative to ``s.scale``; the error is ``O(h^2)``.
    """
    z = np.asarray(z, dtype=complex)
    d = h * s.scale
    y0 = _y_values(s, z)
    yup, yum = _y_values(s, z + d), _y_values(s, z - d)
    yvp, yvm = _y_values(s, z + 1j * d), _y_values(s, z - 1j * d)
    ypp, ymm = _y_values(s, z + d + 1j * d), _y_values(s, z - d - 1j * d)
    ypm, ymp = _y_values(s, z + d - 1j * d), _y_values(s, z - d + 1j * d)
    yuu = (yup - 2 * y0 + yum) / d ** 2
    yvv = (yvp - 2 * y0 + yvm) / d ** 2
    yuv = (ypp - ypm - ymp + ymm) / (4 * d * d)
    yzz = (yuu - yvv - 2j * yuv) / 4
    return inner(yzz, yzz)


def quartic_jet_direct(s: Immersion, z) -> np.ndarray:
    """``<Y_zz, Y_zz>`` from jets of ``Y`` (exact up to rounding on analytic charts)."""
    gj = _jets(s, np.asarray(z, dtype=complex), 4)
    Y = _y_jet(gj.f, gj.nu, gj.H)
    yzz = np.stack([np.asarray(y.dz().dz().value) for y in Y], axis=-1)
    return inner(yzz, yzz)


def holomorphy_residual(s: Immersion, grid, *, h: float = 1e-3) -> float:
    """``max |dbar Q|`` by central differences, in the normalization ``e^{-5 lambda/2} l^5``."""
    z = np.asarray(grid, dtype=complex).ravel()
    d = h * s.scale
    qu = (quartic_form(s, z + d) - quartic_form(s, z - d)) / (2 * d)
    qv = (quartic_form(s, z + 1j * d) - quartic_form(s, z - 1j * d)) / (2 * d)
    dbar = 0.5 * (qu + 1j * qv)
    gj = _jets(s, z, 2)
    return float(np.max(_scale_q(dbar, gj, s, power=5.0)))


def quartic_samples(s: Immersion, grid, *, h: float = 1e-3) -> QuarticSample:
    z = np.asarray(grid, dtype=complex).ravel()
    d = h * s.scale
    Q = quartic_form(s, z)
    gj = _jets(s, z, 2)
    qu = (quartic_form(s, z + d) - quartic_form(s, z - d)) / (2 * d)
    qv = (quartic_form(s, z + 1j * d) - quartic_form(s, z - 1j * d)) / (2 * d)
    return QuarticSample(z=z, Q=Q, scaled=_scale_q(Q, gj, s), dbarQ=0.5 * (qu + 1j * qv))


def vanishes_identically(s: Immersion, grid, *, tol: float = 1e-6) -> tuple[bool, float]:
    """Verdict ``max scaled |Q| <= tol`` and the maximum itself."""
    worst = float(np.max(quartic_form(s, np.asarray(grid, dtype=complex).ravel(), scaled=True)))
    return worst <= tol, worst


@dataclass(frozen=True)
class PoleOrderFit:
    sigma: float | None
    identically_zero: bool
    passed: bool
    residual: float


def pole_order_probe(s, p, radii=None, *, zero_tol: float = 1e-6, max_residual: float = 0.1,
                     n_angles: int = 16) -> PoleOrderFit:
    """Fit ``|Q| ~ |w|^{-sigma}`` on rings around ``p`` (``w = 1/z`` at infinity).

    ``s`` is an immersion or a callable ``z -> Q`` (synthetic field, already in
    the local coordinate). Passes iff ``sigma <= 2 + 0.25``.
    """
    from .moebius import _ring

    radii = np.geomspace(1e-1, 1e-3, 5) if radii is None else np.asarray(radii, dtype=float)
    mags = []
    for r in radii:
        z = _ring(p, r, n_angles)
        if isinstance(s, Immersion):
            q = np.max(quartic_form(s, z, scaled=True))
        else:
            q = np.max(np.abs(s(z)))
        mags.append(float(q))
    mags = np.asarray(mags)
    if isinstance(s, Immersion):
        # the normalized value decides vanishing; the pole order is read off the
        # coefficient of Q dz^4 in the local coordinate
        return _fit_immersion(s, p, radii, mags, zero_tol, max_residual, n_angles)
    if np.all(mags <= zero_tol):
        return PoleOrderFit(None, True, True, 0.0)
    return _fit(radii, mags, max_residual)


def _fit(radii, mags, max_residual):
    if np.any(~(mags > 0)):
        raise InconsistentFit("zero samples in a non-vanishing field")
    x, y = np.log(radii), np.log(mags)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    if res > max_residual:
        raise InconsistentFit(f"log-log fit residual {res:.3f} exceeds {max_residual}")
    sigma = float(-coef[0])
    return PoleOrderFit(sigma, False, sigma <= POLE_BOUND + POLE_SLACK, res)


def _fit_immersion(s, p, radii, scaled_mags, zero_tol, max_residual, n_angles):
    from .moebius import _ring

    if np.all(scaled_mags <= zero_tol):
        return PoleOrderFit(None, True, True, 0.0)
    raw = []
    for r in radii:
        z = _ring(p, r, n_angles)
        q = np.abs(quartic_form(s, z))
        if is_inf(p):
            q = q * np.abs(z) ** 8  # dz^4 = w^{-8} dw^4
        raw.append(float(np.max(q)))
    return _fit(radii, np.asarray(raw), max_residual)


def conformal_area(s: Immersion, dom=None, *, chi: int | None = None, rel_tol: float = 1e-9) -> dict:
    """``Area(Y) = int (H^2 - K) dmu`` together with ``W`` and ``int K``.

    ``W = Area(Y) + int K``, so on a closed surface the two energies differ by
    ``2 pi chi``. With ``chi`` given, ``residual`` is ``|W - Area(Y) - 2 pi chi|``.
    """
    from .quadrature import integrate

    w = integrate(s, dom, "H2", rel_tol=rel_tol)
    k = integrate(s, dom, "K", rel_tol=rel_tol)
    area_y = w.value - k.value
    out = {"conformal_area": area_y, "W": w.value, "K": k.value,
           "error": w.error_estimate + k.error_estimate}
    if chi is not None:
        out["residual"] = abs(w.value - area_y - 2 * math.pi * chi)
    return out
