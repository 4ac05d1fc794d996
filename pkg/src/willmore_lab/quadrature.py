"""Integration of geometric densities over conformal charts with punctures.

The chart plane is split by a smooth partition of unity::

    1 = chi_inf(z) + sum_p chi_p(z) + w_mid(z)

* ``chi_p`` equals 1 on ``|z - p| <= r_p / 2`` and vanishes beyond ``r_p``; its
  part is integrated in log-polar coordinates around ``p`` over dyadic
  annuli, with a geometric-series extrapolation of the remaining tail.
* ``chi_inf`` vanishes for ``|z| <= R / 2`` and equals 1 beyond ``R``; its part
  is integrated over outward dyadic annuli in the same way.
* ``w_mid`` is supported in the disk ``|z| < R`` and is integrated by adaptive
  tensor Gauss-Kronrod cubature on the square ``[-R, R]**2``.

Inside an annulus the angular integral uses the trapezoid rule with point
doubling (spectrally accurate for periodic integrands) and the radial one a
1-D adaptive Gauss-Kronrod rule in ``s = log r``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from . import _gk
from .errors import AmbiguousQuantum, DivergentTail, NoConvergence
from .meromorphic import is_inf
from .surface_core import Immersion, geometry_jets

DENSITIES = ("H2", "A2", "K", "area")
_CHUNK = 200_000
_ALIASES = {"w": "H2", "h2": "H2", "a2": "A2", "k": "K", "1": "area", "area": "area"}


def normalize_density(name: str) -> str:
    key = _ALIASES.get(str(name).lower(), name)
    if key not in DENSITIES:
        raise ValueError(f"unknown density {name!r}; expected one of {DENSITIES}")
    return key


@dataclass
class IntegrationDomain:
    """Chart description for :func:`integrate`.

    ``punctures`` holds ``(center, r_p)`` pairs, ``ends`` holds ``(point, k)``
    pairs (``point`` may be ``INF``) used for the tail-exponent check, and
    ``outer_radius`` is ``R``. With ``rect`` set and ``include_infinity`` false
    the integral is taken over that rectangle alone (compact periodic charts).
    """

    punctures: tuple = ()
    ends: tuple = ()
    outer_radius: float = 4.0
    include_infinity: bool = True
    rect: tuple | None = None
    eps: float = 1e-12

    def __post_init__(self):
        pts = [complex(c) for c, _ in self.punctures]
        for (c, r) in self.punctures:
            if not r > 0:
                raise ValueError("puncture radius must be positive")
            if self.include_infinity and abs(c) + r > 0.5 * self.outer_radius + 1e-12:
                raise ValueError("puncture disk overlaps the outer cut-off region")
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if abs(pts[i] - pts[j]) < self.punctures[i][1] + self.punctures[j][1]:
                    raise ValueError("puncture disks overlap")

    @classmethod
    def for_immersion(cls, s: Immersion, ends=(), *, radius_fraction: float = 0.4) -> "IntegrationDomain":
        """Disjoint puncture disks and an outer radius that clears them."""
        pts = [complex(p) for p in s.punctures]
        radii = []
        for i, p in enumerate(pts):
            others = [abs(p - q) for j, q in enumerate(pts) if j != i]
            radii.append(radius_fraction * min(others) if others else 0.5)
        reach = max([abs(p) + r for p, r in zip(pts, radii)], default=0.5)
        R = max(2.0, 2.0 * reach)
        return cls(tuple(zip(pts, radii)), tuple(ends), R)


@dataclass
class IntegralResult:
    value: float
    error_estimate: float
    cells: int
    tail_contribution: float
    parts: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"value": self.value, "error": self.error_estimate, "cells": self.cells,
                "tail_contribution": self.tail_contribution}


# ---------------------------------------------------------------------------
# densities


def density_values(s: Immersion, z, density: str) -> np.ndarray:
    """``rho(z)`` with ``integral = int rho du dv`` (density times area element)."""
    density = normalize_density(density)
    z = np.asarray(z, dtype=complex)
    if z.size == 0:
        return np.zeros(z.shape)
    if z.size > _CHUNK:
        flat = z.ravel()
        parts = [density_values(s, flat[i:i + _CHUNK], density) for i in range(0, flat.size, _CHUNK)]
        return np.concatenate(parts).reshape(z.shape)
    gj = geometry_jets(s.jet(z, 2), scale=s.scale)
    area = np.sqrt(np.real(gj.det.value))
    if density == "area":
        return area
    H, K = np.real(gj.H.value), np.real(gj.K.value)
    if density == "H2":
        return H * H * area
    if density == "K":
        return K * area
    return (4 * H * H - 2 * K) * area


def _bump(t):
    """Smooth step: 1 for t <= 1/2, 0 for t >= 1."""
    t = np.asarray(t, dtype=float)
    x = np.clip(2.0 * (1.0 - t), 0.0, 1.0)  # 0 at t = 1, 1 at t = 1/2

    def e(y):
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)

    a, b = e(x), e(1.0 - x)
    return a / (a + b)


class _Weights:
    def __init__(self, dom: IntegrationDomain):
        self.dom = dom

    def chi_p(self, z, i):
        c, r = self.dom.punctures[i]
        return _bump(np.abs(z - c) / r)

    def chi_inf(self, z):
        if not self.dom.include_infinity:
            return np.zeros(np.shape(z))
        return 1.0 - _bump(np.abs(z) / self.dom.outer_radius)

    def middle(self, z):
        if self.dom.rect is not None and not self.dom.include_infinity:
            w = np.ones(np.shape(z))
        else:
            w = 1.0 - self.chi_inf(z)
        for i in range(len(self.dom.punctures)):
            w = w - self.chi_p(z, i)
        return np.clip(w, 0.0, 1.0)


def _masked(func, z, weight):
    out = np.zeros(z.shape)
    keep = weight > 0
    if np.any(keep):
        out[keep] = weight[keep] * func(z[keep])
    return out


# ---------------------------------------------------------------------------
# adaptive tensor cubature on rectangles

_W2K = np.outer(_gk.KRONROD_WEIGHTS, _gk.KRONROD_WEIGHTS)
_W2G = np.outer(_gk.GAUSS_WEIGHTS, _gk.GAUSS_WEIGHTS)


def _cell_rules(cells, func):
    """Kronrod value and |K - G| for each cell ``(x0, x1, y0, y1)``."""
    cells = np.asarray(cells, dtype=float)
    hx = 0.5 * (cells[:, 1] - cells[:, 0])
    hy = 0.5 * (cells[:, 3] - cells[:, 2])
    mx = 0.5 * (cells[:, 1] + cells[:, 0])
    my = 0.5 * (cells[:, 3] + cells[:, 2])
    x = mx[:, None, None] + hx[:, None, None] * _gk.NODES[None, :, None]
    y = my[:, None, None] + hy[:, None, None] * _gk.NODES[None, None, :]
    z = (x + 1j * y).reshape(len(cells), -1)
    vals = func(z.ravel()).reshape(len(cells), 15, 15)
    jac = hx * hy
    k = jac * np.einsum("ij,cij->c", _W2K, vals)
    g = jac * np.einsum("ij,cij->c", _W2G, vals)
    return k, np.abs(k - g)


def adaptive_cubature(func, rect, *, tol_abs: float, max_cells: int = 20000, initial: int = 8,
                      batch: int = 64, strict: bool = True):
    """Greedy adaptive cubature; returns ``(value, error, n_cells)``.

    The cells with the largest error are split into four in deterministic
    batches. A refined cell's error is capped by its parent's so the total
    estimate never increases with the budget.
    """
    x0, x1, y0, y1 = rect
    xs = np.linspace(x0, x1, initial + 1)
    ys = np.linspace(y0, y1, initial + 1)
    cells = [(xs[i], xs[i + 1], ys[j], ys[j + 1]) for i in range(initial) for j in range(initial)]
    vals, errs = _cell_rules(cells, func)
    heap = []
    leaves = {}
    for idx, (c, v, e) in enumerate(zip(cells, vals, errs)):
        leaves[idx] = (c, float(v), float(e))
        heapq.heappush(heap, (-float(e), idx))
    next_id = len(cells)
    total_err = math.fsum(e for _, _, e in leaves.values())
    while total_err > tol_abs:
        if len(leaves) + 3 > max_cells:
            if strict:
                raise NoConvergence(f"cubature budget of {max_cells} cells exhausted (error {total_err:.3e})")
            break
        picked = []
        while heap and len(picked) < batch and len(leaves) + 3 * (len(picked) + 1) <= max_cells:
            negerr, idx = heapq.heappop(heap)
            picked.append(idx)
            if -negerr < 0.25 * (-heap[0][0] if heap else 0):
                break
        if not picked:
            break
        children = []
        for idx in picked:
            (a, b, c, d), _, _ = leaves[idx]
            mx, my = 0.5 * (a + b), 0.5 * (c + d)
            children.extend([(a, mx, c, my), (a, mx, my, d), (mx, b, c, my), (mx, b, my, d)])
        cv, ce = _cell_rules(children, func)
        for n, idx in enumerate(picked):
            _, _, perr = leaves.pop(idx)
            kids_e = ce[4 * n: 4 * n + 4]
            s = float(np.sum(kids_e))
            factor = min(1.0, perr / s) if s > 0 else 1.0
            for m in range(4):
                leaves[next_id] = (children[4 * n + m], float(cv[4 * n + m]), float(kids_e[m]) * factor)
                heapq.heappush(heap, (-float(kids_e[m]) * factor, next_id))
                next_id += 1
        total_err = math.fsum(e for _, _, e in leaves.values())
    order = sorted(leaves.values(), key=lambda item: item[0])
    value = math.fsum(v for _, v, _ in order)
    return value, total_err, len(leaves)


# ---------------------------------------------------------------------------
# annuli


def _angular(func, center, s_nodes, rel: float = 1e-13, atol: float = 0.0, n0: int = 32, nmax: int = 2048):
    """Angular integral ``r**2 int_0^{2pi} rho dtheta`` at radii ``exp(s)`` (trapezoid with doubling)."""
    s_nodes = np.asarray(s_nodes, dtype=float)
    r = np.exp(s_nodes)
    n = n0
    prev = None
    cache = None
    while True:
        theta = 2 * np.pi * np.arange(n) / n
        if cache is None:
            z = center + r[:, None] * np.exp(1j * theta[None, :])
            vals = func(z.ravel()).reshape(len(r), n)
        else:
            z = center + r[:, None] * np.exp(1j * theta[None, 1::2])
            new = func(z.ravel()).reshape(len(r), n // 2)
            vals = np.empty((len(r), n))
            vals[:, 0::2] = cache
            vals[:, 1::2] = new
        cur = vals.mean(axis=1) * 2 * np.pi * r * r
        if prev is not None:
            scale = max(np.max(np.abs(cur)), 1e-300)
            if np.max(np.abs(cur - prev)) <= rel * scale + atol or n >= nmax:
                return cur
        prev, cache = cur, vals
        n *= 2


def _annulus(func, center, r_lo, r_hi, tol):
    def radial(s):
        return _angular(func, center, s, atol=tol)

    val, err, _ = _gk.adaptive(radial, math.log(r_lo), math.log(r_hi), tol=tol, max_intervals=128)
    return float(np.real(val)), float(err)


def _annulus_sequence(func, center, r_start, inward: bool, *, rel_tol: float, scale_hint: float = 1.0,
                      max_annuli: int = 80, min_annuli: int = 4, label: str = ""):
    """Sum over dyadic annuli with geometric tail extrapolation.

    After each annulus the remaining tail is estimated as ``a q / (1 - q)`` with
    ``q`` the ratio of the last two annulus sums; the sequence stops once the
    spread of that estimate over the last two ratios is below the tolerance.
    Returns ``(sum, error, n_annuli, tail, terms)``.
    """
    terms = []
    err = 0.0
    r = r_start
    target = rel_tol * scale_hint
    for j in range(max_annuli):
        lo, hi = (r / 2, r) if inward else (r, 2 * r)
        val, e = _annulus(func, center, lo, hi, tol=max(1e-300, 1e-3 * target))
        terms.append(val)
        err += e
        r = lo if inward else hi
        if j + 1 < min_annuli:
            continue
        a2, a1, a0 = terms[-3], terms[-2], terms[-1]
        if abs(a0) <= 0.05 * target and abs(a1) <= 0.05 * target:
            return math.fsum(terms), err + abs(a0) + abs(a1), j + 1, 0.0, terms
        if len(terms) >= 6 and abs(a0) > target:
            recent = np.abs(np.asarray(terms[-5:]))
            if np.all(recent[1:] >= 1.2 * recent[:-1]):
                raise DivergentTail(f"annulus sums grow geometrically near {label}")
        q = a0 / a1 if a1 else 0.0
        qp = a1 / a2 if a2 else 0.0
        if 0 <= q < 0.9 and 0 <= qp < 0.9:
            tail = a0 * q / (1 - q)
            tail_alt = a0 * qp / (1 - qp)
            spread = abs(tail - tail_alt)
            if spread <= 0.1 * target and abs(a0) <= 1e-2 * max(abs(math.fsum(terms)), scale_hint):
                return math.fsum(terms) + tail, err + spread, j + 1, tail, terms
    raise DivergentTail(f"annulus sums near {label} did not settle within {max_annuli} annuli")


def annulus_exponent(terms) -> float:
    """Fitted power ``e`` with ``a_j ~ 2**(-e j)`` from the last few annuli."""
    t = np.abs(np.asarray(terms[-6:], dtype=float))
    t = t[t > 0]
    if len(t) < 3:
        return float("nan")
    j = np.arange(len(t))
    slope = np.polyfit(j, np.log2(t), 1)[0]
    return float(-slope)


# ---------------------------------------------------------------------------


def integrate(s: Immersion, dom: IntegrationDomain | None = None, density: str = "H2", *,
              rel_tol: float = 1e-9, max_cells: int = 40000, strict: bool = True,
              tail_check: bool = True) -> IntegralResult:
    """Integrate a density over the chart with punctures and ends."""
    density = normalize_density(density)
    if dom is None:
        dom = IntegrationDomain.for_immersion(s)
    weights = _Weights(dom)

    def rho(z):
        return density_values(s, z, density)

    rect = dom.rect if dom.rect is not None else (-dom.outer_radius, dom.outer_radius,
                                                    -dom.outer_radius, dom.outer_radius)
    mid_func = lambda z: _masked(rho, z, weights.middle(z))  # noqa: E731
    # absolute tolerances are anchored to |A|^2 (which bounds H^2 and |K|) so
    # that integrals that vanish, such as H^2 on a minimal surface, terminate
    ref = density if density == "area" else "A2"
    ref_func = lambda z: _masked(lambda w: density_values(s, w, ref), z, weights.middle(z))  # noqa: E731
    coarse, _, _ = adaptive_cubature(ref_func, rect, tol_abs=math.inf)
    scale = max(abs(coarse), 1e-300)
    parts = {}
    errors = []
    tails = []
    annuli = 0
    for i, (c, r) in enumerate(dom.punctures):
        val, err, n, tail, _ = _annulus_sequence(
            lambda z, i=i: _masked(rho, z, weights.chi_p(z, i)), complex(c), r, True,
            rel_tol=rel_tol, scale_hint=scale, label=f"puncture {c}")
        parts[f"puncture:{complex(c)}"] = val
        errors.append(err)
        tails.append(tail)
        annuli += n
        if tail_check:
            _check_tail(s, dom, complex(c), inward=True)
    if dom.include_infinity:
        val, err, n, tail, _ = _annulus_sequence(
            lambda z: _masked(rho, z, weights.chi_inf(z)), 0j, dom.outer_radius / 2, False,
            rel_tol=rel_tol, scale_hint=scale, label="infinity")
        parts["infinity"] = val
        errors.append(err)
        tails.append(tail)
        annuli += n
        if tail_check:
            _check_tail(s, dom, None, inward=False)
    mid, mid_err, cells = adaptive_cubature(mid_func, rect, tol_abs=0.5 * rel_tol * scale,
                                            max_cells=max_cells, strict=strict)
    parts["middle"] = mid
    value = math.fsum(parts.values())
    error = math.fsum(errors) + mid_err
    return IntegralResult(float(value), float(error), int(cells + annuli), float(math.fsum(tails)), parts)


def _check_tail(s: Immersion, dom: IntegrationDomain, center, inward: bool):
    """Compare the area growth of declared ends with the multiplicity ``k + 1``.

    Near a chart end of a compactified (inverted) surface the area of
    ``|z - p| < r`` scales like ``r**(2(k+1))``; near an end of a complete
    surface the area of the annuli grows like ``r**(-2(k+1))``.
    """
    k = None
    for p, kk in dom.ends:
        if center is None and is_inf(p):
            k = kk
        elif center is not None and not is_inf(p) and abs(complex(p) - center) < 1e-12:
            k = kk
    if k is None:
        return
    expected = 2 * (k + 1) if getattr(s, "compact", False) else -2 * (k + 1)
    r0 = dict(dom.punctures).get(center, dom.outer_radius) if center is not None else dom.outer_radius
    radii = [r0 * 2.0 ** (-j) for j in range(3, 9)] if inward else [r0 * 2.0 ** j for j in range(3, 9)]
    areas = []
    c = 0j if center is None else center
    for rr in radii:
        lo, hi = (rr / 2, rr) if inward else (rr, 2 * rr)
        s_nodes = np.log(np.linspace(lo, hi, 9)[:-1] * 1.0) + 0.5 * math.log(2) / 8
        ang = _angular(lambda z: density_values(s, z, "area"), c, s_nodes, rel=1e-8)
        areas.append(float(np.sum(ang)) * (math.log(2) / 8))
    areas = np.abs(np.asarray(areas))
    # exponent relative to the shrinking (inward) or growing (outward) radius
    slope = np.polyfit(np.log(radii), np.log(areas), 1)[0]
    measured = slope if inward else -slope
    if not math.isfinite(measured) or abs(measured - expected) > 0.25:
        where = "infinity" if center is None else f"z={center}"
        raise DivergentTail(f"area exponent {measured:.3f} at {where} does not match multiplicity {k + 1} "
                            f"(expected {expected})")


# ---------------------------------------------------------------------------


def gauss_bonnet_rhs(chi_closed: int, end_orders, branch_multiplicities) -> float:
    """``2 pi (chi_open - sum (k+1) + sum (m-1))`` with ``chi_open = chi_closed - #ends``."""
    ends = list(end_orders)
    chi_open = chi_closed - len(ends)
    return 2 * math.pi * (chi_open - sum(k + 1 for k in ends) + sum(m - 1 for m in branch_multiplicities))


def gauss_bonnet_check(s: Immersion, ends, branches, chi_closed: int, dom: IntegrationDomain | None = None,
                       **kw):
    """``(lhs, rhs, residual)`` for the Gauss-Bonnet formula with ends and branch points.

    ``ends`` is an iterable of branch orders ``k`` (or ``(point, k)`` pairs) and
    ``branches`` an iterable of multiplicities ``m`` (or ``(point, m)`` pairs).
    """
    ks = [e[1] if isinstance(e, tuple) else int(e) for e in ends]
    ms = [b[1] if isinstance(b, tuple) else int(b) for b in branches]
    res = integrate(s, dom, "K", **kw)
    rhs = gauss_bonnet_rhs(chi_closed, ks, ms)
    return res.value, rhs, abs(res.value - rhs)


def quantization_verdict(w: float, *, tie_tol: float = 1e-12) -> tuple[int, float]:
    if w < 0:
        raise ValueError("energy must be non-negative")
    x = w / (4 * math.pi)
    frac = x - math.floor(x)
    if abs(frac - 0.5) <= tie_tol:
        raise AmbiguousQuantum(f"{w} lies midway between two quanta")
    k = int(round(x))
    return k, abs(w - 4 * math.pi * k)


def white_parity_check(kintegral: float, *, tol: float = 1e-3) -> bool:
    """True iff ``kintegral / (4 pi)`` is within ``tol`` of an integer."""
    x = kintegral / (4 * math.pi)
    return abs(x - round(x)) <= tol
