"""Inversions of immersions, divisor bookkeeping and branch-point analysis."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import CenterHit, CenterOnSurface, InconsistentFit
from .jets import Jet, values, vdot
from .meromorphic import INF, as_point, is_inf
from .quadrature import IntegrationDomain, integrate
from .surface_core import Immersion, geometry_at


def invert_point(x, x0) -> np.ndarray:
    """``x0 + (x - x0) / |x - x0|**2``; works on arrays with a trailing axis of 3."""
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    d = x - x0
    q = np.sum(d * d, axis=-1, keepdims=True)
    if np.any(q == 0):
        raise CenterHit("point coincides with the inversion center")
    return x0 + d / q


@dataclass(frozen=True)
class Divisor:
    """Finite formal sum of points with positive integer multiplicities.

    ``kind`` is ``"branch"`` or ``"ends"``; for ends the multiplicity stored is
    ``k + 1`` where ``k`` is the branch order of the end.
    """

    entries: tuple = ()
    kind: str = "branch"

    def __post_init__(self):
        seen = []
        for p, m in self.entries:
            if int(m) != m or m < 1:
                raise ValueError("multiplicities must be positive integers")
            key = p if isinstance(p, str) else (INF if is_inf(p) else complex(p))
            if key in seen:
                raise ValueError(f"repeated point {p!r}")
            seen.append(key)

    @classmethod
    def from_ends(cls, ends) -> "Divisor":
        """From ``(point, k)`` pairs."""
        return cls(tuple((p, int(k) + 1) for p, k in ends), "ends")

    @property
    def degree(self) -> int:
        return sum(int(m) for _, m in self.entries)

    @property
    def multiplicities(self) -> list[int]:
        return [int(m) for _, m in self.entries]

    @property
    def branch_orders(self) -> list[int]:
        return [m - 1 for m in self.multiplicities] if self.kind == "ends" else []

    def __len__(self):
        return len(self.entries)

    def to_json(self):
        def enc(p):
            if isinstance(p, str):
                return p
            if is_inf(p):
                return "inf"
            if isinstance(p, (list, tuple, np.ndarray)):
                return [float(x) for x in p]
            c = complex(p)
            return [c.real, c.imag]

        return {"kind": self.kind, "entries": [[enc(p), int(m)] for p, m in self.entries]}


def parity_check(d: Divisor) -> bool:
    """False exactly for a single branch point of even multiplicity."""
    return not (len(d.entries) == 1 and d.multiplicities[0] % 2 == 0)


class InvertedImmersion(Immersion):
    """``x0 + (f - x0) / |f - x0|**2`` with jets composed in jet arithmetic.

    The chart punctures of ``base`` (its ends) become finite-area branch
    points at ``x0``; ``compact`` records that the image is bounded.
    """

    compact = True

    def __init__(self, base: Immersion, x0, *, clearance: float = 1e-6, check: bool = True):
        self.base = base
        self.x0 = np.asarray(x0, dtype=float)
        self.name = f"inverted({base.name})"
        self.conformal = base.conformal
        self.conformal_tol = base.conformal_tol
        self.scale = base.scale
        self.punctures = base.punctures
        self.domain = base.domain
        self.analytic = base.analytic
        if check:
            dist = min_distance(base, self.x0)
            if dist < clearance:
                raise CenterOnSurface(f"center within {dist:.3e} of the surface")

    def jet(self, z, order):
        f = self.base.jet(z, order)
        d = [f[i] - self.x0[i] for i in range(3)]
        q = vdot(d, d)
        if np.any(np.asarray(q.value) == 0):
            raise CenterHit("sample maps to the inversion center")
        inv = q.reciprocal()
        return [d[i] * inv + self.x0[i] for i in range(3)]

    def value(self, z):
        return invert_point(self.base.value(z), self.x0)

    def limit_point(self, p):
        """Image of a chart puncture (an end of ``base``): the center."""
        return self.x0.copy()


def invert_immersion(s: Immersion, x0, **kw) -> InvertedImmersion:
    return InvertedImmersion(s, x0, **kw)


def _probe_points(s: Immersion, n_r: int = 48, n_t: int = 64):
    """Sample chart points used to bound the distance from a center to the image."""
    theta = 2 * np.pi * (np.arange(n_t) + 0.5) / n_t
    pts = []
    if s.domain is not None and not s.punctures and not hasattr(s, "data"):
        u0, u1, v0, v1 = s.domain
        u = np.linspace(u0, u1, n_r)
        v = np.linspace(v0, v1, n_t)
        return (u[:, None] + 1j * v[None, :]).ravel()
    rs = np.geomspace(1e-3, 1e3, n_r)
    pts.append((rs[:, None] * np.exp(1j * theta[None, :])).ravel())
    for p in s.punctures:
        rr = np.geomspace(1e-3, 0.5, n_r // 2)
        pts.append((complex(p) + rr[:, None] * np.exp(1j * theta[None, :])).ravel())
    z = np.concatenate(pts)
    keep = np.ones(z.shape, bool)
    for p in s.punctures:
        keep &= np.abs(z - complex(p)) > 1e-4
    return z[keep]


def min_distance(s: Immersion, x0) -> float:
    z = _probe_points(s)
    with np.errstate(all="ignore"):
        f = s.value(z)
    d = np.linalg.norm(f - np.asarray(x0, dtype=float), axis=-1)
    d = d[np.isfinite(d)]
    return float(np.min(d)) if d.size else math.inf


def choose_center(s: Immersion, candidates) -> np.ndarray:
    """The candidate with the largest sampled distance to the image."""
    best = max(candidates, key=lambda c: min_distance(s, c))
    return np.asarray(best, dtype=float)


# ---------------------------------------------------------------------------


@dataclass
class InversionReport:
    w_before: float
    w_after: float
    a2_before: float
    a2_after: float
    k_before: float
    k_after: float
    end_term: float
    preimage_term: float
    residual_k: float
    residual_w: float
    residual_a2: float
    tolerance: float
    errors: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return max(self.residual_k, self.residual_w, self.residual_a2) <= self.tolerance

    def to_json(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=False)


def _as_orders(ends):
    if isinstance(ends, Divisor):
        return ends.branch_orders if ends.kind == "ends" else [m - 1 for m in ends.multiplicities]
    return [e[1] if isinstance(e, tuple) else int(e) for e in ends]


def _end_points(ends):
    if isinstance(ends, Divisor):
        return [(p, m - 1) for p, m in ends.entries]
    return [e for e in ends if isinstance(e, tuple)]


def _as_mults(pre):
    if isinstance(pre, Divisor):
        return pre.multiplicities
    return [b[1] if isinstance(b, tuple) else int(b) for b in pre]


def verify_inversion_identities(s: Immersion, x0, ends, preimages=(), *, dom: IntegrationDomain | None = None,
                                rel_tol: float = 1e-9, tolerance: float | None = None) -> InversionReport:
    """Quadrature on both sides of the inversion formulas for K, H**2 and |A|**2.

    ``ends`` lists the branch orders ``k`` of the ends (ints, ``(point, k)``
    pairs or an ends :class:`Divisor`); ``preimages`` the multiplicities of the
    points of ``f^{-1}(x0)``.
    """
    ks = _as_orders(ends)
    ms = _as_mults(preimages)
    inv = invert_immersion(s, x0)
    end_ks = _end_points(ends)
    if dom is None:
        dom = IntegrationDomain.for_immersion(s, end_ks)
    vals = {}
    errs = {}
    for tag, surf in (("before", s), ("after", inv)):
        for den in ("K", "H2", "A2"):
            r = integrate(surf, dom, den, rel_tol=rel_tol, tail_check=(tag == "after"))
            vals[(tag, den)] = r.value
            errs[f"{den}_{tag}"] = r.error_estimate
    bracket = sum(k + 1 for k in ks) - sum(ms)
    term = 4 * math.pi * bracket
    res_k = abs(vals[("after", "K")] - (vals[("before", "K")] + term))
    res_w = abs(vals[("after", "H2")] - (vals[("before", "H2")] + term))
    res_a = abs(vals[("after", "A2")] - (vals[("before", "A2")] + 2 * term))
    if tolerance is None:
        tolerance = max(1e-6, 100 * sum(errs.values()))
    return InversionReport(
        w_before=vals[("before", "H2")], w_after=vals[("after", "H2")],
        a2_before=vals[("before", "A2")], a2_after=vals[("after", "A2")],
        k_before=vals[("before", "K")], k_after=vals[("after", "K")],
        end_term=4 * math.pi * sum(k + 1 for k in ks), preimage_term=4 * math.pi * sum(ms),
        residual_k=res_k, residual_w=res_w, residual_a2=res_a, tolerance=tolerance, errors=errs,
    )


# ---------------------------------------------------------------------------
# branch-point fits


def _ring(p, r, n=16):
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    if is_inf(p):
        return 1.0 / (r * np.exp(1j * theta))
    return complex(p) + r * np.exp(1j * theta)


def _limit(s: Immersion, p):
    if is_inf(p) or any(abs(complex(p) - complex(q)) < 1e-12 for q in s.punctures):
        try:
            return s.limit_point(p)
        except AttributeError:
            pass
    if is_inf(p):
        raise ValueError("the limit at infinity is only known for inverted surfaces")
    return s.value(np.array([complex(p)]))[0]


def _grad_norm(s: Immersion, z, p):
    """``|grad f|`` in the local coordinate at ``p`` (``w = 1/z`` at infinity)."""
    f = s.jet(z, 1)
    fu = np.stack([np.asarray(x.partial(1, 0)) for x in f], axis=-1)
    fv = np.stack([np.asarray(x.partial(0, 1)) for x in f], axis=-1)
    g = np.sqrt(np.sum(fu * fu, axis=-1) + np.sum(fv * fv, axis=-1))
    if is_inf(p):
        g = g * np.abs(z) ** 2  # |dz/dw| = |z|**2
    return g


@dataclass(frozen=True)
class MultiplicityFit:
    m: int
    slope: float
    confidence: float
    gradient_slope: float

    def __int__(self):
        return self.m


def _loglog_fit(radii, y):
    x = np.log(np.asarray(radii, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    spread = max(np.ptp(ly), 1e-300)
    return float(coef[0]), float(np.sqrt(np.mean(resid ** 2)) / spread)


def estimate_branch_multiplicity(s: Immersion, p, radii=None) -> MultiplicityFit:
    """Fit ``|f(z) - f(p)| ~ |z - p|**m`` over the radii, cross-checked by ``|grad f| ~ |z - p|**(m - 1)``."""
    p = as_point(p)
    if radii is None:
        radii = np.geomspace(1e-2, 1e-4, 6) * s.scale
    radii = np.asarray(radii, dtype=float)
    if len(radii) < 4:
        raise ValueError("need at least four radii")
    fp = _limit(s, p)
    dist, grad = [], []
    for r in radii:
        z = _ring(p, r)
        dist.append(np.mean(np.linalg.norm(s.value(z) - fp, axis=-1)))
        grad.append(np.mean(_grad_norm(s, z, p)))
    slope, res = _loglog_fit(radii, dist)
    gslope, _ = _loglog_fit(radii, grad)
    m = int(round(slope))
    if abs(slope - m) > 0.25 or m < 1:
        raise InconsistentFit(f"distance slope {slope:.3f} is not close to an integer")
    if abs(gslope - (m - 1)) > 0.25:
        raise InconsistentFit(f"gradient slope {gslope:.3f} disagrees with m = {m}")
    return MultiplicityFit(m, slope, max(0.0, 1.0 - res), gslope)


def fit_log_profile(radii, values, *, max_residual: float = 0.05):
    """Least squares ``values = A0 |log r| + C``; returns ``(A0, relative residual)``."""
    x = np.abs(np.log(np.asarray(radii, dtype=float)))
    y = np.asarray(values, dtype=float)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    signal = max(float(np.sqrt(np.mean(y ** 2))), 1e-300)
    rel = float(np.sqrt(np.mean(resid ** 2)) / signal)
    if rel > max_residual:
        raise InconsistentFit(f"log profile residual {rel:.3f} exceeds {max_residual}")
    a0 = float(coef[0])
    if a0 < -1e-9 * signal:
        raise InconsistentFit(f"fitted log coefficient {a0:.3e} is negative")
    return max(a0, 0.0), rel


def curvature_log_fit(s: Immersion, p, radii=None, *, max_residual: float = 0.05):
    """Fit ``|A|(z) = A0 |log|z - p|| + C`` around a multiplicity-one point.

    Returns ``(A0, relative residual)``.
    """
    p = as_point(p)
    if radii is None:
        radii = np.geomspace(1e-2, 1e-6, 9) * s.scale
    prof = []
    for r in radii:
        geo = geometry_at(s, _ring(p, r))
        prof.append(np.mean(np.sqrt(np.maximum(geo.A_norm_sq, 0.0))))
    return fit_log_profile(radii, prof, max_residual=max_residual)
