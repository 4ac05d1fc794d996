"""Reproduction suites behind ``verify --suite NAME``.

Each acceptance assertion lives in exactly one suite. A suite returns a list
of :class:`Check` records; values are plain floats and ints so reports are
deterministic for a fixed configuration.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

PI = math.pi


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    target: object = None
    tol: float | None = None
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def _rel(name, value, target, tol, **detail) -> Check:
    err = abs(value - target) / abs(target)
    return Check(name, bool(err <= tol), float(value), float(target), tol, {"rel_error": err, **detail})


def _h2_ratios(errs, floor):
    """True when every halving shrinks the error about fourfold, or the error sits at rounding."""
    ok = True
    ratios = []
    for a, b in zip(errs, errs[1:]):
        if a <= floor:
            ratios.append(None)
            continue
        ratios.append(a / b)
        ok &= 3.0 <= a / b <= 5.5
    return ok, ratios


# ---------------------------------------------------------------------------


def suite_sphere(tol=None, *, seed: int = 0) -> list[Check]:
    from .catalog import get_surface
    from .quadrature import integrate

    e = get_surface("sphere")
    r = integrate(e.immersion, None, "H2", rel_tol=1e-8)
    return [_rel("sphere W = 4pi", r.value, 4 * PI, tol or 1e-4, error_estimate=r.error_estimate)]


def suite_catenoid(tol=None, *, seed: int = 0) -> list[Check]:
    from .catalog import get_surface
    from .quadrature import integrate

    e = get_surface("catenoid")
    r = integrate(e.immersion, e.domain(), "A2", rel_tol=1e-7)
    return [_rel("catenoid int |A|^2 = 8pi", r.value, 8 * PI, tol or 1e-3,
                 error_estimate=r.error_estimate, tail=r.tail_contribution)]


def suite_quantization(tol=None, *, seed: int = 0) -> list[Check]:
    """W / 4pi verdicts for the catalog inversions."""
    from .catalog import get_surface
    from .quadrature import integrate, quantization_verdict

    out = []
    for name, target, t in (("catenoid", 8, 1e-3), ("enneper", 12, 1e-3), ("trinoid", 12, 2e-3),
                            ("trinoid-sym", 12, 2e-3)):
        e = get_surface(name)
        r = integrate(e.inverted(), e.domain(), "H2", rel_tol=1e-7)
        k, dist = quantization_verdict(r.value)
        c = _rel(f"inverted {name} W = {target}pi", r.value, target * PI, tol or t,
                 W_over_4pi=k, distance_to_quantum=dist, error_estimate=r.error_estimate)
        c.passed = c.passed and k == target // 4
        out.append(c)
    return out


def suite_inversion(tol=None, *, seed: int = 0) -> list[Check]:
    """Inversion identities for K and H^2 and the Enneper branch multiplicity."""
    from .catalog import get_surface
    from .moebius import estimate_branch_multiplicity, verify_inversion_identities
    from .meromorphic import INF

    out = []
    for name in ("catenoid", "enneper"):
        e = get_surface(name)
        rep = verify_inversion_identities(e.immersion, e.center, e.ends, e.preimages, dom=e.domain(), rel_tol=1e-8)
        t = tol or rep.tolerance
        out.append(Check(f"{name} inversion identities", bool(max(rep.residual_k, rep.residual_w) <= t),
                         max(rep.residual_k, rep.residual_w), 0.0, t,
                         {"residual_K": rep.residual_k, "residual_W": rep.residual_w, "residual_A2": rep.residual_a2}))
    inv = get_surface("enneper").inverted()
    fit = estimate_branch_multiplicity(inv, INF)
    out.append(Check("inverted Enneper branch multiplicity", fit.m == 3, fit.m, 3, None,
                     {"slope": fit.slope, "gradient_slope": fit.gradient_slope}))
    return out


def suite_trinoid(tol=None, *, seed: int = 0) -> list[Check]:
    from .catalog import get_surface
    from .quadrature import integrate

    out = []
    for name in ("trinoid", "trinoid-sym"):
        e = get_surface(name)
        r = integrate(e.immersion, e.domain(), "A2", rel_tol=1e-7)
        out.append(_rel(f"{name} int |A|^2 = 16pi", r.value, 16 * PI, tol or 2e-3, params=e.params))
    return out


def suite_gauss_bonnet(tol=None, *, seed: int = 0) -> list[Check]:
    from .catalog import get_surface
    from .quadrature import gauss_bonnet_check

    out = []
    for name, target in (("catenoid", -4), ("enneper", -4), ("trinoid", -8)):
        e = get_surface(name)
        lhs, rhs, _ = gauss_bonnet_check(e.immersion, e.ends, (), e.chi_closed, e.domain(), rel_tol=1e-7)
        c = _rel(f"{name} int K = {target}pi", lhs, target * PI, tol or 2e-3, rhs=rhs)
        c.passed = c.passed and rhs == target * PI
        out.append(c)
    return out


def suite_quartic(tol=None, *, seed: int = 0) -> list[Check]:
    from .catalog import get_surface
    from .conformal_gauss import holomorphy_residual, vanishes_identically

    t = tol or 1e-6
    out = []
    for name in ("sphere", "catenoid", "enneper"):
        e = get_surface(name)
        s = e.immersion if name == "sphere" else e.inverted()
        ok, worst = vanishes_identically(s, e.quartic_grid(8), tol=t)
        out.append(Check(f"scaled |Q| vanishes on {'' if name == 'sphere' else 'inverted '}{name}",
                         ok, worst, 0.0, t))
    sph, ell = get_surface("sphere"), get_surface("spheroid")
    base = holomorphy_residual(sph.immersion, sph.quartic_grid(6), h=1e-3)
    res = holomorphy_residual(ell.immersion, ell.quartic_grid(6), h=1e-3)
    ratio = res / max(base, 1e-300)
    out.append(Check("ellipsoid holomorphy residual exceeds sphere baseline", bool(ratio >= 10), ratio, 10.0, None,
                     {"ellipsoid": res, "sphere": base}))
    return out


def _rr_oracle(g, c, triv, can):
    # table rows, written out independently of rr_dimension
    if c < 0:
        return 0
    if c == 0 and c != 2 * g - 2:
        return int(triv)
    if c == 2 * g - 2:
        return g if can else g - 1
    if c > 2 * g - 2:
        return c + 1 - g
    return None


def suite_integer(tol=None, *, seed: int = 0) -> list[Check]:
    from .bundle_count import (FormSpaceSpec, LineBundleSpec, classification_gate, constrained_oneform_dim,
                               quartic_pole_space_dim, rr_dimension)
    from .errors import UndeterminedDimension
    from .meromorphic import INF

    bad = []
    rows = 0
    for g in range(4):
        for c in range(-8, 9):
            for triv, can in ((False, False), (True, False), (False, True), (True, True)):
                if g == 0 and (triv != (c == 0) or can != (c == -2)):
                    continue
                if g == 1 and c == 0 and triv != can:
                    continue
                if g == 1 and c != 0 and (triv or can):
                    continue
                if g > 1 and ((triv and c != 0) or (can and c != 2 * g - 2)):
                    continue
                want = _rr_oracle(g, c, triv, can)
                try:
                    got = rr_dimension(LineBundleSpec(g, c, triv, can))
                except UndeterminedDimension:
                    got = None
                rows += 1
                if got != want:
                    bad.append([g, c, triv, can, got, want])
    out = [Check("Riemann-Roch table rows", not bad, rows - len(bad), rows, None, {"mismatches": bad})]
    dims = [quartic_pole_space_dim(0, d) for d in range(4)]
    out.append(Check("quartic pole space is trivial on spheres with |D| <= 3", dims == [0, 0, 0, 0], dims,
                     [0, 0, 0, 0]))
    spec = FormSpaceSpec(pole_bounds=[(0, 2), (1, 2), (-1, 2)], zero_bounds=[(INF, 2)], residue_zero_at=[0, 1, -1])
    d3a = constrained_oneform_dim(spec)
    out.append(Check("residue-constrained 1-forms in the three-end case", d3a == 1, d3a, 1))
    expect = {
        "2p1": (None, [], "odd-multiplicity"),
        "2p1+p2": ("2p1+p2", [], "white-parity"),
        "3p1": (None, ["enneper"], None),
        "p1+p2+p3": ("p1+p2+p3", ["trinoid"], None),
        "p1+p2": ("p1+p2", ["catenoid"], None),
        "": ("x1", ["sphere"], None),
    }
    for div, (tr, cases, reason) in expect.items():
        rep = classification_gate(div, tr)
        ok = rep.cases == cases and (reason is None or reason in rep.reasons)
        out.append(Check(f"classification of D = {div or '0'}", ok, rep.cases, cases, None,
                         {"reasons": rep.reasons}))
    return out


def suite_flow(tol=None, *, seed: int = 0, level: int = 4) -> list[Check]:
    from .flow import (FlowParams, FlowState, catenoid_fit, catenoid_mesh, discrete_geometry, flow_step,
                       icosphere, perturbed_sphere, rescale_blowup, roundness, run_flow)

    out = []
    # (a) stationarity of the round sphere under refinement
    drift = []
    for lv in (2, 3, 4):
        p = FlowParams(dt=1e-3, smooth_every=0)
        st = FlowState.start(icosphere(lv), p)
        for _ in range(100):
            st = flow_step(st, p)
        drift.append(float(np.max(np.abs(np.linalg.norm(st.mesh.vertices, axis=1) - 1.0))))
    ok, ratios = _h2_ratios(drift, 1e-12)
    out.append(Check("round sphere stationary to O(h^2)", ok, drift, None, None, {"ratios": ratios}))
    # (b) monotone flow of a perturbed sphere
    res = run_flow(perturbed_sphere(level, 0.05), FlowParams(min_steps=500, snapshot_every=0))
    W = np.array([r[2] for r in res.series])
    mono = bool(np.all(np.diff(W) <= 1e-12 * W[0]))
    wfin = float(W[-1])
    ok = (res.reason == "converged-to-round" and mono and res.state.steps >= 500
          and abs(wfin - 4 * PI) <= 0.01 * 4 * PI)
    out.append(Check("perturbed sphere flows monotonically to the round sphere", ok, wfin / (4 * PI), 1.0, 0.01,
                     {"reason": res.reason, "steps": res.state.steps, "monotone": mono,
                      "W0_over_4pi": float(W[0] / (4 * PI)), "roundness": roundness(res.state.mesh),
                      "rejected": res.rejected}))
    # (c) parabolic scaling covariance
    lam = 2.5
    m = perturbed_sphere(3, 0.05)
    p = FlowParams(stepper="explicit", dt=1e-6, smooth_every=0)
    a = flow_step(FlowState.start(m, p), p).mesh.vertices
    ps = FlowParams(stepper="explicit", dt=1e-6 * lam ** 4, smooth_every=0)
    b = flow_step(FlowState.start(m.with_vertices(lam * m.vertices), ps), ps).mesh.vertices
    cov = float(np.max(np.abs(b - lam * a)) / np.max(np.abs(lam * a)))
    out.append(Check("parabolic rescaling covariance", cov <= 1e-8, cov, 0.0, 1e-8))
    # (d) catenoid fit
    cm = catenoid_mesh()
    _, _, a0, r0 = catenoid_fit(cm)
    rng = np.random.default_rng(seed)
    _, _, a1, _ = catenoid_fit(cm.with_vertices(cm.vertices + rng.normal(scale=0.01, size=cm.vertices.shape)))
    out.append(Check("catenoid fit on exact data", r0 <= 1e-6, r0, 0.0, 1e-6, {"a": a0}))
    out.append(Check("catenoid fit under 1% noise", abs(a1 - 1.0) <= 0.02, a1, 1.0, 0.02))
    # (e) blow-up of a shrinking catenoid
    traj = [(1.0 - 2.0 ** (-4 * j), cm.with_vertices(cm.vertices * 2.0 ** -j)) for j in range(5)]
    ev = rescale_blowup(traj)
    err = 0.0
    for e in ev:
        _, _, a, r = catenoid_fit(e.rescaled_mesh)
        g = discrete_geometry(e.rescaled_mesh)
        err = max(err, abs(g.max_curvature - 1.0), abs(np.ptp(e.rescaled_mesh.vertices, axis=0)
                                                        - np.ptp(ev[0].rescaled_mesh.vertices, axis=0)).max())
    out.append(Check("rescaled shrinking catenoids coincide", bool(ev) and err <= 1e-6, err, 0.0, 1e-6,
                     {"events": len(ev)}))
    return out


def suite_cross_route(tol=None, *, seed: int = 0) -> list[Check]:
    from .catalog import get_surface
    from .conformal_gauss import conformality_residual, quartic_direct, quartic_form
    from .surface_core import FiniteDifferenceImmersion, codazzi_residual

    hs = (1e-2, 5e-3, 2.5e-3)
    floor = 1e-12
    out = []
    for name in ("sphere", "torus", "spheroid", "catenoid", "enneper", "trinoid"):
        e = get_surface(name)
        s = e.immersion if e.data is None else e.inverted()
        z = e.quartic_grid(4)
        q = quartic_form(s, z)
        qs = max(1.0, float(np.max(np.abs(q))))
        eq = [float(np.max(np.abs(quartic_direct(s, z, h=h) - q))) / qs for h in hs]
        ec = [float(np.max(np.abs(conformality_residual(s, z, h=h)))) for h in hs]
        ez = [float(np.max(np.abs(codazzi_residual(FiniteDifferenceImmersion(s, h), z)))) for h in hs]
        for label, errs in (("quartic form routes agree", eq), ("conformality residual", ec),
                            ("Codazzi residual", ez)):
            ok, ratios = _h2_ratios(errs, floor)
            out.append(Check(f"{label} at O(h^2) on {name}", ok, errs, None, None, {"h": list(hs), "ratios": ratios}))
    return out


SUITES = {
    "sphere": suite_sphere,
    "catenoid": suite_catenoid,
    "quantization": suite_quantization,
    "inversion": suite_inversion,
    "trinoid": suite_trinoid,
    "gauss-bonnet": suite_gauss_bonnet,
    "quartic": suite_quartic,
    "integer": suite_integer,
    "flow": suite_flow,
    "cross-route": suite_cross_route,
}
