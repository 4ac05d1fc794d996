"""Acceptance criteria 1-10, each at its stated tolerance and time budget.

Every test prints one ``PASS``/``FAIL`` line (visible with ``pytest -s`` or in
the ``-v`` transcript) and then asserts the same verdict.
"""

import math
import time
import timeit

import pytest

from willmore_lab import suites
from willmore_lab.bundle_count import (FormSpaceSpec, LineBundleSpec, classification_gate, constrained_oneform_dim,
                                       quartic_pole_space_dim, rr_dimension)
from willmore_lab.meromorphic import INF

PI = math.pi


def _verdict(capsys, n, title, checks, extra=""):
    ok = all(c.passed for c in checks)
    failed = [c.name for c in checks if not c.passed]
    with capsys.disabled():
        print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'} {title}{extra}"
              + (f" failed: {failed}" if failed else ""))
    assert ok, [c.to_json() for c in checks if not c.passed]


def _by_name(checks, *words):
    return [c for c in checks if all(w in c.name for w in words)]


def _timed(fn, **kw):
    t0 = time.perf_counter()
    out = fn(**kw)
    return out, time.perf_counter() - t0


def test_criterion_01_sphere_energy(capsys):
    checks, dt = _timed(suites.suite_sphere)
    c = checks[0]
    assert c.tol == 1e-4 and c.target == pytest.approx(4 * PI)
    checks.append(suites.Check("under 1 s", dt < 1.0, dt, 1.0))
    _verdict(capsys, 1, "sphere W = 4pi within 1e-4", checks, f" (rel {c.detail['rel_error']:.1e}, {dt:.2f} s)")


def test_criterion_02_catenoid_total_curvature(capsys):
    checks, dt = _timed(suites.suite_catenoid)
    c = checks[0]
    assert c.tol == 1e-3 and c.target == pytest.approx(8 * PI)
    checks.append(suites.Check("under 10 s", dt < 10.0, dt, 10.0))
    _verdict(capsys, 2, "catenoid int |A|^2 = 8pi within 0.1%", checks,
             f" (rel {c.detail['rel_error']:.1e}, {dt:.2f} s)")


def test_criterion_03_inverted_catenoid(capsys):
    q = _by_name(suites.suite_quantization(), "catenoid")
    ident = _by_name(suites.suite_inversion(), "catenoid inversion identities")
    assert len(q) == 1 and len(ident) == 1 and q[0].tol == 1e-3
    _verdict(capsys, 3, "inverted catenoid W = 8pi, inversion identities", q + ident,
             f" (W/4pi {q[0].value / (4 * PI):.6f}, residual {ident[0].value:.1e} <= {ident[0].tol:.1e})")


def test_criterion_04_inverted_enneper(capsys):
    q = _by_name(suites.suite_quantization(), "enneper")
    m = _by_name(suites.suite_inversion(), "branch multiplicity")
    assert len(q) == 1 and len(m) == 1 and q[0].tol == 1e-3
    _verdict(capsys, 4, "inverted Enneper W = 12pi, m = 3", q + m,
             f" (W/4pi {q[0].value / (4 * PI):.6f}, m = {m[0].value})")


def test_criterion_05_trinoid(capsys):
    a2 = suites.suite_trinoid()
    w = _by_name(suites.suite_quantization(), "trinoid")
    assert len(a2) == 2 and len(w) == 2
    assert all(c.tol == 2e-3 for c in a2 + w)
    _verdict(capsys, 5, "trinoid int |A|^2 = 16pi, inverted W = 12pi (both data sets)", a2 + w)


def test_criterion_06_gauss_bonnet(capsys):
    checks = suites.suite_gauss_bonnet()
    assert [c.target for c in checks] == pytest.approx([-4 * PI, -4 * PI, -8 * PI])
    assert all(c.detail["rhs"] == c.target for c in checks)
    _verdict(capsys, 6, "Gauss-Bonnet -4pi, -4pi, -8pi with exact rhs", checks)


def test_criterion_07_quartic_vanishing(capsys):
    checks = suites.suite_quartic()
    assert len(checks) == 4 and all(c.tol == 1e-6 for c in checks[:3])
    _verdict(capsys, 7, "scaled |Q| <= 1e-6, holomorphy contrast >= 10x", checks,
             f" (worst |Q| {max(c.value for c in checks[:3]):.1e}, ratio {checks[3].value:.1e})")


def _per_call_ms(fn, number=200):
    fn()
    return min(timeit.repeat(fn, number=number, repeat=3)) / number * 1e3


def test_criterion_08_integer_suite(capsys):
    checks = suites.suite_integer()
    spec = FormSpaceSpec(pole_bounds=[(0, 2), (1, 2), (-1, 2)], zero_bounds=[(INF, 2)], residue_zero_at=[0, 1, -1])
    calls = {
        "rr_dimension": lambda: rr_dimension(LineBundleSpec(2, 3)),
        "quartic_pole_space_dim": lambda: quartic_pole_space_dim(0, 3),
        "constrained_oneform_dim": lambda: constrained_oneform_dim(spec),
    }
    for div, tr in (("2p1", None), ("2p1+p2", "2p1+p2"), ("3p1", None), ("p1+p2+p3", "p1+p2+p3")):
        calls[f"classification_gate({div})"] = lambda d=div, t=tr: classification_gate(d, t)
    worst = ("", 0.0)
    for name, fn in calls.items():
        ms = _per_call_ms(fn)
        worst = max(worst, (name, ms), key=lambda x: x[1])
        checks.append(suites.Check(f"{name} under 1 ms", ms < 1.0, ms, 1.0))
    _verdict(capsys, 8, "integer suite exact and under 1 ms per call", checks,
             f" (slowest {worst[0]} {worst[1]:.3f} ms)")


@pytest.mark.slow
def test_criterion_09_flow_properties(capsys):
    checks, dt = _timed(suites.suite_flow)
    mono = _by_name(checks, "monotonically")[0]
    assert mono.detail["steps"] >= 500
    checks.append(suites.Check("under 5 min", dt < 300.0, dt, 300.0))
    _verdict(capsys, 9, "flow property suite (a)-(e)", checks,
             f" (W/4pi {mono.value:.5f} after {mono.detail['steps']} steps, {dt:.0f} s)")


def test_criterion_10_cross_route(capsys):
    checks = suites.suite_cross_route()
    names = {c.name.rsplit(" on ", 1)[1] for c in checks}
    assert names == {"sphere", "torus", "spheroid", "catenoid", "enneper", "trinoid"}
    _verdict(capsys, 10, "quartic routes, conformality and Codazzi at O(h^2)", checks)
