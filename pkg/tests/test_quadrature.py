import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from willmore_lab.catalog import get_surface
from willmore_lab.errors import AmbiguousQuantum
from willmore_lab.quadrature import (IntegrationDomain, adaptive_cubature, gauss_bonnet_check, gauss_bonnet_rhs,
                                     integrate, quantization_verdict, white_parity_check)
from willmore_lab.surface_core import round_sphere

PI = math.pi


def test_sphere_energy_and_area():
    s = round_sphere()
    assert integrate(s, None, "H2").value == pytest.approx(4 * PI, rel=1e-6)
    assert integrate(s, None, "1").value == pytest.approx(4 * PI, rel=1e-6)
    assert integrate(round_sphere(2.0), None, "1").value == pytest.approx(16 * PI, rel=1e-6)


def test_catenoid_total_curvature_with_error_estimate():
    e = get_surface("catenoid")
    r = integrate(e.immersion, e.domain(), "A2", rel_tol=1e-7)
    assert r.value == pytest.approx(8 * PI, rel=1e-3)
    assert r.error_estimate < 1e-3 * r.value
    assert abs(r.value - 8 * PI) <= max(100 * r.error_estimate, 1e-6)


def test_trinoid_total_curvature():
    e = get_surface("trinoid")
    assert integrate(e.immersion, e.domain(), "A2", rel_tol=1e-7).value == pytest.approx(16 * PI, rel=1e-3)


def test_torus_energy():
    e = get_surface("torus")
    # the Willmore torus with tube ratio 1/sqrt(2) has W = 2 pi^2
    assert integrate(e.immersion, e.domain(), "H2", rel_tol=1e-8).value == pytest.approx(2 * PI ** 2, rel=1e-6)


def test_gauss_bonnet_rhs_convention():
    assert gauss_bonnet_rhs(2, [0, 0], []) == -4 * PI
    assert gauss_bonnet_rhs(2, [2], []) == -4 * PI
    assert gauss_bonnet_rhs(2, [0, 0, 0], []) == -8 * PI
    assert gauss_bonnet_rhs(2, [], []) == 4 * PI


def test_gauss_bonnet_enneper():
    e = get_surface("enneper")
    lhs, rhs, res = gauss_bonnet_check(e.immersion, e.ends, (), 2, e.domain(), rel_tol=1e-7)
    assert rhs == -4 * PI and res <= 2e-3 * 4 * PI


def test_quantization_verdict():
    assert quantization_verdict(8 * PI) == (2, pytest.approx(0.0, abs=1e-14))
    k, dev = quantization_verdict(12 * PI + 0.01)
    assert k == 3 and dev == pytest.approx(0.01)
    with pytest.raises(AmbiguousQuantum):
        quantization_verdict(10 * PI)


def test_white_parity():
    assert white_parity_check(-4 * PI)
    assert white_parity_check(-8 * PI)
    assert not white_parity_check(-6 * PI)


def test_adaptive_cubature_polynomial_exact():
    val, err, cells = adaptive_cubature(lambda z: z.real ** 2 * z.imag ** 4 + 0 * z.real, (0, 1, 0, 2), tol_abs=1e-12)
    assert val == pytest.approx(32 / 15, rel=1e-12)


def test_domain_validation():
    with pytest.raises(ValueError):
        IntegrationDomain(punctures=((0.0, 0.5),), outer_radius=-1.0)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.3, 3.0))
def test_sphere_energy_is_scale_invariant(r):
    assert integrate(round_sphere(r), None, "H2", rel_tol=1e-8).value == pytest.approx(4 * PI, rel=1e-6)


def test_sphere_energy_timing():
    t = time.perf_counter()
    integrate(round_sphere(), None, "H2", rel_tol=1e-8)
    assert time.perf_counter() - t < 1.0
