import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from willmore_lab.catalog import get_surface
from willmore_lab.conformal_gauss import (LorentzVec, conformal_area, conformal_gauss_map, conformality_residual,
                                          holomorphy_residual, inner, point_lift, pole_order_probe, quartic_direct,
                                          quartic_form, sphere_lift, vanishes_identically)
from willmore_lab.errors import ZeroRadius
from willmore_lab.meromorphic import INF
from willmore_lab.surface_core import geometry_at, round_sphere, torus
from willmore_lab.weierstrass import catenoid_data, enneper_data, immersion_from_data

Z = np.array([0.3 + 0.2j, -1.1 + 0.5j, 0.7 - 0.6j])
E = np.eye(5)


def test_signature():
    assert inner(E[0], E[0]) == 1 and inner(E[4], E[4]) == -1
    assert inner(LorentzVec((1, 0, 0, 0, 0)), E[0]) == 1
    with pytest.raises(ValueError):
        LorentzVec((1, 2))


def test_point_lift():
    assert np.allclose(point_lift([0, 0, 0]), [0, 0, 0, -0.5, 0.5])
    X = point_lift([1.0, 2.0, 3.0])
    assert inner(X, X) == pytest.approx(0.0, abs=1e-12)
    assert X[4] - X[3] == pytest.approx(1.0)
    assert point_lift([0.6, 0.8, 0.0])[3] == pytest.approx(0.0, abs=1e-15)


def test_sphere_lift():
    assert np.allclose(sphere_lift([0, 0, 0], 1.0), [0, 0, 0, -1, 0])
    P = sphere_lift([1.0, -2.0, 0.5], 0.7)
    assert inner(P, P) == pytest.approx(1.0)
    Q = sphere_lift([1.0, -2.0, 0.5], -0.7)
    assert (Q[4] - Q[3]) == pytest.approx(-(P[4] - P[3]))
    with pytest.raises(ZeroRadius):
        sphere_lift([0, 0, 0], 0.0)


def test_point_lies_on_its_spheres():
    x0, r = np.array([0.3, 0.1, -0.4]), 1.3
    x = x0 + r * np.array([0.0, 0.6, 0.8])
    assert inner(point_lift(x), sphere_lift(x0, r)) == pytest.approx(0.0, abs=1e-12)


v5 = st.lists(st.floats(-10, 10), min_size=5, max_size=5)


@settings(max_examples=50, deadline=None)
@given(v5, v5, v5, st.floats(-3, 3))
def test_inner_is_symmetric_bilinear(a, b, c, t):
    a, b, c = map(np.array, (a, b, c))
    assert inner(a, b) == pytest.approx(inner(b, a))
    assert inner(a + t * c, b) == pytest.approx(inner(a, b) + t * inner(c, b), rel=1e-9, abs=1e-8)


def test_conformal_gauss_map():
    g = geometry_at(round_sphere(), Z)
    Y = conformal_gauss_map(g)
    assert np.allclose(Y, [0, 0, 0, -1, 0], atol=1e-12)
    for s in (torus(), immersion_from_data(catenoid_data())):
        g = geometry_at(s, Z)
        Y = conformal_gauss_map(g)
        assert np.allclose(inner(Y, Y), 1.0, atol=1e-10)
    g = geometry_at(immersion_from_data(enneper_data()), Z)
    d = np.sum(g.f * g.nu, axis=-1)
    assert np.allclose(conformal_gauss_map(g), np.concatenate([g.nu, d[:, None], d[:, None]], axis=1), atol=1e-8)


def test_conformality_residual_routes():
    assert np.max(np.abs(conformality_residual(round_sphere(), Z))) <= 1e-12
    s = get_surface("catenoid").immersion
    errs = [np.max(np.abs(conformality_residual(s, Z, h=h))) for h in (1e-2, 5e-3)]
    assert errs[1] <= errs[0] / 3 or errs[0] <= 1e-12


def test_quartic_vanishing_examples():
    for s in (immersion_from_data(catenoid_data()), immersion_from_data(enneper_data()), round_sphere()):
        assert np.max(np.abs(quartic_form(s, Z))) <= 1e-12
    ok, worst = vanishes_identically(get_surface("catenoid").inverted(), get_surface("catenoid").quartic_grid(6))
    assert ok and worst <= 1e-6


def test_torus_quartic_is_holomorphic_and_nonzero():
    q = quartic_form(torus(), Z)
    assert np.allclose(q, q[0]) and abs(q[0]) > 1e-2
    assert holomorphy_residual(torus(), Z) <= 1e-8


def test_holomorphy_separates_willmore_from_non_willmore():
    sph = holomorphy_residual(round_sphere(), Z, h=1e-3)
    ell = holomorphy_residual(get_surface("spheroid").immersion, np.array([0.3 + 0.4j, -0.5 + 1.0j]), h=1e-3)
    assert ell > 10 * max(sph, 1e-300)
    enn = get_surface("enneper")
    inv = enn.inverted()
    r = [holomorphy_residual(inv, enn.quartic_grid(4), h=h) for h in (2e-3, 1e-3)]
    assert max(r) <= 1e-6


def test_direct_route_agrees_at_second_order():
    s = get_surface("spheroid").immersion
    z = np.array([0.3 + 0.4j])
    q = quartic_form(s, z)
    errs = [abs(quartic_direct(s, z, h=h)[0] - q[0]) for h in (1e-2, 5e-3)]
    assert 3.0 <= errs[0] / errs[1] <= 5.5


def test_pole_order_probe():
    inv = get_surface("catenoid").inverted()
    for p in (0, INF):
        assert pole_order_probe(inv, p).identically_zero
    f2 = pole_order_probe(lambda z: z ** -2.0, 0)
    assert f2.sigma == pytest.approx(2.0, abs=1e-6) and f2.passed
    f3 = pole_order_probe(lambda z: (z - 1) ** -3.0, 1)
    assert f3.sigma == pytest.approx(3.0, abs=1e-6) and not f3.passed


def test_conformal_area_relation():
    out = conformal_area(round_sphere(), chi=2)
    assert out["conformal_area"] == pytest.approx(0.0, abs=1e-8)
    assert out["residual"] <= 1e-6
    e = get_surface("torus")
    out = conformal_area(e.immersion, e.domain(), chi=0)
    assert out["residual"] <= 1e-6 and out["conformal_area"] == pytest.approx(out["W"], rel=1e-8)
