import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from willmore_lab.catalog import get_surface
from willmore_lab.errors import DegenerateMetric
from willmore_lab.surface_core import (FiniteDifferenceImmersion, RigidMotion, codazzi_residual, export_csv,
                                       geometry_at, plane, round_sphere, torus, triaxial_ellipsoid,
                                       willmore_operator)
from willmore_lab.weierstrass import catenoid_data, immersion_from_data

Z = np.array([0.3 + 0.2j, -1.1 + 0.5j, 0.05 - 0.7j, 1.4 + 1.2j])


def test_round_sphere_is_totally_umbilic():
    g = geometry_at(round_sphere(), Z)
    assert np.allclose(g.H, 1, atol=1e-12)
    assert np.allclose(g.K, 1, atol=1e-12)
    assert np.allclose(np.abs(g.phi), 0, atol=1e-12)


def test_sphere_radius_scaling():
    g = geometry_at(round_sphere(2.0), Z)
    assert np.allclose(g.H, 0.5) and np.allclose(g.K, 0.25)


def test_plane():
    g = geometry_at(plane(), Z)
    for x in (g.H, g.K, g.lam, np.abs(g.phi)):
        assert np.allclose(x, 0, atol=1e-14)


def test_catenoid_is_minimal():
    s = immersion_from_data(catenoid_data())
    assert abs(geometry_at(s, np.array([1.0 + 0j])).H[0]) <= 1e-8
    assert np.max(np.abs(geometry_at(s, Z).H)) <= 1e-8


def test_curvature_norm_identity():
    g = geometry_at(torus(), Z)
    assert np.allclose(g.A_norm_sq, 4 * g.H ** 2 - 2 * g.K, atol=1e-12)


def test_willmore_operator_vanishes_on_willmore_surfaces():
    assert np.max(np.abs(willmore_operator(round_sphere(), Z))) <= 1e-10
    assert np.max(np.abs(willmore_operator(immersion_from_data(catenoid_data()), Z))) <= 1e-8


def test_willmore_torus_operator_converges_under_finite_differences():
    t = torus()
    z = np.array([0.4 + 0.3j, 1.2 - 0.9j])
    assert np.max(np.abs(willmore_operator(t, z))) <= 1e-12
    errs = [np.max(np.abs(willmore_operator(FiniteDifferenceImmersion(t, h), z))) for h in (2e-2, 1e-2)]
    assert errs[1] <= errs[0] / 3 or errs[1] <= 1e-9


def test_non_willmore_spheroid_has_nonzero_operator():
    s = get_surface("spheroid").immersion
    assert np.max(np.abs(willmore_operator(s, np.array([0.3 + 0.4j])))) > 1e-3


def test_codazzi_identically_zero_on_jets():
    for s in (round_sphere(), immersion_from_data(catenoid_data()), torus()):
        assert np.max(np.abs(codazzi_residual(s, Z))) <= 1e-10


def test_codazzi_converges_under_finite_differences():
    s = get_surface("spheroid").immersion
    z = np.array([0.3 + 0.4j, -0.2 + 1.1j])
    errs = [np.max(np.abs(codazzi_residual(FiniteDifferenceImmersion(s, h), z))) for h in (1e-2, 5e-3, 2.5e-3)]
    for a, b in zip(errs, errs[1:]):
        assert 3.0 <= a / b <= 5.5


def test_triaxial_ellipsoid_geometry():
    s = triaxial_ellipsoid()
    g = geometry_at(s, np.array([0.0 + 0.0j]), check_conformal=False)
    # (u, v) = (0, 0) is the point (a, 0, 0): principal curvatures a/b^2 and a/c^2
    k1, k2 = 1 / 1.5 ** 2, 1 / 2.0 ** 2
    assert g.K[0] == pytest.approx(k1 * k2, rel=1e-10)
    assert abs(g.H[0]) == pytest.approx((k1 + k2) / 2, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 5),
       st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_rigid_motion_invariance(a, b, c, scale, x, y):
    from scipy.spatial.transform import Rotation

    R = Rotation.from_rotvec([a, b, c]).as_matrix()
    base = torus()
    m = RigidMotion(base, R, np.array([1.0, -2.0, 0.5]), scale)
    z = np.array([complex(x, y)])
    g0, g1 = geometry_at(base, z), geometry_at(m, z)
    assert g1.K[0] == pytest.approx(g0.K[0] / scale ** 2, rel=1e-8, abs=1e-10)
    assert g1.H[0] ** 2 == pytest.approx(g0.H[0] ** 2 / scale ** 2, rel=1e-8, abs=1e-10)
    assert g1.H[0] ** 2 * math.exp(g1.lam[0]) == pytest.approx(g0.H[0] ** 2 * math.exp(g0.lam[0]), rel=1e-8)


def test_degenerate_metric_raises():
    from willmore_lab.surface_core import JetImmersion

    class Flat(JetImmersion):
        def __init__(self):
            super().__init__(lambda U, V: [U * 0, V * 0, U * 0], name="collapsed")

    with pytest.raises(DegenerateMetric):
        geometry_at(Flat(), np.array([0.1 + 0.1j]))


def test_export_csv(tmp_path):
    p = tmp_path / "g.csv"
    export_csv(round_sphere(), Z, p)
    rows = p.read_text().splitlines()
    assert rows[0] == "z_re,z_im,H,K,lambda,phi_re,phi_im" and len(rows) == len(Z) + 1
