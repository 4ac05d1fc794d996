import numpy as np
import pytest

from willmore_lab.catalog import PARAMETERS, chart_mesh, get_surface
from willmore_lab.moebius import min_distance


@pytest.mark.parametrize("name", sorted(PARAMETERS))
def test_entries_build(name):
    e = get_surface(name)
    z = e.quartic_grid(4)
    assert len(z) and np.all(np.isfinite(e.immersion.value(z)))
    for p in e.immersion.punctures:
        assert np.min(np.abs(z - complex(p))) > 0.1


@pytest.mark.parametrize("name", ["catenoid", "enneper", "trinoid", "trinoid-sym"])
def test_inversion_centers_clear_the_surface(name):
    e = get_surface(name)
    assert min_distance(e.immersion, e.center) >= 0.2


def test_end_data():
    assert get_surface("catenoid").end_orders() == [0, 0]
    assert get_surface("enneper").end_orders() == [2]
    assert get_surface("trinoid").end_orders() == [0, 0, 0]


def test_parameters_are_routed():
    e = get_surface("trinoid", r1=0.0, r2=2.0)
    assert e.data.name == "trinoid(r1=0,r2=2)"
    assert get_surface("sphere", radius=2.0).params["radius"] == 2.0
    with pytest.raises(KeyError):
        get_surface("trinoid", B=1.0)
    with pytest.raises(KeyError):
        get_surface("klein-bottle")


def test_chart_mesh_export():
    m = chart_mesh(get_surface("enneper"), 12, inverted=True)
    assert m.n_vertices == 12 * 13 and len(m.faces) > 0 and np.all(np.isfinite(m.vertices))
