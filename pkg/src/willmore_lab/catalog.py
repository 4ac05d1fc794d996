"""Named surfaces with their end data, inversion centers and reference values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .meromorphic import INF, is_inf
from .moebius import InvertedImmersion, choose_center, invert_immersion, min_distance
from .quadrature import IntegrationDomain
from .surface_core import Immersion, Spheroid, round_sphere, torus, triaxial_ellipsoid
from .weierstrass import (TrinoidParams, WeierstrassData, catenoid_data, end_classification, enneper_data,
                          immersion_from_data, trinoid_data)

PI = math.pi

# centers chosen by the largest sampled distance to the image over a coarse grid
_CENTERS = {
    "catenoid": (1.0, 0.0, 0.0),
    "enneper": (0.0, 0.0, 2.0),
    "trinoid": (1.5, -1.5, -1.5),
    "trinoid-sym": (1.0, 0.0, 1.5),
}
_CENTER_CLEARANCE = 0.2

PARAMETERS = {
    "sphere": {"radius": 1.0},
    "catenoid": {},
    "enneper": {},
    "trinoid": {"r1": 0.0, "r2": 2.0},
    "trinoid-sym": {"B": 1.0},
    "torus": {"R": math.sqrt(2.0), "r": 1.0},
    "spheroid": {"a": 1.0, "c": 1.5},
    "ellipsoid": {"a": 1.0, "b": 1.5, "c": 2.0},
}


@dataclass
class CatalogEntry:
    name: str
    params: dict
    immersion: Immersion
    data: WeierstrassData | None = None
    ends: tuple = ()
    chi_closed: int = 2
    center: np.ndarray | None = None
    expected: dict = field(default_factory=dict)
    preimages: tuple = ()

    @property
    def minimal(self) -> bool:
        return self.data is not None

    def domain(self) -> IntegrationDomain | None:
        s = self.immersion
        if self.data is not None:
            return IntegrationDomain.for_immersion(s, self.ends)
        if self.name in ("torus", "ellipsoid", "spheroid"):
            return IntegrationDomain(rect=s.domain, include_infinity=False)
        return None

    def end_orders(self) -> list[int]:
        return [k for _, k in self.ends]

    def inverted(self) -> InvertedImmersion:
        if self.center is None:
            raise ValueError(f"{self.name} has no inversion center")
        return invert_immersion(self.immersion, self.center)

    def quartic_grid(self, n: int = 8) -> np.ndarray:
        """Chart samples away from punctures and from the chart boundary."""
        s = self.immersion
        if self.data is None:
            if self.name == "sphere":
                r = np.linspace(0.1, 3.0, n)
                t = 2 * np.pi * (np.arange(n) + 0.5) / n
                return (r[:, None] * np.exp(1j * t[None, :])).ravel()
            u0, u1, v0, v1 = s.domain
            mu, mv = 0.1 * (u1 - u0), 0.1 * (v1 - v0)
            u = np.linspace(u0 + mu, u1 - mu, n)
            v = np.linspace(v0 + mv, v1 - mv, n)
            return (u[:, None] + 1j * v[None, :]).ravel()
        r = np.geomspace(0.3, 3.0, n)
        t = 2 * np.pi * (np.arange(n) + 0.5) / n
        z = (r[:, None] * np.exp(1j * t[None, :])).ravel()
        keep = np.ones(z.shape, bool)
        for p in s.punctures:
            keep &= np.abs(z - complex(p)) > 0.15
        return z[keep]


def _weierstrass_entry(name, params, data, expected):
    s = immersion_from_data(data)
    ends = tuple((p, end_classification(data, p).branch_order) for p in data.punctures)
    center = np.asarray(_CENTERS[name], dtype=float)
    if min_distance(s, center) < _CENTER_CLEARANCE:
        grid = [(x, y, z) for x in np.linspace(-1.5, 1.5, 7) for y in np.linspace(-1.5, 1.5, 7)
                for z in np.linspace(-1.5, 1.5, 7)]
        center = choose_center(s, grid)
    return CatalogEntry(name, params, s, data, ends, 2, center, expected)


def get_surface(name: str, **params) -> CatalogEntry:
    if name not in PARAMETERS:
        raise KeyError(f"unknown surface {name!r}; known: {sorted(PARAMETERS)}")
    unknown = set(params) - set(PARAMETERS[name])
    if unknown:
        raise KeyError(f"unknown parameters for {name}: {sorted(unknown)}")
    p = {**PARAMETERS[name], **params}
    if name == "sphere":
        s = round_sphere(p["radius"])
        return CatalogEntry(name, p, s, expected={"W": 4 * PI, "K": 4 * PI, "A2": 8 * PI})
    if name == "catenoid":
        return _weierstrass_entry(name, p, catenoid_data(),
                                  {"A2": 8 * PI, "K": -4 * PI, "W": 0.0, "W_inverted": 8 * PI})
    if name == "enneper":
        return _weierstrass_entry(name, p, enneper_data(),
                                  {"A2": 8 * PI, "K": -4 * PI, "W": 0.0, "W_inverted": 12 * PI})
    if name in ("trinoid", "trinoid-sym"):
        tp = TrinoidParams(p["r1"], p["r2"]) if name == "trinoid" else TrinoidParams(symmetric=True, B=p["B"])
        return _weierstrass_entry(name, p, trinoid_data(tp),
                                  {"A2": 16 * PI, "K": -8 * PI, "W": 0.0, "W_inverted": 12 * PI})
    if name == "torus":
        return CatalogEntry(name, p, torus(p["R"], p["r"]), chi_closed=0)
    if name == "spheroid":
        return CatalogEntry(name, p, Spheroid(p["a"], p["c"]), expected={"K": 4 * PI})
    return CatalogEntry(name, p, triaxial_ellipsoid(p["a"], p["b"], p["c"]))


def chart_mesh(entry: CatalogEntry, n: int = 32, *, inverted: bool = False):
    """Triangulated chart sample for export (icosphere for the round sphere)."""
    from .flow import TriMesh, icosphere

    s = entry.inverted() if inverted else entry.immersion
    if entry.name == "sphere" and not inverted:
        m = icosphere(3, entry.params["radius"])
        return m
    if entry.data is None:
        u0, u1, v0, v1 = entry.immersion.domain
        u = np.linspace(u0, u1, n)
        v = np.linspace(v0, v1, n)
        z = (u[:, None] + 1j * v[None, :])
    else:
        r = np.geomspace(0.2, 5.0, n)
        t = 2 * np.pi * np.arange(n + 1) / n
        z = r[:, None] * np.exp(1j * t[None, :])
    P = s.value(z.ravel())
    ni, nj = z.shape
    faces = []
    bad = ~np.all(np.isfinite(P), axis=1)
    for i in range(ni - 1):
        for j in range(nj - 1):
            a, b, c, d = i * nj + j, (i + 1) * nj + j, (i + 1) * nj + j + 1, i * nj + j + 1
            for tri in ((a, b, c), (a, c, d)):
                if not bad[list(tri)].any():
                    faces.append(tri)
    P = np.where(np.isfinite(P), P, 0.0)
    return TriMesh(P, np.array(faces, dtype=np.int64).reshape(-1, 3))


def is_finite_point(p) -> bool:
    return not is_inf(p)


__all__ = ["CatalogEntry", "get_surface", "chart_mesh", "PARAMETERS", "INF"]
