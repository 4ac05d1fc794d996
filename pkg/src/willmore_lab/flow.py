"""Discrete Willmore flow ``df/dt = -(Delta H + 2 H (H^2 - K)) nu`` on triangle meshes.

Geometry uses the cotangent Laplacian with mixed (Voronoi / obtuse) vertex
areas: ``Delta f = L f / A``, ``H = |Delta f| / 2`` signed by the inward
vertex normal, ``K`` the angle defect over the mixed area. The force is the
term-by-term discretization of the Willmore operator; an energy check
rejects steps that raise ``W = sum H^2 A`` by more than ``1e-6 W``.

Two steppers are provided: explicit Euler with ``dt = 0.1 h^4`` and a
stabilized semi-implicit step ``(M + dt L M^{-1} L) delta = dt M v`` that
allows ``dt ~ h^2``. Both commute with rigid motions and with the parabolic
scaling ``f -> s f``, ``dt -> s^4 dt``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import least_squares

from .errors import DegenerateTriangle, FitDiverged, MeshDegenerate, NoConcentration, StepRejected

# ---------------------------------------------------------------------------
# meshes


@dataclass
class TriMesh:
    vertices: np.ndarray
    faces: np.ndarray
    _topology: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.faces = np.asarray(self.faces, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ValueError("vertices must have shape (n, 3)")
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise ValueError("faces must have shape (m, 3)")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def copy(self) -> "TriMesh":
        return TriMesh(self.vertices.copy(), self.faces.copy(), dict(self._topology))

    def with_vertices(self, v) -> "TriMesh":
        """Same connectivity (and cached topology) with new positions."""
        return TriMesh(np.asarray(v, dtype=float), self.faces, self._topology)

    def edges(self) -> np.ndarray:
        if "edges" not in self._topology:
            e = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
            self._topology["edges"] = np.unique(np.sort(e, axis=1), axis=0)
        return self._topology["edges"]

    def boundary_vertices(self) -> np.ndarray:
        if "boundary" not in self._topology:
            e = np.sort(np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]]),
                        axis=1)
            uniq, counts = np.unique(e, axis=0, return_counts=True)
            mask = np.zeros(self.n_vertices, bool)
            mask[uniq[counts == 1].ravel()] = True
            self._topology["boundary"] = mask
        return self._topology["boundary"]

    def euler_characteristic(self) -> int:
        used = np.unique(self.faces)
        return int(len(used) - len(self.edges()) + len(self.faces))

    def is_closed_manifold(self) -> bool:
        e = np.sort(np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]]), axis=1)
        _, counts = np.unique(e, axis=0, return_counts=True)
        if np.any(counts != 2):
            return False
        # consistent orientation: every directed edge appears once
        d = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
        return len(np.unique(d, axis=0)) == len(d)

    def min_edge_length(self) -> float:
        e = self.edges()
        return float(np.min(np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)))

    def diameter(self) -> float:
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def min_angle(self) -> float:
        return float(np.min(_angles(self.vertices, self.faces)))


def icosphere(level: int = 4, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Subdivided icosahedron; ``10 * 4**level + 2`` vertices."""
    t = (1 + math.sqrt(5)) / 2
    v = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
         (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    f = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4), (11, 10, 2),
         (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9), (4, 9, 5), (2, 4, 11),
         (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(p, float) / np.linalg.norm(p) for p in v]
    faces = list(f)
    for _ in range(level):
        cache = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return TriMesh(np.array(verts) * radius + np.asarray(center, float), np.array(faces))


def perturbed_sphere(level: int = 4, amplitude: float = 0.05) -> TriMesh:
    """Icosphere with smooth radial perturbation ``r = 1 + amplitude * P(x)``, ``max |P| = 1``.

    ``P`` mixes the degree-2 and degree-3 harmonics ``2z^2 - x^2 - y^2`` and ``xyz``.
    """
    m = icosphere(level)
    x, y, z = m.vertices.T
    p = (2 * z * z - x * x - y * y) / 2 + 3 * math.sqrt(3) * x * y * z / 2
    p = p / np.max(np.abs(p))
    return m.with_vertices(m.vertices * (1 + amplitude * p)[:, None])


def grid_patch(n: int = 9, h: float = 0.1) -> TriMesh:
    """Flat ``n x n`` grid in the plane ``z = 0`` with a symmetric diagonal split."""
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    v = np.stack([i.ravel() * h, j.ravel() * h, np.zeros(n * n)], axis=1)
    faces = []
    for a in range(n - 1):
        for b in range(n - 1):
            p = a * n + b
            q, r, s = p + n, p + 1, p + n + 1
            if (a + b) % 2 == 0:
                faces += [(p, q, s), (p, s, r)]
            else:
                faces += [(p, q, r), (q, s, r)]
    return TriMesh(v, np.array(faces))


def catenoid_mesh(n_theta: int = 48, n_h: int = 33, height: float = 1.2, scale: float = 1.0) -> TriMesh:
    """Open triangulated patch of ``rho = a cosh(h / a)``, ``|h| <= height * a``, axis ``e3``."""
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    hh = np.linspace(-height, height, n_h)
    T, Hh = np.meshgrid(th, hh, indexing="ij")
    rho = np.cosh(Hh)
    v = np.stack([rho * np.cos(T), rho * np.sin(T), Hh], axis=-1).reshape(-1, 3) * scale
    faces = []
    for a in range(n_theta):
        a2 = (a + 1) % n_theta
        for b in range(n_h - 1):
            p, q = a * n_h + b, a2 * n_h + b
            faces += [(p, q, q + 1), (p, q + 1, p + 1)]
    return TriMesh(v, np.array(faces))


def save_obj(mesh: TriMesh, path) -> None:
    with open(path, "w") as fh:
        for x in mesh.vertices:
            fh.write(f"v {float(x[0])!r} {float(x[1])!r} {float(x[2])!r}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


def load_obj(path) -> TriMesh:
    verts, faces = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(p.split("/")[0]) for p in parts[1:]]
                idx = [i - 1 if i > 0 else len(verts) + i for i in idx]
                for k in range(1, len(idx) - 1):
                    faces.append((idx[0], idx[k], idx[k + 1]))
    return TriMesh(np.array(verts, float).reshape(-1, 3), np.array(faces, np.int64).reshape(-1, 3))


# ---------------------------------------------------------------------------
# discrete geometry


def _angles(V, F):
    a, b, c = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    out = []
    for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
        u, w = q - p, r - p
        cos = np.sum(u * w, axis=1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1))
        out.append(np.arccos(np.clip(cos, -1.0, 1.0)))
    return np.stack(out, axis=1)


@dataclass
class DiscreteGeometry:
    H: np.ndarray
    K: np.ndarray
    A2: np.ndarray
    area: np.ndarray
    normal: np.ndarray
    laplacian: sp.csr_matrix
    interior: np.ndarray

    @property
    def energy(self) -> float:
        m = self.interior
        return float(np.sum(self.H[m] ** 2 * self.area[m]))

    @property
    def max_curvature(self) -> float:
        return float(np.sqrt(np.max(self.A2[self.interior])))

    def willmore_operator(self) -> np.ndarray:
        """``Delta H + 2 H (H^2 - K)`` per vertex (zero on the boundary)."""
        lap_h = (self.laplacian @ self.H) / self.area
        w = lap_h + 2 * self.H * (self.H ** 2 - self.K)
        return np.where(self.interior, w, 0.0)


def cotan_laplacian(V, F) -> tuple[sp.csr_matrix, np.ndarray]:
    """``L`` with ``L_ij = (cot a + cot b) / 2`` and the mixed vertex areas."""
    n = len(V)
    a, b, c = V[F[:, 0]], V[F[:, 1]], V[F[:, 2]]
    dbl = np.linalg.norm(np.cross(b - a, c - a), axis=1)
    if np.any(~(dbl > 1e-300)):
        raise DegenerateTriangle("triangle with zero area")
    rows, cols, vals = [], [], []
    cots = []
    for (i, j, k), (p, q, r) in (((0, 1, 2), (a, b, c)), ((1, 2, 0), (b, c, a)), ((2, 0, 1), (c, a, b))):
        # angle at vertex i, opposite edge (j, k)
        u, w = q - p, r - p
        cot = np.sum(u * w, axis=1) / dbl
        cots.append(cot)
        rows += [F[:, j], F[:, k]]
        cols += [F[:, k], F[:, j]]
        vals += [0.5 * cot, 0.5 * cot]
    L = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsr()
    L = L - sp.diags(np.asarray(L.sum(axis=1)).ravel())
    # mixed areas
    ang = _angles(V, F)
    tri_area = 0.5 * dbl
    e2 = [np.sum((c - b) ** 2, axis=1), np.sum((a - c) ** 2, axis=1), np.sum((b - a) ** 2, axis=1)]
    area = np.zeros(n)
    obtuse = np.any(ang > np.pi / 2, axis=1)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        vor = (e2[k] * cots[k] + e2[j] * cots[j]) / 8.0
        contrib = np.where(obtuse, np.where(ang[:, i] > np.pi / 2, tri_area / 2, tri_area / 4), vor)
        np.add.at(area, F[:, i], contrib)
    return L, area


def discrete_geometry(mesh: TriMesh) -> DiscreteGeometry:
    V, F = mesh.vertices, mesh.faces
    L, area = cotan_laplacian(V, F)
    if np.any(~(area[np.unique(F)] > 0)):
        raise DegenerateTriangle("vertex with vanishing mixed area")
    n = len(V)
    safe_area = np.where(area > 0, area, 1.0)
    lap_f = (L @ V) / safe_area[:, None]
    fn = np.cross(V[F[:, 1]] - V[F[:, 0]], V[F[:, 2]] - V[F[:, 0]])
    vn = np.zeros_like(V)
    for i in range(3):
        np.add.at(vn, F[:, i], fn)
    nrm = np.linalg.norm(vn, axis=1)
    nu = -vn / np.where(nrm > 0, nrm, 1.0)[:, None]  # inward for outward-oriented faces
    sign = np.sign(np.sum(lap_f * nu, axis=1))
    H = 0.5 * np.linalg.norm(lap_f, axis=1) * np.where(sign == 0, 1.0, sign)
    ang = _angles(V, F)
    ang_sum = np.zeros(n)
    for i in range(3):
        np.add.at(ang_sum, F[:, i], ang[:, i])
    interior = ~mesh.boundary_vertices()
    K = np.where(interior, (2 * np.pi - ang_sum) / safe_area, 0.0)
    H = np.where(interior, H, 0.0)
    A2 = 2 * H * H + 2 * np.maximum(H * H - K, 0.0)
    return DiscreteGeometry(H, K, A2, area, nu, L, interior)


def angle_defect_total(mesh: TriMesh) -> float:
    """``sum_v K_v A_v = sum_v (2 pi - angle sum)``, which is ``2 pi chi`` on closed meshes."""
    ang = _angles(mesh.vertices, mesh.faces)
    used = np.unique(mesh.faces)
    return float(2 * np.pi * len(used) - np.sum(ang))


def roundness(mesh: TriMesh) -> float:
    """Relative spread ``std(|x - c|) / mean(|x - c|)`` about the centroid."""
    c = mesh.vertices.mean(axis=0)
    r = np.linalg.norm(mesh.vertices - c, axis=1)
    return float(np.std(r) / np.mean(r))


# ---------------------------------------------------------------------------
# stepping


@dataclass
class FlowParams:
    stepper: str = "semi-implicit"  # or "explicit"
    dt: float | None = None  # None: 0.1 h^4 (explicit) or 0.1 h^2 (semi-implicit)
    energy_tol: float = 1e-6  # delta_E relative to W
    smooth_every: int = 25
    smooth_weight: float = 0.5
    min_angle: float = math.radians(1.0)
    max_steps: int = 5000
    min_steps: int = 0
    snapshot_every: int = 100
    round_energy_tol: float = 1e-2
    roundness_tol: float = 1e-2
    blowup_threshold: float = 1e3
    max_rejections: int = 40
    dt_growth: float = 1.25


@dataclass
class FlowState:
    mesh: TriMesh
    time: float = 0.0
    dt: float = 0.0
    energy: float = float("nan")
    max_curv: float = float("nan")
    steps: int = 0
    history: list = field(default_factory=list)

    @classmethod
    def start(cls, mesh: TriMesh, params: FlowParams | None = None) -> "FlowState":
        params = params or FlowParams()
        g = discrete_geometry(mesh)
        return cls(mesh, 0.0, auto_dt(mesh, params), g.energy, g.max_curvature)


def auto_dt(mesh: TriMesh, params: FlowParams) -> float:
    if params.dt is not None:
        return float(params.dt)
    h = mesh.min_edge_length()
    return 0.1 * h ** 4 if params.stepper == "explicit" else 0.1 * h ** 2


def willmore_velocity(mesh: TriMesh, geo: DiscreteGeometry | None = None) -> np.ndarray:
    geo = geo or discrete_geometry(mesh)
    return -geo.willmore_operator()[:, None] * geo.normal


def _advance(mesh: TriMesh, dt: float, stepper: str) -> TriMesh:
    geo = discrete_geometry(mesh)
    v = willmore_velocity(mesh, geo)
    if stepper == "explicit":
        return mesh.with_vertices(mesh.vertices + dt * v)
    if stepper != "semi-implicit":
        raise ValueError(f"unknown stepper {stepper!r}")
    m = geo.area
    Minv = sp.diags(1.0 / m)
    A = (sp.diags(m) + dt * (geo.laplacian @ Minv @ geo.laplacian)).tocsc()
    rhs = dt * m[:, None] * v
    lu = spla.splu(A, permc_spec="MMD_ATA")
    delta = np.column_stack([lu.solve(rhs[:, i]) for i in range(3)])
    return mesh.with_vertices(mesh.vertices + delta)


def tangential_smoothing(mesh: TriMesh, weight: float = 0.5) -> TriMesh:
    """Move vertices toward the neighbour average, projected to the tangent plane."""
    geo = discrete_geometry(mesh)
    e = mesh.edges()
    n = mesh.n_vertices
    adj = sp.coo_matrix((np.ones(2 * len(e)), (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])),
                        shape=(n, n)).tocsr()
    deg = np.asarray(adj.sum(axis=1)).ravel()
    d = (adj @ mesh.vertices) / deg[:, None] - mesh.vertices
    nu = geo.normal
    d = d - np.sum(d * nu, axis=1)[:, None] * nu
    d[~geo.interior] = 0.0
    return mesh.with_vertices(mesh.vertices + weight * d)


def flow_step(state: FlowState, params: FlowParams | None = None) -> FlowState:
    """One accepted step, or :class:`StepRejected` carrying the state with halved ``dt``."""
    params = params or FlowParams()
    if state.mesh.min_angle() < params.min_angle:
        raise MeshDegenerate(f"minimum angle {math.degrees(state.mesh.min_angle()):.3f} deg below the floor")
    new = _advance(state.mesh, state.dt, params.stepper)
    # a step that tangles the mesh is too long, like one that raises the energy
    if new.min_angle() < params.min_angle:
        err = StepRejected(f"minimum angle {math.degrees(new.min_angle()):.3f} deg below the floor")
        err.state = replace(state, dt=state.dt / 2)
        raise err
    g = discrete_geometry(new)
    if not np.isfinite(g.energy) or g.energy > state.energy + params.energy_tol * state.energy:
        err = StepRejected(f"energy rose from {state.energy:.12g} to {g.energy:.12g}")
        err.state = replace(state, dt=state.dt / 2)
        raise err
    out = FlowState(new, state.time + state.dt, state.dt, g.energy, g.max_curvature, state.steps + 1,
                    state.history)
    if params.smooth_every and out.steps % params.smooth_every == 0:
        sm = tangential_smoothing(new, params.smooth_weight)
        gs = discrete_geometry(sm)
        if gs.energy <= out.energy + params.energy_tol * out.energy and sm.min_angle() >= params.min_angle:
            out = replace(out, mesh=sm, energy=gs.energy, max_curv=gs.max_curvature)
    return out


@dataclass
class FlowResult:
    reason: str
    state: FlowState
    series: list
    snapshots: list
    rejected: int

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "time", "W", "maxA", "dt"])
            for row in self.series:
                w.writerow([row[0]] + [repr(float(x)) for x in row[1:]])


def run_flow(mesh: TriMesh, params: FlowParams | None = None) -> FlowResult:
    """Flow until converged-to-round, curvature-blowup or the step budget."""
    params = params or FlowParams()
    state = FlowState.start(mesh, params)
    dt0 = state.dt
    series = [(0, 0.0, state.energy, state.max_curv, state.dt)]
    snaps = [(0, 0.0, state.mesh)]
    rejected = streak = 0
    reason = "budget"
    while True:
        if (state.steps >= params.min_steps and state.energy <= 4 * math.pi * (1 + params.round_energy_tol)
                and roundness(state.mesh) <= params.roundness_tol):
            reason = "converged-to-round"
            break
        if state.max_curv * state.mesh.diameter() > params.blowup_threshold:
            reason = "curvature-blowup"
            break
        if state.steps >= params.max_steps:
            break
        try:
            state = flow_step(state, params)
        except StepRejected as exc:
            rejected += 1
            streak += 1
            state = exc.state
            if streak > params.max_rejections:
                reason = "budget"
                break
            continue
        streak = 0
        series.append((state.steps, state.time, state.energy, state.max_curv, state.dt))
        if params.snapshot_every and state.steps % params.snapshot_every == 0:
            snaps.append((state.steps, state.time, state.mesh))
        if state.dt < dt0:
            state = replace(state, dt=min(dt0, state.dt * params.dt_growth))
    if snaps[-1][0] != state.steps:
        snaps.append((state.steps, state.time, state.mesh))
    return FlowResult(reason, state, series, snaps, rejected)


# ---------------------------------------------------------------------------
# blow-up


@dataclass
class RescaleEvent:
    t_j: float
    x_j: np.ndarray
    r_j: float
    rescaled_mesh: TriMesh


def rescale(mesh: TriMesh, x, r: float) -> TriMesh:
    """``(f - x) / r``."""
    return mesh.with_vertices((mesh.vertices - np.asarray(x, float)) / r)


def rescale_blowup(traj, *, factor: float = 2.0) -> list[RescaleEvent]:
    """Events at each ``factor``-fold growth of the maximal curvature.

    ``traj`` is a sequence of ``(time, mesh)`` pairs. ``x_j`` is the vertex of
    largest ``|A|`` and ``r_j = 1 / max |A|``, so each rescaled mesh has
    ``max |A| = 1``.
    """
    rows = []
    for t, mesh in traj:
        g = discrete_geometry(mesh)
        a = np.sqrt(np.where(g.interior, g.A2, 0.0))
        i = int(np.argmax(a))
        rows.append((float(t), mesh, float(a[i]), mesh.vertices[i].copy()))
    if len(rows) < 2:
        raise NoConcentration("need at least two snapshots")
    events = []
    last = None
    for t, mesh, amax, x in rows:
        if last is None or amax >= factor * last:
            events.append(RescaleEvent(t, x, 1.0 / amax, rescale(mesh, x, 1.0 / amax)))
            last = amax
    if len(events) < 2:
        raise NoConcentration("maximal curvature does not grow")
    return events


# ---------------------------------------------------------------------------
# catenoid fit


def _frame(theta, phi):
    axis = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
    return axis


def _unpack(params, X):
    theta, phi, cx, cy, cz, loga = params
    a = math.exp(loga)
    axis = _frame(theta, phi)
    d = X - np.array([cx, cy, cz])
    h = d @ axis
    rho = np.linalg.norm(d - h[:, None] * axis, axis=1)
    return a, h, rho


def _algebraic_residuals(params, X):
    a, h, rho = _unpack(params, X)
    return rho - a * np.cosh(np.clip(h / a, -50, 50))


def _distance_residuals(params, X):
    """First-order distance ``(rho - a cosh(h/a)) / cosh(h/a)`` to the catenoid."""
    a, h, rho = _unpack(params, X)
    ch = np.cosh(np.clip(h / a, -50, 50))
    return (rho - a * ch) / ch


def catenoid_fit(mesh: TriMesh, *, window: float | None = None):
    """Least-squares fit of ``rho = a cosh(h / a)``; returns ``(axis, center, scale, residual)``.

    ``residual`` is the RMS first-order distance divided by ``a``. The fit runs
    on the algebraic residual first (which keeps ``a`` away from 0) and is then
    refined on the distance. ``window`` keeps only vertices within that
    distance of the centroid.
    """
    X = mesh.vertices
    c0 = X.mean(axis=0)
    if window is not None:
        X = X[np.linalg.norm(X - c0, axis=1) <= window]
    if len(X) < 7:
        raise FitDiverged("not enough points in the window")
    size = float(np.max(np.linalg.norm(X - c0, axis=1)))
    _, _, vt = np.linalg.svd(X - c0, full_matrices=False)
    best = None
    for ax in vt:
        ax = ax if ax[2] >= 0 else -ax
        theta, phi = math.acos(np.clip(ax[2], -1, 1)), math.atan2(ax[1], ax[0])
        d = X - c0
        rho = np.linalg.norm(d - (d @ ax)[:, None] * ax, axis=1)
        a0 = max(float(np.min(rho)), 1e-3 * size)
        x0 = np.array([theta, phi, *c0, math.log(a0)])
        sol = least_squares(_algebraic_residuals, x0, args=(X,), method="lm", max_nfev=4000)
        sol = least_squares(_distance_residuals, sol.x, args=(X,), method="lm", xtol=1e-15, ftol=1e-15,
                            gtol=1e-15, max_nfev=4000)
        if not np.all(np.isfinite(sol.x)) or math.exp(sol.x[5]) < 1e-3 * size:
            continue
        cost = float(np.sqrt(np.mean(sol.fun ** 2)))
        if best is None or cost < best[0]:
            best = (cost, sol)
    if best is None:
        raise FitDiverged("least squares did not converge to a non-degenerate catenoid")
    cost, sol = best
    theta, phi, cx, cy, cz, loga = sol.x
    a = math.exp(loga)
    axis = _frame(theta, phi)
    if axis[np.argmax(np.abs(axis))] < 0:
        axis = -axis
    return axis, np.array([cx, cy, cz]), a, cost / a
