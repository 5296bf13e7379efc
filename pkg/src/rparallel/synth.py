"""Synthetic meshes and germ-grain scenes.

All generated solids are star-shaped about their center, which is also
their germ location, so the interior is tessellated by coning each
boundary simplex to the center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .geometry import GeometryError, Germ, GermGrainScene, Plane, SceneError, SimplicialComplex, Sphere, Window


def _orient_outward(vertices, faces, center):
    P = vertices[faces]
    n = np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0])
    flip = np.einsum("ij,ij->i", n, P.mean(axis=1) - center) < 0
    faces = faces.copy()
    faces[flip] = faces[flip][:, [0, 2, 1]]
    return faces


def icosahedron():
    """Unit icosahedron with vertices at both poles (0, 0, +-1)."""
    z0 = 1.0 / math.sqrt(5.0)
    a = 2.0 / math.sqrt(5.0)
    verts = [(0.0, 0.0, 1.0)]
    verts += [(a * math.cos(2 * math.pi * k / 5), a * math.sin(2 * math.pi * k / 5), z0) for k in range(5)]
    verts += [(a * math.cos(2 * math.pi * k / 5 + math.pi / 5), a * math.sin(2 * math.pi * k / 5 + math.pi / 5), -z0) for k in range(5)]
    verts.append((0.0, 0.0, -1.0))
    faces = []
    for k in range(5):
        u, u1 = 1 + k, 1 + (k + 1) % 5
        l, l1 = 6 + k, 6 + (k + 1) % 5
        faces += [(0, u, u1), (u, l, u1), (u1, l, l1), (11, l1, l)]
    v = np.array(verts)
    return v, _orient_outward(v, np.array(faces, dtype=np.int64), np.zeros(3))


def _subdivide(vertices, faces):
    edges = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    key = np.sort(edges, axis=1)
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    mids = 0.5 * (vertices[uniq[:, 0]] + vertices[uniq[:, 1]])
    mids /= np.linalg.norm(mids, axis=1, keepdims=True)
    n = len(vertices)
    F = len(faces)
    ab, bc, ca = inv[:F] + n, inv[F : 2 * F] + n, inv[2 * F :] + n
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    new = np.concatenate(
        [np.stack([a, ab, ca], 1), np.stack([b, bc, ab], 1), np.stack([c, ca, bc], 1), np.stack([ab, bc, ca], 1)]
    )
    return np.concatenate([vertices, mids]), new


def unit_sphere_mesh(subdivisions: int = 4):
    v, f = icosahedron()
    for _ in range(subdivisions):
        v, f = _subdivide(v, f)
    return v, f


def cone_tessellation(vertices, boundary, apex):
    """Append ``apex`` and cone every boundary simplex to it (positively oriented)."""
    vertices = np.asarray(vertices, dtype=np.float64)
    n = len(vertices)
    V = np.vstack([vertices, np.asarray(apex, dtype=np.float64)[None]])
    interior = np.hstack([np.full((len(boundary), 1), n, dtype=np.int64), boundary])
    return V, interior


def icosphere(radius: float = 1.0, subdivisions: int = 4, interior: bool = True) -> SimplicialComplex:
    """Sphere mesh centered at the origin with a vertex at each pole."""
    if not radius > 0:
        raise GeometryError("radius must be positive")
    v, f = unit_sphere_mesh(subdivisions)
    v = v * radius
    if not interior:
        return SimplicialComplex(v, f)
    V, tets = cone_tessellation(v, f, np.zeros(3))
    return SimplicialComplex(V, f, tets)


def disk(radius: float = 1.0, sides: int = 256, interior: bool = True) -> SimplicialComplex:
    """Regular polygon centered at the origin with a vertex at the bottom (0, -radius)."""
    if sides < 3:
        raise GeometryError("a polygon needs at least 3 sides")
    th = -math.pi / 2 + 2 * math.pi * np.arange(sides) / sides
    v = radius * np.stack([np.cos(th), np.sin(th)], axis=1)
    v[0] = (0.0, -radius)
    if sides % 2 == 0:
        v[sides // 2] = (0.0, radius)
    segs = np.stack([np.arange(sides), (np.arange(sides) + 1) % sides], axis=1)
    if not interior:
        return SimplicialComplex(v, segs)
    V, tris = cone_tessellation(v, segs, np.zeros(2))
    return SimplicialComplex(V, segs, tris)


def box(lower, upper, interior: bool = True) -> SimplicialComplex:
    """Axis-aligned box [lower, upper] (3D)."""
    lo = np.asarray(lower, dtype=np.float64)
    hi = np.asarray(upper, dtype=np.float64)
    if lo.shape != (3,) or not np.all(hi > lo):
        raise GeometryError("box needs 3D corners with lower < upper")
    v = np.array([[(lo, hi)[i][0], (lo, hi)[j][1], (lo, hi)[k][2]] for i in (0, 1) for j in (0, 1) for k in (0, 1)])
    quads = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]
    f = np.array([t for q in quads for t in ((q[0], q[1], q[2]), (q[0], q[2], q[3]))], dtype=np.int64)
    c = 0.5 * (lo + hi)
    f = _orient_outward(v, f, c)
    if not interior:
        return SimplicialComplex(v, f)
    V, tets = cone_tessellation(v, f, c)
    return SimplicialComplex(V, f, tets)


def cube(side: float = 1.0, interior: bool = True) -> SimplicialComplex:
    """Axis-aligned cube centered at the origin."""
    h = side / 2.0
    return box([-h] * 3, [h] * 3, interior)


def square(side: float = 1.0, interior: bool = True) -> SimplicialComplex:
    h = side / 2.0
    v = np.array([[-h, -h], [h, -h], [h, h], [-h, h]])
    segs = np.array([[0, 1], [1, 2], [2, 3], [3, 0]])
    if not interior:
        return SimplicialComplex(v, segs)
    V, tris = cone_tessellation(v, segs, np.zeros(2))
    return SimplicialComplex(V, segs, tris)


def blob(rng: np.random.Generator, radius: float = 100.0, subdivisions: int = 3, amplitude: float = 0.25, terms: int = 6) -> SimplicialComplex:
    """Random smooth star-shaped solid: a sphere with a radial log-perturbation."""
    u, f = unit_sphere_mesh(subdivisions)
    w = rng.normal(size=(terms, 3))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    freq = rng.uniform(1.0, 2.5, size=terms)
    phase = rng.uniform(0, 2 * math.pi, size=terms)
    amp = rng.uniform(-1.0, 1.0, size=terms)
    amp *= amplitude / max(np.abs(amp).sum(), 1e-12)
    log_rho = (amp[None] * np.cos(freq[None] * (u @ w.T) + phase[None])).sum(axis=1)
    v = u * (radius * np.exp(log_rho))[:, None]
    V, tets = cone_tessellation(v, f, np.zeros(3))
    return SimplicialComplex(V, f, tets)


@dataclass(frozen=True)
class SynthSpec:
    """Parameters for the synthetic scenes.

    ``kind`` is ``plane-ball``, ``plane-cube`` or ``sphere-process``; for
    the process, ``process`` picks ``uniform`` or ``clustered``.
    """

    kind: str = "plane-ball"
    dim: int = 3
    radius: float = 100.0
    cube_side: float = 150.0
    offset: float = 100.0
    window_side: float = 500.0
    r_max: float = 400.0
    subdivisions: int = 4
    polygon_sides: int = 256
    process: str = "uniform"
    n_reference: int = 20
    n_observed: int = 1000
    reference_radius: Optional[float] = None
    cluster_scale: float = 150.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("plane-ball", "plane-cube", "sphere-process"):
            raise ValueError(f"unknown synth kind {self.kind!r}")
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")
        for name in ("radius", "cube_side", "window_side", "cluster_scale"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.offset < 0 or self.r_max < 0:
            raise ValueError("offset and r_max must be >= 0")
        if self.n_reference < 1 or self.n_observed < 1:
            raise ValueError("counts must be >= 1")
        if self.process not in ("uniform", "clustered"):
            raise ValueError(f"unknown process {self.process!r}")

    def with_(self, **kw) -> "SynthSpec":
        return replace(self, **kw)


def gen_plane_scene(spec: SynthSpec) -> GermGrainScene:
    """One observed solid near the hyperplane {x_d = 0}.

    The window is a cube of side ``window_side`` with its lower face on the
    plane, centered on the object in the other axes.
    """
    d = spec.dim
    normal = np.zeros(d)
    normal[-1] = 1.0
    plane = Germ(np.zeros(d), Plane(normal, 0.0), "plane")
    if spec.kind == "plane-ball":
        shape = icosphere(spec.radius, spec.subdivisions) if d == 3 else disk(spec.radius, spec.polygon_sides)
        half = spec.radius
    elif spec.kind == "plane-cube":
        shape = cube(spec.cube_side) if d == 3 else square(spec.cube_side)
        half = spec.cube_side / 2.0
    else:
        raise ValueError(f"gen_plane_scene cannot build {spec.kind!r}")
    loc = np.zeros(d)
    loc[-1] = spec.offset + half
    L = spec.window_side
    lower = np.full(d, -L / 2.0)
    upper = np.full(d, L / 2.0)
    lower[-1], upper[-1] = 0.0, L
    window = Window(lower, upper)
    ext = window.dilate(spec.r_max)
    obs = Germ(loc, shape, spec.kind.split("-")[1])
    lo, hi = shape.bounds()
    if not ext.contains_box(lo + loc, hi + loc):
        raise SceneError(f"observed {obs.id!r} does not fit in the extended window")
    return GermGrainScene((obs,), (plane,), window, ext, spec.r_max, spec.seed, {"kind": spec.kind})


def gen_tangent_scene(dim: int = 3, R: float = 100.0, r_max: float = 400.0, **kw) -> GermGrainScene:
    return gen_plane_scene(SynthSpec("plane-ball", dim=dim, radius=R, offset=0.0, r_max=r_max, **kw))


def gen_sphere_process(spec: SynthSpec) -> GermGrainScene:
    """Reference and observed sphere collections in a cubic window [0, L]^3.

    Reference centers are uniform in the window.  Observed centers are
    uniform in the sampling region (window dilated by r_max + both radii),
    or, when clustered, a uniformly chosen reference center plus an
    isotropic Gaussian displacement of scale ``cluster_scale``, redrawn
    while it falls outside the sampling region.
    """
    if spec.dim != 3:
        raise ValueError("the sphere process is 3D")
    rng = np.random.default_rng(spec.seed)
    L = spec.window_side
    R_obs = spec.radius
    R_ref = spec.reference_radius if spec.reference_radius is not None else spec.radius
    window = Window(np.zeros(3), np.full(3, L))
    reach = spec.r_max + R_ref + R_obs
    region = window.dilate(reach)
    ext = window.dilate(reach + R_obs)

    ref_pts = rng.uniform(0.0, L, size=(spec.n_reference, 3))
    if spec.process == "uniform":
        obs_pts = rng.uniform(region.lower, region.upper, size=(spec.n_observed, 3))
    else:
        obs_pts = np.empty((spec.n_observed, 3))
        filled = 0
        while filled < spec.n_observed:
            k = spec.n_observed - filled
            parents = ref_pts[rng.integers(0, spec.n_reference, size=k)]
            cand = parents + rng.normal(scale=spec.cluster_scale, size=(k, 3))
            cand = cand[region.contains_points(cand)]
            obs_pts[filled : filled + len(cand)] = cand
            filled += len(cand)

    grain = icosphere(R_obs, spec.subdivisions)
    ref_shape = Sphere(np.zeros(3), R_ref)
    observed = tuple(Germ(p, grain, f"x{i}") for i, p in enumerate(obs_pts))
    reference = tuple(Germ(p, ref_shape, f"y{i}") for i, p in enumerate(ref_pts))
    return GermGrainScene(
        observed, reference, window, ext, spec.r_max, spec.seed, {"kind": "sphere-process", "process": spec.process}
    )


def generate(spec: SynthSpec) -> GermGrainScene:
    if spec.kind == "sphere-process":
        return gen_sphere_process(spec)
    return gen_plane_scene(spec)
