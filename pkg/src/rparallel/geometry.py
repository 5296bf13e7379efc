"""Geometric data model: simplicial complexes, windows, primitives, scenes."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


class GeometryError(ValueError):
    pass


class SceneError(ValueError):
    pass


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def simplex_measures(points, simplices):
    """Unsigned measure of each simplex: length, area or volume."""
    points = np.asarray(points, dtype=np.float64)
    simplices = np.asarray(simplices, dtype=np.int64)
    if len(simplices) == 0:
        return np.zeros(0)
    P = points[simplices]
    d = points.shape[1]
    m = simplices.shape[1]
    if m == 2:
        return np.linalg.norm(P[:, 1] - P[:, 0], axis=1)
    if m == 3 and d == 2:
        u, v = P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]
        return 0.5 * np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
    if m == 3:
        return 0.5 * np.linalg.norm(np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]), axis=1)
    if m == 4:
        return np.abs(signed_volumes(points, simplices))
    raise GeometryError(f"unsupported simplex with {m} vertices in {d}D")


def signed_volumes(points, simplices):
    """Signed d-volume of d-simplices (triangles in 2D, tetrahedra in 3D)."""
    P = np.asarray(points, dtype=np.float64)[np.asarray(simplices, dtype=np.int64)]
    E = P[:, 1:] - P[:, :1]
    d = P.shape[2]
    return np.linalg.det(E) / (2.0 if d == 2 else 6.0)


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    """A closed d-dimensional object as boundary simplices plus optional interior tessellation.

    ``boundary`` holds (d-1)-simplices (segments in 2D, triangles in 3D),
    ``interior`` d-simplices (triangles in 2D, tetrahedra in 3D).  All
    arrays are read-only.
    """

    vertices: np.ndarray
    boundary: np.ndarray
    interior: Optional[np.ndarray] = None

    def __post_init__(self):
        v = _frozen(self.vertices, np.float64)
        if v.ndim != 2 or v.shape[1] not in (2, 3):
            raise GeometryError(f"vertices must be (n, 2) or (n, 3), got shape {v.shape}")
        d = v.shape[1]
        b = _frozen(np.reshape(self.boundary, (-1, d)), np.int64)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "boundary", b)
        if self.interior is not None:
            object.__setattr__(self, "interior", _frozen(np.reshape(self.interior, (-1, d + 1)), np.int64))

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def has_interior(self) -> bool:
        return self.interior is not None and len(self.interior) > 0

    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def boundary_coords(self):
        return self.vertices[self.boundary]

    def boundary_measures(self):
        return simplex_measures(self.vertices, self.boundary)

    def interior_measures(self):
        if not self.has_interior:
            raise GeometryError("complex has no interior tessellation")
        return simplex_measures(self.vertices, self.interior)

    def translate(self, v) -> "SimplicialComplex":
        return translate(self, v)

    def scale(self, s: float) -> "SimplicialComplex":
        return SimplicialComplex(self.vertices * float(s), self.boundary, self.interior)

    def bounding_ball(self):
        lo, hi = self.bounds()
        c = 0.5 * (lo + hi)
        return c, float(np.max(np.linalg.norm(self.vertices - c, axis=1)))

    def __eq__(self, other):
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        same_interior = (self.interior is None) == (other.interior is None) and (
            self.interior is None or np.array_equal(self.interior, other.interior)
        )
        return (
            np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.boundary, other.boundary)
            and same_interior
        )

    __hash__ = None


@dataclass(frozen=True)
class Violation:
    kind: str
    where: tuple
    message: str


def validate(complex: SimplicialComplex) -> list[Violation]:
    """Check the manifold and tessellation invariants; empty list means valid."""
    out: list[Violation] = []
    V = complex.vertices
    n = len(V)
    d = complex.dim
    B = complex.boundary
    I = complex.interior if complex.interior is not None else np.zeros((0, d + 1), dtype=np.int64)

    bad = False
    for name, arr in (("boundary", B), ("interior", I)):
        for s in np.nonzero(((arr < 0) | (arr >= n)).any(axis=1))[0]:
            out.append(Violation("index_out_of_range", (name, int(s)), f"{name} simplex {s} refers to a missing vertex: {arr[s].tolist()}"))
            bad = True
    if bad:
        return out
    if len(B) == 0:
        return [Violation("empty_boundary", (), "complex has no boundary simplices")]

    scale = float(np.linalg.norm(V.max(axis=0) - V.min(axis=0))) or 1.0
    tol = 1e-12

    bmeas = simplex_measures(V, B)
    for s in range(len(B)):
        if len(set(B[s].tolist())) < d or bmeas[s] <= tol * scale ** (d - 1):
            out.append(Violation("degenerate_simplex", ("boundary", s), f"boundary simplex {s} {B[s].tolist()} has zero measure"))

    if d == 3:
        out.extend(_check_surface(B))
    else:
        out.extend(_check_polyline(B, n))

    if len(I):
        vol = signed_volumes(V, I)
        for s in range(len(I)):
            if len(set(I[s].tolist())) < d + 1 or abs(vol[s]) <= tol * scale**d:
                out.append(Violation("degenerate_simplex", ("interior", s), f"interior simplex {s} {I[s].tolist()} has zero volume"))
        out.extend(_check_tessellation(B, I))
    return out


def _check_surface(B):
    out = []
    directed = Counter()
    owners = defaultdict(list)
    for t, (a, b, c) in enumerate(B.tolist()):
        for e in ((a, b), (b, c), (c, a)):
            directed[e] += 1
            owners[frozenset(e)].append(t)
    open_edges = []
    for key, tris in owners.items():
        if len(key) < 2:
            continue
        if len(tris) == 1:
            open_edges.append(tuple(sorted(key)))
        elif len(tris) > 2:
            out.append(Violation("nonmanifold_edge", tuple(sorted(key)), f"edge {sorted(key)} is shared by {len(tris)} triangles {tris}"))
        else:
            a, b = sorted(key)
            if directed[(a, b)] != 1 or directed[(b, a)] != 1:
                out.append(Violation("inconsistent_orientation", tuple(tris), f"triangles {tris} traverse edge {[a, b]} in the same direction"))
    if open_edges:
        e = np.array(open_edges)
        nodes, inv = np.unique(e, return_inverse=True)
        inv = inv.reshape(-1, 2)
        g = coo_matrix((np.ones(len(e)), (inv[:, 0], inv[:, 1])), shape=(len(nodes), len(nodes)))
        ncomp, label = connected_components(g, directed=False)
        for c in range(ncomp):
            loop = [open_edges[i] for i in range(len(e)) if label[inv[i, 0]] == c]
            tris = sorted({owners[frozenset(ed)][0] for ed in loop})
            out.append(Violation("open_edge", tuple(loop), f"open boundary through edges {loop} (triangles {tris})"))
    return out


def _check_polyline(B, n):
    out = []
    starts = np.bincount(B[:, 0], minlength=n)
    ends = np.bincount(B[:, 1], minlength=n)
    used = (starts + ends) > 0
    for v in np.nonzero(used)[0]:
        deg = starts[v] + ends[v]
        if deg == 1:
            out.append(Violation("open_edge", (int(v),), f"vertex {v} ends an open polyline"))
        elif deg > 2:
            out.append(Violation("nonmanifold_vertex", (int(v),), f"vertex {v} is shared by {deg} segments"))
        elif starts[v] != 1:
            out.append(Violation("inconsistent_orientation", (int(v),), f"segments meeting at vertex {v} have inconsistent direction"))
    return out


def _check_tessellation(B, I):
    d = B.shape[1]
    faces = Counter()
    for s in I.tolist():
        for skip in range(d + 1):
            faces[tuple(sorted(s[:skip] + s[skip + 1 :]))] += 1
    out = []
    over = [f for f, c in faces.items() if c > 2]
    for f in over:
        out.append(Violation("nonmanifold_tessellation", f, f"face {list(f)} is shared by {faces[f]} interior simplices"))
    hull = {f for f, c in faces.items() if c == 1}
    bset = {tuple(sorted(s)) for s in B.tolist()}
    if hull != bset:
        missing = sorted(bset - hull)
        extra = sorted(hull - bset)
        out.append(
            Violation(
                "interior_boundary_mismatch",
                tuple(missing[:5] + extra[:5]),
                f"tessellation hull differs from boundary: {len(missing)} boundary simplices uncovered, {len(extra)} unmatched hull faces",
            )
        )
    return out


def translate(complex: SimplicialComplex, v) -> SimplicialComplex:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (complex.dim,):
        raise GeometryError(f"translation vector has shape {v.shape}, complex is {complex.dim}D")
    return SimplicialComplex(complex.vertices + v, complex.boundary, complex.interior)


def merge(complexes) -> SimplicialComplex:
    """Disjoint union of complexes as one complex; interior kept only if every part has one."""
    complexes = list(complexes)
    if not complexes:
        raise GeometryError("nothing to merge")
    offsets = np.cumsum([0] + [len(c.vertices) for c in complexes[:-1]])
    V = np.concatenate([c.vertices for c in complexes])
    B = np.concatenate([c.boundary + o for c, o in zip(complexes, offsets)])
    I = None
    if all(c.has_interior for c in complexes):
        I = np.concatenate([c.interior + o for c, o in zip(complexes, offsets)])
    return SimplicialComplex(V, B, I)


def measure_totals(complex: SimplicialComplex):
    """(d-volume of the interior, (d-1)-measure of the boundary)."""
    if not complex.has_interior:
        raise GeometryError("measure_totals needs an interior tessellation")
    return float(complex.interior_measures().sum()), float(complex.boundary_measures().sum())


@dataclass(frozen=True, eq=False)
class Window:
    """Axis-aligned observation box."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = _frozen(self.lower, np.float64)
        hi = _frozen(self.upper, np.float64)
        if lo.shape != hi.shape or lo.ndim != 1 or lo.shape[0] not in (2, 3):
            raise GeometryError(f"window corners must be matching 2D/3D points, got {lo.shape} and {hi.shape}")
        if not np.all(lo < hi):
            raise GeometryError(f"window lower {lo.tolist()} must be < upper {hi.tolist()} componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def contains_points(self, pts, tol=0.0):
        pts = np.atleast_2d(pts)
        return np.all((pts >= self.lower - tol) & (pts <= self.upper + tol), axis=1)

    def contains_box(self, lo, hi, tol=0.0) -> bool:
        return bool(np.all(np.asarray(lo) >= self.lower - tol) and np.all(np.asarray(hi) <= self.upper + tol))

    def contains(self, other: "Window", tol=0.0) -> bool:
        return self.contains_box(other.lower, other.upper, tol)

    def dilate(self, r: float) -> "Window":
        return Window(self.lower - r, self.upper + r)

    def translate(self, v) -> "Window":
        return Window(self.lower + np.asarray(v, dtype=np.float64), self.upper + np.asarray(v, dtype=np.float64))

    def __eq__(self, other):
        if not isinstance(other, Window):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Plane:
    """Hyperplane {p : normal . p = offset} (a line in 2D)."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = _frozen(self.normal, np.float64)
        if n.ndim != 1 or n.shape[0] not in (2, 3):
            raise GeometryError("plane normal must be a 2D or 3D vector")
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise GeometryError(f"plane normal must have unit length, got |n| = {np.linalg.norm(n)}")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    kind = "plane"

    @property
    def dim(self) -> int:
        return self.normal.shape[0]

    def distance(self, points, solid=True):
        return np.abs(np.asarray(points, dtype=np.float64) @ self.normal - self.offset)

    def translate(self, v) -> "Plane":
        return Plane(self.normal, self.offset + float(self.normal @ np.asarray(v, dtype=np.float64)))

    def scale(self, s: float) -> "Plane":
        return Plane(self.normal, self.offset * s)

    def feature_scale(self):
        return None

    def __eq__(self, other):
        return isinstance(other, Plane) and np.array_equal(self.normal, other.normal) and self.offset == other.offset

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Sphere:
    """Ball (``solid``) or sphere surface of radius ``radius`` (a disk/circle in 2D)."""

    center: np.ndarray
    radius: float
    solid: bool = True

    def __post_init__(self):
        c = _frozen(self.center, np.float64)
        if c.ndim != 1 or c.shape[0] not in (2, 3):
            raise GeometryError("sphere center must be a 2D or 3D point")
        if not self.radius > 0:
            raise GeometryError(f"sphere radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    kind = "sphere"

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def distance(self, points, solid=None):
        solid = self.solid if solid is None else solid
        rho = np.linalg.norm(np.asarray(points, dtype=np.float64) - self.center, axis=-1) - self.radius
        return np.maximum(rho, 0.0) if solid else np.abs(rho)

    def translate(self, v) -> "Sphere":
        return Sphere(self.center + np.asarray(v, dtype=np.float64), self.radius, self.solid)

    def scale(self, s: float) -> "Sphere":
        return Sphere(self.center * s, self.radius * s, self.solid)

    def feature_scale(self):
        return self.radius

    def __eq__(self, other):
        return (
            isinstance(other, Sphere)
            and np.array_equal(self.center, other.center)
            and self.radius == other.radius
            and self.solid == other.solid
        )

    __hash__ = None


AnalyticPrimitive = Union[Plane, Sphere]
Shape = Union[SimplicialComplex, Plane, Sphere]


def shape_dim(shape: Shape) -> int:
    return shape.dim


@dataclass(frozen=True, eq=False)
class Germ:
    """A (location, shape) pair; the placed object is ``location + shape``."""

    location: np.ndarray
    shape: Shape
    id: str = ""

    def __post_init__(self):
        loc = _frozen(self.location, np.float64)
        if loc.shape != (self.shape.dim,):
            raise SceneError(f"germ {self.id!r}: location has shape {loc.shape}, shape is {self.shape.dim}D")
        object.__setattr__(self, "location", loc)

    def placed(self) -> Shape:
        return self.shape.translate(self.location)

    def __eq__(self, other):
        return (
            isinstance(other, Germ)
            and self.id == other.id
            and np.array_equal(self.location, other.location)
            and self.shape == other.shape
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GermGrainScene:
    """Observed and reference germ-grain collections with a window and its dilation.

    ``r_max`` is the largest radius the scene is meant to be measured at;
    construction fails unless ``window`` dilated by ``r_max`` fits inside
    ``extended_window`` and every observed grain lies in ``extended_window``.
    """

    observed: tuple
    reference: tuple
    window: Window
    extended_window: Window
    r_max: float = 0.0
    seed: Optional[int] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "observed", tuple(self.observed))
        object.__setattr__(self, "reference", tuple(self.reference))
        d = self.window.dim
        if self.extended_window.dim != d:
            raise SceneError("window and extended_window dimensions differ")
        for g in self.observed + self.reference:
            if g.shape.dim != d:
                raise SceneError(f"germ {g.id!r} is {g.shape.dim}D in a {d}D scene")
        for g in self.observed:
            if not isinstance(g.shape, SimplicialComplex):
                raise SceneError(f"observed germ {g.id!r} must be a mesh, got {type(g.shape).__name__}")
        if not self.extended_window.contains(self.window):
            raise SceneError("extended_window does not contain window")
        if self.r_max < 0:
            raise SceneError("r_max must be >= 0")
        self.check_observable(self.r_max)

    @property
    def dim(self) -> int:
        return self.window.dim

    def check_observable(self, r_max: float, tol: float = 1e-9):
        """Raise SceneError unless measuring up to ``r_max`` is fully observed."""
        scale = float(np.max(self.extended_window.upper - self.extended_window.lower))
        if not self.extended_window.contains(self.window.dilate(r_max), tol * scale):
            raise SceneError(f"window dilated by r_max={r_max} exceeds extended_window")
        for g in self.observed:
            lo, hi = g.shape.bounds()
            if not self.extended_window.contains_box(lo + g.location, hi + g.location, tol * scale):
                raise SceneError(f"observed object {g.id!r} is not fully inside extended_window")

    def observed_in_window(self):
        return [g for g in self.observed if self.window.contains_points(g.location)[0]]

    def reference_in_window(self):
        return [g for g in self.reference if self.window.contains_points(g.location)[0]]

    def translate(self, v) -> "GermGrainScene":
        v = np.asarray(v, dtype=np.float64)
        return GermGrainScene(
            tuple(Germ(g.location + v, g.shape, g.id) for g in self.observed),
            tuple(Germ(g.location + v, g.shape, g.id) for g in self.reference),
            self.window.translate(v),
            self.extended_window.translate(v),
            self.r_max,
            self.seed,
            dict(self.meta),
        )

    def __eq__(self, other):
        if not isinstance(other, GermGrainScene):
            return NotImplemented
        return (
            self.observed == other.observed
            and self.reference == other.reference
            and self.window == other.window
            and self.extended_window == other.extended_window
            and self.r_max == other.r_max
            and self.seed == other.seed
        )

    __hash__ = None

