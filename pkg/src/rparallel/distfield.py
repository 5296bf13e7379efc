"""Regular-grid distance maps to a reference object, with multilinear lookup."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import kernels
from .geometry import GeometryError, Plane, SimplicialComplex, Sphere, Window

# Row perturbation for ray parity, as a fraction of the mesh extent.
_RAY_JITTER = 1e-9
_JITTER_DIR = np.array([0.5772156649015329, 0.7071067811865476])


class DomainError(ValueError):
    """A query point lies outside the sampled grid."""


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Regular grid: node ``i`` along axis ``a`` sits at ``origin[a] + i * spacing[a]``."""

    origin: np.ndarray
    spacing: np.ndarray
    counts: tuple

    def __post_init__(self):
        o = np.array(self.origin, dtype=np.float64)
        h = np.array(self.spacing, dtype=np.float64)
        c = tuple(int(n) for n in self.counts)
        if not (o.shape == h.shape == (len(c),)) or len(c) not in (2, 3):
            raise GeometryError("origin, spacing and counts must all have length 2 or 3")
        if not np.all(h > 0):
            raise GeometryError(f"grid spacing must be positive, got {h.tolist()}")
        if min(c) < 2:
            raise GeometryError(f"grid needs at least 2 nodes per axis, got {c}")
        o.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "spacing", h)
        object.__setattr__(self, "counts", c)

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def upper(self) -> np.ndarray:
        return self.origin + self.spacing * (np.array(self.counts) - 1)

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    def axis(self, a: int) -> np.ndarray:
        return self.origin[a] + self.spacing[a] * np.arange(self.counts[a])

    def nodes(self) -> np.ndarray:
        """All node coordinates in row-major (C) order, axis 0 slowest."""
        mesh = np.meshgrid(*[self.axis(a) for a in range(self.dim)], indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def covers(self, lower, upper, tol=1e-9) -> bool:
        slack = tol * self.spacing
        return bool(np.all(self.origin <= np.asarray(lower) + slack) and np.all(self.upper >= np.asarray(upper) - slack))

    def translate(self, v) -> "GridSpec":
        return GridSpec(self.origin + np.asarray(v, dtype=np.float64), self.spacing, self.counts)

    @classmethod
    def aligned(cls, window: Window, h: float, lower=None, upper=None, crop=False) -> "GridSpec":
        """Grid whose node planes include every face of ``window``.

        Per-axis spacing is the largest value <= ``h`` dividing the window
        extent; the grid then extends by whole steps to cover
        [``lower``, ``upper``] (default: the window itself).  With
        ``crop`` the grid covers only [``lower``, ``upper``], still on the
        window's lattice.
        """
        if not h > 0:
            raise GeometryError("grid spacing must be positive")
        ext = window.upper - window.lower
        steps = np.ceil(ext / h - 1e-9).astype(np.int64)
        hs = ext / steps
        lower = window.lower if lower is None else np.asarray(lower, dtype=np.float64)
        upper = window.upper if upper is None else np.asarray(upper, dtype=np.float64)
        if not crop:
            lower = np.minimum(lower, window.lower)
            upper = np.maximum(upper, window.upper)
        elif np.any(upper < lower):
            raise GeometryError("empty grid bounds")
        below = np.ceil((window.lower - lower) / hs - 1e-9).astype(np.int64)
        above = np.ceil((upper - window.upper) / hs - 1e-9).astype(np.int64)
        origin = window.lower - below * hs
        counts = tuple(int(n) for n in below + steps + above + 1)
        return cls(origin, hs, counts)

    @classmethod
    def covering(cls, lower, upper, h: float) -> "GridSpec":
        lower = np.asarray(lower, dtype=np.float64)
        upper = np.asarray(upper, dtype=np.float64)
        steps = np.maximum(np.ceil((upper - lower) / h - 1e-9).astype(np.int64), 1)
        return cls(lower, np.full(len(lower), float(h)), tuple(int(n) for n in steps + 1))

    def window_slice(self, window: Window, tol=1e-6):
        """Index slices selecting ``window`` exactly, or None if its faces are off-grid."""
        lo = (window.lower - self.origin) / self.spacing
        hi = (window.upper - self.origin) / self.spacing
        if np.any(np.abs(lo - np.rint(lo)) > tol) or np.any(np.abs(hi - np.rint(hi)) > tol):
            return None
        lo = np.rint(lo).astype(int)
        hi = np.rint(hi).astype(int)
        if np.any(lo < 0) or np.any(hi > np.array(self.counts) - 1):
            return None
        return tuple(slice(a, b + 1) for a, b in zip(lo, hi))

    def __eq__(self, other):
        return (
            isinstance(other, GridSpec)
            and np.array_equal(self.origin, other.origin)
            and np.array_equal(self.spacing, other.spacing)
            and self.counts == other.counts
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class DistanceField:
    """Nonnegative distance samples on ``spec``; ``values`` is flat, row-major."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        if v.size != self.spec.size:
            raise GeometryError(f"field has {v.size} values for a grid of {self.spec.size} nodes")
        if not np.all(v >= 0):
            raise GeometryError("distance values must be finite or +inf and >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def grid(self) -> np.ndarray:
        return self.values.reshape(self.spec.counts)

    def __call__(self, points, backend=None):
        return interpolate(self, points, backend=backend)


Reference = Union[SimplicialComplex, Plane, Sphere]


def _as_reference_list(reference) -> list:
    if isinstance(reference, (SimplicialComplex, Plane, Sphere)):
        return [reference]
    refs = list(reference)
    if not refs:
        raise GeometryError("empty reference")
    return refs


def _inside_mesh(mesh: SimplicialComplex, points, kern, row_groups=None):
    """Ray parity along axis 0 with slightly jittered rows."""
    prims = mesh.boundary_coords()
    lo, hi = mesh.bounds()
    jitter = _RAY_JITTER * float(np.linalg.norm(hi - lo)) * _JITTER_DIR[: mesh.dim - 1]
    points = np.asarray(points, dtype=np.float64)
    inside = np.zeros(len(points), dtype=bool)
    if row_groups is None:
        box = np.all((points >= lo) & (points <= hi), axis=1)
        idx = np.nonzero(box)[0]
        if len(idx) == 0:
            return inside
        offsets, xs = kern.row_crossings(prims, points[idx, 1:] + jitter)
        counts = np.diff(offsets)
        row = np.repeat(np.arange(len(idx)), counts)
        greater = xs > points[idx, 0][row]
        inside[idx] = np.bincount(row, weights=greater, minlength=len(idx)).astype(np.int64) % 2 == 1
        return inside
    # grid layout: rows share the axis-0 abscissae ``xs_nodes``
    xs_nodes, rows = row_groups
    offsets, xs = kern.row_crossings(prims, rows + jitter)
    nx = len(xs_nodes)
    grid_inside = inside.reshape(nx, -1)
    for q in np.nonzero(np.diff(offsets))[0]:
        c = xs[offsets[q] : offsets[q + 1]]
        greater = len(c) - np.searchsorted(c, xs_nodes, side="right")
        grid_inside[:, q] = greater % 2 == 1
    return inside


def _mesh_distance(mesh: SimplicialComplex, points, solid, kern, row_groups=None):
    if len(mesh.boundary) == 0:
        raise GeometryError("empty reference mesh")
    d = kern.simplex_distance(points, mesh.boundary_coords())
    if solid:
        d[_inside_mesh(mesh, points, kern, row_groups)] = 0.0
    return d


def reference_distance(reference, points, solid=True, backend=None) -> np.ndarray:
    """Exact distance from each point to the (union of) reference object(s)."""
    kern = kernels.get_backend(backend)
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    out = None
    for ref in _as_reference_list(reference):
        if ref.dim != points.shape[1]:
            raise GeometryError(f"reference is {ref.dim}D, points are {points.shape[1]}D")
        if isinstance(ref, SimplicialComplex):
            d = _mesh_distance(ref, points, solid, kern)
        elif isinstance(ref, Sphere):
            d = ref.distance(points, solid=ref.solid and solid)
        else:
            d = ref.distance(points)
        out = d if out is None else np.minimum(out, d)
    return out


def build_distance_field(reference, spec: GridSpec, solid=True, backend=None) -> DistanceField:
    """Sample the exact distance to ``reference`` at every node of ``spec``.

    ``reference`` is a mesh, an analytic primitive, or a sequence of them
    (distance to the union).  Closed meshes and spheres are solid by
    default: distance 0 inside.  ``solid=False`` measures to the surface.
    """
    kern = kernels.get_backend(backend)
    refs = _as_reference_list(reference)
    nodes = spec.nodes()
    out = None
    for ref in refs:
        if ref.dim != spec.dim:
            raise GeometryError(f"reference is {ref.dim}D, grid is {spec.dim}D")
        if isinstance(ref, SimplicialComplex):
            rows = nodes[: spec.size // spec.counts[0], 1:]
            d = _mesh_distance(ref, nodes, solid, kern, row_groups=(spec.axis(0), rows))
        elif isinstance(ref, Sphere):
            d = ref.distance(nodes, solid=ref.solid and solid)
        else:
            d = ref.distance(nodes)
        out = d if out is None else np.minimum(out, d)
    return DistanceField(spec, out)


def interpolate(field: DistanceField, points, backend=None) -> np.ndarray:
    """Multilinear interpolation of ``field``; refuses to extrapolate.

    Accepts a single point (returns a float) or an (n, d) array.
    """
    pts = np.asarray(points, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    spec = field.spec
    if pts.shape[1] != spec.dim:
        raise DomainError(f"points are {pts.shape[1]}D, field is {spec.dim}D")
    slack = 1e-9 * spec.spacing
    outside = np.any((pts < spec.origin - slack) | (pts > spec.upper + slack), axis=1)
    if outside.any():
        bad = pts[np.argmax(outside)]
        raise DomainError(f"point {bad.tolist()} lies outside the grid [{spec.origin.tolist()}, {spec.upper.tolist()}]")
    kern = kernels.get_backend(backend)
    out = kern.interpolate(field.grid, spec.origin, spec.spacing, pts)
    return float(out[0]) if single else out


def default_spacing(feature_scale: float, per_feature: int = 50) -> float:
    """Grid step resolving the smallest feature ``per_feature`` times."""
    if not feature_scale > 0:
        raise GeometryError("feature scale must be positive")
    return float(feature_scale) / per_feature


def dump_field(field: DistanceField, path) -> None:
    """ASCII header line then raw little-endian float64 values (row-major)."""
    spec = field.spec
    header = "rparallel-field dim={} origin={} spacing={} counts={}\n".format(
        spec.dim,
        ",".join(repr(float(x)) for x in spec.origin),
        ",".join(repr(float(x)) for x in spec.spacing),
        ",".join(str(n) for n in spec.counts),
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def load_field(path) -> DistanceField:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        if not header or header[0] != "rparallel-field":
            raise ValueError(f"{path}: not a field dump")
        kv = dict(item.split("=", 1) for item in header[1:])
        spec = GridSpec(
            [float(x) for x in kv["origin"].split(",")],
            [float(x) for x in kv["spacing"].split(",")],
            [int(x) for x in kv["counts"].split(",")],
        )
        values = np.frombuffer(fh.read(), dtype="<f8")
    return DistanceField(spec, values)


def lipschitz_violation(field: DistanceField) -> float:
    """Largest |D(p) - D(q)| - |p - q| over axis-adjacent node pairs."""
    g = field.grid
    worst = -math.inf
    for a in range(g.ndim):
        diff = np.abs(np.diff(g, axis=a)).max() if g.shape[a] > 1 else 0.0
        worst = max(worst, float(diff - field.spec.spacing[a]))
    return worst
