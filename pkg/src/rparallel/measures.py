"""Hausdorff measures of an observed complex cut by the r-parallel sets of a reference.

For a pair (eps, eps') the measure is the (d - eps - eps')-dimensional
measure of (boundary of X if eps else X) intersected with (boundary of
Y^r if eps' else Y^r).  Y^r is represented by the sublevel set
{D <= r} of a sampled distance field D; inside each simplex of X the
field is the affine interpolant of its vertex values.  Simplices over
which D bends (curved references) are bisected first, so the affine
interpolant tracks D to within a tolerance tied to the grid spacing.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional

import numpy as np

from . import kernels
from .distfield import DistanceField, GridSpec, interpolate, reference_distance
from .geometry import GeometryError, SimplicialComplex, Window, simplex_measures

MISSING = float("nan")


@dataclass(frozen=True, order=True)
class MeasurePair:
    eps: int
    eps_prime: int

    def __post_init__(self):
        if self.eps not in (0, 1) or self.eps_prime not in (0, 1):
            raise ValueError(f"measure pair entries must be 0 or 1, got ({self.eps}, {self.eps_prime})")

    @property
    def label(self) -> str:
        return f"{self.eps}{self.eps_prime}"

    @classmethod
    def parse(cls, text) -> "MeasurePair":
        if isinstance(text, MeasurePair):
            return text
        s = str(text).strip().replace(",", "").replace("(", "").replace(")", "").replace(" ", "")
        if len(s) != 2 or any(c not in "01" for c in s):
            raise ValueError(f"cannot parse measure pair {text!r}; expected one of 00, 01, 10, 11")
        return cls(int(s[0]), int(s[1]))

    def __str__(self):
        return self.label


PAIRS = tuple(MeasurePair(a, b) for a in (0, 1) for b in (0, 1))


@dataclass(frozen=True, eq=False)
class RadiusGrid:
    radii: np.ndarray

    def __post_init__(self):
        r = np.array(self.radii, dtype=np.float64).reshape(-1)
        if len(r) == 0:
            raise ValueError("radius grid is empty")
        if np.any(r < 0) or not np.all(np.isfinite(r)):
            raise ValueError("radii must be finite and >= 0")
        if np.any(np.diff(r) <= 0):
            raise ValueError("radii must be strictly increasing")
        r.setflags(write=False)
        object.__setattr__(self, "radii", r)

    @classmethod
    def uniform(cls, r_max: float, steps: int) -> "RadiusGrid":
        """``steps`` radii evenly spaced on (0, r_max], zero excluded."""
        if not r_max > 0 or steps < 1:
            raise ValueError("need r_max > 0 and steps >= 1")
        return cls(r_max * np.arange(1, steps + 1) / steps)

    @property
    def r_max(self) -> float:
        return float(self.radii[-1])

    def __len__(self):
        return len(self.radii)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.radii, dtype=dtype)


def _radii(radii) -> np.ndarray:
    if isinstance(radii, RadiusGrid):
        return radii.radii
    return RadiusGrid(np.atleast_1d(np.asarray(radii, dtype=np.float64))).radii


@dataclass(frozen=True, eq=False)
class MeasureCurve:
    """Sampled r -> value.  ``kind`` is one of mu, nu, N, K, L."""

    kind: str
    label: str
    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.radii) != len(self.values):
            raise ValueError("radii and values differ in length")

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class Partition:
    inside: np.ndarray
    crossing: np.ndarray
    outside: np.ndarray


def vertex_distances(X: SimplicialComplex, field: DistanceField, reference=None, solid=True, backend=None):
    """Distances at X's vertices: field interpolation, or exact if ``reference`` is given."""
    if X.dim != field.spec.dim:
        raise GeometryError(f"complex is {X.dim}D, field is {field.spec.dim}D")
    if reference is not None:
        return reference_distance(reference, X.vertices, solid=solid, backend=backend)
    return interpolate(field, X.vertices, backend=backend)


def _simplices(X: SimplicialComplex, which: str):
    if which == "interior":
        if not X.has_interior:
            raise GeometryError("this measure needs an interior tessellation of X")
        return X.interior
    if which == "boundary":
        return X.boundary
    raise ValueError(f"which must be 'interior' or 'boundary', got {which!r}")


def classify_simplices(X: SimplicialComplex, field: DistanceField, r: float, which="interior", values=None) -> Partition:
    """Split simplices into those inside Y^r, crossing its boundary, and outside.

    A vertex at distance exactly r counts as inside (Y^r is closed).
    """
    S = _simplices(X, which)
    v = vertex_distances(X, field) if values is None else np.asarray(values)
    vs = v[S]
    inside = np.all(vs <= r, axis=1)
    outside = np.all(vs > r, axis=1)
    crossing = ~(inside | outside)
    return Partition(np.nonzero(inside)[0], np.nonzero(crossing)[0], np.nonzero(outside)[0])


TIE = 1e-9  # relative slack that makes near-equal lengths compare as equal


def refine_simplices(points, simplices, values, value_fn, tol: float, min_edge: float, max_rounds: int = 40):
    """Bisect longest edges while D departs from its affine interpolant.

    A simplex is split when some edge midpoint's value differs from the mean
    of the edge's end values by more than ``tol``, unless its longest edge is
    already <= ``min_edge``.  New vertices get ``value_fn`` values.  Children
    need not be conforming: only per-simplex measures are summed.
    Returns (points, simplices, values).
    """
    pts = np.asarray(points, dtype=np.float64)
    vals = np.asarray(values, dtype=np.float64)
    S = np.asarray(simplices, dtype=np.int64)
    k = S.shape[1]
    if k < 2 or len(S) == 0:
        return pts, S, vals
    ia, ib = (np.array(x) for x in zip(*combinations(range(k), 2)))
    new_pts, new_vals, done = [pts], [vals], []
    n_pts = len(pts)
    for _ in range(max_rounds):
        if len(S) == 0:
            break
        allp = np.concatenate(new_pts) if len(new_pts) > 1 else pts
        allv = np.concatenate(new_vals) if len(new_vals) > 1 else vals
        new_pts, new_vals = [allp], [allv]
        A, B = S[:, ia], S[:, ib]
        lens = np.linalg.norm(allp[A] - allp[B], axis=2)
        longest = lens.max(axis=1)
        cand = longest > min_edge * (1 + TIE)
        done.append(S[~cand])
        S, A, B, lens = S[cand], A[cand], B[cand], lens[cand]
        if len(S) == 0:
            break
        mid = 0.5 * (allp[A] + allp[B])
        vm = value_fn(mid.reshape(-1, allp.shape[1])).reshape(A.shape)
        split = np.abs(vm - 0.5 * (allv[A] + allv[B])).max(axis=1) > tol
        done.append(S[~split])
        S, A, B, lens, mid, vm = S[split], A[split], B[split], lens[split], mid[split], vm[split]
        if len(S) == 0:
            break
        # equal-length edges are common; break ties by local edge order, not by roundoff
        e = np.argmax(lens >= (longest[cand][split] * (1 - TIE))[:, None], axis=1)
        rows = np.arange(len(S))
        a, b = A[rows, e], B[rows, e]
        m = n_pts + rows
        n_pts += len(S)
        new_pts.append(mid[rows, e])
        new_vals.append(vm[rows, e])
        c1 = np.where(S == b[:, None], m[:, None], S)
        c2 = np.where(S == a[:, None], m[:, None], S)
        S = np.concatenate([c1, c2])
    done.append(S)
    return np.concatenate(new_pts), np.concatenate(done), np.concatenate(new_vals)


def _sweep(points, simplices, values, radii, backend):
    kern = kernels.get_backend(backend)
    return kern.clip_curve(points, simplices, simplex_measures(points, simplices), values, radii)


def _vertex_level_count(boundary, values, radii):
    """Boundary vertices sitting exactly on the level set (2D point counts)."""
    used = np.unique(boundary)
    v = np.sort(values[used])
    return (np.searchsorted(v, radii, side="right") - np.searchsorted(v, radii, side="left")).astype(float)


REFINE_TOL = 0.03  # allowed departure of D from the affine interpolant, in grid spacings


def mu_curves(
    X: SimplicialComplex,
    field: DistanceField,
    radii,
    pairs: Iterable = PAIRS,
    values=None,
    backend=None,
    reference=None,
    refine: bool = True,
) -> dict:
    """Measure curves for each requested pair, one clipping sweep per simplex set.

    Vertex distances come from the field, or exactly from ``reference`` if
    given.  ``values`` fixes the vertex distances outright and disables
    refinement, as does ``refine=False``.
    """
    r = _radii(radii)
    pairs = [MeasurePair.parse(p) for p in pairs]
    if not pairs:
        raise ValueError("no measure pairs selected")
    if values is not None:
        v = np.asarray(values, dtype=np.float64)
        if v.shape != (len(X.vertices),):
            raise ValueError(f"values must have one entry per vertex ({len(X.vertices)}), got shape {v.shape}")
        refine = False
    else:
        v = vertex_distances(X, field, reference=reference, backend=backend)

    def value_fn(p):
        if reference is not None:
            return reference_distance(reference, p, backend=backend)
        return interpolate(field, p, backend=backend)

    h = float(field.spec.spacing.min())

    def simplices(which):
        S = _simplices(X, which)
        if not refine:
            return X.vertices, S, v
        return refine_simplices(X.vertices, S, v, value_fn, REFINE_TOL * h, 0.5 * h)

    out = {}
    if any(p.eps == 0 for p in pairs):
        vol, lvl = _sweep(*simplices("interior"), r, backend)
        out[MeasurePair(0, 0)] = vol
        out[MeasurePair(0, 1)] = lvl
    if any(p.eps == 1 for p in pairs):
        P, S, vv = simplices("boundary")
        area, lvl = _sweep(P, S, vv, r, backend)
        if X.dim == 2:
            lvl = lvl + _vertex_level_count(S, vv, r)
        out[MeasurePair(1, 0)] = area
        out[MeasurePair(1, 1)] = lvl
    return {p: MeasureCurve("mu", p.label, r, out[p]) for p in pairs}


def mu_curve(X, field, radii, pair, values=None, backend=None, reference=None) -> MeasureCurve:
    pair = MeasurePair.parse(pair)
    return mu_curves(X, field, radii, [pair], values=values, backend=backend, reference=reference)[pair]


def mu(X, field, r: float, pair, values=None, backend=None, reference=None) -> float:
    if r < 0:
        raise ValueError("r must be >= 0")
    return float(mu_curve(X, field, [r], pair, values=values, backend=backend, reference=reference).values[0])


def window_lattice(field: DistanceField, window: Window, backend=None):
    """Field values on a lattice spanning ``window`` exactly, with its spacing.

    Uses the grid nodes directly when the window faces lie on grid planes;
    otherwise resamples by interpolation at spacing <= the grid's.
    """
    spec = field.spec
    if window.dim != spec.dim:
        raise GeometryError(f"window is {window.dim}D, field is {spec.dim}D")
    if not spec.covers(window.lower, window.upper):
        raise GeometryError("window exceeds the distance field grid")
    sl = spec.window_slice(window)
    if sl is not None:
        return field.grid[sl], spec.spacing
    sub = GridSpec.covering(window.lower, window.upper, float(spec.spacing.min()))
    ext = window.upper - window.lower
    sub = GridSpec(window.lower, ext / (np.array(sub.counts) - 1), sub.counts)
    vals = interpolate(field, np.minimum(sub.nodes(), window.upper), backend=backend)
    return vals.reshape(sub.counts), sub.spacing


def n_curves(field: DistanceField, window: Window, radii, backend=None) -> dict:
    """Size of Y^r inside the window: {0: volume curve, 1: boundary-measure curve}."""
    r = _radii(radii)
    vals, h = window_lattice(field, window, backend=backend)
    kern = kernels.get_backend(backend)
    n0, n1 = kern.grid_clip_curve(vals, h, r)
    return {0: MeasureCurve("N", "0", r, n0), 1: MeasureCurve("N", "1", r, n1)}


def n_curve(field, window, radii, eps_prime: int, backend=None) -> MeasureCurve:
    if eps_prime not in (0, 1):
        raise ValueError("eps_prime must be 0 or 1")
    return n_curves(field, window, radii, backend=backend)[eps_prime]


def normalization(field, window, r: float, eps_prime: int, backend=None) -> float:
    return float(n_curve(field, window, [r], eps_prime, backend=backend).values[0])


def safe_ratio(num, den):
    """num / den with MISSING where den == 0."""
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    out = np.full(np.broadcast(num, den).shape, MISSING)
    ok = den != 0
    np.divide(num, den, out=out, where=ok)
    return out


def nu_curves(X, field, window, radii, pairs=PAIRS, values=None, backend=None, n=None, reference=None) -> dict:
    r = _radii(radii)
    mus = mu_curves(X, field, r, pairs, values=values, backend=backend, reference=reference)
    n = n_curves(field, window, r, backend=backend) if n is None else n
    return {p: MeasureCurve("nu", p.label, r, safe_ratio(c.values, n[p.eps_prime].values)) for p, c in mus.items()}


def nu_curve(X, field, radii, pair, window, values=None, backend=None) -> MeasureCurve:
    pair = MeasurePair.parse(pair)
    return nu_curves(X, field, window, radii, [pair], values=values, backend=backend)[pair]


def nu(X, field, r: float, pair, window, values=None, backend=None) -> float:
    return float(nu_curve(X, field, [r], pair, window, values=values, backend=backend).values[0])


MEASURE_COLUMNS = ("r", "mu00", "mu01", "mu10", "mu11", "N0", "N1", "nu00", "nu01", "nu10", "nu11")


def measure_table(
    X: SimplicialComplex,
    field: DistanceField,
    radii,
    window: Optional[Window] = None,
    pairs=PAIRS,
    values=None,
    backend=None,
    n=None,
    reference=None,
) -> dict:
    """All CSV columns for one observed object; unselected or unavailable entries are MISSING.

    ``n`` reuses precomputed N curves for ``window``.
    """
    r = _radii(radii)
    pairs = [MeasurePair.parse(p) for p in pairs]
    mus = mu_curves(X, field, r, pairs, values=values, backend=backend, reference=reference)
    blank = np.full(len(r), MISSING)
    cols = {c: blank.copy() for c in MEASURE_COLUMNS}
    cols["r"] = r.copy()
    for p, c in mus.items():
        cols["mu" + p.label] = c.values
    if window is not None:
        n = n_curves(field, window, r, backend=backend) if n is None else n
        cols["N0"] = n[0].values
        cols["N1"] = n[1].values
        for p, c in mus.items():
            cols["nu" + p.label] = safe_ratio(c.values, n[p.eps_prime].values)
    return cols
