"""K-style summary statistics over germ-grain scenes.

    K(r) = 1 / (|W| rho_x rho_y) * sum_{y in W} sum_x mu(x + X, y + Y^r)

L replaces mu by nu = mu / N, with N taken from each reference's own field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .distfield import GridSpec, build_distance_field, default_spacing
from .geometry import GeometryError, Germ, GermGrainScene, Plane, SceneError, SimplicialComplex, Sphere, Window, merge
from .measures import PAIRS, MeasurePair, _radii, mu_curves, n_curves, safe_ratio


SUMMARY_COLUMNS = ("r", "value", "kind", "pair", "n_ref", "n_obs", "rho_x", "rho_y", "window_volume")


@dataclass(frozen=True)
class IntensityEstimates:
    rho_x: float
    rho_y: float
    n_obs: int
    n_ref: int
    window_volume: float


def estimate_intensities(scene: GermGrainScene) -> IntensityEstimates:
    """Germ counts with location in W divided by |W|."""
    vol = scene.window.volume
    if not vol > 0:
        raise SceneError("window has zero volume")
    n_x = len(scene.observed_in_window())
    n_y = len(scene.reference_in_window())
    return IntensityEstimates(n_x / vol, n_y / vol, n_x, n_y, vol)


@dataclass(frozen=True, eq=False)
class SummaryCurve:
    kind: str
    pair: Optional[MeasurePair]
    radii: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.values)


def feature_scale(shape) -> Optional[float]:
    if isinstance(shape, Sphere):
        return shape.radius
    if isinstance(shape, SimplicialComplex):
        lo, hi = shape.bounds()
        return float(np.min(hi - lo)) / 2.0
    return None


def auto_spacing(scene: GermGrainScene, per_feature: int = 50) -> float:
    """Smallest reference feature scale / 50; falls back to the observed grains for planes."""
    scales = [feature_scale(g.shape) for g in scene.reference]
    scales = [s for s in scales if s]
    if not scales:
        scales = [s for s in (feature_scale(g.shape) for g in scene.observed) if s]
    if not scales:
        raise SceneError("cannot derive a grid spacing: no finite feature scale in the scene")
    return default_spacing(min(scales), per_feature)


def _germ_key(g: Germ):
    return (tuple(g.location.tolist()), g.id)


class _Balls:
    """Bounding balls of placed grains; shapes shared between germs are measured once."""

    def __init__(self):
        self._cache = {}

    def __call__(self, g: Germ):
        s = g.shape
        if isinstance(s, Plane):
            return None
        if isinstance(s, Sphere):
            return s.center + g.location, s.radius
        k = id(s)
        if k not in self._cache:
            self._cache[k] = s.bounding_ball()
        c, r = self._cache[k]
        return c + g.location, r


def _relevant(ref: Germ, observed, centers, radii, balls, reach: float):
    rb = balls(ref)
    if rb is None:
        return list(observed)
    gap = np.linalg.norm(centers - rb[0], axis=1) - radii - rb[1]
    return [observed[i] for i in np.nonzero(gap <= reach)[0]]


def _reach_window(W: Window, ball, r_max: float, h: float) -> Window:
    """Part of W, on W's grid lattice, that Y^r_max can reach; the rest adds nothing to N."""
    if ball is None:
        return W
    c, rad = ball
    pad = rad + r_max + 2 * h
    lo = np.clip(c - pad, W.lower, W.upper)
    hi = np.clip(c + pad, W.lower, W.upper)
    g = GridSpec.aligned(W, h, lo, hi, crop=True)
    return Window(g.origin, np.minimum(g.upper, W.upper))


def _pair_terms(scene, radii, pairs, spacing, backend, exact_vertex_distance, need_n):
    """Yield (reference germ, {pair: sum_x mu}, N curves or None) per reference in W."""
    d = scene.dim
    W = scene.window
    observed = sorted(scene.observed, key=_germ_key)
    balls = _Balls()
    reach = float(radii[-1]) + spacing * np.sqrt(d)
    obs_balls = [balls(g) for g in observed]
    centers = np.array([b[0] for b in obs_balls]).reshape(-1, d)
    obs_r = np.array([b[1] for b in obs_balls])
    for ref in sorted(scene.reference_in_window(), key=_germ_key):
        Y = ref.placed()
        xs = _relevant(ref, observed, centers, obs_r, balls, reach)
        placed = [g.placed() for g in xs]
        Wr = _reach_window(W, balls(ref), float(radii[-1]), spacing)
        lo, hi = Wr.lower.copy(), Wr.upper.copy()
        for X in placed:
            a, b = X.bounds()
            lo, hi = np.minimum(lo, a), np.maximum(hi, b)
        spec = GridSpec.aligned(W, spacing, lo, hi, crop=True)
        fld = build_distance_field(Y, spec, backend=backend)
        sums = {p: np.zeros(len(radii)) for p in pairs}
        if placed:
            # mu is additive over disjoint grains: one sweep over their union
            exact = Y if exact_vertex_distance else None
            for p, c in mu_curves(merge(placed), fld, radii, pairs, backend=backend, reference=exact).items():
                sums[p] += c.values
        n = n_curves(fld, Wr, radii, backend=backend) if need_n else None
        yield ref, sums, n


def summary_curves(
    scene: GermGrainScene,
    radii,
    pairs=PAIRS,
    kinds=("K", "L"),
    spacing: Optional[float] = None,
    backend=None,
    exact_vertex_distance: bool = False,
) -> dict:
    """K and/or L curves for each pair, keyed by (kind, pair); one field per reference."""
    r = _radii(radii)
    pairs = [MeasurePair.parse(p) for p in pairs]
    if not pairs:
        raise ValueError("no measure pairs selected")
    kinds = tuple(kinds)
    if not set(kinds) <= {"K", "L"} or not kinds:
        raise ValueError(f"kinds must be a nonempty subset of K, L; got {kinds}")
    scene.check_observable(float(r[-1]))
    est = estimate_intensities(scene)
    if est.rho_x == 0 or est.rho_y == 0:
        raise SceneError(f"intensity is zero (observed in W: {est.n_obs}, reference in W: {est.n_ref}); the summary is undefined")
    h = auto_spacing(scene) if spacing is None else float(spacing)
    if not h > 0:
        raise GeometryError("grid spacing must be positive")
    K = {p: np.zeros(len(r)) for p in pairs}
    L = {p: np.zeros(len(r)) for p in pairs}
    for _, sums, n in _pair_terms(scene, r, pairs, h, backend, exact_vertex_distance, "L" in kinds):
        for p in pairs:
            K[p] += sums[p]
            if n is not None:
                L[p] += safe_ratio(sums[p], n[p.eps_prime].values)
    scale = 1.0 / (est.window_volume * est.rho_x * est.rho_y)
    meta = {
        "n_ref": est.n_ref,
        "n_obs": est.n_obs,
        "rho_x": est.rho_x,
        "rho_y": est.rho_y,
        "window_volume": est.window_volume,
        "spacing": h,
        "seed": scene.seed,
    }
    out = {}
    for p in pairs:
        if "K" in kinds:
            out[("K", p)] = SummaryCurve("K", p, r.copy(), K[p] * scale, dict(meta))
        if "L" in kinds:
            out[("L", p)] = SummaryCurve("L", p, r.copy(), L[p] * scale, dict(meta))
    return out


def k_hat(scene, radii, pair, spacing=None, backend=None, exact_vertex_distance=False) -> SummaryCurve:
    pair = MeasurePair.parse(pair)
    return summary_curves(scene, radii, [pair], ("K",), spacing, backend, exact_vertex_distance)[("K", pair)]


def l_hat(scene, radii, pair, spacing=None, backend=None, exact_vertex_distance=False) -> SummaryCurve:
    pair = MeasurePair.parse(pair)
    return summary_curves(scene, radii, [pair], ("L",), spacing, backend, exact_vertex_distance)[("L", pair)]


def cross_k_points(points_x, points_y, radii, window: Window) -> SummaryCurve:
    """Mean number of x-points within distance r of a y-point in ``window``."""
    px = np.atleast_2d(np.asarray(points_x, dtype=np.float64))
    py = np.atleast_2d(np.asarray(points_y, dtype=np.float64))
    if px.size == 0 or py.size == 0:
        raise ValueError("point sets must be nonempty")
    if px.shape[1] != window.dim or py.shape[1] != window.dim:
        raise GeometryError("point and window dimensions differ")
    r = _radii(radii)
    yw = py[window.contains_points(py)]
    if len(yw) == 0:
        raise ValueError("no y-points inside the window")
    counts = cKDTree(yw).count_neighbors(cKDTree(px), r).astype(np.float64)
    meta = {"n_ref": len(yw), "n_obs": len(px), "window_volume": window.volume}
    return SummaryCurve("cross-K", None, r.copy(), counts / len(yw), meta)
