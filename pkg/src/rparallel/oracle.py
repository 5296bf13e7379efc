"""Closed-form measures for a ball tangent to a hyperplane.

The ball (disk in 2D) of radius R has its center at distance R from the
reference line/plane.  Its cut by the r-parallel set of the plane is a
circular segment (2D) or spherical cap (3D) of height r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import MeasurePair


@dataclass(frozen=True)
class TangentBallScene:
    dim: int
    R: float

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")
        if not self.R > 0:
            raise ValueError("R must be positive")


def _theta(r, R):
    return 2.0 * math.acos(1.0 - r / R)


def analytic_mu(scene: TangentBallScene, r: float, pair) -> float:
    """Exact measure of the tangent-ball cut at radius ``r``."""
    if r < 0:
        raise ValueError("r must be >= 0")
    pair = MeasurePair.parse(pair)
    R = scene.R
    small = r < 2 * R
    if scene.dim == 3:
        if pair == MeasurePair(0, 0):
            return math.pi * r * r * (3 * R - r) / 3 if small else 4 * math.pi * R**3 / 3
        if pair == MeasurePair(0, 1):
            return math.pi * r * (2 * R - r) if small else 0.0
        if pair == MeasurePair(1, 0):
            return 2 * math.pi * R * r if small else 4 * math.pi * R * R
        if r == 0 or not small:
            return 0.0
        return 2 * math.pi * math.sqrt(2 * R * r - r * r)
    if pair == MeasurePair(1, 1):
        if r == 0 or r == 2 * R:
            return 1.0
        return 2.0 if small else 0.0
    if not small:
        return {MeasurePair(0, 0): math.pi * R * R, MeasurePair(0, 1): 0.0, MeasurePair(1, 0): 2 * math.pi * R}[pair]
    th = _theta(r, R)
    if pair == MeasurePair(0, 0):
        return R * R / 2 * (th - math.sin(th))
    if pair == MeasurePair(0, 1):
        return 2 * R * math.sin(th / 2)
    return th * R


def analytic_nu(scene: TangentBallScene, r: float, pair) -> float:
    """Normalized measure; the reference is unbounded so its size is infinite and this is 0."""
    analytic_mu(scene, r, pair)
    return 0.0


def analytic_curve(scene: TangentBallScene, radii, pair) -> np.ndarray:
    return np.array([analytic_mu(scene, float(r), pair) for r in np.asarray(radii)])


def d_mu00_dr(scene: TangentBallScene, r: float) -> float:
    """Symbolic derivative of the cut volume (area in 2D) with respect to r."""
    R = scene.R
    if r >= 2 * R:
        return 0.0
    if scene.dim == 3:
        return math.pi * (2 * R * r - r * r)
    # d/dr (R^2/2)(theta - sin theta), theta = 2 acos(1 - r/R)
    th = _theta(r, R)
    dth = 2.0 / (R * math.sqrt(1.0 - (1.0 - r / R) ** 2)) if 0 < r < 2 * R else 0.0
    return R * R / 2 * (1.0 - math.cos(th)) * dth


@dataclass(frozen=True)
class ConsistencyReport:
    radii: np.ndarray
    derivative: np.ndarray
    mu01: np.ndarray
    max_abs_deviation: float
    max_rel_deviation: float

    @property
    def ok(self) -> bool:
        return self.max_rel_deviation <= 1e-9


def analytic_consistency_check(scene: TangentBallScene, radii) -> ConsistencyReport:
    """Compare d(mu00)/dr with mu01 at each radius."""
    r = np.asarray(radii, dtype=np.float64)
    der = np.array([d_mu00_dr(scene, float(x)) for x in r])
    m01 = analytic_curve(scene, r, MeasurePair(0, 1))
    dev = np.abs(der - m01)
    scale = np.maximum(np.abs(m01), np.finfo(float).tiny)
    rel = np.where(dev == 0, 0.0, dev / scale)
    return ConsistencyReport(r, der, m01, float(dev.max(initial=0.0)), float(rel.max(initial=0.0)))


def analytic_table(scene: TangentBallScene, radii) -> dict:
    """Columns of the measure CSV schema; N is infinite, so nu is 0."""
    r = np.asarray(radii, dtype=np.float64)
    cols = {"r": r.copy()}
    for p in (MeasurePair(0, 0), MeasurePair(0, 1), MeasurePair(1, 0), MeasurePair(1, 1)):
        cols["mu" + p.label] = analytic_curve(scene, r, p)
    cols["N0"] = np.full(len(r), math.inf)
    cols["N1"] = np.full(len(r), math.inf)
    for p in ("00", "01", "10", "11"):
        cols["nu" + p] = np.zeros(len(r))
    return cols
