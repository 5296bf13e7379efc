"""Time the numba and numpy kernel backends on the same inputs.

    python3 benchmarks/bench_backends.py [--repeat 3]

The first numba call of each kernel includes JIT compilation and is
reported separately as ``first``; ``best`` is the fastest later repeat.
"""

import argparse
import time

import numpy as np

from rparallel import kernels
from rparallel.distfield import GridSpec, build_distance_field
from rparallel.geometry import Sphere, simplex_measures
from rparallel.measures import RadiusGrid, mu_curves
from rparallel.synth import blob, icosphere


def _time(fn, repeat):
    t = time.perf_counter()
    fn()
    first = time.perf_counter() - t
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return first, best


def cases():
    rng = np.random.default_rng(0)
    X = icosphere(100.0, 4).translate([0.0, 0.0, 100.0])
    radii = RadiusGrid.uniform(400, 100).radii
    vals = X.vertices[:, 2].copy()
    meas = simplex_measures(X.vertices, X.interior)
    grid = np.abs(rng.normal(size=(96, 96, 96))).cumsum(axis=0)
    mesh = icosphere(50.0, 3, interior=False)
    prims = mesh.vertices[mesh.boundary]
    pts = rng.uniform(-80, 80, (20000, 3))
    B = blob(np.random.default_rng(1), 60.0, 3)
    S = Sphere([0.0, 0.0, -150.0], 50.0)
    spec = GridSpec.covering([-90, -90, -210], [90, 90, 90], 4.0)
    fspec = GridSpec.covering([-90] * 3, [90] * 3, 4.0)
    return {
        "clip_curve (5120 tets x 100 r)": lambda b: kernels.get_backend(b).clip_curve(X.vertices, X.interior, meas, vals, radii),
        "grid_clip_curve (96^3 x 100 r)": lambda b: kernels.get_backend(b).grid_clip_curve(grid, np.ones(3), radii),
        "simplex_distance (20k pts, 1280 tris)": lambda b: kernels.get_backend(b).simplex_distance(pts, prims),
        "build_distance_field (mesh, 46^3)": lambda b: build_distance_field(mesh, fspec, backend=b),
        "mu_curves (blob vs sphere, refined)": lambda b: mu_curves(B, build_distance_field(S, spec, backend=b), radii, backend=b),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()
    print(f"{'case':42s} {'numba first':>12s} {'numba best':>11s} {'numpy best':>11s} {'speedup':>8s}")
    for name, fn in cases().items():
        f_nb, b_nb = _time(lambda: fn("numba"), a.repeat)
        _, b_np = _time(lambda: fn("numpy"), a.repeat)
        print(f"{name:42s} {f_nb:12.3f} {b_nb:11.4f} {b_np:11.4f} {b_np / b_nb:7.1f}x")


if __name__ == "__main__":
    main()
