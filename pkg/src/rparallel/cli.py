"""Command line: rparallel {synth, measures, summary, oracle, plot}."""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .distfield import GridSpec, build_distance_field
from .io import atomic_write, parse_scene, write_csv, write_scene
from .measures import MEASURE_COLUMNS, PAIRS, MeasurePair, RadiusGrid, measure_table, n_curves
from .oracle import TangentBallScene, analytic_table
from .plot import render_svg, series_from_csv
from .summary import SUMMARY_COLUMNS, auto_spacing, summary_curves
from .synth import SynthSpec, generate


class UsageError(ValueError):
    pass


def parse_pairs(text) -> list:
    """``all`` or a comma list such as ``00,11``."""
    if text is None or text.strip().lower() == "all":
        return list(PAIRS)
    items = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    if not items:
        raise UsageError("empty measure-pair selection; use e.g. --pairs 00,01 or --pairs all")
    out = []
    for t in items:
        try:
            p = MeasurePair.parse(t)
        except ValueError as e:
            raise UsageError(str(e)) from None
        if p not in out:
            out.append(p)
    return sorted(out)


@dataclass
class RunConfig:
    scene: Optional[str] = None
    r_max: Optional[float] = None
    r_steps: int = 100
    grid_spacing: Optional[float] = None
    pairs: list = field(default_factory=lambda: list(PAIRS))
    seed: Optional[int] = None
    out: str = "out"
    exact_vertex_distance: bool = False
    kinds: tuple = ("K", "L")
    backend: Optional[str] = None

    def radii(self, default_r_max: float) -> RadiusGrid:
        r_max = default_r_max if self.r_max is None else self.r_max
        if not r_max > 0:
            raise UsageError(f"r_max must be > 0 (got {r_max}); pass --r-max or set r_max in the scene")
        if self.r_steps < 1:
            raise UsageError("--r-steps must be >= 1")
        return RadiusGrid.uniform(r_max, self.r_steps)

    def check(self):
        if not self.pairs:
            raise UsageError("no measure pairs selected")
        if self.grid_spacing is not None and not self.grid_spacing > 0:
            raise UsageError("--grid-spacing must be > 0")


def run_measures(cfg: RunConfig) -> list:
    """One measure CSV per observed object, from the union of all references."""
    cfg.check()
    scene = parse_scene(cfg.scene)
    radii = cfg.radii(scene.r_max)
    scene.check_observable(radii.r_max)
    h = auto_spacing(scene) if cfg.grid_spacing is None else cfg.grid_spacing
    placed = [(g.id, g.placed()) for g in scene.observed]
    refs = [g.placed() for g in scene.reference]
    if not refs:
        raise UsageError("scene has no reference objects")
    W = scene.window
    lo, hi = W.lower.copy(), W.upper.copy()
    for _, X in placed:
        a, b = X.bounds()
        lo, hi = np.minimum(lo, a), np.maximum(hi, b)
    fld = build_distance_field(refs, GridSpec.aligned(W, h, lo, hi), backend=cfg.backend)
    n = n_curves(fld, W, radii, backend=cfg.backend)
    out = Path(cfg.out)
    paths = []
    for gid, X in placed:
        exact = refs if cfg.exact_vertex_distance else None
        cols = measure_table(X, fld, radii, W, cfg.pairs, backend=cfg.backend, n=n, reference=exact)
        p = out / f"{gid}.csv"
        write_csv(p, cols, MEASURE_COLUMNS)
        paths.append(p)
    return paths


def run_summary(cfg: RunConfig) -> list:
    """One summary CSV per (kind, pair)."""
    cfg.check()
    scene = parse_scene(cfg.scene)
    radii = cfg.radii(scene.r_max)
    curves = summary_curves(scene, radii, cfg.pairs, cfg.kinds, cfg.grid_spacing, cfg.backend, cfg.exact_vertex_distance)
    out = Path(cfg.out)
    paths = []
    for (kind, pair), c in curves.items():
        m = c.meta
        n = len(c.radii)
        cols = {
            "r": c.radii,
            "value": c.values,
            "kind": [kind] * n,
            "pair": [pair.label] * n,
            "n_ref": [m["n_ref"]] * n,
            "n_obs": [m["n_obs"]] * n,
            "rho_x": [m["rho_x"]] * n,
            "rho_y": [m["rho_y"]] * n,
            "window_volume": [m["window_volume"]] * n,
        }
        p = out / f"{kind}_{pair.label}.csv"
        write_csv(p, cols, SUMMARY_COLUMNS)
        paths.append(p)
    return paths


def run_oracle(dim: int, R: float, cfg: RunConfig) -> Path:
    radii = cfg.radii(4 * R)
    cols = analytic_table(TangentBallScene(dim, R), radii)
    chosen = {f"{x}{p.label}" for p in cfg.pairs for x in ("mu", "nu")}
    for c in MEASURE_COLUMNS[1:]:
        if c[:2] in ("mu", "nu") and c not in chosen:
            cols[c] = np.full(len(radii), np.nan)
    out = Path(cfg.out)
    write_csv(out, cols, MEASURE_COLUMNS)
    return out


def run_plot(csvs, out, columns=None, title="") -> Path:
    series = []
    for p in csvs:
        series.extend(series_from_csv(p, columns))
    atomic_write(out, render_svg(series, title=title))
    return Path(out)


def _add_run_flags(p, scene=True):
    if scene:
        p.add_argument("--scene", required=True, help="scene JSON file")
    p.add_argument("--r-max", type=float, default=None, help="largest radius (default: the scene's r_max)")
    p.add_argument("--r-steps", type=int, default=100, help="number of radii, evenly spaced on (0, r_max]")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--grid-spacing", type=float, default=None, help="distance-field grid spacing h")
    g.add_argument("--grid-auto", action="store_true", help="h = smallest feature scale / 50 (default)")
    p.add_argument("--pairs", default="all", help="measure pairs, e.g. 00,01 or all (default)")
    p.add_argument("--exact-vertex-distance", action="store_true", help="exact distances at mesh vertices instead of field interpolation")
    p.add_argument("--backend", choices=("numba", "numpy"), default=None, help="kernel backend (default: RPARALLEL_BACKEND or numba)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rparallel", description="Measures of observed shapes against r-parallel sets of reference shapes.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic scene (JSON + mesh files)")
    s.add_argument("--kind", choices=("plane-ball", "plane-cube", "sphere-process"), default="plane-ball")
    s.add_argument("--dim", type=int, choices=(2, 3), default=3)
    s.add_argument("--radius", type=float, default=100.0)
    s.add_argument("--reference-radius", type=float, default=None)
    s.add_argument("--cube-side", type=float, default=150.0)
    s.add_argument("--offset", type=float, default=100.0, help="gap between the object and the plane")
    s.add_argument("--window-side", type=float, default=500.0)
    s.add_argument("--r-max", type=float, default=400.0)
    s.add_argument("--subdivisions", type=int, default=4)
    s.add_argument("--polygon-sides", type=int, default=256)
    s.add_argument("--process", choices=("uniform", "clustered"), default="uniform")
    s.add_argument("--n-reference", type=int, default=20)
    s.add_argument("--n-observed", type=int, default=1000)
    s.add_argument("--cluster-scale", type=float, default=150.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="scene JSON path; meshes are written next to it")

    m = sub.add_parser("measures", help="per-object measure curves (one CSV per observed object)")
    _add_run_flags(m)
    m.add_argument("--out", required=True, help="output directory")

    u = sub.add_parser("summary", help="K and L summary curves (one CSV per kind and pair)")
    _add_run_flags(u)
    u.add_argument("--kinds", default="K,L", help="K, L or K,L")
    u.add_argument("--out", required=True, help="output directory")

    o = sub.add_parser("oracle", help="closed-form curves of a ball tangent to a plane")
    o.add_argument("--dim", type=int, choices=(2, 3), default=3)
    o.add_argument("--radius", type=float, default=100.0)
    o.add_argument("--r-max", type=float, default=None, help="default 4 x radius")
    o.add_argument("--r-steps", type=int, default=100)
    o.add_argument("--pairs", default="all")
    o.add_argument("--out", required=True, help="output CSV")

    p = sub.add_parser("plot", help="SVG chart of measure or summary CSVs")
    p.add_argument("csv", nargs="+")
    p.add_argument("--columns", default=None, help="comma list of columns to draw (default: all)")
    p.add_argument("--title", default="")
    p.add_argument("--out", required=True, help="output SVG")
    return ap


def _config(a) -> RunConfig:
    return RunConfig(
        scene=getattr(a, "scene", None),
        r_max=a.r_max,
        r_steps=a.r_steps,
        grid_spacing=getattr(a, "grid_spacing", None),
        pairs=parse_pairs(a.pairs),
        out=a.out,
        exact_vertex_distance=getattr(a, "exact_vertex_distance", False),
        backend=getattr(a, "backend", None),
    )


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    try:
        if a.command == "synth":
            spec = SynthSpec(
                kind=a.kind,
                dim=a.dim,
                radius=a.radius,
                reference_radius=a.reference_radius,
                cube_side=a.cube_side,
                offset=a.offset,
                window_side=a.window_side,
                r_max=a.r_max,
                subdivisions=a.subdivisions,
                polygon_sides=a.polygon_sides,
                process=a.process,
                n_reference=a.n_reference,
                n_observed=a.n_observed,
                cluster_scale=a.cluster_scale,
                seed=a.seed,
            )
            write_scene(generate(spec), a.out)
        elif a.command == "measures":
            run_measures(_config(a))
        elif a.command == "summary":
            cfg = _config(a)
            kinds = tuple(k.strip().upper() for k in a.kinds.split(",") if k.strip())
            if not kinds or not set(kinds) <= {"K", "L"}:
                raise UsageError(f"--kinds must be K, L or K,L; got {a.kinds!r}")
            cfg.kinds = kinds
            run_summary(cfg)
        elif a.command == "oracle":
            run_oracle(a.dim, a.radius, _config(a))
        elif a.command == "plot":
            cols = [c.strip() for c in a.columns.split(",")] if a.columns else None
            run_plot(a.csv, a.out, cols, a.title)
    except UsageError as e:
        print(f"rparallel {a.command}: usage error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as e:
        print(f"rparallel {a.command}: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
