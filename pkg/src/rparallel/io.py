"""Mesh, scene and CSV files.

Meshes are ASCII OFF or PLY.  2D polylines are stored as OFF/PLY with
z = 0 and two-vertex faces.  An interior tessellation lives in a side
file::

    interior <n_extra_vertices> <n_simplices> <vertices_per_simplex>
    <extra vertex coordinates, one per line>
    <simplex vertex indices, one per line>

Indices address the boundary mesh's vertices followed by the extra ones.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .geometry import GeometryError, Germ, GermGrainScene, Plane, SceneError, SimplicialComplex, Sphere, Window, validate


class ParseError(ValueError):
    def __init__(self, path, line, message):
        self.path, self.line = str(path), line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


def atomic_write(path, data) -> None:
    """Write ``data`` (str or bytes) via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x) -> str:
    """17 significant digits; NaN becomes an empty cell."""
    x = float(x)
    if math.isnan(x):
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


# --- meshes -----------------------------------------------------------------


def _tokens(path):
    """Non-empty, comment-stripped lines as (line number, tokens)."""
    with open(path) as f:
        for i, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if line:
                yield i, line.split()


def _floats(path, ln, toks, n):
    if len(toks) < n:
        raise ParseError(path, ln, f"expected {n} numbers, got {len(toks)}")
    try:
        return [float(t) for t in toks[:n]]
    except ValueError as e:
        raise ParseError(path, ln, str(e)) from None


def _ints(path, ln, toks):
    try:
        return [int(t) for t in toks]
    except ValueError as e:
        raise ParseError(path, ln, str(e)) from None


def _face(path, ln, vals, nv):
    k = vals[0] if vals else 0
    if len(vals) < k + 1 or k < 1:
        raise ParseError(path, ln, f"face declares {k} vertices but lists {max(len(vals) - 1, 0)}")
    f = vals[1 : k + 1]
    bad = [i for i in f if not 0 <= i < nv]
    if bad:
        raise ParseError(path, ln, f"vertex index {bad[0]} out of range (mesh has {nv} vertices)")
    return f


def _faces_to_complex(path, verts, faces):
    sizes = {len(f) for f in faces}
    if not faces:
        raise ParseError(path, None, "mesh has no faces")
    if len(sizes) != 1 or sizes.pop() not in (2, 3):
        raise ParseError(path, None, "faces must be all triangles (3D) or all segments (2D)")
    V = np.array(verts, dtype=np.float64)
    F = np.array(faces, dtype=np.int64)
    if F.shape[1] == 2:
        if np.any(V[:, 2] != 0):
            raise ParseError(path, None, "2D polyline vertices must have z = 0")
        V = V[:, :2]
    return V, F


def read_off(path):
    """(vertices, faces) from an ASCII OFF file."""
    it = _tokens(path)
    try:
        ln, toks = next(it)
    except StopIteration:
        raise ParseError(path, None, "empty file") from None
    if toks[0] != "OFF":
        raise ParseError(path, ln, f"expected 'OFF' header, got {toks[0]!r}")
    toks = toks[1:]
    if not toks:
        try:
            ln, toks = next(it)
        except StopIteration:
            raise ParseError(path, None, "missing counts line") from None
    counts = _ints(path, ln, toks[:3])
    if len(counts) < 2:
        raise ParseError(path, ln, "counts line needs vertex and face counts")
    nv, nf = counts[0], counts[1]
    verts, faces = [], []
    for _ in range(nv):
        try:
            ln, toks = next(it)
        except StopIteration:
            raise ParseError(path, None, f"expected {nv} vertices, found {len(verts)}") from None
        verts.append(_floats(path, ln, toks, 3))
    for _ in range(nf):
        try:
            ln, toks = next(it)
        except StopIteration:
            raise ParseError(path, None, f"expected {nf} faces, found {len(faces)}") from None
        faces.append(_face(path, ln, _ints(path, ln, toks), nv))
    return _faces_to_complex(path, verts, faces)


def read_ply(path):
    """(vertices, faces) from an ASCII PLY file with x, y, z and vertex_indices."""
    it = _tokens(path)
    ln, toks = next(it, (None, [""]))
    if toks != ["ply"]:
        raise ParseError(path, ln, "missing 'ply' magic")
    elements, props = [], {}
    current = None
    for ln, toks in it:
        if toks[0] == "format":
            if toks[1:2] != ["ascii"]:
                raise ParseError(path, ln, "only ASCII PLY is supported")
        elif toks[0] == "element":
            current = toks[1]
            elements.append((current, int(toks[2])))
            props[current] = []
        elif toks[0] == "property":
            if current is None:
                raise ParseError(path, ln, "property before any element")
            props[current].append(toks[-1])
        elif toks[0] == "end_header":
            break
        elif toks[0] not in ("comment", "obj_info"):
            raise ParseError(path, ln, f"unexpected header line {' '.join(toks)!r}")
    else:
        raise ParseError(path, None, "missing end_header")
    verts, faces = [], []
    for name, count in elements:
        for _ in range(count):
            try:
                ln, toks = next(it)
            except StopIteration:
                raise ParseError(path, None, f"truncated {name} data") from None
            if name == "vertex":
                try:
                    idx = [props["vertex"].index(c) for c in "xyz"]
                except ValueError:
                    raise ParseError(path, ln, "vertex element needs x, y, z properties") from None
                row = _floats(path, ln, toks, len(props["vertex"]))
                verts.append([row[i] for i in idx])
            elif name == "face":
                nv = dict(elements).get("vertex", 0)
                faces.append(_face(path, ln, _ints(path, ln, toks), nv))
    return _faces_to_complex(path, verts, faces)


def _pad3(V):
    return V if V.shape[1] == 3 else np.hstack([V, np.zeros((len(V), 1))])


def write_off(path, vertices, faces) -> None:
    V = _pad3(np.asarray(vertices, dtype=np.float64))
    F = np.asarray(faces)
    lines = ["OFF", f"{len(V)} {len(F)} 0"]
    lines += [" ".join(fmt(x) for x in v) for v in V]
    lines += [f"{F.shape[1]} " + " ".join(str(int(i)) for i in f) for f in F]
    atomic_write(path, "\n".join(lines) + "\n")


def write_ply(path, vertices, faces) -> None:
    V = _pad3(np.asarray(vertices, dtype=np.float64))
    F = np.asarray(faces)
    lines = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(V)}",
        "property double x",
        "property double y",
        "property double z",
        f"element face {len(F)}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    lines += [" ".join(fmt(x) for x in v) for v in V]
    lines += [f"{F.shape[1]} " + " ".join(str(int(i)) for i in f) for f in F]
    atomic_write(path, "\n".join(lines) + "\n")


def read_interior(path, n_boundary_vertices: int, dim: int):
    """(extra vertices, simplices) from an interior side file."""
    it = _tokens(path)
    ln, toks = next(it, (None, []))
    if not toks or toks[0] != "interior" or len(toks) != 4:
        raise ParseError(path, ln, "expected 'interior <n_extra> <n_simplices> <k>' header")
    n_extra, n_simp, k = _ints(path, ln, toks[1:])
    if k != dim + 1:
        raise ParseError(path, ln, f"{dim}D interior simplices need {dim + 1} vertices, header says {k}")
    extra, simp = [], []
    for _ in range(n_extra):
        ln, toks = next(it, (None, None))
        if toks is None:
            raise ParseError(path, None, f"expected {n_extra} extra vertices")
        extra.append(_floats(path, ln, toks, dim))
    for _ in range(n_simp):
        ln, toks = next(it, (None, None))
        if toks is None:
            raise ParseError(path, None, f"expected {n_simp} simplices")
        row = _ints(path, ln, toks)
        if len(row) != k:
            raise ParseError(path, ln, f"simplex has {len(row)} indices, expected {k}")
        simp.append(row)
    return np.array(extra, dtype=np.float64).reshape(-1, dim), np.array(simp, dtype=np.int64).reshape(-1, k)


def write_interior(path, extra_vertices, simplices) -> None:
    E = np.asarray(extra_vertices, dtype=np.float64)
    S = np.asarray(simplices)
    lines = [f"interior {len(E)} {len(S)} {S.shape[1]}"]
    lines += [" ".join(fmt(x) for x in v) for v in E]
    lines += [" ".join(str(int(i)) for i in s) for s in S]
    atomic_write(path, "\n".join(lines) + "\n")


def read_mesh(path):
    path = Path(path)
    ext = path.suffix.lower()
    if ext == ".off":
        return read_off(path)
    if ext == ".ply":
        return read_ply(path)
    raise ParseError(path, None, f"unknown mesh format {ext!r} (use .off or .ply)")


def load_complex(path, interior=None, check=True) -> SimplicialComplex:
    """Boundary mesh plus optional interior side file, validated unless ``check`` is False."""
    V, F = read_mesh(path)
    I = None
    if interior is not None:
        extra, I = read_interior(interior, len(V), V.shape[1])
        V = np.vstack([V, extra])
    X = SimplicialComplex(V, F, I)
    if check:
        bad = validate(X)
        if bad:
            raise GeometryError(f"{path}: invalid mesh:\n" + "\n".join(f"  {v.kind} at {v.where}: {v.message}" for v in bad))
    return X


def save_complex(X: SimplicialComplex, path, interior=None) -> None:
    """Write X's boundary (OFF or PLY by suffix) and, if given a path, its interior.

    Vertices not used by the boundary are still written with the boundary
    mesh, so the interior file carries no extra vertices.
    """
    path = Path(path)
    if path.suffix.lower() == ".ply":
        write_ply(path, X.vertices, X.boundary)
    else:
        write_off(path, X.vertices, X.boundary)
    if interior is not None:
        if not X.has_interior:
            raise GeometryError("complex has no interior to write")
        write_interior(interior, np.zeros((0, X.dim)), X.interior)


# --- scenes -----------------------------------------------------------------


def _vec(obj, key, d, where):
    v = obj.get(key)
    if not isinstance(v, list) or len(v) != d or not all(isinstance(x, (int, float)) for x in v):
        raise SceneError(f"{where}.{key}: expected a list of {d} numbers, got {v!r}")
    return np.array(v, dtype=np.float64)


def _window(obj, key, d):
    w = obj.get(key)
    if not isinstance(w, dict):
        raise SceneError(f"{key}: expected an object with lower and upper")
    try:
        return Window(_vec(w, "lower", d, key), _vec(w, "upper", d, key))
    except GeometryError as e:
        raise SceneError(f"{key}: {e}") from None


def _primitive(src, d, where):
    kind = src.get("kind")
    try:
        if kind == "plane":
            return Plane(_vec(src, "normal", d, where), float(src.get("offset", 0.0)))
        if kind == "sphere":
            return Sphere(_vec(src, "center", d, where), float(src["radius"]), bool(src.get("solid", True)))
    except (KeyError, TypeError) as e:
        raise SceneError(f"{where}: missing or bad field {e}") from None
    except GeometryError as e:
        raise SceneError(f"{where}: {e}") from None
    raise SceneError(f"{where}.kind: unknown primitive {kind!r} (plane or sphere)")


def parse_scene(path) -> GermGrainScene:
    """Read and fully validate a scene file; mesh paths are relative to it."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ParseError(path, e.lineno, f"invalid JSON: {e.msg}") from None
    if not isinstance(doc, dict):
        raise SceneError(f"{path}: top level must be an object")
    d = doc.get("dim")
    if d not in (2, 3):
        raise SceneError(f"{path}: dim must be 2 or 3, got {d!r}")
    window = _window(doc, "window", d)
    ext = _window(doc, "extended_window", d)
    objs = doc.get("objects")
    if not isinstance(objs, list):
        raise SceneError(f"{path}: objects must be a list")
    base = path.parent
    cache = {}
    observed, reference, problems = [], [], []
    for i, o in enumerate(objs):
        where = f"objects[{i}]"
        if not isinstance(o, dict):
            raise SceneError(f"{where}: expected an object")
        oid = str(o.get("id", i))
        role = o.get("role")
        if role not in ("observed", "reference"):
            raise SceneError(f"{where} ({oid!r}).role: expected 'observed' or 'reference', got {role!r}")
        t = _vec(o, "translation", d, where) if "translation" in o else np.zeros(d)
        src = o.get("source")
        if isinstance(src, dict):
            shape = _primitive(src, d, f"{where}.source")
        elif isinstance(src, str):
            key = (src, o.get("interior"))
            if key not in cache:
                try:
                    cache[key] = load_complex(base / src, base / o["interior"] if o.get("interior") else None, check=False)
                except (ParseError, GeometryError, OSError) as e:
                    raise SceneError(f"object {oid!r}: {e}") from None
                for v in validate(cache[key]):
                    problems.append(f"object {oid!r} ({src}): {v.kind} at {v.where}: {v.message}")
            shape = cache[key]
            if shape.dim != d:
                raise SceneError(f"object {oid!r}: mesh is {shape.dim}D in a {d}D scene")
        else:
            raise SceneError(f"{where} ({oid!r}).source: expected a mesh path or a primitive object")
        (observed if role == "observed" else reference).append(Germ(t, shape, oid))
    if problems:
        raise SceneError(f"{path}: {len(problems)} validation violation(s):\n" + "\n".join("  " + p for p in problems))
    seed = doc.get("seed")
    return GermGrainScene(
        tuple(observed), tuple(reference), window, ext, float(doc.get("r_max", 0.0)), seed, doc.get("meta", {})
    )


def _prim_json(s):
    if isinstance(s, Plane):
        return {"kind": "plane", "normal": s.normal.tolist(), "offset": s.offset}
    return {"kind": "sphere", "center": s.center.tolist(), "radius": s.radius, "solid": s.solid}


def write_scene(scene: GermGrainScene, path) -> None:
    """Scene JSON plus one OFF (and interior file) per distinct mesh, next to it."""
    path = Path(path)
    stem = path.stem
    meshes = {}
    objects = []
    for role, germs in (("observed", scene.observed), ("reference", scene.reference)):
        for g in germs:
            o = {"id": g.id, "role": role, "translation": g.location.tolist()}
            if isinstance(g.shape, SimplicialComplex):
                k = id(g.shape)
                if k not in meshes:
                    n = len(meshes)
                    off = f"{stem}_mesh{n}.off"
                    inner = f"{stem}_mesh{n}.interior" if g.shape.has_interior else None
                    save_complex(g.shape, path.parent / off, path.parent / inner if inner else None)
                    meshes[k] = (off, inner)
                o["source"], inner = meshes[k]
                if inner:
                    o["interior"] = inner
            else:
                o["source"] = _prim_json(g.shape)
            objects.append(o)
    doc = {
        "dim": scene.dim,
        "seed": scene.seed,
        "r_max": scene.r_max,
        "window": {"lower": scene.window.lower.tolist(), "upper": scene.window.upper.tolist()},
        "extended_window": {"lower": scene.extended_window.lower.tolist(), "upper": scene.extended_window.upper.tolist()},
        "meta": dict(scene.meta),
        "objects": objects,
    }
    atomic_write(path, json.dumps(doc, indent=1) + "\n")


# --- CSV --------------------------------------------------------------------


def format_csv(columns: dict, order=None) -> str:
    """Columns of equal length to CSV text.  Floats get 17 significant digits."""
    order = list(columns) if order is None else list(order)
    n = {len(columns[c]) for c in order}
    if len(n) > 1:
        raise ValueError("columns differ in length")
    rows = [",".join(order)]
    for i in range(n.pop() if n else 0):
        cells = []
        for c in order:
            v = columns[c][i]
            cells.append(v if isinstance(v, str) else fmt(v))
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"


def write_csv(path, columns: dict, order=None) -> None:
    atomic_write(path, format_csv(columns, order))


def read_csv(path, text_columns=("kind", "pair")) -> dict:
    """CSV back to columns: float arrays (empty cell -> NaN), strings for ``text_columns``."""
    with open(path) as f:
        lines = [(i, l.rstrip("\n")) for i, l in enumerate(f, 1) if l.strip()]
    if not lines:
        raise ParseError(path, None, "empty CSV")
    hl, first = lines[0]
    header = first.split(",")
    if len(set(header)) != len(header):
        raise ParseError(path, hl, "duplicate column names")
    cols = {h: [] for h in header}
    for ln, line in lines[1:]:
        cells = line.split(",")
        if len(cells) != len(header):
            raise ParseError(path, ln, f"expected {len(header)} cells, got {len(cells)}")
        for h, c in zip(header, cells):
            if h in text_columns:
                cols[h].append(c)
            else:
                try:
                    cols[h].append(float(c) if c != "" else math.nan)
                except ValueError:
                    raise ParseError(path, ln, f"column {h!r}: not a number: {c!r}") from None
    return {h: (v if h in text_columns else np.array(v, dtype=np.float64)) for h, v in cols.items()}
