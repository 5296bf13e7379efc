"""Vectorized numpy kernels (fallback backend).

Every function here has a twin in ``_nb`` with an identical signature and
contract; results agree to floating point roundoff.
"""

import numpy as np

# Kuhn split of the unit cube (corner bit b = dx | dy << 1 | dz << 2) into
# six tetrahedra sharing the 0-7 diagonal; conforming across cells.
KUHN_TETS = np.array(
    [
        [0, 1, 3, 7],
        [0, 1, 5, 7],
        [0, 2, 3, 7],
        [0, 2, 6, 7],
        [0, 4, 5, 7],
        [0, 4, 6, 7],
    ],
    dtype=np.int64,
)
# Unit square (corner bit b = dx | dy << 1) split into two triangles.
SQUARE_TRIS = np.array([[0, 1, 3], [0, 2, 3]], dtype=np.int64)

_SLAB_CELLS = 1 << 17
_POINT_CHUNK = 256
_ROW_CHUNK = 256


def _ragged_pairs(start, stop):
    """Expand per-item ranges [start, stop) into flat (item, index) pairs."""
    counts = np.maximum(stop - start, 0)
    total = int(counts.sum())
    item = np.repeat(np.arange(len(start), dtype=np.int64), counts)
    first = np.cumsum(counts) - counts
    idx = np.arange(total, dtype=np.int64) - np.repeat(first, counts) + np.repeat(start, counts)
    return item, idx


def _lerp(pa, pb, fa, fb):
    t = fa / (fa - fb)
    return pa + t[:, None] * (pb - pa)


def _norm(v):
    return np.sqrt(np.einsum("ij,ij->i", v, v))


def _cross_norm(u, v):
    return _norm(np.cross(u, v))


def _det3(a, b, c):
    return np.einsum("ij,ij->i", a, np.cross(b, c))


def _sorted_by_value(P, F):
    order = np.argsort(F, axis=1, kind="stable")
    Fs = np.take_along_axis(F, order, axis=1)
    Ps = np.take_along_axis(P, order[:, :, None], axis=1)
    return Ps, Fs


def clip_tets(P, F, V):
    """Volume of {f <= 0} and area of {f == 0} inside tetrahedra.

    ``P`` is (n, 4, 3), ``F`` (n, 4) holds the affine field at the vertices,
    ``V`` (n,) the full volumes.
    """
    n = len(F)
    vol = np.zeros(n)
    area = np.zeros(n)
    if n == 0:
        return vol, area
    P, F = _sorted_by_value(P, F)
    k = (F <= 0.0).sum(axis=1)
    vol[k == 4] = V[k == 4]

    m = k == 1
    if m.any():
        p, f = P[m], F[m]
        q = [_lerp(p[:, 0], p[:, i], f[:, 0], f[:, i]) for i in (1, 2, 3)]
        t = [f[:, 0] / (f[:, 0] - f[:, i]) for i in (1, 2, 3)]
        vol[m] = V[m] * t[0] * t[1] * t[2]
        area[m] = 0.5 * _cross_norm(q[1] - q[0], q[2] - q[0])

    m = k == 3
    if m.any():
        p, f = P[m], F[m]
        q = [_lerp(p[:, 3], p[:, i], f[:, 3], f[:, i]) for i in (0, 1, 2)]
        s = [f[:, 3] / (f[:, 3] - f[:, i]) for i in (0, 1, 2)]
        vol[m] = V[m] * (1.0 - s[0] * s[1] * s[2])
        area[m] = 0.5 * _cross_norm(q[1] - q[0], q[2] - q[0])

    m = k == 2
    if m.any():
        p, f = P[m], F[m]
        a0, b0 = p[:, 0], p[:, 1]
        a1 = _lerp(p[:, 0], p[:, 2], f[:, 0], f[:, 2])
        a2 = _lerp(p[:, 0], p[:, 3], f[:, 0], f[:, 3])
        b1 = _lerp(p[:, 1], p[:, 2], f[:, 1], f[:, 2])
        b2 = _lerp(p[:, 1], p[:, 3], f[:, 1], f[:, 3])
        # prism (a0 a1 a2 | b0 b1 b2) as three tetrahedra
        v = (
            np.abs(_det3(a1 - a0, a2 - a0, b2 - a0))
            + np.abs(_det3(a1 - a0, b1 - a0, b2 - a0))
            + np.abs(_det3(b0 - a0, b1 - a0, b2 - a0))
        )
        vol[m] = v / 6.0
        area[m] = 0.5 * _cross_norm(b2 - a1, b1 - a2)
    return vol, area


def clip_tris(P, F, A):
    """Area of {f <= 0} and length of {f == 0} inside triangles (2D or 3D)."""
    n = len(F)
    area = np.zeros(n)
    length = np.zeros(n)
    if n == 0:
        return area, length
    P, F = _sorted_by_value(P, F)
    k = (F <= 0.0).sum(axis=1)
    area[k == 3] = A[k == 3]

    m = k == 1
    if m.any():
        p, f = P[m], F[m]
        t1 = f[:, 0] / (f[:, 0] - f[:, 1])
        t2 = f[:, 0] / (f[:, 0] - f[:, 2])
        q1 = p[:, 0] + t1[:, None] * (p[:, 1] - p[:, 0])
        q2 = p[:, 0] + t2[:, None] * (p[:, 2] - p[:, 0])
        area[m] = A[m] * t1 * t2
        length[m] = _norm(q1 - q2)

    m = k == 2
    if m.any():
        p, f = P[m], F[m]
        s0 = f[:, 2] / (f[:, 2] - f[:, 0])
        s1 = f[:, 2] / (f[:, 2] - f[:, 1])
        q0 = p[:, 2] + s0[:, None] * (p[:, 0] - p[:, 2])
        q1 = p[:, 2] + s1[:, None] * (p[:, 1] - p[:, 2])
        area[m] = A[m] * (1.0 - s0 * s1)
        length[m] = _norm(q0 - q1)
    return area, length


def clip_segs(F, L):
    """Length of {f <= 0} on segments and count of strict sign changes."""
    n = len(F)
    length = np.zeros(n)
    count = np.zeros(n)
    if n == 0:
        return length, count
    F = np.sort(F, axis=1)
    k = (F <= 0.0).sum(axis=1)
    length[k == 2] = L[k == 2]
    m = k == 1
    f0, f1 = F[m, 0], F[m, 1]
    length[m] = L[m] * (f0 / (f0 - f1))
    count[m] = (f0 < 0.0).astype(float)
    return length, count


def _clip_dispatch(P, F, meas):
    n, m = F.shape
    d = P.shape[2]
    if m == 4:
        return clip_tets(P, F, meas)
    if m == 3:
        return clip_tris(P, F, meas)
    if m == 2 and d == 2:
        return clip_segs(F, meas)
    raise ValueError(f"unsupported simplex shape: {m} vertices in {d}D")


def clip_curve(points, simplices, measures, values, radii):
    """Sublevel measure and level-set measure of ``values`` over a complex.

    For each radius r the vertex field f = values - r is extended affinely
    over every simplex.  Returns two arrays of length ``len(radii)``: the
    measure of {f <= 0} and the measure of {f == 0} (for 2D segments the
    latter counts strict sign changes).  Sums are accumulated per radius in
    simplex order.

    Ties: vertices with f == 0 are inside.  A face lying on {f == 0} is
    counted only by the simplex whose remaining vertex has f > 0, so a face
    shared by simplices on both sides is counted once.
    """
    points = np.asarray(points, dtype=np.float64)
    simplices = np.asarray(simplices, dtype=np.int64)
    measures = np.asarray(measures, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64)
    R = len(radii)
    if len(simplices) == 0 or R == 0:
        return np.zeros(R), np.zeros(R)
    vals = values[simplices]
    j0 = np.searchsorted(radii, vals.min(axis=1), side="left")
    j1 = np.searchsorted(radii, vals.max(axis=1), side="left")
    s_idx, j_idx = _ragged_pairs(j0, np.full(len(j0), R))
    full = j_idx >= j1[s_idx]
    inside_c = np.zeros(len(s_idx))
    level_c = np.zeros(len(s_idx))
    inside_c[full] = measures[s_idx[full]]
    part = ~full
    if part.any():
        sp = s_idx[part]
        F = vals[sp] - radii[j_idx[part]][:, None]
        P = points[simplices[sp]]
        inside_c[part], level_c[part] = _clip_dispatch(P, F, measures[sp])
    inside = np.bincount(j_idx, weights=inside_c, minlength=R)
    level = np.bincount(j_idx, weights=level_c, minlength=R)
    return inside, level


def _cell_corners(values, lo, hi):
    """Corner values (ncell, 2**d) of cells whose axis-0 index is in [lo, hi)."""
    d = values.ndim
    shape = [n - 1 for n in values.shape]
    shape[0] = hi - lo
    out = np.empty((int(np.prod(shape)), 1 << d))
    for b in range(1 << d):
        off = [(b >> ax) & 1 for ax in range(d)]
        sl = [slice(lo + off[0], hi + off[0])]
        sl += [slice(off[ax], values.shape[ax] - 1 + off[ax]) for ax in range(1, d)]
        out[:, b] = values[tuple(sl)].reshape(-1)
    return out


def _local_simplices(spacing):
    d = len(spacing)
    table = KUHN_TETS if d == 3 else SQUARE_TRIS
    corners = np.array([[(b >> ax) & 1 for ax in range(d)] for b in range(1 << d)], dtype=np.float64)
    corners *= np.asarray(spacing, dtype=np.float64)
    return table, corners[table]


def grid_clip_curve(values, spacing, radii):
    """Sublevel volume and level-set measure of the multilinear-on-simplices grid field.

    Each grid cell is split into d-simplices (Kuhn split in 3D, two
    triangles in 2D); the node values are extended affinely on each
    simplex.  Returns (measure of {v <= r}, measure of {v == r}) per radius.
    """
    values = np.asarray(values, dtype=np.float64)
    spacing = np.asarray(spacing, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64)
    d = values.ndim
    R = len(radii)
    cell_vol = float(np.prod(spacing))
    table, local = _local_simplices(spacing)
    n_simp = len(table)
    simp_vol = np.full(1, cell_vol / n_simp)
    full_count = np.zeros(R + 1, dtype=np.int64)
    inside = np.zeros(R)
    level = np.zeros(R)
    ncells_row = int(np.prod([n - 1 for n in values.shape[1:]]))
    step = max(1, _SLAB_CELLS // max(ncells_row, 1))
    for lo in range(0, values.shape[0] - 1, step):
        hi = min(lo + step, values.shape[0] - 1)
        c = _cell_corners(values, lo, hi)
        j0 = np.searchsorted(radii, c.min(axis=1), side="left")
        j1 = np.searchsorted(radii, c.max(axis=1), side="left")
        full_count += np.bincount(j1, minlength=R + 1)
        cell, j = _ragged_pairs(j0, j1)
        if len(cell) == 0:
            continue
        F = c[cell][:, table] - radii[j][:, None, None]
        F = F.reshape(-1, d + 1)
        P = np.broadcast_to(local, (len(cell),) + local.shape).reshape(-1, d + 1, d)
        meas = np.broadcast_to(simp_vol, (len(F),))
        a, b = _clip_dispatch(P, F, meas)
        inside += np.bincount(j, weights=a.reshape(-1, n_simp).sum(axis=1), minlength=R)
        level += np.bincount(j, weights=b.reshape(-1, n_simp).sum(axis=1), minlength=R)
    full = np.cumsum(full_count)[:R]
    return full * cell_vol + inside, level


def _point_tri_dist2(p, a, b, c):
    ab, ac, ap = b - a, c - a, p - a
    d1 = np.einsum("...i,...i->...", ab, ap)
    d2 = np.einsum("...i,...i->...", ac, ap)
    bp = p - b
    d3 = np.einsum("...i,...i->...", ab, bp)
    d4 = np.einsum("...i,...i->...", ac, bp)
    cp = p - c
    d5 = np.einsum("...i,...i->...", ab, cp)
    d6 = np.einsum("...i,...i->...", ac, cp)
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4
    with np.errstate(divide="ignore", invalid="ignore"):
        v_ab = d1 / (d1 - d3)
        w_ac = d2 / (d2 - d6)
        w_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        denom = 1.0 / (va + vb + vc)
        v_f = vb * denom
        w_f = vc * denom
    conds = [
        (d1 <= 0) & (d2 <= 0),
        (d3 >= 0) & (d4 <= d3),
        (vc <= 0) & (d1 >= 0) & (d3 <= 0),
        (d6 >= 0) & (d5 <= d6),
        (vb <= 0) & (d2 >= 0) & (d6 <= 0),
        (va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0),
    ]
    q = np.where(conds[0][..., None], a, 0.0)
    taken = conds[0].copy()
    cands = [
        np.broadcast_to(b, q.shape),
        a + v_ab[..., None] * ab,
        np.broadcast_to(c, q.shape),
        a + w_ac[..., None] * ac,
        b + w_bc[..., None] * (c - b),
    ]
    for cond, cand in zip(conds[1:], cands):
        use = cond & ~taken
        q = np.where(use[..., None], cand, q)
        taken |= use
    face = a + v_f[..., None] * ab + w_f[..., None] * ac
    q = np.where(taken[..., None], q, face)
    diff = p - q
    return np.einsum("...i,...i->...", diff, diff)


def _point_seg_dist2(p, a, b):
    ab = b - a
    den = np.einsum("...i,...i->...", ab, ab)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.einsum("...i,...i->...", p - a, ab) / den
    t = np.where(den > 0, np.clip(t, 0.0, 1.0), 0.0)
    diff = p - (a + t[..., None] * ab)
    return np.einsum("...i,...i->...", diff, diff)


def simplex_distance(points, prims):
    """Exact Euclidean distance from each point to the nearest primitive.

    ``prims`` is (T, m, d): segments (m=2) in 2D or triangles (m=3) in 3D.
    Points are processed in chunks; primitives are pruned per chunk by
    box-to-box lower/upper bounds before the brute force pass.
    """
    points = np.asarray(points, dtype=np.float64)
    prims = np.asarray(prims, dtype=np.float64)
    out = np.empty(len(points))
    plo = prims.min(axis=1)
    phi = prims.max(axis=1)
    m = prims.shape[1]
    for s in range(0, len(points), _POINT_CHUNK):
        chunk = points[s : s + _POINT_CHUNK]
        lo, hi = chunk.min(axis=0), chunk.max(axis=0)
        gap = np.maximum(np.maximum(plo - hi, lo - phi), 0.0)
        lb2 = (gap * gap).sum(axis=1)
        far = np.maximum(np.abs(phi - lo), np.abs(hi - plo))
        ub2 = (far * far).sum(axis=1).min()
        cand = prims[lb2 <= ub2]
        p = chunk[:, None, :]
        if m == 3:
            d2 = _point_tri_dist2(p, cand[None, :, 0], cand[None, :, 1], cand[None, :, 2])
        else:
            d2 = _point_seg_dist2(p, cand[None, :, 0], cand[None, :, 1])
        out[s : s + len(chunk)] = np.sqrt(d2.min(axis=1))
    return out


def row_crossings(prims, rows):
    """Crossings of axis-0 lines with a closed boundary mesh.

    ``rows`` is (Q, d-1): the remaining coordinates of each line.  Returns
    CSR ``(offsets, xs)`` with the crossing abscissae of row q sorted in
    ``xs[offsets[q]:offsets[q+1]]``.  Grazing contacts (zero projected
    area, or a row exactly on a segment endpoint level) are not counted;
    callers perturb rows to keep them generic.
    """
    prims = np.asarray(prims, dtype=np.float64)
    rows = np.asarray(rows, dtype=np.float64)
    Q = len(rows)
    row_ids, xs = [], []
    for s in range(0, Q, _ROW_CHUNK):
        r = rows[s : s + _ROW_CHUNK]
        if prims.shape[1] == 3:
            y = prims[None, :, :, 1] - r[:, None, None, 0]
            z = prims[None, :, :, 2] - r[:, None, None, 1]
            w0 = y[..., 1] * z[..., 2] - y[..., 2] * z[..., 1]
            w1 = y[..., 2] * z[..., 0] - y[..., 0] * z[..., 2]
            w2 = y[..., 0] * z[..., 1] - y[..., 1] * z[..., 0]
            hit = ((w0 > 0) & (w1 > 0) & (w2 > 0)) | ((w0 < 0) & (w1 < 0) & (w2 < 0))
            qi, ti = np.nonzero(hit)
            ws = w0[qi, ti] + w1[qi, ti] + w2[qi, ti]
            px = prims[ti, :, 0]
            x = (w0[qi, ti] * px[:, 0] + w1[qi, ti] * px[:, 1] + w2[qi, ti] * px[:, 2]) / ws
        else:
            ya = prims[None, :, 0, 1] - r[:, None, 0]
            yb = prims[None, :, 1, 1] - r[:, None, 0]
            hit = ya * yb < 0
            qi, ti = np.nonzero(hit)
            xa, xb = prims[ti, 0, 0], prims[ti, 1, 0]
            t = ya[qi, ti] / (ya[qi, ti] - yb[qi, ti])
            x = xa + t * (xb - xa)
        row_ids.append(qi + s)
        xs.append(x)
    row_ids = np.concatenate(row_ids) if row_ids else np.zeros(0, dtype=np.int64)
    xs = np.concatenate(xs) if xs else np.zeros(0)
    order = np.lexsort((xs, row_ids))
    offsets = np.zeros(Q + 1, dtype=np.int64)
    np.cumsum(np.bincount(row_ids, minlength=Q), out=offsets[1:])
    return offsets, xs[order]


def interpolate(values, origin, spacing, points):
    """Multilinear interpolation of grid ``values`` at ``points`` (no bounds check)."""
    values = np.asarray(values, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    d = values.ndim
    u = (points - np.asarray(origin)) / np.asarray(spacing)
    hi = np.array(values.shape) - 2
    i = np.clip(np.floor(u).astype(np.int64), 0, hi)
    t = u - i
    out = np.zeros(len(points))
    for b in range(1 << d):
        w = np.ones(len(points))
        idx = []
        for ax in range(d):
            bit = (b >> ax) & 1
            w = w * (t[:, ax] if bit else 1.0 - t[:, ax])
            idx.append(i[:, ax] + bit)
        out += w * values[tuple(idx)]
    return out
