"""numba kernels; contracts match ``_np`` function for function."""

import math

import numpy as np
from numba import njit

from ._bvh import build_bvh
from ._np import KUHN_TETS, SQUARE_TRIS


@njit(cache=True)
def _argsort_small(f, m, out):
    for i in range(m):
        out[i] = i
    for i in range(1, m):
        j = i
        while j > 0 and f[out[j - 1]] > f[out[j]]:
            t = out[j - 1]
            out[j - 1] = out[j]
            out[j] = t
            j -= 1


@njit(cache=True)
def _lerp(P, a, b, fa, fb, out):
    t = fa / (fa - fb)
    for i in range(P.shape[1]):
        out[i] = P[a, i] + t * (P[b, i] - P[a, i])


@njit(cache=True)
def _tri_area3(p, q, r):
    ux, uy, uz = q[0] - p[0], q[1] - p[1], q[2] - p[2]
    vx, vy, vz = r[0] - p[0], r[1] - p[1], r[2] - p[2]
    cx = uy * vz - uz * vy
    cy = uz * vx - ux * vz
    cz = ux * vy - uy * vx
    return 0.5 * math.sqrt(cx * cx + cy * cy + cz * cz)


@njit(cache=True)
def _det3(a, b, c, o):
    ax, ay, az = a[0] - o[0], a[1] - o[1], a[2] - o[2]
    bx, by, bz = b[0] - o[0], b[1] - o[1], b[2] - o[2]
    cx, cy, cz = c[0] - o[0], c[1] - o[1], c[2] - o[2]
    return ax * (by * cz - bz * cy) - ay * (bx * cz - bz * cx) + az * (bx * cy - by * cx)


@njit(cache=True)
def _dist(a, b):
    s = 0.0
    for i in range(a.shape[0]):
        t = a[i] - b[i]
        s += t * t
    return math.sqrt(s)


@njit(cache=True)
def _clip_tet(P, f, V, o, q):
    """Returns (volume of f <= 0, area of f == 0); ``o`` (4,) and ``q`` (4, 3) are scratch."""
    _argsort_small(f, 4, o)
    k = 0
    for i in range(4):
        if f[i] <= 0.0:
            k += 1
    if k == 0:
        return 0.0, 0.0
    if k == 4:
        return V, 0.0
    a, b, c, d = o[0], o[1], o[2], o[3]
    if k == 1:
        _lerp(P, a, b, f[a], f[b], q[0])
        _lerp(P, a, c, f[a], f[c], q[1])
        _lerp(P, a, d, f[a], f[d], q[2])
        t = (f[a] / (f[a] - f[b])) * (f[a] / (f[a] - f[c])) * (f[a] / (f[a] - f[d]))
        return V * t, _tri_area3(q[0], q[1], q[2])
    if k == 3:
        _lerp(P, d, a, f[d], f[a], q[0])
        _lerp(P, d, b, f[d], f[b], q[1])
        _lerp(P, d, c, f[d], f[c], q[2])
        s = (f[d] / (f[d] - f[a])) * (f[d] / (f[d] - f[b])) * (f[d] / (f[d] - f[c]))
        return V * (1.0 - s), _tri_area3(q[0], q[1], q[2])
    # k == 2: prism (a a1 a2 | b b1 b2)
    _lerp(P, a, c, f[a], f[c], q[0])  # a1
    _lerp(P, a, d, f[a], f[d], q[1])  # a2
    _lerp(P, b, c, f[b], f[c], q[2])  # b1
    _lerp(P, b, d, f[b], f[d], q[3])  # b2
    pa = P[a]
    pb = P[b]
    v = (
        abs(_det3(q[0], q[1], q[3], pa))
        + abs(_det3(q[0], q[2], q[3], pa))
        + abs(_det3(pb, q[2], q[3], pa))
    )
    # quad a1 b1 b2 a2: half the cross product of its diagonals
    ux, uy, uz = q[3, 0] - q[0, 0], q[3, 1] - q[0, 1], q[3, 2] - q[0, 2]
    vx, vy, vz = q[2, 0] - q[1, 0], q[2, 1] - q[1, 1], q[2, 2] - q[1, 2]
    cx = uy * vz - uz * vy
    cy = uz * vx - ux * vz
    cz = ux * vy - uy * vx
    return v / 6.0, 0.5 * math.sqrt(cx * cx + cy * cy + cz * cz)


@njit(cache=True)
def _clip_tri(P, f, A, o, q):
    """Returns (area of f <= 0, length of f == 0) for a triangle in 2D or 3D."""
    _argsort_small(f, 3, o)
    k = 0
    for i in range(3):
        if f[i] <= 0.0:
            k += 1
    if k == 0:
        return 0.0, 0.0
    if k == 3:
        return A, 0.0
    a, b, c = o[0], o[1], o[2]
    if k == 1:
        _lerp(P, a, b, f[a], f[b], q[0])
        _lerp(P, a, c, f[a], f[c], q[1])
        t = (f[a] / (f[a] - f[b])) * (f[a] / (f[a] - f[c]))
        return A * t, _dist(q[0], q[1])
    _lerp(P, c, a, f[c], f[a], q[0])
    _lerp(P, c, b, f[c], f[b], q[1])
    s = (f[c] / (f[c] - f[a])) * (f[c] / (f[c] - f[b]))
    return A * (1.0 - s), _dist(q[0], q[1])


@njit(cache=True)
def _clip_seg(f, L):
    lo = min(f[0], f[1])
    hi = max(f[0], f[1])
    if lo > 0.0:
        return 0.0, 0.0
    if hi <= 0.0:
        return L, 0.0
    cnt = 1.0 if lo < 0.0 else 0.0
    return L * (lo / (lo - hi)), cnt


@njit(cache=True)
def _clip_one(P, f, meas, m, d, o, q):
    if m == 4:
        return _clip_tet(P, f, meas, o, q)
    if m == 3:
        return _clip_tri(P, f, meas, o, q)
    return _clip_seg(f, meas)


@njit(cache=True)
def _clip_curve(points, simplices, measures, values, radii):
    S, m = simplices.shape
    d = points.shape[1]
    R = radii.shape[0]
    inside = np.zeros(R)
    level = np.zeros(R)
    P = np.empty((m, d))
    v = np.empty(m)
    f = np.empty(m)
    o = np.empty(4, np.int64)
    q = np.empty((4, d))
    for s in range(S):
        vmin = np.inf
        vmax = -np.inf
        for i in range(m):
            vi = values[simplices[s, i]]
            v[i] = vi
            vmin = min(vmin, vi)
            vmax = max(vmax, vi)
            for ax in range(d):
                P[i, ax] = points[simplices[s, i], ax]
        j0 = np.searchsorted(radii, vmin)
        j1 = np.searchsorted(radii, vmax)
        for j in range(j0, min(j1, R)):
            r = radii[j]
            for i in range(m):
                f[i] = v[i] - r
            a, b = _clip_one(P, f, measures[s], m, d, o, q)
            inside[j] += a
            level[j] += b
        for j in range(j1, R):
            inside[j] += measures[s]
    return inside, level


def clip_curve(points, simplices, measures, values, radii):
    if len(simplices) == 0 or len(radii) == 0:
        return np.zeros(len(radii)), np.zeros(len(radii))
    return _clip_curve(
        np.ascontiguousarray(points, dtype=np.float64),
        np.ascontiguousarray(simplices, dtype=np.int64),
        np.ascontiguousarray(measures, dtype=np.float64),
        np.ascontiguousarray(values, dtype=np.float64),
        np.ascontiguousarray(radii, dtype=np.float64),
    )


@njit(cache=True)
def _grid_clip_3d(values, spacing, radii, table):
    nx, ny, nz = values.shape
    R = radii.shape[0]
    hx, hy, hz = spacing[0], spacing[1], spacing[2]
    cell_vol = hx * hy * hz
    simp_vol = cell_vol / table.shape[0]
    corners = np.empty((8, 3))
    for b in range(8):
        corners[b, 0] = (b & 1) * hx
        corners[b, 1] = ((b >> 1) & 1) * hy
        corners[b, 2] = ((b >> 2) & 1) * hz
    full_count = np.zeros(R + 1, np.int64)
    inside = np.zeros(R)
    level = np.zeros(R)
    c = np.empty(8)
    P = np.empty((4, 3))
    f = np.empty(4)
    o = np.empty(4, np.int64)
    q = np.empty((4, 3))
    rlast = radii[R - 1]
    for i in range(nx - 1):
        for j in range(ny - 1):
            for k in range(nz - 1):
                cmin = np.inf
                cmax = -np.inf
                for b in range(8):
                    v = values[i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1)]
                    c[b] = v
                    cmin = min(cmin, v)
                    cmax = max(cmax, v)
                if cmin > rlast:
                    full_count[R] += 1
                    continue
                j0 = np.searchsorted(radii, cmin)
                j1 = np.searchsorted(radii, cmax)
                full_count[j1] += 1
                for jr in range(j0, j1):
                    r = radii[jr]
                    acc_in = 0.0
                    acc_lv = 0.0
                    for t in range(table.shape[0]):
                        for vtx in range(4):
                            cb = table[t, vtx]
                            f[vtx] = c[cb] - r
                            P[vtx, 0] = corners[cb, 0]
                            P[vtx, 1] = corners[cb, 1]
                            P[vtx, 2] = corners[cb, 2]
                        a, bb = _clip_tet(P, f, simp_vol, o, q)
                        acc_in += a
                        acc_lv += bb
                    inside[jr] += acc_in
                    level[jr] += acc_lv
    full = np.cumsum(full_count)[:R]
    return full * cell_vol + inside, level


@njit(cache=True)
def _grid_clip_2d(values, spacing, radii, table):
    nx, ny = values.shape
    R = radii.shape[0]
    hx, hy = spacing[0], spacing[1]
    cell_vol = hx * hy
    simp_vol = cell_vol / table.shape[0]
    corners = np.empty((4, 2))
    for b in range(4):
        corners[b, 0] = (b & 1) * hx
        corners[b, 1] = ((b >> 1) & 1) * hy
    full_count = np.zeros(R + 1, np.int64)
    inside = np.zeros(R)
    level = np.zeros(R)
    c = np.empty(4)
    P = np.empty((3, 2))
    f = np.empty(3)
    o = np.empty(4, np.int64)
    q = np.empty((4, 2))
    rlast = radii[R - 1]
    for i in range(nx - 1):
        for j in range(ny - 1):
            cmin = np.inf
            cmax = -np.inf
            for b in range(4):
                v = values[i + (b & 1), j + ((b >> 1) & 1)]
                c[b] = v
                cmin = min(cmin, v)
                cmax = max(cmax, v)
            if cmin > rlast:
                full_count[R] += 1
                continue
            j0 = np.searchsorted(radii, cmin)
            j1 = np.searchsorted(radii, cmax)
            full_count[j1] += 1
            for jr in range(j0, j1):
                r = radii[jr]
                acc_in = 0.0
                acc_lv = 0.0
                for t in range(table.shape[0]):
                    for vtx in range(3):
                        cb = table[t, vtx]
                        f[vtx] = c[cb] - r
                        P[vtx, 0] = corners[cb, 0]
                        P[vtx, 1] = corners[cb, 1]
                    a, bb = _clip_tri(P, f, simp_vol, o, q)
                    acc_in += a
                    acc_lv += bb
                inside[jr] += acc_in
                level[jr] += acc_lv
    full = np.cumsum(full_count)[:R]
    return full * cell_vol + inside, level


def grid_clip_curve(values, spacing, radii):
    values = np.ascontiguousarray(values, dtype=np.float64)
    spacing = np.ascontiguousarray(spacing, dtype=np.float64)
    radii = np.ascontiguousarray(radii, dtype=np.float64)
    if len(radii) == 0:
        return np.zeros(0), np.zeros(0)
    if values.ndim == 3:
        return _grid_clip_3d(values, spacing, radii, KUHN_TETS)
    return _grid_clip_2d(values, spacing, radii, SQUARE_TRIS)


@njit(cache=True)
def _point_tri_dist2(p, prim):
    a = prim[0]
    b = prim[1]
    c = prim[2]
    abx, aby, abz = b[0] - a[0], b[1] - a[1], b[2] - a[2]
    acx, acy, acz = c[0] - a[0], c[1] - a[1], c[2] - a[2]
    apx, apy, apz = p[0] - a[0], p[1] - a[1], p[2] - a[2]
    d1 = abx * apx + aby * apy + abz * apz
    d2 = acx * apx + acy * apy + acz * apz
    if d1 <= 0.0 and d2 <= 0.0:
        qx, qy, qz = a[0], a[1], a[2]
    else:
        bpx, bpy, bpz = p[0] - b[0], p[1] - b[1], p[2] - b[2]
        d3 = abx * bpx + aby * bpy + abz * bpz
        d4 = acx * bpx + acy * bpy + acz * bpz
        vc = d1 * d4 - d3 * d2
        cpx, cpy, cpz = p[0] - c[0], p[1] - c[1], p[2] - c[2]
        d5 = abx * cpx + aby * cpy + abz * cpz
        d6 = acx * cpx + acy * cpy + acz * cpz
        vb = d5 * d2 - d1 * d6
        va = d3 * d6 - d5 * d4
        if d3 >= 0.0 and d4 <= d3:
            qx, qy, qz = b[0], b[1], b[2]
        elif vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
            v = d1 / (d1 - d3)
            qx, qy, qz = a[0] + v * abx, a[1] + v * aby, a[2] + v * abz
        elif d6 >= 0.0 and d5 <= d6:
            qx, qy, qz = c[0], c[1], c[2]
        elif vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
            w = d2 / (d2 - d6)
            qx, qy, qz = a[0] + w * acx, a[1] + w * acy, a[2] + w * acz
        elif va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
            w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
            qx = b[0] + w * (c[0] - b[0])
            qy = b[1] + w * (c[1] - b[1])
            qz = b[2] + w * (c[2] - b[2])
        else:
            denom = 1.0 / (va + vb + vc)
            v = vb * denom
            w = vc * denom
            qx = a[0] + abx * v + acx * w
            qy = a[1] + aby * v + acy * w
            qz = a[2] + abz * v + acz * w
    dx, dy, dz = p[0] - qx, p[1] - qy, p[2] - qz
    return dx * dx + dy * dy + dz * dz


@njit(cache=True)
def _point_seg_dist2(p, prim):
    d = p.shape[0]
    den = 0.0
    num = 0.0
    for i in range(d):
        e = prim[1, i] - prim[0, i]
        den += e * e
        num += (p[i] - prim[0, i]) * e
    t = 0.0
    if den > 0.0:
        t = min(max(num / den, 0.0), 1.0)
    s = 0.0
    for i in range(d):
        diff = p[i] - (prim[0, i] + t * (prim[1, i] - prim[0, i]))
        s += diff * diff
    return s


@njit(cache=True)
def _box_dist2(p, lo, hi):
    s = 0.0
    for i in range(p.shape[0]):
        g = max(lo[i] - p[i], p[i] - hi[i], 0.0)
        s += g * g
    return s


@njit(cache=True)
def _bvh_query(p, prims, lo, hi, left, right, start, count, order, best, stack):
    m = prims.shape[1]
    found = np.inf
    sp = 0
    stack[sp] = 0
    sp += 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if _box_dist2(p, lo[node], hi[node]) > best:
            continue
        if count[node] > 0:
            for t in range(start[node], start[node] + count[node]):
                prim = prims[order[t]]
                if m == 3:
                    dd = _point_tri_dist2(p, prim)
                else:
                    dd = _point_seg_dist2(p, prim)
                if dd < found:
                    found = dd
                if dd < best:
                    best = dd
        else:
            l_ = left[node]
            r_ = right[node]
            dl = _box_dist2(p, lo[l_], hi[l_])
            dr = _box_dist2(p, lo[r_], hi[r_])
            # push the farther child first so the nearer one is popped next
            if dl <= dr:
                stack[sp] = r_
                stack[sp + 1] = l_
            else:
                stack[sp] = l_
                stack[sp + 1] = r_
            sp += 2
    return found


@njit(cache=True)
def _bvh_distance(points, prims, lo, hi, left, right, start, count, order, eps):
    P = points.shape[0]
    d = points.shape[1]
    out = np.empty(P)
    stack = np.empty(256, np.int64)
    prev_d = np.inf
    for n in range(P):
        p = points[n]
        best = np.inf
        # 1-Lipschitz bound from the previous query seeds the pruning radius
        if n > 0 and prev_d < np.inf:
            step = 0.0
            for i in range(d):
                t = p[i] - points[n - 1, i]
                step += t * t
            ub = prev_d + math.sqrt(step) + eps
            best = ub * ub
        found = _bvh_query(p, prims, lo, hi, left, right, start, count, order, best, stack)
        if found == np.inf:
            found = _bvh_query(p, prims, lo, hi, left, right, start, count, order, np.inf, stack)
        out[n] = math.sqrt(found)
        prev_d = out[n]
    return out


def simplex_distance(points, prims):
    points = np.ascontiguousarray(points, dtype=np.float64)
    prims = np.ascontiguousarray(prims, dtype=np.float64)
    lo, hi, left, right, start, count, order = build_bvh(prims)
    scale = float(np.max(hi[0] - lo[0])) if len(lo) else 1.0
    eps = 1e-9 * max(scale, 1e-300)
    return _bvh_distance(points, prims, lo, hi, left, right, start, count, order, eps)


@njit(cache=True)
def _row_hits_3d(prims, rows, fill, offsets, xs):
    Q = rows.shape[0]
    T = prims.shape[0]
    counts = np.zeros(Q, np.int64)
    for q in range(Q):
        y0 = rows[q, 0]
        z0 = rows[q, 1]
        c = 0
        for t in range(T):
            ya = prims[t, 0, 1] - y0
            yb = prims[t, 1, 1] - y0
            yc = prims[t, 2, 1] - y0
            if (ya > 0 and yb > 0 and yc > 0) or (ya < 0 and yb < 0 and yc < 0):
                continue
            za = prims[t, 0, 2] - z0
            zb = prims[t, 1, 2] - z0
            zc = prims[t, 2, 2] - z0
            if (za > 0 and zb > 0 and zc > 0) or (za < 0 and zb < 0 and zc < 0):
                continue
            w0 = yb * zc - yc * zb
            w1 = yc * za - ya * zc
            w2 = ya * zb - yb * za
            if (w0 > 0 and w1 > 0 and w2 > 0) or (w0 < 0 and w1 < 0 and w2 < 0):
                if fill:
                    xs[offsets[q] + c] = (
                        w0 * prims[t, 0, 0] + w1 * prims[t, 1, 0] + w2 * prims[t, 2, 0]
                    ) / (w0 + w1 + w2)
                c += 1
        counts[q] = c
        if fill:
            xs[offsets[q] : offsets[q] + c] = np.sort(xs[offsets[q] : offsets[q] + c])
    return counts


@njit(cache=True)
def _row_hits_2d(prims, rows, fill, offsets, xs):
    Q = rows.shape[0]
    T = prims.shape[0]
    counts = np.zeros(Q, np.int64)
    for q in range(Q):
        y0 = rows[q, 0]
        c = 0
        for t in range(T):
            ya = prims[t, 0, 1] - y0
            yb = prims[t, 1, 1] - y0
            if ya * yb < 0:
                if fill:
                    s = ya / (ya - yb)
                    xs[offsets[q] + c] = prims[t, 0, 0] + s * (prims[t, 1, 0] - prims[t, 0, 0])
                c += 1
        counts[q] = c
        if fill:
            xs[offsets[q] : offsets[q] + c] = np.sort(xs[offsets[q] : offsets[q] + c])
    return counts


def row_crossings(prims, rows):
    prims = np.ascontiguousarray(prims, dtype=np.float64)
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    fn = _row_hits_3d if prims.shape[1] == 3 else _row_hits_2d
    Q = len(rows)
    offsets = np.zeros(Q + 1, dtype=np.int64)
    counts = fn(prims, rows, False, offsets, np.zeros(0))
    np.cumsum(counts, out=offsets[1:])
    xs = np.empty(int(offsets[-1]))
    fn(prims, rows, True, offsets, xs)
    return offsets, xs


@njit(cache=True)
def _interp_3d(values, origin, spacing, points):
    n = points.shape[0]
    out = np.empty(n)
    nx, ny, nz = values.shape
    for p in range(n):
        u = (points[p, 0] - origin[0]) / spacing[0]
        v = (points[p, 1] - origin[1]) / spacing[1]
        w = (points[p, 2] - origin[2]) / spacing[2]
        i = min(max(int(math.floor(u)), 0), nx - 2)
        j = min(max(int(math.floor(v)), 0), ny - 2)
        k = min(max(int(math.floor(w)), 0), nz - 2)
        tu, tv, tw = u - i, v - j, w - k
        acc = 0.0
        for b in range(8):
            bx, by, bz = b & 1, (b >> 1) & 1, (b >> 2) & 1
            wt = (tu if bx else 1.0 - tu) * (tv if by else 1.0 - tv) * (tw if bz else 1.0 - tw)
            acc += wt * values[i + bx, j + by, k + bz]
        out[p] = acc
    return out


@njit(cache=True)
def _interp_2d(values, origin, spacing, points):
    n = points.shape[0]
    out = np.empty(n)
    nx, ny = values.shape
    for p in range(n):
        u = (points[p, 0] - origin[0]) / spacing[0]
        v = (points[p, 1] - origin[1]) / spacing[1]
        i = min(max(int(math.floor(u)), 0), nx - 2)
        j = min(max(int(math.floor(v)), 0), ny - 2)
        tu, tv = u - i, v - j
        acc = 0.0
        for b in range(4):
            bx, by = b & 1, (b >> 1) & 1
            wt = (tu if bx else 1.0 - tu) * (tv if by else 1.0 - tv)
            acc += wt * values[i + bx, j + by]
        out[p] = acc
    return out


def interpolate(values, origin, spacing, points):
    values = np.ascontiguousarray(values, dtype=np.float64)
    origin = np.ascontiguousarray(origin, dtype=np.float64)
    spacing = np.ascontiguousarray(spacing, dtype=np.float64)
    points = np.ascontiguousarray(points, dtype=np.float64)
    if values.ndim == 3:
        return _interp_3d(values, origin, spacing, points)
    return _interp_2d(values, origin, spacing, points)
