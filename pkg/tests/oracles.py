"""Brute-force reference computations, deliberately independent of the package's kernels."""

import math

import numpy as np


def point_segment_distance(p, a, b):
    p, a, b = (np.asarray(x, dtype=float) for x in (p, a, b))
    ab = b - a
    L2 = float(ab @ ab)
    t = 0.0 if L2 == 0 else min(1.0, max(0.0, float((p - a) @ ab) / L2))
    return float(np.linalg.norm(p - (a + t * ab)))


def point_triangle_distance(p, a, b, c):
    """Project onto the plane; if the foot is inside use it, otherwise the nearest edge."""
    p, a, b, c = (np.asarray(x, dtype=float) for x in (p, a, b, c))
    n = np.cross(b - a, c - a)
    nn = float(n @ n)
    if nn > 0:
        foot = p - (float((p - a) @ n) / nn) * n
        # barycentric coordinates via sub-triangle areas
        u = float(np.cross(c - b, foot - b) @ n) / nn
        v = float(np.cross(a - c, foot - c) @ n) / nn
        w = 1.0 - u - v
        if u >= 0 and v >= 0 and w >= 0:
            return float(np.linalg.norm(p - foot))
    return min(point_segment_distance(p, a, b), point_segment_distance(p, b, c), point_segment_distance(p, c, a))


def brute_distance(points, prims):
    out = []
    for p in np.atleast_2d(points):
        best = math.inf
        for s in prims:
            d = point_segment_distance(p, *s) if len(s) == 2 else point_triangle_distance(p, *s)
            best = min(best, d)
        out.append(best)
    return np.array(out)


def winding_number(points, vertices, faces):
    """Generalized winding number of a closed oriented triangle surface (solid angle / 4 pi)."""
    P = np.atleast_2d(points)[:, None, :]
    A = vertices[faces[:, 0]][None] - P
    B = vertices[faces[:, 1]][None] - P
    C = vertices[faces[:, 2]][None] - P
    a, b, c = (np.linalg.norm(x, axis=2) for x in (A, B, C))
    det = np.einsum("ijk,ijk->ij", A, np.cross(B, C))
    den = a * b * c + np.einsum("ijk,ijk->ij", A, B) * c + np.einsum("ijk,ijk->ij", B, C) * a + np.einsum("ijk,ijk->ij", C, A) * b
    return (2 * np.arctan2(det, den)).sum(axis=1) / (4 * math.pi)


def voxel_inside_z(vertices, faces, xs, ys, zs):
    """Inside mask on the voxel lattice xs x ys x zs by counting +z ray crossings per column."""
    T = vertices[faces]
    inside = np.zeros((len(xs), len(ys), len(zs)), dtype=bool)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    q = np.stack([X.ravel(), Y.ravel()], axis=1)
    a, b, c = T[:, 0], T[:, 1], T[:, 2]
    det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1])
    ok = det != 0
    a, b, c, det = a[ok], b[ok], c[ok], det[ok]
    for k in range(0, len(q), 2048):
        Q = q[k : k + 2048]
        dx = Q[:, None, 0] - a[None, :, 0]
        dy = Q[:, None, 1] - a[None, :, 1]
        l1 = (dx * (c[:, 1] - a[:, 1]) - dy * (c[:, 0] - a[:, 0])) / det
        l2 = ((b[:, 0] - a[:, 0]) * dy - (b[:, 1] - a[:, 1]) * dx) / det
        l0 = 1 - l1 - l2
        hit = (l0 >= 0) & (l1 >= 0) & (l2 >= 0)
        zhit = l0 * a[:, 2] + l1 * b[:, 2] + l2 * c[:, 2]
        for i in range(len(Q)):
            zz = np.sort(zhit[i][hit[i]])
            cnt = len(zz) - np.searchsorted(zz, zs, side="right")
            inside.reshape(-1, len(zs))[k + i] = cnt % 2 == 1
    return inside


def voxel_mu00(vertices, faces, distance, r, pitch):
    """Volume of {inside mesh} & {distance <= r} by counting voxel centers."""
    lo, hi = vertices.min(axis=0), vertices.max(axis=0)
    axes = [np.arange(l + pitch / 2, h, pitch) for l, h in zip(lo, hi)]
    inside = voxel_inside_z(vertices, faces, *axes)
    G = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    D = distance(G.reshape(-1, 3)).reshape(inside.shape)
    r = np.atleast_1d(r)
    return np.array([np.count_nonzero(inside & (D <= x)) * pitch**3 for x in r])


def pair_count_cross_k(px, py, r, lower, upper):
    """Mean over y in the window of #x within r, by an explicit double loop."""
    ys = [y for y in py if all(l <= v <= u for v, l, u in zip(y, lower, upper))]
    total = 0
    for y in ys:
        for x in px:
            if math.dist(x, y) <= r:
                total += 1
    return total / len(ys)
