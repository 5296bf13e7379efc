import numpy as np

LEAF_SIZE = 4


def build_bvh(prims):
    """Median-split bounding volume hierarchy over primitives (T, m, d).

    Returns flat arrays ``(lo, hi, left, right, start, count, order)``.
    Internal nodes have ``count == 0`` and two children; leaves cover
    ``order[start:start + count]``.
    """
    prims = np.asarray(prims, dtype=np.float64)
    T = len(prims)
    plo = prims.min(axis=1)
    phi = prims.max(axis=1)
    cent = 0.5 * (plo + phi)
    order = np.arange(T, dtype=np.int64)

    lo, hi, left, right, start, count = [], [], [], [], [], []

    def new_node(s, e):
        idx = order[s:e]
        lo.append(plo[idx].min(axis=0))
        hi.append(phi[idx].max(axis=0))
        left.append(-1)
        right.append(-1)
        start.append(s)
        count.append(e - s)
        return len(lo) - 1

    if T == 0:
        d = prims.shape[2] if prims.ndim == 3 else 3
        z = np.zeros((0, d))
        e = np.zeros(0, dtype=np.int64)
        return z, z, e, e, e, e, order

    stack = [(new_node(0, T), 0, T)]
    while stack:
        node, s, e = stack.pop()
        if e - s <= LEAF_SIZE:
            continue
        idx = order[s:e]
        c = cent[idx]
        axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
        mid = (e - s) // 2
        part = np.argpartition(c[:, axis], mid, kind="introselect")
        order[s:e] = idx[part]
        ln = new_node(s, s + mid)
        rn = new_node(s + mid, e)
        left[node], right[node] = ln, rn
        count[node] = 0
        stack.append((ln, s, s + mid))
        stack.append((rn, s + mid, e))

    return (
        np.array(lo),
        np.array(hi),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(start, dtype=np.int64),
        np.array(count, dtype=np.int64),
        order,
    )
