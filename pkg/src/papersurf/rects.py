"""Axis-aligned rectangle kernels. A rectangle is a row (x0, x1, y0, y1)."""

from __future__ import annotations

import numpy as np


def as_rects(rects) -> np.ndarray:
    r = np.asarray(rects, dtype=float).reshape(-1, 4)
    return r[(r[:, 1] > r[:, 0]) & (r[:, 3] > r[:, 2])]


def clip(rects, box) -> np.ndarray:
    r = np.asarray(rects, dtype=float).reshape(-1, 4).copy()
    x0, x1, y0, y1 = box
    r[:, 0] = np.maximum(r[:, 0], x0)
    r[:, 1] = np.minimum(r[:, 1], x1)
    r[:, 2] = np.maximum(r[:, 2], y0)
    r[:, 3] = np.minimum(r[:, 3], y1)
    return as_rects(r)


def prune_dominated(rects) -> np.ndarray:
    """Drop rectangles contained in another one (keeps one of equal copies)."""
    r = as_rects(rects)
    if len(r) < 2:
        return r
    order = np.argsort(-(r[:, 1] - r[:, 0]) * (r[:, 3] - r[:, 2]), kind="stable")
    r = r[order]
    keep = []
    kept = np.zeros((0, 4))
    for row in r:
        if len(kept) and np.any((kept[:, 0] <= row[0]) & (kept[:, 1] >= row[1])
                                & (kept[:, 2] <= row[2]) & (kept[:, 3] >= row[3])):
            continue
        keep.append(row)
        kept = np.vstack([kept, row])
    return np.array(keep)


def union_area(rects) -> float:
    """Exact area of a union of rectangles by an x-sweep over elementary slabs."""
    r = as_rects(rects)
    if len(r) == 0:
        return 0.0
    if len(r) > 64:
        r = prune_dominated(r)
    xs = np.unique(np.concatenate([r[:, 0], r[:, 1]]))
    order = np.argsort(r[:, 2], kind="stable")
    r = r[order]
    total = 0.0
    for x0, x1 in zip(xs[:-1], xs[1:]):
        xm = 0.5 * (x0 + x1)
        act = r[(r[:, 0] < xm) & (r[:, 1] > xm)]
        if len(act) == 0:
            continue
        lo, hi = act[:, 2], act[:, 3]
        prev = np.concatenate([[-np.inf], np.maximum.accumulate(hi)[:-1]])
        total += float(np.clip(hi - np.maximum(lo, prev), 0.0, None).sum()) * (x1 - x0)
    return total


def contains_point(rects, p, strict: bool = True) -> bool:
    r = np.asarray(rects, dtype=float).reshape(-1, 4)
    x, y = p
    if strict:
        return bool(np.any((r[:, 0] < x) & (x < r[:, 1]) & (r[:, 2] < y) & (y < r[:, 3])))
    return bool(np.any((r[:, 0] <= x) & (x <= r[:, 1]) & (r[:, 2] <= y) & (y <= r[:, 3])))
