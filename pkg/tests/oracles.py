"""Independent reference computations, written without the package's own
algorithms, used to freeze expected values."""

from __future__ import annotations

import itertools
import math

import numpy as np


def compressed_union_area(rects) -> float:
    """Union area by coordinate compression and a boolean occupancy matrix."""
    rects = [r for r in rects if r[1] > r[0] and r[3] > r[2]]
    if not rects:
        return 0.0
    xs = sorted({v for r in rects for v in (r[0], r[1])})
    ys = sorted({v for r in rects for v in (r[2], r[3])})
    occ = np.zeros((len(xs) - 1, len(ys) - 1), dtype=bool)
    for x0, x1, y0, y1 in rects:
        occ[xs.index(x0):xs.index(x1), ys.index(y0):ys.index(y1)] = True
    dx, dy = np.diff(xs), np.diff(ys)
    return float((occ * np.outer(dx, dy)).sum())


def torus_distance(p, q) -> float:
    """Max-metric distance on the unit square torus: min over translates."""
    return min(max(abs(p[0] - q[0] + i), abs(p[1] - q[1] + j))
               for i, j in itertools.product((-1, 0, 1), repeat=2))


def square_point(s: float):
    """Unit square boundary, counterclockwise from (0, 0)."""
    s = s % 4.0
    if s <= 1:
        return (s, 0.0)
    if s <= 2:
        return (1.0, s - 1)
    if s <= 3:
        return (3 - s, 1.0)
    return (0.0, 4 - s)


def w_layout(a, b, side_start: float, side_len: float) -> dict[str, tuple[float, float]]:
    """Positions of alpha_i, beta_i, beta_i', alpha_i' written out term by term."""
    out = {}
    pos = side_start
    for i, (ai, bi) in enumerate(zip(a, b)):
        out[f"alpha{i}"] = (pos, pos + ai)
        pos += ai
        out[f"beta{i}"] = (pos, pos + bi)
        pos += bi
        out[f"beta{i}'"] = (pos, pos + bi)
        pos += bi
    top = side_start + side_len
    for i, ai in enumerate(a):
        s_prev = sum(a[:i])
        out[f"alpha{i}'"] = (top - s_prev - ai, top - s_prev)
    return out


def closure(pairings, start, perimeter: float, rounds: int = 200, tol: float = 1e-9) -> list[float]:
    """Class of an arc coordinate on a single polygon by repeated application
    of every pairing map (pairings as (a_start, b_start, length))."""
    seen = [start % perimeter]
    frontier = list(seen)
    for _ in range(rounds):
        nxt = []
        for s in frontier:
            for a0, b0, ln in pairings:
                for lo, other in ((a0, b0), (b0, a0)):
                    for ss in (s, s + perimeter):
                        t = ss - lo
                        if -tol <= t <= ln + tol:
                            img = (other + ln - t) % perimeter
                            if all(min(abs(img - q), perimeter - abs(img - q)) > tol for q in seen):
                                seen.append(img)
                                nxt.append(img)
        if not nxt:
            break
        frontier = nxt
    return sorted(seen)


def tail_ratio_sup(a, b) -> float:
    best = 0.0
    for n in range(1, len(a)):
        sa, sb = sum(a[n:]), sum(b[n:])
        if sa > 0:
            best = max(best, sb / sa)
    return best


def window_ratio_sup(a, b) -> float:
    best = 0.0
    for i in range(len(a)):
        for j in range(i + 1, len(a) + 1):
            sa, sb = sum(a[i:j]), sum(b[i:j])
            if sa > 0:
                best = max(best, sb / sa)
    return best


def grid_components(mask: np.ndarray) -> int:
    """4-connected components of a 2-D boolean array by flood fill."""
    seen = np.zeros_like(mask, dtype=bool)
    count = 0
    nx, ny = mask.shape
    for i in range(nx):
        for j in range(ny):
            if mask[i, j] and not seen[i, j]:
                count += 1
                stack = [(i, j)]
                seen[i, j] = True
                while stack:
                    x, y = stack.pop()
                    for u, v in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                        if 0 <= u < nx and 0 <= v < ny and mask[u, v] and not seen[u, v]:
                            seen[u, v] = True
                            stack.append((u, v))
    return count


def least_squares(x, y) -> tuple[float, float]:
    """Slope and intercept from the normal equations."""
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxx = sum((xi - mx) ** 2 for xi in x)
    sxy = sum((xi - mx) * (yi - my) for xi, yi in zip(x, y))
    slope = sxy / sxx
    return slope, my - slope * mx


def geometric_tail(first: float, ratio: float, k: int) -> float:
    return first * ratio ** -k * ratio / (ratio - 1)


EUC_MAX_RATIO = 4 / math.pi
