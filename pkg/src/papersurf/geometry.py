"""Planar primitives: points, polygons, boundary arc length, metrics and
intrinsic distances inside a polygon."""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError

EPS = 1e-12


class Point2(NamedTuple):
    x: float
    y: float


class Metric(str, Enum):
    EUCLIDEAN = "euclidean"
    MAX = "max"

    @classmethod
    def parse(cls, value: "Metric | str") -> "Metric":
        return value if isinstance(value, cls) else cls(str(value).lower())


def distance(p: Sequence[float], q: Sequence[float], m: Metric | str = Metric.MAX) -> float:
    dx = abs(p[0] - q[0])
    dy = abs(p[1] - q[1])
    if Metric.parse(m) is Metric.MAX:
        return max(dx, dy)
    return math.hypot(dx, dy)


def distances_from(p: Sequence[float], pts: np.ndarray, m: Metric | str = Metric.MAX) -> np.ndarray:
    """Vectorized ``distance(p, q)`` for every row ``q`` of ``pts``."""
    d = np.abs(np.asarray(pts, dtype=float) - np.asarray(p, dtype=float))
    if Metric.parse(m) is Metric.MAX:
        return d.max(axis=1)
    return np.hypot(d[:, 0], d[:, 1])


def path_length(polyline: Sequence[Sequence[float]], m: Metric | str = Metric.MAX) -> float:
    if len(polyline) == 0:
        raise DomainError("a path needs at least one point")
    return sum(distance(a, b, m) for a, b in zip(polyline, polyline[1:]))


def cone_distance(t: float, s: float, dxy: float) -> float:
    """Distance between points at radii ``t`` and ``s`` and angular separation
    ``dxy`` on a flat cone; beyond a straight angle the path runs through the apex."""
    if t < 0 or s < 0 or dxy < 0:
        raise DomainError("cone coordinates must be non-negative")
    if dxy > math.pi:
        return t + s
    return math.sqrt(max(t * t + s * s - 2.0 * t * s * math.cos(dxy), 0.0))


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def point_segment_distance(p, a, b, m: Metric | str = Metric.MAX) -> float:
    ax, ay = a[0] - p[0], a[1] - p[1]
    dx, dy = b[0] - a[0], b[1] - a[1]
    if Metric.parse(m) is Metric.EUCLIDEAN:
        den = dx * dx + dy * dy
        t = 0.0 if den == 0 else min(1.0, max(0.0, -(ax * dx + ay * dy) / den))
        return math.hypot(ax + t * dx, ay + t * dy)
    # max(|ax + t dx|, |ay + t dy|) is convex and piecewise linear in t:
    # its minimum sits at an endpoint or at one of the kinks
    cands = [0.0, 1.0]
    for num, den in ((-ax, dx), (-ay, dy), (-(ax - ay), dx - dy), (-(ax + ay), dx + dy)):
        if den != 0:
            cands.append(num / den)
    return min(
        max(abs(ax + t * dx), abs(ay + t * dy)) for t in cands if 0.0 <= t <= 1.0
    )


def segments_intersect(a, b, c, d) -> bool:
    """Closed segments ab and cd share at least one point."""
    d1, d2 = _cross(c, d, a), _cross(c, d, b)
    d3, d4 = _cross(a, b, c), _cross(a, b, d)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True

    def on(p, q, r, o):
        return abs(o) <= EPS and min(p[0], q[0]) - EPS <= r[0] <= max(p[0], q[0]) + EPS \
            and min(p[1], q[1]) - EPS <= r[1] <= max(p[1], q[1]) + EPS

    return on(c, d, a, d1) or on(c, d, b, d2) or on(a, b, c, d3) or on(a, b, d, d4)


def segment_distance(a, b, c, d, m: Metric | str = Metric.MAX) -> float:
    # for any norm the minimum over two disjoint segments is attained at an endpoint
    if segments_intersect(a, b, c, d):
        return 0.0
    return min(
        point_segment_distance(a, c, d, m),
        point_segment_distance(b, c, d, m),
        point_segment_distance(c, a, b, m),
        point_segment_distance(d, a, b, m),
    )


@dataclass(frozen=True)
class Polygon:
    """A simple polygon, stored counterclockwise.

    Arc length ``s`` runs from vertex 0 along the positive orientation.
    """

    id: str
    vertices: tuple[Point2, ...]

    def __post_init__(self):
        verts = tuple(Point2(float(x), float(y)) for x, y in self.vertices)
        if len(verts) < 3:
            raise DomainError(f"polygon {self.id}: needs at least 3 vertices")
        if not all(math.isfinite(c) for v in verts for c in v):
            raise DomainError(f"polygon {self.id}: non-finite coordinate")
        area = _signed_area(verts)
        if abs(area) <= EPS:
            raise DomainError(f"polygon {self.id}: zero area")
        if area < 0:
            warnings.warn(f"polygon {self.id}: clockwise input reversed", stacklevel=3)
            verts = (verts[0],) + tuple(reversed(verts[1:]))
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        for i in range(n):
            if distance(verts[i], verts[(i + 1) % n], Metric.EUCLIDEAN) <= EPS:
                raise DomainError(f"polygon {self.id}: repeated vertex {i}")
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                if segments_intersect(verts[i], verts[(i + 1) % n], verts[j], verts[(j + 1) % n]):
                    raise DomainError(f"polygon {self.id}: edges {i} and {j} intersect")

    # -- derived data -----------------------------------------------------
    @cached_property
    def coords(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        return np.hypot(*(np.roll(self.coords, -1, axis=0) - self.coords).T)

    @cached_property
    def edge_starts(self) -> np.ndarray:
        """Arc-length coordinate of each vertex."""
        return np.concatenate([[0.0], np.cumsum(self.edge_lengths)[:-1]])

    @cached_property
    def perimeter(self) -> float:
        return float(self.edge_lengths.sum())

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    @cached_property
    def interior_angles(self) -> tuple[float, ...]:
        n = len(self.vertices)
        out = []
        for i in range(n):
            p, v, q = self.vertices[i - 1], self.vertices[i], self.vertices[(i + 1) % n]
            a_in = math.atan2(v[1] - p[1], v[0] - p[0])
            a_out = math.atan2(q[1] - v[1], q[0] - v[0])
            turn = (a_out - a_in + math.pi) % (2 * math.pi) - math.pi
            out.append(math.pi - turn)
        return tuple(out)

    @cached_property
    def reflex_vertices(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.interior_angles) if a > math.pi + 1e-12)

    @property
    def is_convex(self) -> bool:
        return not self.reflex_vertices

    @cached_property
    def is_axis_rectangle(self) -> bool:
        if len(self.vertices) != 4:
            return False
        xs = sorted({round(v.x, 15) for v in self.vertices})
        ys = sorted({round(v.y, 15) for v in self.vertices})
        return len(xs) == 2 and len(ys) == 2

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax)"""
        c = self.coords
        return float(c[:, 0].min()), float(c[:, 0].max()), float(c[:, 1].min()), float(c[:, 1].max())

    def edge(self, i: int) -> tuple[Point2, Point2]:
        n = len(self.vertices)
        return self.vertices[i % n], self.vertices[(i + 1) % n]

    # -- arc length ---------------------------------------------------------
    def wrap(self, s: float) -> float:
        s = float(s) % self.perimeter
        return 0.0 if self.perimeter - s <= EPS * max(1.0, self.perimeter) else s

    def edge_index(self, s: float) -> int:
        """Index of the edge containing arc coordinate ``s`` (vertices belong to
        the edge they start)."""
        s = self.wrap(s)
        return int(np.searchsorted(self.edge_starts, s + EPS, side="right") - 1)

    def point_at(self, s: float) -> Point2:
        s = self.wrap(s)
        i = self.edge_index(s)
        a, b = self.edge(i)
        t = (s - self.edge_starts[i]) / self.edge_lengths[i]
        t = min(max(t, 0.0), 1.0)
        return Point2(float(a.x + t * (b.x - a.x)), float(a.y + t * (b.y - a.y)))

    def points_at(self, s: np.ndarray) -> np.ndarray:
        s = np.mod(np.asarray(s, dtype=float), self.perimeter)
        idx = np.clip(np.searchsorted(self.edge_starts, s + EPS, side="right") - 1, 0, len(self.vertices) - 1)
        a = self.coords[idx]
        b = self.coords[(idx + 1) % len(self.vertices)]
        t = np.clip((s - self.edge_starts[idx]) / self.edge_lengths[idx], 0.0, 1.0)
        return a + t[:, None] * (b - a)

    def locate(self, p: Sequence[float], tol: float = 1e-9) -> float | None:
        """Arc coordinate of ``p`` if it lies on the boundary, else None."""
        best, best_s = tol, None
        for i in range(len(self.vertices)):
            a, b = self.edge(i)
            d = point_segment_distance(p, a, b, Metric.EUCLIDEAN)
            if d <= best:
                L = self.edge_lengths[i]
                t = ((p[0] - a.x) * (b.x - a.x) + (p[1] - a.y) * (b.y - a.y)) / (L * L)
                best, best_s = d, self.wrap(float(self.edge_starts[i] + min(max(t, 0.0), 1.0) * L))
        return best_s

    def arc_span_on_edge(self, s0: float, s1: float) -> bool:
        """True when the arc [s0, s1] lies inside a single edge."""
        i = self.edge_index(s0)
        lo = self.edge_starts[i]
        hi = lo + self.edge_lengths[i]
        return s1 <= hi + 1e-9 * max(1.0, self.perimeter) and s0 >= lo - 1e-9

    # -- containment --------------------------------------------------------
    def on_boundary(self, pts: np.ndarray, tol: float = EPS) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        a = self.coords
        b = np.roll(a, -1, axis=0)
        d = b - a
        rel = pts[:, None, :] - a[None, :, :]
        t = np.clip((rel * d).sum(-1) / (d * d).sum(-1), 0.0, 1.0)
        gap = rel - t[..., None] * d
        return (np.hypot(gap[..., 0], gap[..., 1]) <= tol).any(axis=1)

    def contains_points(self, pts: np.ndarray, tol: float = EPS) -> np.ndarray:
        """Even-odd ray test; boundary points (within ``tol``) count as inside."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        x, y = pts[:, 0:1], pts[:, 1:2]
        a = self.coords
        b = np.roll(a, -1, axis=0)
        x0, y0, x1, y1 = a[:, 0], a[:, 1], b[:, 0], b[:, 1]
        straddle = (y0 > y) != (y1 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside = (straddle & (x < xc)).sum(axis=1) % 2 == 1
        return inside | self.on_boundary(pts, tol)

    def contains(self, p: Sequence[float], tol: float = EPS) -> bool:
        return bool(self.contains_points(np.array([p], dtype=float), tol)[0])

    # -- visibility ---------------------------------------------------------
    def segment_inside(self, p: Sequence[float], q: Sequence[float]) -> bool:
        """True when the closed segment pq stays inside the closed polygon."""
        if self.is_convex:
            return self.contains(p, 1e-9) and self.contains(q, 1e-9)
        px, py = p
        dx, dy = q[0] - px, q[1] - py
        ts = [0.0, 1.0]
        for i in range(len(self.vertices)):
            a, b = self.edge(i)
            ex, ey = b.x - a.x, b.y - a.y
            den = dx * ey - dy * ex
            if abs(den) > EPS:
                t = ((a.x - px) * ey - (a.y - py) * ex) / den
                u = ((a.x - px) * dy - (a.y - py) * dx) / den
                if -EPS <= t <= 1 + EPS and -EPS <= u <= 1 + EPS:
                    ts.append(t)
            else:
                den2 = dx * dx + dy * dy
                if den2 > 0:
                    for v in (a, b):
                        ts.append(((v.x - px) * dx + (v.y - py) * dy) / den2)
        ts = sorted(t for t in ts if 0.0 <= t <= 1.0)
        mids = [((t0 + t1) / 2) for t0, t1 in zip(ts, ts[1:]) if t1 - t0 > EPS]
        pts = np.array([[px + t * dx, py + t * dy] for t in mids] or [[px, py]])
        return bool(self.contains_points(pts, 1e-9).all())

    def visible_from(self, p: Sequence[float], pts: np.ndarray) -> np.ndarray:
        """Vectorized visibility of each row of ``pts`` from ``p``."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.is_convex:
            return np.ones(len(pts), dtype=bool)
        p = np.asarray(p, dtype=float)
        d = pts - p
        a = self.coords
        b = np.roll(a, -1, axis=0)
        ok = np.ones(len(pts), dtype=bool)

        def orient(o, u, w):
            return (u[..., 0] - o[..., 0]) * (w[..., 1] - o[..., 1]) - (u[..., 1] - o[..., 1]) * (w[..., 0] - o[..., 0])

        tol = 1e-12
        for i in range(len(a)):
            o1 = orient(p[None, :], pts, a[i][None, :])
            o2 = orient(p[None, :], pts, b[i][None, :])
            o3 = orient(a[i][None, :], b[i][None, :], p[None, :])
            o4 = orient(a[i][None, :], b[i][None, :], pts)
            crossing = (o1 * o2 < -tol) & (np.broadcast_to(o3, o4.shape) * o4 < -tol)
            ok &= ~crossing
        ok &= self.contains_points(p + 0.5 * d, 1e-9)
        # grazing a reflex vertex can leave the polygon without a proper crossing
        for v in self.reflex_vertices:
            vx = a[v]
            rel = vx - p
            den = (d * d).sum(1)
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (rel * d).sum(1) / den
            on = (np.abs(d[:, 0] * rel[1] - d[:, 1] * rel[0]) <= 1e-12 * np.maximum(1.0, den)) & (t > 1e-9) & (t < 1 - 1e-9)
            if on.any():
                idx = np.nonzero(on & ok)[0]
                for j in idx:
                    step = 1e-7 * d[j] / max(np.linalg.norm(d[j]), EPS)
                    if not (self.contains(vx - step, 1e-9) and self.contains(vx + step, 1e-9)):
                        ok[j] = False
        return ok

    @cached_property
    def _reflex_graph(self) -> dict:
        """All-pairs shortest paths between reflex vertices, per metric."""
        idx = self.reflex_vertices
        pts = [self.vertices[i] for i in idx]
        out = {}
        for m in Metric:
            n = len(pts)
            g = np.full((n, n), np.inf)
            np.fill_diagonal(g, 0.0)
            for i in range(n):
                for j in range(i + 1, n):
                    if self.segment_inside(pts[i], pts[j]):
                        g[i, j] = g[j, i] = distance(pts[i], pts[j], m)
            for k in range(n):
                g = np.minimum(g, g[:, k : k + 1] + g[k : k + 1, :])
            out[m] = g
        return out

    def reflex_coords(self) -> np.ndarray:
        return self.coords[list(self.reflex_vertices)] if self.reflex_vertices else np.zeros((0, 2))

    def distances_within(self, p: Sequence[float], pts: np.ndarray, m: Metric | str = Metric.MAX,
                         to_reflex: np.ndarray | None = None) -> np.ndarray:
        """Intrinsic distances from ``p`` to each row of ``pts``.

        ``to_reflex`` optionally supplies the precomputed (reflex x pts) matrix of
        direct visible distances, which dominates the cost for many queries.
        """
        m = Metric.parse(m)
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        direct = distances_from(p, pts, m)
        if self.is_convex:
            return direct
        out = np.where(self.visible_from(p, pts), direct, np.inf)
        rc = self.reflex_coords()
        p_to_r = np.where(self.visible_from(p, rc), distances_from(p, rc, m), np.inf)
        via = (p_to_r[:, None] + self._reflex_graph[m]).min(axis=0)
        if to_reflex is None:
            to_reflex = self.reflex_to_points(pts, m)
        return np.minimum(out, (via[:, None] + to_reflex).min(axis=0))

    def reflex_to_points(self, pts: np.ndarray, m: Metric | str = Metric.MAX) -> np.ndarray:
        m = Metric.parse(m)
        rc = self.reflex_coords()
        out = np.empty((len(rc), len(pts)))
        for k, v in enumerate(rc):
            out[k] = np.where(self.visible_from(v, pts), distances_from(v, pts, m), np.inf)
        return out


def _signed_area(verts: Sequence[Sequence[float]]) -> float:
    n = len(verts)
    return 0.5 * sum(verts[i][0] * verts[(i + 1) % n][1] - verts[(i + 1) % n][0] * verts[i][1] for i in range(n))


@dataclass(frozen=True)
class MultiPolygon:
    polygons: tuple[Polygon, ...]
    metric: Metric = Metric.MAX

    def __post_init__(self):
        object.__setattr__(self, "polygons", tuple(self.polygons))
        object.__setattr__(self, "metric", Metric.parse(self.metric))
        ids = [p.id for p in self.polygons]
        if not ids:
            raise DomainError("empty multipolygon")
        if len(set(ids)) != len(ids):
            raise DomainError("duplicate polygon ids")
        for i, a in enumerate(self.polygons):
            for b in self.polygons[i + 1 :]:
                if _polygons_meet(a, b):
                    raise DomainError(f"polygons {a.id} and {b.id} are not disjoint")

    @cached_property
    def by_id(self) -> dict[str, Polygon]:
        return {p.id: p for p in self.polygons}

    def __getitem__(self, pid: str) -> Polygon:
        try:
            return self.by_id[pid]
        except KeyError:
            raise DomainError(f"unknown polygon {pid!r}") from None

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self.polygons]

    @property
    def area(self) -> float:
        return sum(p.area for p in self.polygons)

    @property
    def boundary_length(self) -> float:
        return sum(p.perimeter for p in self.polygons)

    def diam(self, m: Metric | str | None = None) -> float:
        """Largest polygon diameter (distances between polygons are not defined)."""
        m = self.metric if m is None else Metric.parse(m)
        best = 0.0
        for poly in self.polygons:
            c = poly.coords
            for v in c:
                best = max(best, float(distances_from(v, c, m).max()))
        return best

    def d_min(self, m: Metric | str | None = None) -> float:
        """Smallest distance between non-adjacent sides of any polygon."""
        m = self.metric if m is None else Metric.parse(m)
        best = math.inf
        for poly in self.polygons:
            n = len(poly.vertices)
            for i in range(n):
                for j in range(i + 2, n):
                    if i == 0 and j == n - 1:
                        continue
                    best = min(best, segment_distance(*poly.edge(i), *poly.edge(j), m))
            if n == 3:
                # a triangle has no non-adjacent sides; use vertex-to-opposite-side
                for i in range(3):
                    best = min(best, point_segment_distance(poly.vertices[i], *poly.edge(i + 1), m))
        return best

    def find(self, p: Sequence[float]) -> Polygon:
        """The polygon containing ``p``."""
        for poly in self.polygons:
            if poly.contains(p, 1e-9):
                return poly
        raise DomainError(f"point {tuple(p)} lies outside every polygon")


def _polygons_meet(a: Polygon, b: Polygon) -> bool:
    for i in range(len(a.vertices)):
        for j in range(len(b.vertices)):
            if segments_intersect(*a.edge(i), *b.edge(j)):
                return True
    return a.contains(b.vertices[0]) or b.contains(a.vertices[0])


def arc_length_point(poly: Polygon, s: float) -> Point2:
    return poly.point_at(s)


def intrinsic_path(poly: Polygon, p: Sequence[float], q: Sequence[float],
                   m: Metric | str = Metric.MAX) -> tuple[float, list[Point2]]:
    """Shortest polyline from p to q inside ``poly`` via the reflex-vertex
    visibility graph; returns (length in m, polyline)."""
    m = Metric.parse(m)
    p, q = Point2(*map(float, p)), Point2(*map(float, q))
    for pt in (p, q):
        if not poly.contains(pt, 1e-9):
            raise DomainError(f"point {tuple(pt)} is outside polygon {poly.id}")
    if poly.is_convex or poly.segment_inside(p, q):
        return distance(p, q, m), [p, q]
    nodes = [p, q] + [poly.vertices[i] for i in poly.reflex_vertices]
    n = len(nodes)
    adj: dict[int, list[tuple[int, float]]] = {i: [] for i in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            if poly.segment_inside(nodes[i], nodes[j]):
                w = distance(nodes[i], nodes[j], m)
                adj[i].append((j, w))
                adj[j].append((i, w))
    best = [math.inf] * n
    prev = [-1] * n
    best[0] = 0.0
    heap = [(0.0, 0)]
    while heap:
        du, u = heapq.heappop(heap)
        if du > best[u]:
            continue
        if u == 1:
            break
        for v, w in adj[u]:
            if du + w < best[v]:
                best[v] = du + w
                prev[v] = u
                heapq.heappush(heap, (best[v], v))
    if math.isinf(best[1]):
        raise DomainError("no path inside polygon")
    path, k = [], 1
    while k != -1:
        path.append(nodes[k])
        k = prev[k]
    return best[1], path[::-1]


def intrinsic_distance(poly: Polygon, p: Sequence[float], q: Sequence[float],
                       m: Metric | str = Metric.MAX) -> float:
    return intrinsic_path(poly, p, q, m)[0]
