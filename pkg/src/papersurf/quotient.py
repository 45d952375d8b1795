"""Quotient distance as a shortest path over R-chains.

Boundary samples on paired segments are placed at matching parameters t and
len - t, so an identification jump between them is exact. Samples nest under
halving of the spacing, so refined distances never increase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DomainError
from .geometry import Metric, Point2, intrinsic_path
from .scheme import BoundaryPoint, PairingScheme, TOL

# A location is ("polygon id", (x, y)), a BoundaryPoint, or a bare (x, y).
Location = Union[tuple[str, Sequence[float]], BoundaryPoint, Sequence[float]]


@dataclass(frozen=True)
class Resolved:
    polygon: str
    xy: Point2
    s: float | None


def resolve(scheme: PairingScheme, loc: Location) -> Resolved:
    dom = scheme.domain
    if isinstance(loc, BoundaryPoint):
        poly = dom[loc.polygon]
        s = poly.wrap(loc.s)
        return Resolved(poly.id, poly.point_at(s), s)
    if len(loc) == 2 and isinstance(loc[0], str):
        poly = dom[loc[0]]
        xy = Point2(float(loc[1][0]), float(loc[1][1]))
        if not poly.contains(xy, 1e-9):
            raise DomainError(f"point {tuple(xy)} is outside polygon {poly.id}")
    else:
        xy = Point2(float(loc[0]), float(loc[1]))
        poly = dom.find(xy)
    return Resolved(poly.id, xy, poly.locate(xy, 1e-9))


def _dyadic(length: float, h: float) -> int:
    """Number of sample intervals on a piece: a power of two with spacing <= h."""
    if length <= h:
        return 1
    return 2 ** math.ceil(math.log2(length / h) - 1e-12)


def default_spacing(scheme: PairingScheme) -> float:
    lengths = [p.length for p in scheme.basic]
    lengths += [spec.a.term(0) for spec in scheme.specs]
    lengths += [w.b.term(0) for w in scheme.w_specs if w.b.term(0) > 0]
    return min([scheme.domain.d_min()] + lengths) / 50.0


@dataclass
class ChainGraph:
    scheme: PairingScheme
    metric: Metric
    h: float
    xy: np.ndarray
    poly: np.ndarray
    s: np.ndarray
    cls: np.ndarray
    members: list[np.ndarray]
    slices: list[tuple[int, int]]
    queries: list[int] = field(default_factory=list)
    reflex: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.xy)

    def hop_distances(self, sources: np.ndarray, k: int) -> np.ndarray:
        """(len(sources) x polygon-k nodes) intrinsic distances inside polygon k."""
        lo, hi = self.slices[k]
        pts = self.xy[lo:hi]
        polygon = self.scheme.domain.polygons[k]
        if polygon.is_convex:
            d = np.abs(self.xy[sources][:, None, :] - pts[None, :, :])
            return d.max(-1) if self.metric is Metric.MAX else np.hypot(d[..., 0], d[..., 1])
        table = self.reflex.get(k)
        if table is None:
            table = self.reflex[k] = polygon.reflex_to_points(pts, self.metric)
        return np.array([polygon.distances_within(self.xy[j], pts, self.metric, table) for j in sources])

    def dijkstra(self, sources: Sequence[int], target: int | None = None, limit: float = math.inf):
        """Shortest chain lengths from ``sources``; a whole identification
        class is settled at once. Returns (dist, pred)."""
        n = self.size
        dist = np.full(n, np.inf)
        pred = np.full(n, -1, dtype=np.int64)
        settled = np.zeros(n, dtype=bool)
        dist[list(sources)] = 0.0
        while True:
            pending = np.where(settled, np.inf, dist)
            u = int(np.argmin(pending))
            du = pending[u]
            if not du < limit:
                break
            group = self.members[self.cls[u]]
            fresh = group[dist[group] > du]
            dist[fresh] = du
            pred[fresh] = u
            settled[group] = True
            if target is not None and settled[target]:
                break
            for k, (lo, hi) in enumerate(self.slices):
                src = group[(group >= lo) & (group < hi)]
                if len(src) == 0:
                    continue
                d = self.hop_distances(src, k)
                best = d.min(axis=0) + du
                arg = src[d.argmin(axis=0)]
                seg = dist[lo:hi]
                better = best < seg
                seg[better] = best[better]
                pred[lo:hi][better] = arg[better]
        return dist, pred


def build_chain_graph(scheme: PairingScheme, h: float, metric: Metric | str | None = None,
                      queries: Sequence[Location] = ()) -> ChainGraph:
    if not h > 0:
        raise DomainError("sample spacing h must be positive")
    dom = scheme.domain
    metric = dom.metric if metric is None else Metric.parse(metric)
    pindex = {pid: k for k, pid in enumerate(dom.ids)}
    resolved = [resolve(scheme, q) for q in queries]

    per_poly_s: list[list[np.ndarray]] = [[] for _ in dom.polygons]
    id_pairs: list[tuple[int, int, np.ndarray, np.ndarray]] = []
    # extra parameters on pairings so that boundary queries and their images are nodes
    extra_t: dict[int, list[float]] = {}
    for r in resolved:
        if r.s is None:
            continue
        for half in scheme.halves_at(r.polygon, r.s):
            p = scheme.expanded[half.pairing]
            per = dom[r.polygon].perimeter
            s = r.s if r.s >= half.lo - TOL else r.s + per
            t = s - half.lo if half.side == 0 else p.length - (s - half.lo)
            extra_t.setdefault(half.pairing, []).append(min(max(t, 0.0), p.length))

    for k, p in enumerate(scheme.expanded):
        n = _dyadic(p.length, h)
        t = np.linspace(0.0, p.length, n + 1)
        if k in extra_t:
            t = np.concatenate([t, extra_t[k]])
        ia, ib = pindex[p.a_polygon], pindex[p.b_polygon]
        sa = p.a_start + t
        sb = p.b_start + p.length - t
        per_poly_s[ia].append(sa)
        per_poly_s[ib].append(sb)
        id_pairs.append((ia, ib, sa, sb))

    # unpaired arcs (tails, non-full schemes), split at vertices
    for k, polygon in enumerate(dom.polygons):
        per = polygon.perimeter
        cuts = sorted({float(x) for x in polygon.edge_starts} | {per})
        covered = sorted((h_.lo, h_.hi) for h_ in scheme.halves.get(polygon.id, []))
        free = []
        cursor = 0.0
        for lo, hi in covered:
            if lo > cursor + TOL:
                free.append((cursor, lo))
            cursor = max(cursor, hi)
        if cursor < per - TOL:
            free.append((cursor, per))
        for lo, hi in free:
            marks = [lo] + [c for c in cuts if lo < c < hi] + [hi]
            for a, b in zip(marks, marks[1:]):
                per_poly_s[k].append(np.linspace(a, b, _dyadic(b - a, h) + 1))
        per_poly_s[k].append(np.array([float(x) for x in polygon.edge_starts]))
    for bp in scheme.singular_points:
        per_poly_s[pindex[bp.polygon]].append(np.array([bp.s]))
    link_pairs = []
    for u, v in scheme.limit_links:
        per_poly_s[pindex[u.polygon]].append(np.array([u.s]))
        per_poly_s[pindex[v.polygon]].append(np.array([v.s]))
        link_pairs.append((pindex[u.polygon], u.s, pindex[v.polygon], v.s))
    for r in resolved:
        if r.s is not None:
            per_poly_s[pindex[r.polygon]].append(np.array([r.s]))

    # assemble nodes polygon by polygon, boundary samples sorted by arc length
    xy_parts, poly_parts, s_parts, slices = [], [], [], []
    offset = 0
    sorted_s = []
    for k, polygon in enumerate(dom.polygons):
        per = polygon.perimeter
        s = np.mod(np.concatenate(per_poly_s[k]), per)
        s[per - s <= 1e-12 * max(per, 1.0)] = 0.0
        s = np.sort(s)
        interior = [r.xy for r in resolved if r.s is None and r.polygon == polygon.id]
        pts = polygon.points_at(s)
        if interior:
            pts = np.vstack([pts, np.array(interior)])
        count = len(pts)
        xy_parts.append(pts)
        poly_parts.append(np.full(count, k))
        s_parts.append(np.concatenate([s, np.full(len(interior), np.nan)]))
        slices.append((offset, offset + count))
        sorted_s.append(s)
        offset += count
    xy = np.vstack(xy_parts)
    poly_arr = np.concatenate(poly_parts)
    s_arr = np.concatenate(s_parts)

    def node_of(k: int, s: np.ndarray) -> np.ndarray:
        per = dom.polygons[k].perimeter
        s = np.mod(s, per)
        s[per - s <= 1e-12 * max(per, 1.0)] = 0.0
        idx = np.clip(np.searchsorted(sorted_s[k], s), 0, len(sorted_s[k]) - 1)
        left = np.clip(idx - 1, 0, len(sorted_s[k]) - 1)
        pick = np.where(np.abs(sorted_s[k][left] - s) < np.abs(sorted_s[k][idx] - s), left, idx)
        return slices[k][0] + pick

    rows, cols = [], []
    for ia, ib, sa, sb in id_pairs:
        rows.append(node_of(ia, sa))
        cols.append(node_of(ib, sb))
    for ka, sa, kb, sb in link_pairs:
        rows.append(node_of(ka, np.array([sa])))
        cols.append(node_of(kb, np.array([sb])))
    # coincident samples (shared endpoints, wrap at the perimeter)
    for k, s in enumerate(sorted_s):
        per = dom.polygons[k].perimeter
        close = np.nonzero(np.diff(s) <= 1e-12 * max(per, 1.0))[0]
        rows.append(slices[k][0] + close)
        cols.append(slices[k][0] + close + 1)
        if len(s) > 1 and (per - s[-1]) + s[0] <= 1e-12 * max(per, 1.0):
            rows.append(np.array([slices[k][0]]))
            cols.append(np.array([slices[k][0] + len(s) - 1]))
    n = len(xy)
    r_all = np.concatenate(rows) if rows else np.zeros(0, dtype=int)
    c_all = np.concatenate(cols) if cols else np.zeros(0, dtype=int)
    adj = coo_matrix((np.ones(len(r_all)), (r_all, c_all)), shape=(n, n))
    _, labels = connected_components(adj, directed=False)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(labels.max() + 2))
    members = [order[bounds[i]:bounds[i + 1]] for i in range(labels.max() + 1)]

    query_nodes = []
    for r in resolved:
        k = pindex[r.polygon]
        if r.s is None:
            lo, hi = slices[k]
            cand = np.nonzero(np.isnan(s_arr[lo:hi]))[0] + lo
            hit = cand[np.all(xy[cand] == np.asarray(r.xy), axis=1)]
            query_nodes.append(int(hit[0]))
        else:
            query_nodes.append(int(node_of(k, np.array([r.s]))[0]))
    return ChainGraph(scheme, metric, h, xy, poly_arr, s_arr, labels, members, slices, query_nodes)


@dataclass(frozen=True)
class PathStep:
    kind: str  # "hop" or "jump"
    points: tuple[Point2, ...]
    length: float


@dataclass(frozen=True)
class DistanceResult:
    value: float
    path: tuple[PathStep, ...]
    h: float
    converged: bool = True


def _extract_path(g: ChainGraph, pred: np.ndarray, src: int, dst: int) -> tuple[PathStep, ...]:
    nodes = [dst]
    while nodes[-1] != src and pred[nodes[-1]] >= 0:
        nodes.append(int(pred[nodes[-1]]))
    nodes.reverse()
    steps = []
    dom = g.scheme.domain
    for u, v in zip(nodes, nodes[1:]):
        pu, pv = Point2(*map(float, g.xy[u])), Point2(*map(float, g.xy[v]))
        if g.cls[u] == g.cls[v]:
            steps.append(PathStep("jump", (pu, pv), 0.0))
        else:
            length, line = intrinsic_path(dom.polygons[int(g.poly[u])], pu, pv, g.metric)
            steps.append(PathStep("hop", tuple(line), length))
    return tuple(steps)


def quotient_distance(scheme: PairingScheme, x: Location, y: Location, m: Metric | str | None = None,
                      h: float | None = None) -> DistanceResult:
    h = default_spacing(scheme) if h is None else h
    g = build_chain_graph(scheme, h, m, [x, y])
    src, dst = g.queries
    dist, pred = g.dijkstra([src], target=dst)
    value = float(dist[dst])
    if g.cls[src] == g.cls[dst]:
        value = 0.0
    return DistanceResult(value, _extract_path(g, pred, src, dst), h)


def distance_matrix(scheme: PairingScheme, points: Sequence[Location], m: Metric | str | None = None,
                    h: float | None = None) -> np.ndarray:
    n = len(points)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = quotient_distance(scheme, points[i], points[j], m, h).value
    return out


def refine_until(scheme: PairingScheme, x: Location, y: Location, m: Metric | str | None = None,
                 h0: float | None = None, tol: float = 1e-4, max_halvings: int = 12) -> DistanceResult:
    if not tol > 0:
        raise DomainError("tolerance must be positive")
    h = default_spacing(scheme) if h0 is None else h0
    prev = quotient_distance(scheme, x, y, m, h)
    for _ in range(max_halvings):
        h /= 2
        cur = quotient_distance(scheme, x, y, m, h)
        if abs(prev.value - cur.value) < tol:
            return cur
        prev = cur
    return DistanceResult(prev.value, prev.path, prev.h, converged=False)


def reach(scheme: PairingScheme, center: Location, r: float, h: float,
          m: Metric | str | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Graph nodes at chain distance < r from ``center``.

    Returns (xy, polygon index, remaining budget r - distance)."""
    g = build_chain_graph(scheme, h, m, [center])
    dist, _ = g.dijkstra([g.queries[0]], limit=r)
    keep = dist < r
    return g.xy[keep], g.poly[keep], r - dist[keep]
