"""Max-metric ball decompositions: the preimage of a quotient ball as a finite
union of boxes clipped to the polygons.

A *source* is a point or an axis-parallel boundary segment S together with a
budget rho; its piece is (S + box(rho)) clipped to its polygon. Whenever a
piece reaches a paired segment, the part of that segment at minimal distance
is carried across the pairing as a new source with the remaining budget.
"""

from __future__ import annotations

import csv
import heapq
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PaperSurfError
from .geometry import Metric, Point2, Polygon
from .quotient import Location, Resolved, reach, resolve
from .rects import clip, union_area
from .scheme import BoundaryPoint, HalfSegment, PairingScheme, PointClass, TOL, classify_point

MAX_SOURCES = 200_000


@dataclass(frozen=True)
class BallPiece:
    polygon: str
    center: Point2
    radius: float
    provenance: str = "main"
    half_extent: tuple[float, float] = (0.0, 0.0)

    @property
    def box(self) -> tuple[float, float, float, float]:
        """Unclipped (x0, x1, y0, y1)."""
        (cx, cy), (hx, hy), r = self.center, self.half_extent, self.radius
        return (cx - hx - r, cx + hx + r, cy - hy - r, cy + hy + r)

    def clipped(self, poly: Polygon) -> tuple[float, float, float, float]:
        x0, x1, y0, y1 = self.box
        bx0, bx1, by0, by1 = poly.bbox
        return (max(x0, bx0), min(x1, bx1), max(y0, by0), min(y1, by1))

    def contains(self, p) -> bool:
        (cx, cy), (hx, hy) = self.center, self.half_extent
        dx = max(abs(p[0] - cx) - hx, 0.0)
        dy = max(abs(p[1] - cy) - hy, 0.0)
        return max(dx, dy) < self.radius


@dataclass(frozen=True)
class BallDecomposition:
    center: Resolved
    r: float
    pieces: tuple[BallPiece, ...]
    tail_area_bound: float
    center_class: PointClass | None
    eps_min: float

    def rects(self, scheme: PairingScheme) -> dict[str, np.ndarray]:
        return pieces_by_polygon(scheme, self.pieces)


def pieces_by_polygon(scheme: PairingScheme, pieces) -> dict[str, np.ndarray]:
    out: dict[str, list] = {}
    for pc in pieces:
        out.setdefault(pc.polygon, []).append(pc.box)
    return {pid: clip(np.array(v), scheme.domain[pid].bbox) for pid, v in out.items()}


def pieces_area(scheme: PairingScheme, pieces) -> float:
    return sum(union_area(r) for r in pieces_by_polygon(scheme, pieces).values())


def require_rectangles(scheme: PairingScheme) -> None:
    bad = [p.id for p in scheme.domain.polygons if not p.is_axis_rectangle]
    if bad:
        raise DomainError(f"closed-form ball decomposition needs axis-aligned rectangles; not: {', '.join(bad)}")


@dataclass
class _Edge:
    index: int
    s0: float
    s1: float
    horizontal: bool
    coord: float  # the fixed coordinate of the edge line
    halves: list = field(default_factory=list)  # (lo, hi, image_fn, label, kind)


def _edges(scheme: PairingScheme, poly: Polygon) -> list[_Edge]:
    out = []
    for i in range(4):
        a, b = poly.edge(i)
        s0 = float(poly.edge_starts[i])
        e = _Edge(i, s0, s0 + float(poly.edge_lengths[i]), abs(a.y - b.y) < 1e-15, a.y if abs(a.y - b.y) < 1e-15 else a.x)
        out.append(e)
    for h in scheme.halves.get(poly.id, []):
        e = out[poly.edge_index(0.5 * (h.lo + h.hi))]
        e.halves.append((h.lo, h.hi, h, scheme.expanded[h.pairing].label or f"pairing{h.pairing}", "pair"))
    for k, (u, v) in enumerate(scheme.limit_links):
        for x, y in ((u, v), (v, u)):
            if x.polygon != poly.id:
                continue
            # a link at a vertex is reachable from both incident edges
            for edge in out:
                for ss in (x.s, x.s + poly.perimeter):
                    if edge.s0 - TOL <= ss <= edge.s1 + TOL:
                        edge.halves.append((ss, ss, y, f"link{k}", "link"))
    return out


class _Worklist:
    def __init__(self, scheme: PairingScheme, eps_min: float):
        self.scheme = scheme
        self.eps_min = eps_min
        self.edges = {p.id: _edges(scheme, p) for p in scheme.domain.polygons}
        self.known: dict[str, list[tuple[float, float, float, float]]] = {}
        self.known_arr: dict[str, np.ndarray] = {}
        self.heap: list = []
        self.pieces: list[BallPiece] = []
        self.dropped_area = 0.0
        self.counter = 0

    def _dominated(self, pid: str, box) -> bool:
        arr = self.known_arr.get(pid)
        if arr is None or not len(arr):
            return False
        eps = 1e-13
        return bool(np.any((arr[:, 0] <= box[0] + eps) & (arr[:, 1] >= box[1] - eps)
                           & (arr[:, 2] <= box[2] + eps) & (arr[:, 3] >= box[3] - eps)))

    def _remember(self, pid: str, box) -> None:
        arr = self.known_arr.get(pid)
        row = np.array([box])
        self.known_arr[pid] = row if arr is None else np.vstack([arr, row])

    def seed_known(self, pieces) -> None:
        for pc in pieces:
            self._remember(pc.polygon, pc.box)

    def push(self, piece: BallPiece) -> None:
        if piece.radius <= 0:
            return
        poly = self.scheme.domain[piece.polygon]
        if piece.radius <= self.eps_min:
            x0, x1, y0, y1 = piece.clipped(poly)
            self.dropped_area += max(x1 - x0, 0.0) * max(y1 - y0, 0.0)
            return
        if self._dominated(piece.polygon, piece.box):
            return
        self._remember(piece.polygon, piece.box)
        self.counter += 1
        heapq.heappush(self.heap, (-piece.radius, self.counter, piece))

    def run(self) -> list[BallPiece]:
        while self.heap:
            _, _, piece = heapq.heappop(self.heap)
            self.pieces.append(piece)
            if len(self.pieces) > MAX_SOURCES:
                raise PaperSurfError("ball decomposition did not terminate")
            self._spread(piece)
        return self.pieces

    def _spread(self, piece: BallPiece) -> None:
        scheme = self.scheme
        poly = scheme.domain[piece.polygon]
        (cx, cy), (hx, hy), rho = piece.center, piece.half_extent, piece.radius
        for e in self.edges[piece.polygon]:
            if e.horizontal:
                delta = min(abs(cy - hy - e.coord), abs(cy + hy - e.coord))
                lo_pt, hi_pt = cx - hx, cx + hx
            else:
                delta = min(abs(cx - hx - e.coord), abs(cx + hx - e.coord))
                lo_pt, hi_pt = cy - hy, cy + hy
            if delta >= rho:
                continue
            # projection of the source onto the edge, in arc coordinates
            a, b = poly.edge(e.index)
            if e.horizontal:
                sgn, base = (1.0, a.x) if b.x > a.x else (-1.0, a.x)
            else:
                sgn, base = (1.0, a.y) if b.y > a.y else (-1.0, a.y)
            u = sorted((e.s0 + sgn * (lo_pt - base), e.s0 + sgn * (hi_pt - base)))
            for lo, hi, target, label, kind in e.halves:
                gap = max(0.0, lo - u[1], u[0] - hi)
                d = max(delta, gap)
                if d >= rho:
                    continue
                flat_lo, flat_hi = max(lo, u[0] - delta), min(hi, u[1] + delta)
                if kind == "link":
                    self._spawn_point(target, rho - d, f"accumulation-spawn({label})")
                elif flat_lo <= flat_hi + 1e-15:
                    self._spawn_segment(target, flat_lo, flat_hi, rho - delta, f"crossing({label})"
                                        if flat_hi - flat_lo > 1e-15 else f"conic-spawn({label})")
                else:
                    near = lo if lo > u[1] else hi
                    self._spawn_segment(target, near, near, rho - d, f"conic-spawn({label})")

    def _spawn_point(self, bp: BoundaryPoint, rho: float, tag: str) -> None:
        poly = self.scheme.domain[bp.polygon]
        self.push(BallPiece(bp.polygon, poly.point_at(bp.s), rho, tag))

    def _spawn_segment(self, half: HalfSegment, s0: float, s1: float, rho: float, tag: str) -> None:
        p0 = self.scheme.image(half, s0)
        p1 = self.scheme.image(half, s1)
        poly = self.scheme.domain[p0.polygon]
        q0, q1 = poly.point_at(p0.s), poly.point_at(p1.s)
        center = Point2(0.5 * (q0.x + q1.x), 0.5 * (q0.y + q1.y))
        ext = (0.5 * abs(q1.x - q0.x), 0.5 * abs(q1.y - q0.y))
        self.push(BallPiece(p0.polygon, center, rho, tag, ext))


def _budget_at(piece: BallPiece, poly: Polygon, seg: tuple[Point2, Point2]) -> float:
    (cx, cy), (hx, hy) = piece.center, piece.half_extent
    (ax, ay), (bx, by) = seg
    dx = max(0.0, min(ax, bx) - (cx + hx), (cx - hx) - max(ax, bx))
    dy = max(0.0, min(ay, by) - (cy + hy), (cy - hy) - max(ay, by))
    return piece.radius - max(dx, dy)


def decompose_ball(scheme: PairingScheme, center: Location, r: float, eps_min: float | None = None,
                   tail: bool = True) -> BallDecomposition:
    """Decompose the open max-metric ball B(center, r) of the quotient."""
    if not r > 0:
        raise DomainError("radius must be positive")
    require_rectangles(scheme)
    eps_min = r * 1e-4 if eps_min is None else eps_min
    c = resolve(scheme, center)
    wl = _Worklist(scheme, eps_min)
    wl.push(BallPiece(c.polygon, c.xy, r, "main"))
    pieces = list(wl.run())
    bound = wl.dropped_area
    if tail and scheme.tail_gaps:
        # anything reached only through unexpanded pairings is reached from a
        # tail arc first, with at most the budget available there
        extra = _Worklist(scheme, eps_min)
        extra.seed_known(pieces)
        for pid, lo, hi in scheme.tail_gaps:
            poly = scheme.domain[pid]
            seg = (poly.point_at(lo), poly.point_at(hi))
            budget = max((_budget_at(pc, poly, seg) for pc in pieces if pc.polygon == pid), default=0.0)
            if budget > 0:
                mid = Point2(0.5 * (seg[0].x + seg[1].x), 0.5 * (seg[0].y + seg[1].y))
                ext = (0.5 * abs(seg[1].x - seg[0].x), 0.5 * abs(seg[1].y - seg[0].y))
                extra.heap.append((-budget, -len(extra.heap) - 1, BallPiece(pid, mid, budget, "tail", ext)))
        heapq.heapify(extra.heap)
        if extra.heap:
            more = extra.run()
            base = pieces_area(scheme, pieces)
            bound += max(pieces_area(scheme, pieces + more) - base, 0.0) + extra.dropped_area
    cclass = None
    if c.s is not None:
        cclass = classify_point(scheme, BoundaryPoint(c.polygon, c.s))
    return BallDecomposition(c, r, tuple(pieces), bound, cclass, eps_min)


def ball_contains(scheme: PairingScheme, decomposition: BallDecomposition, q: Location) -> bool:
    rq = resolve(scheme, q)
    return any(pc.polygon == rq.polygon and pc.contains(rq.xy) for pc in decomposition.pieces)


def ball_oracle(scheme: PairingScheme, center: Location, r: float, h: float) -> tuple[BallPiece, ...]:
    """The set {q : chain distance(center, q) < r} on the sampled chain graph,
    as boxes around every reached node (max metric, rectangular polygons)."""
    require_rectangles(scheme)
    xy, poly, budget = reach(scheme, center, r, h, Metric.MAX)
    ids = scheme.domain.ids
    return tuple(BallPiece(ids[int(k)], Point2(float(x), float(y)), float(b), "oracle")
                 for (x, y), k, b in zip(xy, poly, budget))


def symmetric_difference_area(scheme: PairingScheme, a, b) -> float:
    ra, rb = pieces_by_polygon(scheme, a), pieces_by_polygon(scheme, b)
    total = 0.0
    for pid in set(ra) | set(rb):
        xa = ra.get(pid, np.zeros((0, 4)))
        xb = rb.get(pid, np.zeros((0, 4)))
        total += 2 * union_area(np.vstack([xa, xb])) - union_area(xa) - union_area(xb)
    return max(total, 0.0)


def spawn_schedule(scheme: PairingScheme, side: int, r: float, center: int | None = None) -> list[tuple[int, float]]:
    """Closed-form radii of the pieces spawned along a Type W side.

    Index i names the class of the lower endpoint of alpha_i'. With ``center``
    None the ball is centred at the accumulation point and piece i has radius
    r - sum_{n>i} a_n; with ``center = s`` it is centred at the class s and
    piece j has radius r minus the arc distance between the two endpoints.
    Only positive radii are listed (the open ball excludes radius 0).
    """
    if not 0 <= side < len(scheme.w_specs):
        raise DomainError(f"side {side} carries no Type W identification")
    w = scheme.w_specs[side]
    n = w.n_terms
    a = w.a.terms(n)
    prefix = np.concatenate([[0.0], np.cumsum(a)])  # prefix[i + 1] = S_i
    out = []
    if center is None:
        if not w.infinite:
            raise DomainError("a finite Type W has no accumulation point")
        for i in range(n):
            rad = r - w.a.tail_sum(i + 1)
            if rad > 0:
                out.append((i, rad))
        return out
    if not 0 <= center < n:
        raise DomainError(f"conic index {center} outside 0..{n - 1}")
    for j in range(n):
        if j == center:
            continue
        rad = r - abs(prefix[j + 1] - prefix[center + 1])
        if rad > 0:
            out.append((j, rad))
    return out


def pieces_csv(decomposition: BallDecomposition) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cx", "cy", "r", "polygon", "provenance", "hx", "hy"])
    for pc in decomposition.pieces:
        w.writerow([f"{pc.center.x:.12g}", f"{pc.center.y:.12g}", f"{pc.radius:.12g}", pc.polygon,
                    pc.provenance, f"{pc.half_extent[0]:.12g}", f"{pc.half_extent[1]:.12g}"])
    return buf.getvalue()
