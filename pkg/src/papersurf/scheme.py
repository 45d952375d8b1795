"""Pairing schemes: segment pairings, Type W generators, fold chains, validity
checks, identification classes and cone angles."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError, SchemeError
from .geometry import MultiPolygon, Point2, Polygon

TOL = 1e-10


@dataclass(frozen=True)
class BoundaryPoint:
    polygon: str
    s: float


@dataclass(frozen=True)
class SegmentPairing:
    """Identifies ``a_start + t`` with ``b_start + length - t`` for t in [0, length]."""

    a_polygon: str
    a_start: float
    b_polygon: str
    b_start: float
    length: float
    label: str = ""
    merge: bool = False

    @property
    def a_end(self) -> float:
        return self.a_start + self.length

    @property
    def b_end(self) -> float:
        return self.b_start + self.length

    def half(self, side: int) -> tuple[str, float, float]:
        if side == 0:
            return self.a_polygon, self.a_start, self.a_end
        return self.b_polygon, self.b_start, self.b_end

    def partner(self, side: int, s: float) -> tuple[str, float]:
        """Image of coordinate ``s`` on half ``side`` (0 = a, 1 = b)."""
        if side == 0:
            return self.b_polygon, self.b_start + self.length - (s - self.a_start)
        return self.a_polygon, self.a_start + self.length - (s - self.b_start)


@dataclass(frozen=True)
class SequenceSpec:
    """A non-negative sequence: an explicit list, or an explicit head followed by
    a geometric tail ``first * ratio**-k``."""

    kind: str = "list"
    values: tuple[float, ...] = ()
    first: float = 0.0
    ratio: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.kind not in ("list", "geometric"):
            raise DomainError(f"unknown sequence kind {self.kind!r}")

    @classmethod
    def geometric(cls, first: float, ratio: float, head: Sequence[float] = ()) -> "SequenceSpec":
        return cls("geometric", tuple(head), float(first), float(ratio))

    @classmethod
    def of(cls, values: Sequence[float]) -> "SequenceSpec":
        return cls("list", tuple(values))

    @property
    def infinite(self) -> bool:
        return self.kind == "geometric"

    @property
    def is_zero(self) -> bool:
        return self.kind == "list" and all(v == 0 for v in self.values)

    def __len__(self) -> int:
        if self.infinite:
            raise TypeError("infinite sequence has no length")
        return len(self.values)

    def term(self, i: int) -> float:
        if i < len(self.values):
            return self.values[i]
        if self.kind == "list":
            return 0.0
        return self.first * self.ratio ** -(i - len(self.values))

    def terms(self, n: int) -> list[float]:
        return [self.term(i) for i in range(n)]

    def total(self) -> float:
        tail = self.first * self.ratio / (self.ratio - 1.0) if self.infinite else 0.0
        return math.fsum(self.values) + tail

    def tail_sum(self, n: int) -> float:
        """Sum of the terms with index >= n."""
        head = math.fsum(self.values[n:])
        if not self.infinite:
            return head
        k = max(n - len(self.values), 0)
        return head + self.first * self.ratio ** -k * self.ratio / (self.ratio - 1.0)

    def problems(self, name: str) -> list[str]:
        out = []
        if any(v < 0 or not math.isfinite(v) for v in self.values):
            out.append(f"{name}: negative or non-finite term")
        if self.infinite and not (self.first > 0 and self.ratio > 1):
            out.append(f"{name}: geometric tail needs first > 0 and ratio > 1")
        return out


@dataclass(frozen=True)
class TypeWSpec:
    """Alternating pairings down one side: alpha_i, beta_i, beta_i' from the
    top, matched by alpha_i' climbing from the bottom."""

    polygon: str
    side_start: float
    side_len: float
    a: SequenceSpec
    b: SequenceSpec = SequenceSpec()
    depth: int = 30

    @property
    def infinite(self) -> bool:
        return self.a.infinite

    @property
    def n_terms(self) -> int:
        return self.depth if self.infinite else len(self.a)

    def positions(self, n: int | None = None) -> tuple[list[float], list[float], list[float]]:
        """(A_i, a_i, b_i) for i < n, with A_i measured from side_start."""
        n = self.n_terms if n is None else n
        a, b = self.a.terms(n), self.b.terms(n)
        starts, acc = [], 0.0
        for ai, bi in zip(a, b):
            starts.append(acc)
            acc += ai + 2 * bi
        return starts, a, b

    @property
    def accumulation(self) -> float | None:
        if not self.infinite:
            return None
        return self.side_start + self.side_len - self.a.total()

    def expand(self) -> list[SegmentPairing]:
        starts, a, b = self.positions()
        out = []
        top, s_prev = self.side_start, 0.0
        for i, (Ai, ai, bi) in enumerate(zip(starts, a, b)):
            s_i = s_prev + ai
            out.append(SegmentPairing(self.polygon, top + Ai, self.polygon,
                                      top + self.side_len - s_i, ai, f"alpha{i}"))
            if bi > 0:
                out.append(SegmentPairing(self.polygon, top + Ai + ai, self.polygon,
                                          top + Ai + ai + bi, bi, f"beta{i}"))
            s_prev = s_i
        return out

    def tail_gap(self) -> tuple[float, float] | None:
        """Unexpanded arc left between the last emitted pieces."""
        if not self.infinite:
            return None
        starts, a, b = self.positions()
        lo = self.side_start + starts[-1] + a[-1] + 2 * b[-1]
        hi = self.side_start + self.side_len - math.fsum(a)
        return lo, hi

    def tail_length(self) -> float:
        gap = self.tail_gap()
        return 0.0 if gap is None else gap[1] - gap[0]

    def problems(self, poly: Polygon | None) -> list[str]:
        tag = f"W spec on {self.polygon}@{self.side_start:g}"
        out = self.a.problems(f"{tag} a") + self.b.problems(f"{tag} b")
        if self.side_len <= 0:
            out.append(f"{tag}: side length must be positive")
        if self.infinite and self.depth < 1:
            out.append(f"{tag}: depth must be >= 1")
        if not self.infinite and not self.a.values:
            out.append(f"{tag}: empty a sequence")
        if any(v <= 0 for v in self.a.values) or (self.a.infinite and self.a.first <= 0):
            out.append(f"{tag}: a terms must be positive")
        if not self.b.is_zero:
            if self.b.infinite != self.a.infinite:
                out.append(f"{tag}: a and b must both be finite or both infinite")
            if any(v <= 0 for v in self.b.values):
                out.append(f"{tag}: b terms must be positive unless b is identically 0")
            if not self.b.infinite and not self.a.infinite and len(self.b) != len(self.a):
                out.append(f"{tag}: finite a and b must have equal lengths")
        total = self.a.total() + self.b.total()
        if abs(total - self.side_len / 2) > 1e-9:
            out.append(f"{tag}: sum(a) + sum(b) = {total:.12g}, side needs {self.side_len / 2:.12g}")
        if poly is not None and not poly.arc_span_on_edge(self.side_start, self.side_start + self.side_len):
            out.append(f"{tag}: side does not lie on a single edge")
        return out


@dataclass(frozen=True)
class FoldChainSpec:
    """Consecutive folds of lengths a_i starting at ``start`` and running in
    ``direction`` (+1 with the orientation, -1 against it)."""

    polygon: str
    start: float
    direction: int
    a: SequenceSpec
    depth: int = 24

    @property
    def infinite(self) -> bool:
        return self.a.infinite

    @property
    def n_terms(self) -> int:
        return self.depth if self.infinite else len(self.a)

    def junctions(self) -> list[float]:
        """Fold endpoints c_0, ..., c_n (unwrapped arc coordinates)."""
        c = [self.start]
        for ai in self.a.terms(self.n_terms):
            c.append(c[-1] + self.direction * 2 * ai)
        return c

    @property
    def accumulation(self) -> float | None:
        if not self.infinite:
            return None
        return self.start + self.direction * 2 * self.a.total()

    def expand(self) -> list[SegmentPairing]:
        out = []
        c = self.junctions()
        for i, ai in enumerate(self.a.terms(self.n_terms)):
            lo = min(c[i], c[i + 1])
            out.append(SegmentPairing(self.polygon, lo, self.polygon, lo + ai, ai, f"fold{i}"))
        return out

    def tail_gap(self) -> tuple[float, float] | None:
        if not self.infinite:
            return None
        end, acc = self.junctions()[-1], self.accumulation
        return (min(end, acc), max(end, acc))

    def tail_length(self) -> float:
        gap = self.tail_gap()
        return 0.0 if gap is None else gap[1] - gap[0]

    def problems(self, poly: Polygon | None) -> list[str]:
        tag = f"fold chain on {self.polygon}@{self.start:g}"
        out = self.a.problems(tag)
        if self.direction not in (1, -1):
            out.append(f"{tag}: direction must be +1 or -1")
        if self.infinite and self.depth < 1:
            out.append(f"{tag}: depth must be >= 1")
        if any(v <= 0 for v in self.a.values):
            out.append(f"{tag}: fold lengths must be positive")
        if poly is not None and 2 * self.a.total() > poly.perimeter + 1e-9:
            out.append(f"{tag}: folds exceed the perimeter")
        return out


@dataclass(frozen=True)
class HalfSegment:
    polygon: str
    lo: float
    hi: float
    pairing: int
    side: int


@dataclass(frozen=True)
class PointClass:
    representative: BoundaryPoint
    members: tuple[BoundaryPoint, ...]
    kind: str
    valence: int
    cone_angle: float | None
    infinite: bool = False

    @property
    def label(self) -> str:
        return f"regular-vertex({self.valence})" if self.kind == "regular-vertex" else self.kind

    @property
    def singular(self) -> bool:
        return self.kind.startswith("singular")


@dataclass(frozen=True)
class FullnessReport:
    total_pairing_len: float
    boundary_len: float
    ok: bool


@dataclass(frozen=True)
class LinkReport:
    plain: bool
    witness: tuple[tuple[BoundaryPoint, BoundaryPoint], tuple[BoundaryPoint, BoundaryPoint]] | None = None
    reason: str = ""


@dataclass(frozen=True)
class PairingScheme:
    domain: MultiPolygon
    basic: tuple[SegmentPairing, ...] = ()
    w_specs: tuple[TypeWSpec, ...] = ()
    chains: tuple[FoldChainSpec, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "basic", tuple(self.basic))
        object.__setattr__(self, "w_specs", tuple(self.w_specs))
        object.__setattr__(self, "chains", tuple(self.chains))

    # -- expansion ----------------------------------------------------------
    @cached_property
    def expanded(self) -> tuple[SegmentPairing, ...]:
        out = [replace(p, a_start=self._wrap(p.a_polygon, p.a_start),
                       b_start=self._wrap(p.b_polygon, p.b_start)) for p in self.basic]
        for k, w in enumerate(self.w_specs):
            out += [replace(p, label=f"W{k}:{p.label}") for p in w.expand()]
        for k, c in enumerate(self.chains):
            out += [replace(p, a_start=self._wrap(p.a_polygon, p.a_start),
                            b_start=self._wrap(p.b_polygon, p.b_start), label=f"F{k}:{p.label}")
                    for p in c.expand()]
        return tuple(out)

    def _wrap(self, pid: str, s: float) -> float:
        if pid not in self.domain.by_id:
            return s
        return self.domain[pid].wrap(s)

    @cached_property
    def halves(self) -> dict[str, list[HalfSegment]]:
        out: dict[str, list[HalfSegment]] = {pid: [] for pid in self.domain.ids}
        for k, p in enumerate(self.expanded):
            for side in (0, 1):
                pid, lo, hi = p.half(side)
                out.setdefault(pid, []).append(HalfSegment(pid, lo, hi, k, side))
        for pid in out:
            out[pid].sort(key=lambda h: (h.lo, h.hi))
        return out

    @cached_property
    def _half_arrays(self) -> dict[str, tuple[np.ndarray, np.ndarray, list[HalfSegment]]]:
        return {pid: (np.array([h.lo for h in hs]), np.array([h.hi for h in hs]), hs)
                for pid, hs in self.halves.items()}

    def halves_at(self, pid: str, s: float, tol: float = TOL) -> list[HalfSegment]:
        """Half-segments whose closed arc contains ``s`` (modulo the perimeter)."""
        lo, hi, hs = self._half_arrays[pid]
        if not hs:
            return []
        per = self.domain[pid].perimeter
        s = s % per
        hit = ((lo - tol <= s) & (s <= hi + tol)) | ((lo - tol <= s + per) & (s + per <= hi + tol))
        return [hs[i] for i in np.nonzero(hit)[0]]

    def image(self, half: HalfSegment, s: float) -> BoundaryPoint:
        per = self.domain[half.polygon].perimeter
        if s < half.lo - TOL:
            s += per
        pid, t = self.expanded[half.pairing].partner(half.side, s)
        return BoundaryPoint(pid, self.domain[pid].wrap(t))

    @property
    def specs(self) -> tuple:
        return self.w_specs + self.chains

    @cached_property
    def singular_points(self) -> tuple[BoundaryPoint, ...]:
        return tuple(BoundaryPoint(s.polygon, self.domain[s.polygon].wrap(s.accumulation))
                     for s in self.specs if s.infinite)

    @cached_property
    def limit_links(self) -> tuple[tuple[BoundaryPoint, BoundaryPoint], ...]:
        """Zero-distance identifications forced by the metric closure: the
        junctions of an infinite fold chain are all identified and converge to
        its accumulation point."""
        return tuple(
            (BoundaryPoint(c.polygon, self.domain[c.polygon].wrap(c.accumulation)),
             BoundaryPoint(c.polygon, self.domain[c.polygon].wrap(c.start)))
            for c in self.chains if c.infinite)

    @cached_property
    def tail_gaps(self) -> tuple[tuple[str, float, float], ...]:
        out = []
        for spec in self.specs:
            gap = spec.tail_gap()
            if gap is not None:
                out.append((spec.polygon, gap[0], gap[1]))
        return tuple(out)

    @property
    def tail_length(self) -> float:
        return sum(hi - lo for _, lo, hi in self.tail_gaps)

    def with_depth(self, depth: int) -> "PairingScheme":
        return replace(self, w_specs=tuple(replace(w, depth=depth) if w.infinite else w for w in self.w_specs),
                       chains=tuple(replace(c, depth=depth) if c.infinite else c for c in self.chains))

    @property
    def total_pairing_length(self) -> float:
        total = math.fsum(p.length for p in self.basic)
        total += math.fsum(w.a.total() + w.b.total() for w in self.w_specs)
        total += math.fsum(c.a.total() for c in self.chains)
        return total

    # -- validation ---------------------------------------------------------
    def diagnostics(self) -> list[str]:
        out = []
        dom = self.domain
        for k, p in enumerate(self.basic):
            tag = f"pairing {k}{' (' + p.label + ')' if p.label else ''}"
            if p.length <= 0:
                out.append(f"{tag}: length must be positive")
                continue
            for side in (0, 1):
                pid, lo, hi = p.half(side)
                if pid not in dom.by_id:
                    out.append(f"{tag}: unknown polygon {pid!r}")
                    continue
                poly = dom[pid]
                if not (-TOL <= lo < poly.perimeter):
                    out.append(f"{tag}: start {lo:g} outside [0, {poly.perimeter:g}) of {pid}")
                elif not poly.arc_span_on_edge(poly.wrap(lo), poly.wrap(lo) + p.length):
                    out.append(f"{tag}: segment [{lo:g}, {hi:g}] on {pid} crosses a vertex")
        for spec in self.specs:
            if spec.polygon not in dom.by_id:
                out.append(f"{type(spec).__name__}: unknown polygon {spec.polygon!r}")
                continue
            out += spec.problems(dom[spec.polygon])
        if out:
            return out
        for p in self.expanded[len(self.basic):]:
            for side in (0, 1):
                pid, lo, hi = p.half(side)
                poly = dom[pid]
                if not poly.arc_span_on_edge(lo, hi):
                    out.append(f"{p.label}: segment [{lo:g}, {hi:g}] on {pid} crosses a vertex")
        # interiors of all segments and tails must be pairwise disjoint
        for pid in dom.ids:
            per = dom[pid].perimeter
            arcs = [(h.lo, h.hi, self.expanded[h.pairing].label or f"pairing {h.pairing}")
                    for h in self.halves.get(pid, [])]
            arcs += [(lo % per, lo % per + hi - lo, "unexpanded tail") for q, lo, hi in self.tail_gaps if q == pid]
            arcs.sort()
            for (l0, h0, n0), (l1, h1, n1) in zip(arcs, arcs[1:]):
                if l1 < h0 - 1e-9:
                    out.append(f"{n0} and {n1} overlap on {pid} near s={l1:g}")
            if arcs and arcs[-1][1] - per > arcs[0][0] + 1e-9:
                out.append(f"{arcs[-1][2]} wraps onto {arcs[0][2]} on {pid}")
        return out

    def validate(self) -> "PairingScheme":
        problems = self.diagnostics()
        if problems:
            raise SchemeError(problems)
        return self

    # -- locating points ----------------------------------------------------
    def boundary_point(self, pid: str, p: Sequence[float], tol: float = 1e-9) -> BoundaryPoint | None:
        s = self.domain[pid].locate(p, tol)
        return None if s is None else BoundaryPoint(pid, s)

    def point(self, bp: BoundaryPoint) -> Point2:
        return self.domain[bp.polygon].point_at(bp.s)


# -- identification -----------------------------------------------------------

def _same(scheme: PairingScheme, p: BoundaryPoint, q: BoundaryPoint) -> bool:
    if p.polygon != q.polygon:
        return False
    per = scheme.domain[p.polygon].perimeter
    d = abs(p.s - q.s) % per
    return min(d, per - d) <= 1e-9


def _walk_class(scheme: PairingScheme, p: BoundaryPoint, use_links: bool = True) -> tuple[list[BoundaryPoint], bool]:
    cap = 10 * max(len(scheme.expanded), 1) + 10
    members = [p]
    queue = deque([p])
    links = scheme.limit_links if use_links else ()
    capped = False
    while queue:
        x = queue.popleft()
        nbrs = [scheme.image(h, x.s) for h in scheme.halves_at(x.polygon, x.s)]
        for u, v in links:
            if _same(scheme, x, u):
                nbrs.append(v)
            elif _same(scheme, x, v):
                nbrs.append(u)
        for y in nbrs:
            if not any(_same(scheme, y, m) for m in members):
                if len(members) >= cap:
                    capped = True
                    queue.clear()
                    break
                members.append(y)
                queue.append(y)
    return members, capped


def _in_gap(scheme: PairingScheme, p: BoundaryPoint) -> bool:
    per = scheme.domain[p.polygon].perimeter
    for pid, lo, hi in scheme.tail_gaps:
        if pid == p.polygon:
            for s in (p.s, p.s + per):
                if lo + 1e-9 < s < hi - 1e-9:
                    return True
    return False


def _is_accumulation(scheme: PairingScheme, p: BoundaryPoint) -> bool:
    return any(_same(scheme, p, q) for q in scheme.singular_points)


def _deepen(scheme: PairingScheme, p: BoundaryPoint, max_depth: int = 400) -> PairingScheme:
    """Expand infinite specs until ``p`` is no longer inside an unexpanded tail."""
    depth = max([s.depth for s in scheme.specs if s.infinite], default=0)
    while _in_gap(scheme, p) and not _is_accumulation(scheme, p) and depth < max_depth:
        depth = min(2 * depth, max_depth)
        scheme = scheme.with_depth(depth)
    return scheme


def _check_on_boundary(scheme: PairingScheme, p: BoundaryPoint) -> BoundaryPoint:
    if p.polygon not in scheme.domain.by_id:
        raise DomainError(f"unknown polygon {p.polygon!r}")
    return BoundaryPoint(p.polygon, scheme.domain[p.polygon].wrap(p.s))


def identify(scheme: PairingScheme, p: BoundaryPoint) -> tuple[BoundaryPoint, ...]:
    return classify_point(scheme, p).members


def _vertex_angle(scheme: PairingScheme, bp: BoundaryPoint) -> float:
    poly = scheme.domain[bp.polygon]
    for i, s in enumerate(poly.edge_starts):
        if min(abs(bp.s - s), abs(bp.s - s - poly.perimeter)) <= 1e-9:
            return poly.interior_angles[i]
    return math.pi


def is_vertex(scheme: PairingScheme, bp: BoundaryPoint) -> bool:
    poly = scheme.domain[bp.polygon]
    return any(min(abs(bp.s - s), abs(bp.s - s - poly.perimeter)) <= 1e-9 for s in poly.edge_starts)


def classify_point(scheme: PairingScheme, p: BoundaryPoint) -> PointClass:
    p = _check_on_boundary(scheme, p)
    scheme = _deepen(scheme, p)
    members, capped = _walk_class(scheme, p)
    members_t = tuple(members)
    if any(_is_accumulation(scheme, m) for m in members):
        return PointClass(p, members_t, "singular-accumulation", len(members), None, True)
    junctions = {BoundaryPoint(c.polygon, scheme.domain[c.polygon].wrap(c.start)) for c in scheme.chains if c.infinite}
    if capped or any(_same(scheme, m, j) for m in members for j in junctions):
        return PointClass(p, members_t, "singular-infinite-vertex", len(members), None, True)
    angle = sum(_vertex_angle(scheme, m) for m in members)
    vertex = any(is_vertex(scheme, m) for m in members)
    if len(members) == 2 and not vertex:
        return PointClass(p, members_t, "planar", 2, angle)
    return PointClass(p, members_t, "regular-vertex", len(members), angle)


# -- global checks --------------------------------------------------------------

def check_full(scheme: PairingScheme, tol: float = 1e-9) -> FullnessReport:
    total = scheme.total_pairing_length
    boundary = scheme.domain.boundary_length
    return FullnessReport(total, boundary, abs(total - boundary / 2) <= tol)


def _alternate(x1: float, y1: float, x2: float, y2: float, tol: float = 1e-12) -> bool:
    """Chords {x1,y1} and {x2,y2} strictly alternate around the circle."""
    lo, hi = min(x1, y1), max(x1, y1)
    if hi - lo <= tol:
        return False
    pts = (x2, y2)
    if any(abs(q - lo) <= tol or abs(q - hi) <= tol for q in pts):
        return False
    inside = [lo < q < hi for q in pts]
    return inside[0] != inside[1]


def _merged_coordinates(scheme: PairingScheme):
    """Walk the boundary of the polygon obtained by gluing along the pairings
    flagged ``merge``. Returns (pieces, length) where each piece is
    (polygon, s_from, s_to, u_from) in unwrapped arc coordinates."""
    dom = scheme.domain
    portals: dict[str, list[tuple[float, str, float]]] = {pid: [] for pid in dom.ids}
    for p in scheme.expanded:
        if p.merge:
            portals[p.a_polygon].append((p.a_start, p.b_polygon, p.b_end))
            portals[p.b_polygon].append((p.b_start, p.a_polygon, p.a_end))
    for v in portals.values():
        v.sort()
    inside_merge = set()
    for p in scheme.expanded:
        if p.merge:
            inside_merge.add((p.a_polygon, p.a_start, p.a_end))
            inside_merge.add((p.b_polygon, p.b_start, p.b_end))

    def in_portal(pid, s):
        per = dom[pid].perimeter
        return any(q == pid and (lo - 1e-12 < s % per < hi - 1e-12) for q, lo, hi in inside_merge)

    start_pid = dom.ids[0]
    s0 = next((c for c in [0.0] + [float(x) for x in dom[start_pid].edge_starts]
               + [h.lo for h in scheme.halves[start_pid]] if not in_portal(start_pid, c)), None)
    if s0 is None:
        return None, 0.0
    pieces = []
    pid, s, u = start_pid, s0, 0.0
    for _ in range(4 * len(scheme.expanded) + 8):
        per = dom[pid].perimeter
        nxt = None
        for ps, qid, qs in portals[pid]:
            d = (ps - s) % per
            if d < -1e-12:
                continue
            if nxt is None or d < nxt[0]:
                nxt = (d, ps, qid, qs)
        if pid == start_pid and pieces:
            d0 = (s0 - s) % per
            if nxt is None or d0 <= nxt[0] + 1e-12:
                pieces.append((pid, s, s + d0, u))
                return pieces, u + d0
        if nxt is None:
            d0 = (s0 - s) % per
            pieces.append((pid, s, s + d0, u))
            return pieces, u + d0
        d, ps, qid, qs = nxt
        if d > 1e-12:
            pieces.append((pid, s, s + d, u))
            u += d
        pid, s = qid, dom[qid].wrap(qs)
    return None, 0.0


def check_unlinked(scheme: PairingScheme) -> LinkReport:
    dom = scheme.domain
    if not check_full(scheme).ok:
        return LinkReport(False, None, "scheme is not full")
    has_merge = any(p.merge for p in scheme.expanded)
    if len(dom.polygons) > 1 and not has_merge:
        return LinkReport(False, None, "multipolygon without merge flags")
    if has_merge:
        pieces, total = _merged_coordinates(scheme)
        covered = {pc[0] for pc in pieces} if pieces else set()
        if pieces is None or covered != set(dom.ids):
            return LinkReport(False, None, "merge pairings do not join the polygons into one")

        def coord(pid, s):
            per = dom[pid].perimeter
            for q, a, b, u in pieces:
                if q != pid:
                    continue
                for ss in (s, s + per, s - per):
                    if a - 1e-9 <= ss <= b + 1e-9:
                        return u + ss - a
            return None
    else:
        def coord(pid, s):
            return dom[pid].wrap(s)

    chords = []
    for k, p in enumerate(scheme.expanded):
        if p.merge:
            continue
        for t in (0.0, 0.5 * p.length, p.length):
            x = coord(p.a_polygon, p.a_start + t)
            y = coord(p.b_polygon, p.b_end - t)
            if x is None or y is None:
                return LinkReport(False, None, f"pairing {p.label or k} lies inside a merged seam")
            chords.append((k, x, y, t))
    for i, (k1, x1, y1, t1) in enumerate(chords):
        for k2, x2, y2, t2 in chords[i + 1:]:
            if k1 != k2 and _alternate(x1, y1, x2, y2):
                p1, p2 = scheme.expanded[k1], scheme.expanded[k2]
                w = ((BoundaryPoint(p1.a_polygon, p1.a_start + t1), BoundaryPoint(p1.b_polygon, p1.b_end - t1)),
                     (BoundaryPoint(p2.a_polygon, p2.a_start + t2), BoundaryPoint(p2.b_polygon, p2.b_end - t2)))
                return LinkReport(False, w, "linked pairings")
    return LinkReport(True)


def split_pairing(scheme: PairingScheme, pairing: int | SegmentPairing, t: float) -> PairingScheme:
    """Replace a basic pairing by two sub-pairings inducing the same relation."""
    idx = scheme.basic.index(pairing) if isinstance(pairing, SegmentPairing) else int(pairing)
    if not 0 <= idx < len(scheme.basic):
        raise DomainError(f"no basic pairing with index {idx}")
    p = scheme.basic[idx]
    if not (TOL < t < p.length - TOL):
        raise DomainError(f"split parameter {t} is not strictly inside (0, {p.length})")
    first = replace(p, b_start=p.b_start + p.length - t, length=t)
    second = replace(p, a_start=p.a_start + t, length=p.length - t)
    basic = scheme.basic[:idx] + (first, second) + scheme.basic[idx + 1:]
    return replace(scheme, basic=basic)


def iter_class_points(scheme: PairingScheme) -> Iterator[BoundaryPoint]:
    """Every pairing endpoint, once."""
    seen: list[BoundaryPoint] = []
    for p in scheme.expanded:
        for pid, s in ((p.a_polygon, p.a_start), (p.a_polygon, p.a_end), (p.b_polygon, p.b_start), (p.b_polygon, p.b_end)):
            bp = BoundaryPoint(pid, scheme.domain[pid].wrap(s))
            if not any(_same(scheme, bp, q) for q in seen):
                seen.append(bp)
                yield bp
