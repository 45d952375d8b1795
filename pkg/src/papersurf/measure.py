"""Areas of ball preimages and the Ahlfors-regularity scan.

H^2 is represented by Lebesgue area of the preimage; the dimensional constant
is dropped since regularity does not see it.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .balls import BallPiece, decompose_ball, pieces_by_polygon
from .errors import DomainError
from .geometry import Point2
from .quotient import Location, resolve
from .rects import union_area as _rect_union_area
from .scheme import BoundaryPoint, PairingScheme, TypeWSpec, classify_point, iter_class_points

MC_SEED = 20240607
MC_REL_SE = 0.005


@dataclass(frozen=True)
class AreaEstimate:
    value: float
    stderr: float = 0.0
    exact: bool = True
    seed: int | None = None


def _mc_area(member: Callable[[np.ndarray], np.ndarray], box, seed: int,
             rel_se: float = MC_REL_SE, grid: int = 64, max_rounds: int = 400) -> AreaEstimate:
    """Stratified Monte-Carlo area of {p in box : member(p)}: one point per
    cell of a grid x grid stratification per round, until the standard error
    drops below ``rel_se`` of the estimate."""
    x0, x1, y0, y1 = box
    cell_w, cell_h = (x1 - x0) / grid, (y1 - y0) / grid
    if cell_w <= 0 or cell_h <= 0:
        return AreaEstimate(0.0, 0.0, False, seed)
    rng = np.random.default_rng(seed)
    ii, jj = np.meshgrid(np.arange(grid), np.arange(grid), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    full = (x1 - x0) * (y1 - y0)
    hits = np.zeros(grid * grid)
    rounds = 0
    while rounds < max_rounds:
        u = rng.random((grid * grid, 2))
        pts = np.column_stack([x0 + (ii + u[:, 0]) * cell_w, y0 + (jj + u[:, 1]) * cell_h])
        hits += member(pts)
        rounds += 1
        if rounds < 4:
            continue
        p = hits / rounds
        value = full * p.mean()
        # per-stratum Bernoulli variance, pooled
        se = full * math.sqrt(float(np.sum(p * (1 - p))) / (grid * grid) ** 2 / max(rounds - 1, 1))
        if value == 0.0 or se <= rel_se * value:
            return AreaEstimate(value, se, False, seed)
    p = hits / rounds
    value = full * p.mean()
    se = full * math.sqrt(float(np.sum(p * (1 - p))) / (grid * grid) ** 2 / max(rounds - 1, 1))
    return AreaEstimate(value, se, False, seed)


def union_area_estimate(pieces: Iterable[BallPiece], scheme: PairingScheme | None = None,
                        seed: int = MC_SEED) -> AreaEstimate:
    """Area of the union of pieces, each clipped to its polygon.

    Exact on axis-aligned rectangles; other polygons fall back to stratified
    Monte-Carlo with the seed recorded in the result."""
    pieces = list(pieces)
    if not pieces:
        return AreaEstimate(0.0)
    if scheme is None:
        groups: dict[str, list] = {}
        for pc in pieces:
            groups.setdefault(pc.polygon, []).append(pc.box)
        return AreaEstimate(sum(_rect_union_area(np.array(v)) for v in groups.values()))
    if all(scheme.domain[pc.polygon].is_axis_rectangle for pc in pieces):
        return AreaEstimate(sum(_rect_union_area(r) for r in pieces_by_polygon(scheme, pieces).values()))
    value, var, exact = 0.0, 0.0, True
    for pid, rects in pieces_by_polygon(scheme, pieces).items():
        poly = scheme.domain[pid]
        if poly.is_axis_rectangle:
            value += _rect_union_area(rects)
            continue
        exact = False
        box = (rects[:, 0].min(), rects[:, 1].max(), rects[:, 2].min(), rects[:, 3].max())

        def member(pts, rects=rects, poly=poly):
            inside = ((pts[:, None, 0] > rects[None, :, 0]) & (pts[:, None, 0] < rects[None, :, 1])
                      & (pts[:, None, 1] > rects[None, :, 2]) & (pts[:, None, 1] < rects[None, :, 3])).any(axis=1)
            out = np.zeros(len(pts), dtype=bool)
            if inside.any():
                out[inside] = poly.contains_points(pts[inside])
            return out

        est = _mc_area(member, box, seed)
        value += est.value
        var += est.stderr ** 2
    return AreaEstimate(value, math.sqrt(var), exact, None if exact else seed)


def union_area(pieces: Iterable[BallPiece], scheme: PairingScheme | None = None, seed: int = MC_SEED) -> float:
    return union_area_estimate(pieces, scheme, seed).value


@dataclass(frozen=True)
class BallArea:
    area: float
    tail_bound: float
    pieces: int

    @property
    def upper(self) -> float:
        return self.area + self.tail_bound


def ball_area(scheme: PairingScheme, center: Location, r: float) -> BallArea:
    """Area of the decomposed ball; the part hidden in unexpanded tails is
    bounded separately."""
    d = decompose_ball(scheme, center, r)
    return BallArea(union_area(d.pieces, scheme), d.tail_area_bound, len(d.pieces))


# -- constants ------------------------------------------------------------------

def lemma_constant(total_area: float, r0: float, c0: float, Q: float = 2.0) -> float:
    """Extension of a small-scale regularity constant to all radii."""
    if r0 <= 0 or c0 <= 0:
        raise DomainError("r0 and c0 must be positive")
    return max(c0, total_area / r0 ** Q)


def scale_constants(scheme: PairingScheme) -> tuple[float, float, float]:
    """(d_min, K, r0) with K = diam / d_min and r0 = diam / 2K = d_min / 2."""
    d_min = scheme.domain.d_min()
    diam = scheme.domain.diam()
    K = diam / d_min
    return d_min, K, diam / (2 * K)


@dataclass(frozen=True)
class SequenceConstants:
    K_tail: float      # sup_n sum_{i>n} b_i / sum_{i>n} a_i
    K_window: float    # sup over windows n < i < k of sum b_i / sum a_i
    p: float           # b_0 / a_0; any larger p gives p a_0 > b_0
    n_terms: int


def sequence_constants(w: TypeWSpec, depth: int | None = None) -> SequenceConstants:
    n = depth or w.n_terms
    a = np.array(w.a.terms(n))
    b = np.array(w.b.terms(n))
    if w.infinite:
        tails_a = np.array([w.a.tail_sum(i) for i in range(1, n + 1)])
        tails_b = np.array([w.b.tail_sum(i) for i in range(1, n + 1)])
    else:
        tails_a = np.cumsum(a[::-1])[::-1][1:]
        tails_b = np.cumsum(b[::-1])[::-1][1:]
    ok = tails_a > 0
    k_tail = float(np.max(tails_b[ok] / tails_a[ok])) if ok.any() else 0.0
    ca = np.concatenate([[0.0], np.cumsum(a)])
    cb = np.concatenate([[0.0], np.cumsum(b)])
    sa = ca[None, :] - ca[:, None]
    sb = cb[None, :] - cb[:, None]
    mask = sa > 0
    k_win = float(np.max(sb[mask] / sa[mask])) if mask.any() else 0.0
    p = float(b[0] / a[0]) if len(a) and a[0] > 0 else 0.0
    return SequenceConstants(k_tail, k_win, p, len(a))


# -- centers --------------------------------------------------------------------

@dataclass(frozen=True)
class Center:
    polygon: str
    xy: Point2
    kind: str  # interior | planar | vertex | conic | accumulation | singular

    @property
    def location(self) -> tuple[str, Point2]:
        return (self.polygon, self.xy)


def center_kind(scheme: PairingScheme, loc: Location) -> str:
    c = resolve(scheme, loc)
    if c.s is None:
        return "interior"
    pc = classify_point(scheme, BoundaryPoint(c.polygon, c.s))
    if pc.kind == "singular-accumulation":
        return "accumulation"
    if pc.singular:
        return "singular"
    if pc.kind == "planar":
        return "planar"
    return "vertex" if abs(pc.cone_angle - 2 * math.pi) < 1e-9 else "conic"


def class_centers(scheme: PairingScheme, limit: int = 200) -> list[Center]:
    """One representative per non-planar class among pairing endpoints."""
    out: list[Center] = []
    seen: list[tuple[str, Point2]] = []

    def fresh(bp: BoundaryPoint) -> bool:
        xy = scheme.point(bp)
        return not any(pid == bp.polygon and max(abs(xy.x - q.x), abs(xy.y - q.y)) <= 1e-9 for pid, q in seen)

    singular = list(scheme.singular_points)
    candidates = singular + [bp for i, bp in zip(range(limit), iter_class_points(scheme))]
    for bp in candidates:
        if not fresh(bp):
            continue
        pc = classify_point(scheme, bp)
        seen.extend((m.polygon, scheme.point(m)) for m in pc.members)
        kind = center_kind(scheme, bp)
        # deep tail endpoints resolve to the singular class; keep its own representative only
        if kind == "planar" or (pc.singular and bp not in singular):
            continue
        out.append(Center(bp.polygon, scheme.point(bp), kind))
    return out


def sample_centers(scheme: PairingScheme, n: int = 50, seed: int = 0,
                   kinds: Sequence[str] | None = None) -> list[Center]:
    """Deterministic centers covering singular, conic, boundary and interior
    points. Structured centers come first; random ones fill up to ``n``."""
    rng = np.random.default_rng(seed)
    structured = class_centers(scheme, limit=4 * n)
    order = {"accumulation": 0, "singular": 0, "conic": 1, "vertex": 2}
    structured.sort(key=lambda c: order.get(c.kind, 3))
    if kinds is not None:
        out = [c for c in structured if c.kind in kinds][:n]
    else:
        out = structured[: n // 2]
    polys = scheme.domain.polygons
    guard = 0
    while len(out) < n and guard < 100 * n:
        guard += 1
        poly = polys[int(rng.integers(len(polys)))]
        if rng.random() < 0.5:
            x0, x1, y0, y1 = poly.bbox
            xy = Point2(float(x0 + rng.random() * (x1 - x0)), float(y0 + rng.random() * (y1 - y0)))
            if not poly.contains(xy) or poly.locate(xy, 1e-9) is not None:
                continue
        else:
            xy = poly.point_at(float(rng.random() * poly.perimeter))
        kind = center_kind(scheme, (poly.id, xy))
        if kinds is None or kind in kinds:
            out.append(Center(poly.id, xy, kind))
    return out[:n]


def log_radii(r_max: float, n: int = 12, span: float = 2.0 ** -10) -> np.ndarray:
    return np.geomspace(r_max * span, r_max, n)


# -- regularity scan -------------------------------------------------------------

@dataclass(frozen=True)
class Sample:
    center: Center
    r: float
    area: float
    tail_bound: float

    @property
    def ratio(self) -> float:
        return self.area / self.r ** 2

    @property
    def ratio_upper(self) -> float:
        return (self.area + self.tail_bound) / self.r ** 2


@dataclass(frozen=True)
class Violation:
    center: Center
    slope: float
    r2: float


@dataclass
class RegularityReport:
    r0: float
    K: float
    d_min: float
    total_area: float
    samples: list[Sample]
    Q: float = 2.0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ratio_min(self) -> float:
        return min(s.ratio for s in self.samples)

    @property
    def ratio_max(self) -> float:
        return max(s.ratio_upper for s in self.samples)

    @property
    def c0(self) -> float:
        return max(self.ratio_max, 1.0 / self.ratio_min)

    @property
    def extended_C(self) -> float:
        return lemma_constant(self.total_area, self.r0, self.c0, self.Q)

    @property
    def verdict(self) -> str:
        return "violation" if self.violations else "regular-at-scale"

    def summary(self) -> str:
        return (f"ratio ∈ [{self.ratio_min:.2f}, {self.ratio_max:.2f}], c0 = {self.c0:.3f}, "
                f"r0 = {self.r0:.4g}, C = {self.extended_C:.3f}, verdict: {self.verdict}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["center_x", "center_y", "kind", "r", "area", "ratio"])
        for s in self.samples:
            w.writerow([f"{s.center.xy.x:.12g}", f"{s.center.xy.y:.12g}", s.center.kind,
                        f"{s.r:.12g}", f"{s.area:.12g}", f"{s.ratio:.12g}"])
        return buf.getvalue()


def growth_fit(radii: Sequence[float], ratios: Sequence[float]) -> tuple[float, float, float]:
    """Least squares ratio = slope * log2(1/r) + intercept; returns (slope, intercept, R^2)."""
    k = np.log2(1.0 / np.asarray(radii, dtype=float))
    y = np.asarray(ratios, dtype=float)
    slope, intercept = np.polyfit(k, y, 1)
    resid = y - (slope * k + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(intercept), r2


GROWTH_SLOPE = 0.25
GROWTH_R2 = 0.9


def regularity_scan(scheme: PairingScheme, centers: Sequence[Center] | int = 20,
                    radii: Sequence[float] | int = 12, Q: float = 2.0, seed: int = 0) -> RegularityReport:
    """Sample area/r^Q over centers x radii (radii <= r0).

    A center is a violation when its ratio grows systematically in log(1/r):
    fitted slope above GROWTH_SLOPE per halving with R^2 >= GROWTH_R2."""
    d_min, K, r0 = scale_constants(scheme)
    if isinstance(centers, int):
        centers = sample_centers(scheme, centers, seed)
    if isinstance(radii, int):
        radii = log_radii(r0, radii)
    radii = [float(r) for r in radii]
    if not centers or not radii:
        raise DomainError("empty sampling grid")
    if any(r <= 0 or r > r0 * (1 + 1e-12) for r in radii):
        raise DomainError(f"scan radii must lie in (0, r0 = {r0:.6g}]")
    samples = []
    for c in centers:
        for r in radii:
            d = decompose_ball(scheme, c.location, r)
            samples.append(Sample(c, r, union_area(d.pieces, scheme), d.tail_area_bound))
    report = RegularityReport(r0, K, d_min, scheme.domain.area, samples, Q)
    if len(radii) >= 4:
        for c in centers:
            mine = [s for s in samples if s.center == c]
            slope, _, r2 = growth_fit([s.r for s in mine], [s.ratio for s in mine])
            if slope > GROWTH_SLOPE and r2 >= GROWTH_R2:
                report.violations.append(Violation(c, slope, r2))
    return report


@dataclass(frozen=True)
class ExtensionCheck:
    C: float
    rows: list[tuple[float, float, bool, bool]]  # (r, area, upper ok, lower ok)

    @property
    def ok(self) -> bool:
        return all(u and lo for _, _, u, lo in self.rows)


def extension_check(scheme: PairingScheme, report: RegularityReport, center: Center | None = None,
                    n: int = 20, seed: int = 0) -> ExtensionCheck:
    """Spot-check the extended constant on radii in (r0, diam].

    Upper: area <= C r^2. Lower: the r-ball contains the r0-ball, so its area
    is at least that of the r0-ball, itself at least r0^2 / c0."""
    rng = np.random.default_rng(seed)
    diam = scheme.domain.diam()
    C = report.extended_C
    centers = [center] if center else sample_centers(scheme, n, seed)
    rows = []
    for i in range(n):
        c = centers[i % len(centers)]
        r = float(report.r0 + (diam - report.r0) * (1 - rng.random()))
        small = decompose_ball(scheme, c.location, report.r0)
        big = decompose_ball(scheme, c.location, r)
        area = union_area(big.pieces, scheme)
        small_area = union_area(small.pieces, scheme)
        contained = all(any(_box_inside(p.box, q.box) for q in big.pieces if q.polygon == p.polygon)
                        for p in small.pieces)
        lower = contained and area >= small_area - 1e-12 and small_area >= report.r0 ** 2 / report.c0 - 1e-12
        rows.append((r, area, area + big.tail_area_bound <= C * r ** 2 + 1e-12, lower))
    return ExtensionCheck(C, rows)


def _box_inside(a, b, eps: float = 1e-12) -> bool:
    return a[0] >= b[0] - eps and a[1] <= b[1] + eps and a[2] >= b[2] - eps and a[3] <= b[3] + eps


# -- case bounds -----------------------------------------------------------------

CASES = ("accumulation", "conic", "finite-w", "lower")


@dataclass
class BoundsTable:
    case: str
    factor: float | None  # upper bound in units of r^2 (None for the lower case)
    constants: dict[str, float]
    rows: list[tuple[Center, float, float, float, bool]]  # (center, r, area, ratio, ok)

    @property
    def failures(self) -> list[tuple[Center, float, float, float, bool]]:
        return [row for row in self.rows if not row[4]]

    @property
    def passed(self) -> bool:
        return bool(self.rows) and not self.failures

    @property
    def max_ratio(self) -> float:
        return max(row[3] for row in self.rows)

    def lines(self) -> list[str]:
        bound = "2" if self.factor is None else f"{self.factor:.4g}"
        out = [f"{self.case}: {len(self.rows) - len(self.failures)}/{len(self.rows)} within bound {bound} r^2 "
               f"(max ratio {self.max_ratio:.4f})"]
        for c, r, area, ratio, _ in self.failures:
            out.append(f"  FAIL {c.kind} at {c.polygon}:({c.xy.x:.6g},{c.xy.y:.6g}) r={r:.6g} "
                       f"area={area:.6g} ratio={ratio:.4f}")
        return out


def verify_paper_bounds(scheme: PairingScheme, case: str, samples: Sequence[tuple[Center, float]] | None = None,
                        n_centers: int = 20, radii: Sequence[float] | int = 12, seed: int = 0) -> BoundsTable:
    """Check measured areas against the case-by-case bounds.

    accumulation: (2K' + 7/2) r^2 with K' the sup of tail ratios sum b / sum a.
    conic:        (10 + 4K'') r^2 with K'' the sup over windows.
    finite-w:     (n_F + 1) r^2 at conic points of a finite Type W side.
    lower:        2 r^2 at every sampled center.
    Upper checks use area plus the tail bound; lower checks the area alone.
    """
    if case not in CASES:
        raise DomainError(f"unknown case {case!r}; choose from {', '.join(CASES)}")
    infinite = [w for w in scheme.w_specs if w.infinite]
    finite = [w for w in scheme.w_specs if not w.infinite]
    constants: dict[str, float] = {}
    kinds: tuple[str, ...] | None = None
    factor: float | None = None
    if case in ("accumulation", "conic"):
        if not infinite:
            raise DomainError(f"case {case!r} needs an infinite Type W side")
        consts = [sequence_constants(w) for w in infinite]
        constants = {"K1": max(c.K_tail for c in consts), "K2": max(c.K_window for c in consts),
                     "p": max(c.p for c in consts)}
        if case == "accumulation":
            factor, kinds = 2 * constants["K1"] + 3.5, ("accumulation",)
        else:
            factor, kinds = 10 + 4 * constants["K2"], ("conic",)
    elif case == "finite-w":
        if not finite:
            raise DomainError("case 'finite-w' needs a finite Type W side")
        n_f = max(w.n_terms for w in finite)
        constants = {"n_F": float(n_f)}
        factor, kinds = n_f + 1.0, ("conic",)
    _, _, r0 = scale_constants(scheme)
    if samples is None:
        centers = sample_centers(scheme, n_centers, seed, kinds)
        if not centers:
            raise DomainError(f"no {case} centers in this scheme")
        rs = log_radii(r0, radii) if isinstance(radii, int) else list(radii)
        samples = [(c, float(r)) for c in centers for r in rs]
    rows = []
    for c, r in samples:
        d = decompose_ball(scheme, c.location, r)
        area = union_area(d.pieces, scheme)
        ratio = area / r ** 2
        ok = area >= 2 * r ** 2 - 1e-9 * r ** 2
        if factor is not None:
            ok = ok and area + d.tail_area_bound <= factor * r ** 2 + 1e-9
        rows.append((c, r, area, ratio, ok))
    return BoundsTable(case, factor, constants, rows)


# -- metric comparison -----------------------------------------------------------

@dataclass(frozen=True)
class LipschitzReport:
    containment_ok: bool
    ratios: list[float]
    L: float = math.sqrt(2.0)

    @property
    def max_ratio(self) -> float:
        return max(self.ratios)

    @property
    def ok(self) -> bool:
        return self.containment_ok and all(math.pi / 4 - 1e-2 <= q <= 2 + 1e-2 for q in self.ratios)


def euclidean_union_area(pieces: Sequence[BallPiece], scheme: PairingScheme, seed: int = MC_SEED) -> AreaEstimate:
    """Area of the same sources grown by Euclidean instead of max-metric
    radius, clipped to the polygons (stratified Monte-Carlo)."""
    value, var = 0.0, 0.0
    for pid, group in _group(pieces).items():
        poly = scheme.domain[pid]
        c = np.array([p.center for p in group])
        hx = np.array([p.half_extent for p in group])
        rad = np.array([p.radius for p in group])
        x0 = max(float(np.min(c[:, 0] - hx[:, 0] - rad)), poly.bbox[0])
        x1 = min(float(np.max(c[:, 0] + hx[:, 0] + rad)), poly.bbox[1])
        y0 = max(float(np.min(c[:, 1] - hx[:, 1] - rad)), poly.bbox[2])
        y1 = min(float(np.max(c[:, 1] + hx[:, 1] + rad)), poly.bbox[3])

        def member(pts, c=c, hx=hx, rad=rad, poly=poly):
            dx = np.maximum(np.abs(pts[:, None, 0] - c[None, :, 0]) - hx[None, :, 0], 0.0)
            dy = np.maximum(np.abs(pts[:, None, 1] - c[None, :, 1]) - hx[None, :, 1], 0.0)
            inside = (np.hypot(dx, dy) < rad[None, :]).any(axis=1)
            out = np.zeros(len(pts), dtype=bool)
            if inside.any():
                out[inside] = poly.contains_points(pts[inside])
            return out

        est = _mc_area(member, (x0, x1, y0, y1), seed)
        value += est.value
        var += est.stderr ** 2
    return AreaEstimate(value, math.sqrt(var), False, seed)


def _group(pieces) -> dict[str, list[BallPiece]]:
    out: dict[str, list[BallPiece]] = {}
    for pc in pieces:
        out.setdefault(pc.polygon, []).append(pc)
    return out


def lipschitz_equivalence_check(scheme: PairingScheme, sets: Sequence[Sequence[BallPiece]],
                                n_points: int = 1000, seed: int = 0) -> LipschitzReport:
    """Compare max-metric and Euclidean versions of sampled piece unions.

    Containment B_euc(x, r) in B_max(x, r) in B_euc(x, sqrt2 r) is tested at
    random points around every piece; area ratios max/euclidean must stay
    within [pi/4, 2]."""
    rng = np.random.default_rng(seed)
    ok = True
    ratios = []
    for pieces in sets:
        for pc in pieces:
            (cx, cy), (hx, hy), r = pc.center, pc.half_extent, pc.radius
            pts = np.column_stack([cx + (2 * rng.random(n_points) - 1) * (hx + 1.5 * r),
                                   cy + (2 * rng.random(n_points) - 1) * (hy + 1.5 * r)])
            dx = np.maximum(np.abs(pts[:, 0] - cx) - hx, 0.0)
            dy = np.maximum(np.abs(pts[:, 1] - cy) - hy, 0.0)
            d_max, d_euc = np.maximum(dx, dy), np.hypot(dx, dy)
            in_euc, in_max, in_big = d_euc < r, d_max < r, d_euc < math.sqrt(2) * r
            ok &= bool(np.all(~in_euc | in_max) and np.all(~in_max | in_big))
        a_max = union_area(pieces, scheme)
        a_euc = euclidean_union_area(pieces, scheme, seed).value
        if a_euc > 0:
            ratios.append(a_max / a_euc)
    return LipschitzReport(ok, ratios)
