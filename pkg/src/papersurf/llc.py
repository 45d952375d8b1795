"""Rasterized quotient: cells of size about h in every polygon, joined by
4-neighbour adjacency and by links between boundary cells whose boundary
coordinates are paired. Used for complement connectivity and LLC checks."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components, dijkstra

from .balls import decompose_ball, require_rectangles
from .errors import DomainError
from .quotient import Location, resolve
from .scheme import PairingScheme

# grid pairings must span at least this many cells
MIN_CELLS_PER_PAIRING = 4


@dataclass(frozen=True)
class _Block:
    pid: str
    offset: int
    nx: int
    ny: int
    x0: float
    y0: float
    hx: float
    hy: float

    def cell(self, i, j):
        return self.offset + np.asarray(i) * self.ny + np.asarray(j)


@dataclass
class QuotientGrid:
    h: float
    blocks: list[_Block]
    xy: np.ndarray        # cell centres
    poly: np.ndarray      # block index per cell
    links: np.ndarray     # (k, 2) unordered identification pairs
    four: csr_matrix      # 4-neighbour + links, unit weights
    eight: csr_matrix     # 8-neighbour + links, max-metric step lengths
    depth: int | None     # Type W / fold depth used for links

    @property
    def size(self) -> int:
        return len(self.xy)

    def block(self, pid: str) -> _Block:
        for b in self.blocks:
            if b.pid == pid:
                return b
        raise DomainError(f"no polygon {pid!r} in grid")

    def cell_of(self, scheme: PairingScheme, loc: Location) -> int:
        c = resolve(scheme, loc)
        b = self.block(c.polygon)
        i = min(max(int((c.xy.x - b.x0) / b.hx), 0), b.nx - 1)
        j = min(max(int((c.xy.y - b.y0) / b.hy), 0), b.ny - 1)
        return int(b.cell(i, j))

    def components(self, mask: np.ndarray | None = None) -> int:
        g = self.four if mask is None else self.four[mask][:, mask]
        if g.shape[0] == 0:
            return 0
        return int(connected_components(g, directed=False)[0])


def _grid_depth(scheme: PairingScheme, h: float) -> PairingScheme:
    """Truncate Type W sides and fold chains to pairings of length >= 4h."""
    specs = list(scheme.specs)
    if not specs:
        return scheme
    floor = MIN_CELLS_PER_PAIRING * h
    depth = 0
    while depth < max(s.depth for s in specs):
        terms = []
        for s in specs:
            terms.append(s.a.term(depth))
            if hasattr(s, "b") and not s.b.is_zero:
                terms.append(s.b.term(depth))
        if any(0 < t < floor for t in terms) or all(t == 0 for t in terms):
            break
        depth += 1
    return scheme.with_depth(max(depth, 1))


def build_grid(scheme: PairingScheme, h: float) -> QuotientGrid:
    """Rasterize the quotient at cell size h (rectangular polygons)."""
    require_rectangles(scheme)
    if not h > 0:
        raise DomainError("cell size must be positive")
    floor = MIN_CELLS_PER_PAIRING * h
    d_min = scheme.domain.d_min()
    if h >= d_min / 4:
        raise DomainError(f"cell size {h} too coarse: needs h < d_min/4 = {d_min / 4:.6g}")
    short = [p.length for p in scheme.basic if p.length < floor]
    short += [s.a.term(0) for s in scheme.specs if s.a.term(0) < floor]
    if short:
        raise DomainError(f"cell size {h} too coarse for a pairing of length {min(short):.6g}")
    grid_scheme = _grid_depth(scheme, h)

    blocks, xy, poly = [], [], []
    offset = 0
    for k, p in enumerate(scheme.domain.polygons):
        x0, x1, y0, y1 = p.bbox
        nx, ny = max(int(math.ceil((x1 - x0) / h - 1e-9)), 1), max(int(math.ceil((y1 - y0) / h - 1e-9)), 1)
        b = _Block(p.id, offset, nx, ny, x0, y0, (x1 - x0) / nx, (y1 - y0) / ny)
        blocks.append(b)
        ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        xy.append(np.column_stack([x0 + (ii.ravel() + 0.5) * b.hx, y0 + (jj.ravel() + 0.5) * b.hy]))
        poly.append(np.full(nx * ny, k))
        offset += nx * ny
    xy_all, poly_all = np.vstack(xy), np.concatenate(poly)

    rows, cols, wts = [], [], []
    for b in blocks:
        ii, jj = np.meshgrid(np.arange(b.nx), np.arange(b.ny), indexing="ij")
        ii, jj = ii.ravel(), jj.ravel()
        for di, dj in ((1, 0), (0, 1), (1, 1), (1, -1)):
            ok = (ii + di < b.nx) & (jj + dj >= 0) & (jj + dj < b.ny)
            rows.append(b.cell(ii[ok], jj[ok]))
            cols.append(b.cell(ii[ok] + di, jj[ok] + dj))
            step = max(abs(di) * b.hx, abs(dj) * b.hy)
            wts.append(np.full(int(ok.sum()), step if di and dj else -step))  # sign marks 4-neighbours

    links = _links(grid_scheme, blocks)
    h_link = min(min(b.hx, b.hy) for b in blocks)
    if len(links):
        rows.append(links[:, 0])
        cols.append(links[:, 1])
        wts.append(np.full(len(links), -h_link))
    r, c, w = np.concatenate(rows), np.concatenate(cols), np.concatenate(wts)
    # a link may duplicate a neighbour pair; keep one entry, 4-neighbour first
    lo, hi = np.minimum(r, c), np.maximum(r, c)
    order = np.lexsort((w, hi, lo))
    lo, hi, w = lo[order], hi[order], w[order]
    first = np.ones(len(lo), dtype=bool)
    first[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
    r, c, w = lo[first], hi[first], w[first]
    n = len(xy_all)
    eight = coo_matrix((np.abs(w), (r, c)), shape=(n, n)).tocsr()
    eight = eight.maximum(eight.T)
    four_mask = w < 0
    four = coo_matrix((np.ones(int(four_mask.sum())), (r[four_mask], c[four_mask])), shape=(n, n)).tocsr()
    four = four.maximum(four.T)
    depth = grid_scheme.specs[0].depth if grid_scheme.specs else None
    return QuotientGrid(h, blocks, xy_all, poly_all, links, four, eight, depth)


def _edge_cells(scheme: PairingScheme, b: _Block, edge: int):
    """Boundary cells along an edge, in arc order, and their arc coordinates."""
    poly = scheme.domain[b.pid]
    s0, length = float(poly.edge_starts[edge]), float(poly.edge_lengths[edge])
    a, c = poly.edge(edge)
    if abs(a.y - c.y) < 1e-15:  # horizontal
        j = 0 if abs(a.y - b.y0) < 1e-12 else b.ny - 1
        ks = np.arange(b.nx)
        cells = b.cell(ks if c.x > a.x else ks[::-1], np.full(b.nx, j))
    else:
        i = 0 if abs(a.x - b.x0) < 1e-12 else b.nx - 1
        ks = np.arange(b.ny)
        cells = b.cell(np.full(b.ny, i), ks if c.y > a.y else ks[::-1])
    n = len(cells)
    return cells, s0 + (np.arange(n) + 0.5) * length / n, s0, length


def _links(scheme: PairingScheme, blocks: list[_Block]) -> np.ndarray:
    edges = {}
    for b in blocks:
        edges[b.pid] = [_edge_cells(scheme, b, e) for e in range(4)]
    pairs = []
    for p in scheme.expanded:
        for side in (0, 1):
            pid, lo, hi = p.half(side)
            poly = scheme.domain[pid]
            cells, s, _, _ = edges[pid][poly.edge_index(0.5 * (lo + hi))]
            sel = (s >= lo - 1e-12) & (s <= hi + 1e-12)
            if not sel.any():
                continue
            qid = p.b_polygon if side == 0 else p.a_polygon
            qpoly = scheme.domain[qid]
            t = s[sel] - lo
            target = (p.b_end - t) if side == 0 else (p.a_end - t)
            qcells, _, q0, qlen = edges[qid][qpoly.edge_index(0.5 * (p.half(1 - side)[1] + p.half(1 - side)[2]))]
            k = np.clip(((target - q0) * len(qcells) / qlen).astype(int), 0, len(qcells) - 1)
            pairs.append(np.column_stack([cells[sel], qcells[k]]))
    if not pairs:
        return np.zeros((0, 2), dtype=int)
    allp = np.vstack(pairs)
    allp = np.sort(allp, axis=1)
    allp = allp[allp[:, 0] != allp[:, 1]]
    return np.unique(allp, axis=0)


# -- balls on the grid -------------------------------------------------------------

def ball_cells(scheme: PairingScheme, grid: QuotientGrid, center: Location, r: float) -> np.ndarray:
    """Mask of cells whose centres lie in the decomposed open ball."""
    mask = np.zeros(grid.size, dtype=bool)
    d = decompose_ball(scheme, center, r)
    idx = {b.pid: k for k, b in enumerate(grid.blocks)}
    for pc in d.pieces:
        b = grid.blocks[idx[pc.polygon]]
        x0, x1, y0, y1 = pc.box
        i0, i1 = max(int((x0 - b.x0) / b.hx) - 1, 0), min(int((x1 - b.x0) / b.hx) + 1, b.nx - 1)
        j0, j1 = max(int((y0 - b.y0) / b.hy) - 1, 0), min(int((y1 - b.y0) / b.hy) + 1, b.ny - 1)
        if i0 > i1 or j0 > j1:
            continue
        ii, jj = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1), indexing="ij")
        cells = b.cell(ii.ravel(), jj.ravel())
        p = grid.xy[cells]
        inside = (p[:, 0] > x0) & (p[:, 0] < x1) & (p[:, 1] > y0) & (p[:, 1] < y1)
        mask[cells[inside]] = True
    return mask


def complement_connected(scheme: PairingScheme, grid: QuotientGrid, center: Location, r: float) -> bool:
    """Whether the cells outside B(center, r) form one linked component."""
    if r >= scheme.domain.diam():
        raise DomainError(f"radius {r} is not below the diameter {scheme.domain.diam():.6g}")
    inside = ball_cells(scheme, grid, center, r)
    if inside.all():
        raise DomainError("the ball covers the whole grid")
    return grid.components(~inside) == 1


# -- LLC -----------------------------------------------------------------------------

@dataclass(frozen=True)
class LLCSample:
    center: tuple[str, tuple[float, float]]
    r: float
    llc1_ok: bool
    llc2_ok: bool
    witnesses: tuple[tuple[int, ...], ...] = ()


@dataclass
class LLCReport:
    lambda_tested: float
    samples: list[LLCSample]

    @property
    def passed(self) -> bool:
        return all(s.llc1_ok and s.llc2_ok for s in self.samples)

    @property
    def lambda_empirical(self) -> float | None:
        return self.lambda_tested if self.passed else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["polygon", "center_x", "center_y", "r", "llc1", "llc2", "lambda"])
        for s in self.samples:
            pid, (x, y) = s.center
            w.writerow([pid, f"{x:.12g}", f"{y:.12g}", f"{s.r:.12g}", int(s.llc1_ok), int(s.llc2_ok),
                        f"{self.lambda_tested:.6g}"])
        return buf.getvalue()


def _path(pred: np.ndarray, src: int, dst: int) -> list[int] | None:
    out = [dst]
    while out[-1] != src:
        nxt = pred[out[-1]]
        if nxt < 0:
            return None
        out.append(int(nxt))
    return out[::-1]


def path_is_valid(grid: QuotientGrid, path: Sequence[int], allowed: np.ndarray | None = None,
                  diagonal: bool = True) -> bool:
    """Consecutive cells adjacent or linked, and every cell allowed."""
    g = grid.eight if diagonal else grid.four
    if allowed is not None and not np.all(allowed[list(path)]):
        return False
    return all(g[a, b] != 0 for a, b in zip(path[:-1], path[1:]))


def llc_check(scheme: PairingScheme, grid: QuotientGrid, lam: float,
              samples: Sequence[tuple[Location, float]], pairs: int = 4, seed: int = 0) -> LLCReport:
    """LLC1: grid geodesics x -> a -> y for x, y in B(a, r) stay in B(a, lam r).
    LLC2: x, y outside B(a, r) are joined by a 4-neighbour path avoiding
    B(a, r / lam). Every verdict carries its path witnesses."""
    if lam < 1:
        raise DomainError("lambda must be at least 1")
    rng = np.random.default_rng(seed)
    out = []
    for center, r in samples:
        c = resolve(scheme, center)
        a = grid.cell_of(scheme, center)
        ball = ball_cells(scheme, grid, center, r)
        ball[a] = True
        big = ball_cells(scheme, grid, center, lam * r)
        big[a] = True
        small = ball_cells(scheme, grid, center, r / lam)
        witnesses = []

        ok1 = True
        inside = np.flatnonzero(ball)
        dist, pred = dijkstra(grid.eight, indices=a, return_predecessors=True)
        for _ in range(pairs):
            x, y = rng.choice(inside, 2)
            px, py = _path(pred, a, int(x)), _path(pred, a, int(y))
            if px is None or py is None:
                ok1 = False
                continue
            joined = px[::-1] + py[1:]
            witnesses.append(tuple(joined))
            ok1 &= path_is_valid(grid, joined, big)

        ok2 = True
        outside = np.flatnonzero(~ball)
        allowed = ~small
        sub_index = np.flatnonzero(allowed)
        where = np.full(grid.size, -1)
        where[sub_index] = np.arange(len(sub_index))
        sub = grid.four[allowed][:, allowed]
        for _ in range(pairs if len(outside) >= 2 else 0):
            x, y = rng.choice(outside, 2)
            if not (allowed[x] and allowed[y]):
                ok2 = False
                continue
            order, pred2 = breadth_first_order(sub, int(where[x]), directed=False, return_predecessors=True)
            p = _path(pred2, int(where[x]), int(where[y]))
            if p is None:
                ok2 = False
                continue
            path = [int(sub_index[k]) for k in p]
            witnesses.append(tuple(path))
            ok2 &= path_is_valid(grid, path, allowed, diagonal=False)
        out.append(LLCSample((c.polygon, (c.xy.x, c.xy.y)), r, bool(ok1), bool(ok2), tuple(witnesses)))
    return LLCReport(lam, out)


def empirical_lambda(scheme: PairingScheme, grid: QuotientGrid, lambdas: Sequence[float],
                     samples: Sequence[tuple[Location, float]], seed: int = 0) -> float | None:
    """Smallest tested lambda for which every sample passes."""
    for lam in sorted(lambdas):
        if llc_check(scheme, grid, lam, samples, seed=seed).passed:
            return lam
    return None
