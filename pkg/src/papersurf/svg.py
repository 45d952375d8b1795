"""Plain SVG 1.1 drawings: polygon outlines, pairing arcs, ball pieces."""

from __future__ import annotations

from typing import Iterable, Sequence
from xml.sax.saxutils import escape

from .balls import BallPiece
from .scheme import PairingScheme

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def render(scheme: PairingScheme, pieces: Iterable[BallPiece] = (), size: float = 640.0,
           max_arcs: int = 64, title: str = "") -> str:
    xs = [v.x for p in scheme.domain.polygons for v in p.vertices]
    ys = [v.y for p in scheme.domain.polygons for v in p.vertices]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    pad = 0.08 * max(x1 - x0, y1 - y0)
    span = max(x1 - x0, y1 - y0) + 2 * pad
    scale = size / span
    width, height = (x1 - x0 + 2 * pad) * scale, (y1 - y0 + 2 * pad) * scale

    def tx(x: float) -> float:
        return (x - x0 + pad) * scale

    def ty(y: float) -> float:
        return (y1 + pad - y) * scale  # flip: y grows upward in the plane

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.1f}" height="{height:.1f}">']
    if title:
        out.append(f"<title>{escape(title)}</title>")
    for pc in pieces:
        poly = scheme.domain[pc.polygon]
        bx0, bx1, by0, by1 = pc.clipped(poly)
        if bx1 <= bx0 or by1 <= by0:
            continue
        out.append(f'<rect x="{tx(bx0):.2f}" y="{ty(by1):.2f}" width="{(bx1 - bx0) * scale:.2f}" '
                   f'height="{(by1 - by0) * scale:.2f}" fill="#f4a261" fill-opacity="0.35" stroke="#e76f51" '
                   f'stroke-width="0.5"><title>{escape(pc.provenance)} r={pc.radius:.6g}</title></rect>')
    for poly in scheme.domain.polygons:
        pts = " ".join(f"{tx(v.x):.2f},{ty(v.y):.2f}" for v in poly.vertices)
        out.append(f'<polygon points="{pts}" fill="none" stroke="#222" stroke-width="1.5"/>')
    for k, p in enumerate(scheme.expanded[:max_arcs]):
        color = PALETTE[k % len(PALETTE)]
        mids = []
        for side in (0, 1):
            pid, lo, hi = p.half(side)
            poly = scheme.domain[pid]
            a, b = poly.point_at(lo), poly.point_at(hi)
            out.append(f'<line x1="{tx(a.x):.2f}" y1="{ty(a.y):.2f}" x2="{tx(b.x):.2f}" y2="{ty(b.y):.2f}" '
                       f'stroke="{color}" stroke-width="3" stroke-opacity="0.7"/>')
            m = poly.point_at(0.5 * (lo + hi))
            mids.append((tx(m.x), ty(m.y)))
        (ax, ay), (bx, by) = mids
        cx, cy = 0.5 * (ax + bx) - 0.25 * (by - ay), 0.5 * (ay + by) + 0.25 * (bx - ax)
        out.append(f'<path d="M {ax:.2f} {ay:.2f} Q {cx:.2f} {cy:.2f} {bx:.2f} {by:.2f}" fill="none" '
                   f'stroke="{color}" stroke-width="1" stroke-dasharray="4 3">'
                   f'<title>{escape(p.label or f"pairing {k}")}</title></path>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_points(scheme: PairingScheme, points: Sequence[tuple[float, float]], **kw) -> str:
    """Mark sample points as small boxes on top of the scheme drawing."""
    span = max(p.bbox[1] - p.bbox[0] for p in scheme.domain.polygons)
    dots = [BallPiece(scheme.domain.find(xy).id, xy, span * 0.004, "sample") for xy in points]
    return render(scheme, dots, **kw)
