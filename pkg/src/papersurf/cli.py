"""Command line interface.

Exit codes: 0 success, 1 unreadable or malformed input, 2 domain or scheme
error, 3 no convergence.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .balls import decompose_ball, pieces_csv
from .errors import ConvergenceError, DomainError, SchemeError
from .horseshoe import DEFAULT_KS, area_experiment, horseshoe_area_experiment
from .llc import build_grid, complement_connected, llc_check
from .measure import regularity_scan, sample_centers, scale_constants, union_area
from .quotient import refine_until
from .scheme import BoundaryPoint, PairingScheme, check_full, check_unlinked
from .schemefile import BUILTINS, ParseError, builtin_text, load
from .svg import render, render_points

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_CONVERGENCE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def parse_location(text: str):
    """``P:x,y`` (point in polygon P), ``P@s`` (arc length on P), or ``x,y``."""
    try:
        if "@" in text:
            pid, s = text.split("@", 1)
            return BoundaryPoint(pid, float(s))
        pid = None
        if ":" in text:
            pid, text = text.split(":", 1)
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad location {text!r}; use P:x,y, P@s or x,y") from None
    return (pid, (x, y)) if pid else (x, y)


def _write(text: str, path: str | None, out) -> None:
    if path in (None, "-"):
        out.write(text)
    else:
        Path(path).write_text(text)


def singular_class_count(scheme: PairingScheme) -> int:
    return len({(bp.polygon, round(scheme.domain[bp.polygon].wrap(bp.s), 12)) for bp in scheme.singular_points})


def validate_summary(scheme: PairingScheme) -> tuple[str, bool]:
    full = check_full(scheme)
    if not full.ok:
        return f"full: no (covered {round(full.total_pairing_len, 9)!r} of {round(full.boundary_len / 2, 9)!r})", False
    link = check_unlinked(scheme)
    if link.plain:
        plain = "yes"
    elif link.witness:
        (p1, q1), (p2, q2) = link.witness
        plain = (f"no (linked witness {p1.polygon}@{p1.s:g}~{q1.polygon}@{q1.s:g} "
                 f"and {p2.polygon}@{p2.s:g}~{q2.polygon}@{q2.s:g})")
    else:
        plain = f"no ({link.reason})"
    return f"full: yes, plain: {plain}, singular classes: {singular_class_count(scheme)}", True


def cmd_validate(args, out) -> int:
    scheme = load(args.file).scheme
    line, ok = validate_summary(scheme)
    out.write(line + "\n")
    return EXIT_OK if ok else EXIT_DOMAIN


def cmd_distance(args, out) -> int:
    scheme = load(args.file).scheme
    res = refine_until(scheme, args.source, args.target, args.metric, args.h, args.tol)
    out.write(f"distance: {res.value:.12g} (h = {res.h:.3g})\n")
    rows = ["step,kind,x,y,length"]
    for k, st in enumerate(res.path):
        for p in st.points:
            rows.append(f"{k},{st.kind},{p.x:.12g},{p.y:.12g},{st.length:.12g}")
    _write("\n".join(rows) + "\n", args.csv, out)
    if not res.converged:
        raise ConvergenceError(f"distance did not settle within tol {args.tol} after refinement")
    return EXIT_OK


def cmd_ball(args, out) -> int:
    scheme = load(args.file).scheme
    d = decompose_ball(scheme, args.center, args.r)
    area = union_area(d.pieces, scheme)
    kind = d.center_class.label if d.center_class else "interior"
    out.write(f"ball r={args.r:g} at {kind}: {len(d.pieces)} pieces, area {area:.12g} "
              f"(ratio {area / args.r ** 2:.6f}, tail bound {d.tail_area_bound:.3g})\n")
    _write(pieces_csv(d), args.csv, out)
    if args.svg:
        Path(args.svg).write_text(render(scheme, d.pieces, title=f"B(r={args.r:g})"))
    return EXIT_OK


def cmd_regularity(args, out) -> int:
    scheme = load(args.file).scheme
    centers = sample_centers(scheme, args.centers, args.seed)
    report = regularity_scan(scheme, centers, args.radii, seed=args.seed)
    out.write(report.summary() + "\n")
    for v in report.violations:
        out.write(f"violation: {v.center.kind} at {v.center.polygon}:{v.center.xy.x:g},{v.center.xy.y:g} "
                  f"slope {v.slope:.4f} (R^2 {v.r2:.3f})\n")
    if args.csv:
        _write(report.to_csv(), args.csv, out)
    if args.svg:
        Path(args.svg).write_text(render_points(scheme, [c.xy for c in centers], title="regularity centers"))
    return EXIT_OK


def cmd_llc(args, out) -> int:
    scheme = load(args.file).scheme
    d_min, K, r0 = scale_constants(scheme)
    lam = args.lam if args.lam is not None else 4 * K
    r = args.r if args.r is not None else r0 / 2
    h = args.h if args.h is not None else r / 100
    grid = build_grid(scheme, h)
    centers = sample_centers(scheme, args.samples, args.seed)
    samples = [(c.location, r) for c in centers]
    report = llc_check(scheme, grid, lam, samples, seed=args.seed)
    connected = sum(complement_connected(scheme, grid, c, rr) for c, rr in samples)
    out.write(f"llc lambda={lam:g} r={r:g} h={h:g}: {sum(s.llc1_ok for s in report.samples)}/{len(samples)} LLC1, "
              f"{sum(s.llc2_ok for s in report.samples)}/{len(samples)} LLC2, "
              f"complement connected {connected}/{len(samples)}\n")
    if args.csv:
        _write(report.to_csv(), args.csv, out)
    return EXIT_OK


def cmd_horseshoe(args, out) -> int:
    ks = range(args.kmin, args.kmax + 1)
    if args.file:
        scheme = load(args.file).scheme
        if not scheme.singular_points:
            raise DomainError("the scheme has no singular class to centre the balls on")
        table = area_experiment(scheme, scheme.singular_points[0], ks)
    else:
        table = horseshoe_area_experiment(args.depth, ks)
    _write(table.to_csv(), args.csv, out)
    out.write(table.summary() + "\n")
    return EXIT_OK


def cmd_builtin(args, out) -> int:
    if not args.name:
        out.write("\n".join(BUILTINS) + "\n")
        return EXIT_OK
    _write(builtin_text(args.name), args.out, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="papersurf", description="Paper surfaces: quotient metrics, balls, regularity.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check fullness and plainness of a scheme")
    v.add_argument("file", help="scheme JSON file or builtin name")
    v.set_defaults(func=cmd_validate)

    d = sub.add_parser("distance", help="quotient distance with refinement")
    d.add_argument("file")
    d.add_argument("--from", dest="source", type=parse_location, required=True)
    d.add_argument("--to", dest="target", type=parse_location, required=True)
    d.add_argument("--h", type=float, default=None, help="initial sample spacing")
    d.add_argument("--tol", type=float, default=1e-4)
    d.add_argument("--metric", choices=("max", "euclidean"), default=None)
    d.add_argument("--csv", help="write the path here instead of stdout")
    d.set_defaults(func=cmd_distance)

    b = sub.add_parser("ball", help="decompose a ball into pieces")
    b.add_argument("file")
    b.add_argument("--center", type=parse_location, required=True)
    b.add_argument("--r", type=float, required=True)
    b.add_argument("--csv")
    b.add_argument("--svg")
    b.set_defaults(func=cmd_ball)

    r = sub.add_parser("regularity", help="area/r^2 scan below r0")
    r.add_argument("file")
    r.add_argument("--centers", type=int, default=20)
    r.add_argument("--radii", type=int, default=12)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--csv")
    r.add_argument("--svg")
    r.set_defaults(func=cmd_regularity)

    ll = sub.add_parser("llc", help="grid LLC and complement checks")
    ll.add_argument("file")
    ll.add_argument("--lambda", dest="lam", type=float, default=None, help="default 4K")
    ll.add_argument("--r", type=float, default=None, help="default r0/2")
    ll.add_argument("--h", type=float, default=None, help="default r/100")
    ll.add_argument("--samples", type=int, default=10)
    ll.add_argument("--seed", type=int, default=0)
    ll.add_argument("--csv")
    ll.set_defaults(func=cmd_llc)

    hs = sub.add_parser("horseshoe", help="ball-area growth at the singular class")
    hs.add_argument("file", nargs="?", help="run on this scheme instead of the tight horseshoe")
    hs.add_argument("--depth", type=int, default=24)
    hs.add_argument("--kmin", type=int, default=DEFAULT_KS[0])
    hs.add_argument("--kmax", type=int, default=DEFAULT_KS[-1])
    hs.add_argument("--csv")
    hs.set_defaults(func=cmd_horseshoe)

    bi = sub.add_parser("builtin", help="list builtin schemes or print one")
    bi.add_argument("name", nargs="?", choices=BUILTINS)
    bi.add_argument("--out")
    bi.set_defaults(func=cmd_builtin)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SchemeError as exc:
        for line in exc.diagnostics:
            print(f"invalid: {line}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
