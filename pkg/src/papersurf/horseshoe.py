"""The tight horseshoe: a unit square whose four sides are folded by two
consecutive fold chains, with every fold endpoint in one class. Ball areas at
that class grow like r^2 log(1/r), so the quotient is not Ahlfors 2-regular."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

from .balls import decompose_ball
from .errors import DomainError
from .geometry import Metric, MultiPolygon, Polygon
from .measure import growth_fit, union_area
from .quotient import Location
from .scheme import FoldChainSpec, PairingScheme, SequenceSpec

DEFAULT_KS = tuple(range(3, 11))
TAIL_LIMIT = 0.01


@dataclass(frozen=True)
class HorseshoeSpec:
    depth: int = 24
    # a_0 = 1/2 folds a whole side; sum_{i>=1} a_i = 1/2 covers the next two
    a: SequenceSpec = field(default_factory=lambda: SequenceSpec.geometric(0.25, 2.0, head=(0.5,)))

    def problems(self) -> list[str]:
        out = self.a.problems("a")
        if abs(self.a.term(0) - 0.5) > 1e-12:
            out.append(f"a_0 must be 1/2, got {self.a.term(0)}")
        if abs(self.a.total() - 1.0) > 1e-9:
            out.append(f"sum of a_i must be 1, got {self.a.total()}")
        return out


def build_tight_horseshoe(depth: int = 24, spec: HorseshoeSpec | None = None) -> PairingScheme:
    """Unit square; from the corner (1, 1) one chain folds the top side in half
    and continues down the left side, the other folds the right side and runs
    along the bottom. Both chains accumulate at (0, 0)."""
    if depth < 2:
        raise DomainError("the horseshoe needs depth >= 2")
    spec = spec or HorseshoeSpec(depth)
    bad = spec.problems()
    if bad:
        raise DomainError("; ".join(bad))
    square = Polygon("P", ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
    chains = (FoldChainSpec("P", 2.0, 1, spec.a, depth), FoldChainSpec("P", 2.0, -1, spec.a, depth))
    scheme = PairingScheme(MultiPolygon((square,), Metric.MAX), (), (), chains, "tight-horseshoe")
    return scheme.validate()


@dataclass
class AreaTable:
    rows: list[tuple[int, float, float, float, int, float]]  # (k, r, area, ratio, pieces, tail bound)
    slope: float
    intercept: float
    r2: float

    @property
    def ratios(self) -> list[float]:
        return [row[3] for row in self.rows]

    @property
    def strictly_increasing(self) -> bool:
        return all(b > a for a, b in zip(self.ratios, self.ratios[1:]))

    def summary(self) -> str:
        return f"fit: ratio = {self.slope:.4f} * log2(1/r) + {self.intercept:.4f}, R^2 = {self.r2:.4f}"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "r", "area", "ratio", "pieces", "tail_bound"])
        for k, r, area, ratio, n, tail in self.rows:
            w.writerow([k, f"{r:.12g}", f"{area:.12g}", f"{ratio:.12g}", n, f"{tail:.6g}"])
        return buf.getvalue()


def area_experiment(scheme: PairingScheme, center: Location, ks: Sequence[int] = DEFAULT_KS) -> AreaTable:
    """Ball areas at r = 2^-k and a least-squares fit of area/r^2 against k."""
    rows = []
    for k in ks:
        r = 2.0 ** -k
        d = decompose_ball(scheme, center, r)
        area = union_area(d.pieces, scheme)
        if d.tail_area_bound > TAIL_LIMIT * area:
            raise DomainError(f"unexpanded tail may hold {d.tail_area_bound:.3g} of area {area:.3g} "
                              f"at r = 2^-{k}; increase the depth")
        rows.append((k, r, area, area / r ** 2, len(d.pieces), d.tail_area_bound))
    slope, intercept, r2 = growth_fit([row[1] for row in rows], [row[3] for row in rows])
    return AreaTable(rows, slope, intercept, r2)


def horseshoe_area_experiment(depth: int = 24, ks: Sequence[int] = DEFAULT_KS) -> AreaTable:
    if depth < max(ks) + 2:
        raise DomainError(f"depth {depth} too small for r = 2^-{max(ks)}; need >= {max(ks) + 2}")
    scheme = build_tight_horseshoe(depth)
    return area_experiment(scheme, scheme.singular_points[0], ks)
