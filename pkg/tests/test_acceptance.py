"""End-to-end acceptance criteria, one test per criterion."""

import time
from dataclasses import replace

import numpy as np
import pytest

from papersurf.balls import ball_oracle, decompose_ball, pieces_area, symmetric_difference_area
from papersurf.horseshoe import area_experiment, horseshoe_area_experiment
from papersurf.llc import build_grid, complement_connected, llc_check
from papersurf.measure import (extension_check, regularity_scan, sample_centers, scale_constants,
                               union_area, verify_paper_bounds)
from papersurf.quotient import build_chain_graph, default_spacing, quotient_distance, refine_until
from papersurf.scheme import BoundaryPoint, check_full, check_unlinked, split_pairing


def test_criterion_1_quotient_metric(torus, ex13, criterion):
    t0 = time.perf_counter()
    wrap = refine_until(torus, ("P", (0.1, 0.5)), ("P", (0.9, 0.5)))
    wrap_ok = wrap.converged and abs(wrap.value - 0.2) < 1e-4
    zero = [quotient_distance(torus, ("P", (0.3, 0.0)), ("P", (0.3, 1.0))).value,
            quotient_distance(torus, ("P", (0.0, 0.6)), ("P", (1.0, 0.6))).value,
            quotient_distance(ex13, ("P", (1.0, 0.2)), ("P", (1.0, 0.8))).value]
    zero_ok = all(v == 0.0 for v in zero)

    rng = np.random.default_rng(1)
    pts = [("P", tuple(rng.random(2))) for _ in range(40)]
    g = build_chain_graph(torus, default_spacing(torus), None, pts)
    d = np.array([g.dijkstra([q])[0][g.queries] for q in g.queries])
    triples = rng.integers(0, len(pts), size=(1000, 3))
    worst = max(d[i, k] - d[i, j] - d[j, k] for i, j, k in triples)
    tri_ok = worst <= 1e-9
    elapsed = time.perf_counter() - t0
    ok = wrap_ok and zero_ok and tri_ok and elapsed < 10
    criterion(1, ok, f"wrap {wrap.value:.6f}, paired distances {zero}, "
                     f"worst triangle excess {worst:.2e}, {elapsed:.1f}s")
    assert ok


def _oracle_probes(scheme, rng, n=20):
    _, _, r0 = scale_constants(scheme)
    centers = sample_centers(scheme, 40, seed=int(rng.integers(1 << 30)))
    picks = rng.choice(len(centers), n, replace=False)
    radii = np.exp(rng.uniform(np.log(0.05), np.log(r0), n))
    return [(centers[i].location, float(r)) for i, r in zip(picks, radii)]


def test_criterion_2_oracle_equivalence(ex13, four_rect, criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst_rel, not_shrinking = 0.0, []
    for scheme in (ex13, four_rect):
        for center, r in _oracle_probes(scheme, rng):
            d = decompose_ball(scheme, center, r)
            area = pieces_area(scheme, d.pieces)
            sd = [symmetric_difference_area(scheme, d.pieces, ball_oracle(scheme, center, r, h))
                  for h in (r / 100, r / 200)]
            worst_rel = max(worst_rel, sd[0] / area)
            noise = 1e-12 * area
            if not (sd[1] < sd[0] or max(sd) < noise):
                not_shrinking.append((scheme.name, center, r, sd))
    elapsed = time.perf_counter() - t0
    ok = worst_rel < 0.01 and not not_shrinking and elapsed < 120
    criterion(2, ok, f"worst symmetric difference {worst_rel:.2e} of ball area, "
                     f"{len(not_shrinking)} non-shrinking, {elapsed:.1f}s")
    assert ok, not_shrinking


def test_criterion_3_area_bounds(ex13, finite_w, criterion):
    t0 = time.perf_counter()
    tables = {
        "lower": verify_paper_bounds(ex13, "lower", n_centers=50, radii=12),
        "accumulation": verify_paper_bounds(ex13, "accumulation", n_centers=50, radii=12),
        "conic": verify_paper_bounds(ex13, "conic", n_centers=50, radii=12),
        "finite-w": verify_paper_bounds(finite_w, "finite-w", n_centers=50, radii=12),
    }
    elapsed = time.perf_counter() - t0
    acc = tables["accumulation"]
    parts = []
    for name, t in tables.items():
        bound = f" <= {t.factor:g} r^2" if t.factor else ""
        parts.append(f"{name}{bound}: {len(t.rows) - len(t.failures)}/{len(t.rows)} "
                     f"(max ratio {t.max_ratio:.4f})")
    ok = all(t.passed for t in tables.values()) and acc.constants["K1"] == pytest.approx(1.0) \
        and acc.factor == pytest.approx(5.5) and elapsed < 300
    criterion(3, ok, "; ".join(parts) + f"; {elapsed:.1f}s")
    failed = {name: t.lines()[:5] for name, t in tables.items() if not t.passed}
    assert not failed, failed
    assert ok


def test_criterion_4_extension(ex13, criterion):
    t0 = time.perf_counter()
    base = regularity_scan(ex13, 50, 12)
    ext = extension_check(ex13, base, n=20)
    elapsed = time.perf_counter() - t0
    C = max(base.c0, ex13.domain.area / base.r0 ** 2)
    ok = ext.ok and ext.C == C and len(ext.rows) == 20 and elapsed < 60
    worst = max(area / r ** 2 for r, area, *_ in ext.rows)
    criterion(4, ok, f"c0 {base.c0:.4f}, r0 {base.r0:g}, C {ext.C:.4f}, "
                     f"20 radii in (r0, diam] with max ratio {worst:.4f}, {elapsed:.1f}s")
    assert ok


def test_criterion_5_llc(ex13, criterion):
    t0 = time.perf_counter()
    _, K, r0 = scale_constants(ex13)
    lam = 4 * K
    centers = sample_centers(ex13, 10, seed=5)
    results, connected = [], []
    for r in (r0 / 4, r0 / 2, r0):
        grid = build_grid(ex13, r / 100)
        samples = [(c.location, r) for c in centers]
        results.extend(llc_check(ex13, grid, lam, samples, seed=5).samples)
        connected.extend(complement_connected(ex13, grid, c, r) for c, _ in samples)
    elapsed = time.perf_counter() - t0
    n1 = sum(s.llc1_ok for s in results)
    n2 = sum(s.llc2_ok for s in results)
    ok = n1 == n2 == len(results) == 30 and all(connected) and elapsed < 300
    criterion(5, ok, f"lambda {lam:g}: LLC1 {n1}/30, LLC2 {n2}/30, "
                     f"complement connected {sum(connected)}/{len(connected)}, {elapsed:.1f}s")
    assert ok


def test_criterion_6_horseshoe(ex13, criterion):
    t0 = time.perf_counter()
    table = horseshoe_area_experiment()
    contrast = area_experiment(ex13, BoundaryPoint("P", 3.75))
    elapsed = time.perf_counter() - t0
    ok = (table.strictly_increasing and table.slope > 0 and table.r2 >= 0.99
          and abs(contrast.slope) < 0.05 and elapsed < 120)
    criterion(6, ok, f"horseshoe ratios {[round(float(q), 4) for q in table.ratios]}, slope {table.slope:.4f}, "
                     f"R^2 {table.r2:.4f}; contrast slope {contrast.slope:.2e}, {elapsed:.1f}s")
    assert ok


def test_criterion_7_validity(torus, ex13, horseshoe, four_rect, criterion):
    unmerged = replace(four_rect, basic=tuple(replace(p, merge=False) for p in four_rect.basic))
    checks = {
        "torus full": check_full(torus).ok,
        "torus linked": not check_unlinked(torus).plain,
        "example-1.3 full": check_full(ex13).ok,
        "example-1.3 plain": check_unlinked(ex13).plain,
        "horseshoe full": check_full(horseshoe).ok,
        "four-rectangle full": check_full(four_rect).ok,
        "four-rectangle plain after merge": check_unlinked(four_rect).plain,
        "four-rectangle not plain without merge": not check_unlinked(unmerged).plain,
    }
    ok = all(checks.values())
    criterion(7, ok, ", ".join(k for k, v in checks.items() if v) or "none")
    assert ok, checks


def test_criterion_8_invariance(torus, ex13, finite_w, four_rect, criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    worst_d = worst_a = 0.0
    probes = 0
    for scheme in (torus, ex13, finite_w, four_rect):
        h = default_spacing(scheme)
        centers = sample_centers(scheme, 40, seed=8)
        for _ in range(20):
            idx = int(rng.integers(len(scheme.basic)))
            p = scheme.basic[idx]
            # distances: dyadic split so the sampled chain graph is unchanged
            t = p.length * int(rng.integers(1, 16)) / 16
            split = split_pairing(scheme, idx, t)
            x, y = (centers[int(i)].location for i in rng.integers(len(centers), size=2))
            worst_d = max(worst_d, abs(quotient_distance(scheme, x, y, h=h).value
                                       - quotient_distance(split, x, y, h=h).value))
            # areas: any split point
            t = p.length * float(rng.uniform(0.01, 0.99))
            split = split_pairing(scheme, idx, t)
            c = centers[int(rng.integers(len(centers)))].location
            r = float(rng.uniform(0.01, scale_constants(scheme)[2]))
            a0 = union_area(decompose_ball(scheme, c, r).pieces, scheme)
            a1 = union_area(decompose_ball(split, c, r).pieces, split)
            worst_a = max(worst_a, abs(a0 - a1))
            probes += 1
    elapsed = time.perf_counter() - t0
    ok = worst_d <= 1e-6 and worst_a <= 1e-6 and elapsed < 120
    criterion(8, ok, f"{probes} probes over 4 schemes: worst distance change {worst_d:.2e}, "
                     f"worst area change {worst_a:.2e}, {elapsed:.1f}s")
    assert ok
