import numpy as np
import pytest

from papersurf.errors import DomainError
from papersurf.llc import (MIN_CELLS_PER_PAIRING, ball_cells, build_grid, complement_connected, empirical_lambda,
                           llc_check, path_is_valid)
from papersurf.measure import sample_centers, scale_constants
from papersurf.scheme import BoundaryPoint
from oracles import grid_components


@pytest.fixture(scope="module")
def ex_grid(ex13):
    return build_grid(ex13, 0.01)


def test_torus_grid(torus):
    g = build_grid(torus, 0.01)
    assert g.size == 10_000
    assert len(g.links) == 200
    assert g.components() == 1


def test_link_count_matches_pairing_lengths(ex13, ex_grid):
    # every linked pairing contributes length / h cell pairs, up to one per pairing end
    lengths = [p.length for p in ex_grid_pairings(ex13, ex_grid)]
    assert abs(len(ex_grid.links) - sum(lengths) / ex_grid.h) <= len(lengths)
    assert all(ln >= MIN_CELLS_PER_PAIRING * ex_grid.h for ln in lengths)


def ex_grid_pairings(scheme, grid):
    return scheme.with_depth(grid.depth).expanded if grid.depth is not None else scheme.expanded


@pytest.mark.parametrize("blobs", [[(slice(10, 30), slice(10, 30)), (slice(60, 80), slice(40, 90))],
                                   [(slice(10, 90), slice(45, 55)), (slice(45, 55), slice(10, 90))]])
def test_interior_components_match_flood_fill_oracle(ex_grid, blobs):
    b = ex_grid.blocks[0]
    square = np.zeros((b.nx, b.ny), dtype=bool)
    for sx, sy in blobs:
        square[sx, sy] = True
    mask = np.zeros(ex_grid.size, dtype=bool)
    mask[b.offset:b.offset + b.nx * b.ny] = square.ravel()
    assert ex_grid.components(mask) == grid_components(square)


def test_complement_connected(ex13, ex_grid):
    for c in sample_centers(ex13, 6):
        assert complement_connected(ex13, ex_grid, c.location, 0.2)
    with pytest.raises(DomainError):
        complement_connected(ex13, ex_grid, ("P", (0.5, 0.5)), 1.0)


def test_ball_cells_area(ex13, ex_grid):
    mask = ball_cells(ex13, ex_grid, ("P", (0.5, 0.5)), 0.1)
    assert mask.sum() * ex_grid.h ** 2 == pytest.approx(0.04, rel=0.05)


def test_llc_witnesses_are_valid(ex13, ex_grid):
    _, K, r0 = scale_constants(ex13)
    samples = [(c.location, r0 / 2) for c in sample_centers(ex13, 5)]
    rep = llc_check(ex13, ex_grid, 4 * K, samples)
    assert rep.passed and rep.lambda_empirical == 4 * K
    for s in rep.samples:
        assert s.witnesses
        for w in s.witnesses:
            assert path_is_valid(ex_grid, w, diagonal=True) or path_is_valid(ex_grid, w, diagonal=False)
    assert rep.to_csv().splitlines()[0] == "polygon,center_x,center_y,r,llc1,llc2,lambda"


def test_llc_monotone_in_lambda(ex13, ex_grid):
    samples = [(BoundaryPoint("P", 3.75), 0.2), (("P", (0.3, 0.6)), 0.2)]
    lam = empirical_lambda(ex13, ex_grid, [1.0, 2.0, 4.0], samples)
    assert lam is not None
    for bigger in (2.0, 4.0):
        if bigger >= lam:
            assert llc_check(ex13, ex_grid, bigger, samples).passed


def test_llc_errors(ex13, ex_grid):
    with pytest.raises(DomainError):
        llc_check(ex13, ex_grid, 0.5, [])
    with pytest.raises(DomainError):
        build_grid(ex13, 0.3)
