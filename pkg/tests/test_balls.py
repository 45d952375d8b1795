import pytest
from hypothesis import given, settings, strategies as st

from papersurf.balls import (ball_contains, ball_oracle, decompose_ball, pieces_area, pieces_csv,
                             spawn_schedule, symmetric_difference_area)
from papersurf.errors import DomainError
from papersurf.geometry import MultiPolygon, Polygon
from papersurf.scheme import BoundaryPoint, PairingScheme, SegmentPairing


def area(scheme, center, r):
    return pieces_area(scheme, decompose_ball(scheme, center, r).pieces)


@pytest.mark.parametrize("center, r, factor", [
    (("P", (0.5, 0.5)), 0.1, 4.0),             # interior box
    (BoundaryPoint("P", 1.3), 0.05, 4.0),      # planar: two semi-balls
    (BoundaryPoint("P", 1.5), 0.05, 2.0),      # fold point, angle pi
    (BoundaryPoint("P", 0.0), 0.05, 2.0),      # two corners, angle pi
    (BoundaryPoint("P", 3.875), 0.01, 6.0),    # 3pi conic point
])
def test_small_ball_areas(ex13, center, r, factor):
    assert area(ex13, center, r) == pytest.approx(factor * r * r, rel=1e-9)


def test_torus_ball_is_a_full_box_everywhere(torus):
    for c in (("P", (0.5, 0.02)), BoundaryPoint("P", 0.0), ("P", (0.97, 0.99))):
        assert area(torus, c, 0.1) == pytest.approx(0.04, rel=1e-9)


def test_accumulation_ball(ex13):
    r = 0.1
    d = decompose_ball(ex13, BoundaryPoint("P", 3.75), r)
    a = pieces_area(ex13, d.pieces)
    assert 2 * r * r <= a <= 5.5 * r * r
    assert d.tail_area_bound < 1e-6 * a
    assert d.center_class.kind == "singular-accumulation"
    radii = [pc.radius for pc in d.pieces]
    for _, rad in spawn_schedule(ex13, 0, r):
        assert any(abs(x - rad) < 1e-12 for x in radii)


def test_spawn_schedule_frozen(ex13):
    sched = spawn_schedule(ex13, 0, 0.1)
    assert [i for i, _ in sched[:4]] == [1, 2, 3, 4]
    assert [rad for _, rad in sched[:4]] == pytest.approx([0.0375, 0.06875, 0.084375, 0.0921875])
    assert all(i != 0 for i, _ in sched)


def test_spawn_schedule_conic(ex13):
    sched = dict(spawn_schedule(ex13, 0, 0.1, center=1))
    # S_0 = .125, S_1 = .1875, S_2 = .21875
    assert sched[0] == pytest.approx(0.1 - 0.0625)
    assert sched[2] == pytest.approx(0.1 - 0.03125)
    with pytest.raises(DomainError):
        spawn_schedule(ex13, 3, 0.1)


def test_provenance_tags(ex13, torus):
    d = decompose_ball(ex13, BoundaryPoint("P", 3.75), 0.1)
    tags = {pc.provenance.split("(")[0] for pc in d.pieces}
    assert {"main", "conic-spawn"} <= tags
    d = decompose_ball(torus, ("P", (0.5, 0.05)), 0.1)
    assert any(pc.provenance.startswith("crossing") for pc in d.pieces)


def test_ball_contains(torus):
    d = decompose_ball(torus, ("P", (0.5, 0.05)), 0.1)
    assert ball_contains(torus, d, ("P", (0.5, 0.97)))
    assert not ball_contains(torus, d, ("P", (0.5, 0.5)))


@pytest.mark.parametrize("center, r", [(BoundaryPoint("P", 3.75), 0.15), (("P", (0.9, 0.2)), 0.3),
                                       (BoundaryPoint("P", 3.875), 0.08)])
def test_agrees_with_dijkstra_oracle(ex13, center, r):
    d = decompose_ball(ex13, center, r)
    a = pieces_area(ex13, d.pieces)
    sd = [symmetric_difference_area(ex13, d.pieces, ball_oracle(ex13, center, r, h)) for h in (r / 100, r / 200)]
    assert sd[0] < 0.01 * a
    assert sd[1] <= sd[0] + 1e-12 * a


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 4.0, exclude_max=True), st.floats(0.005, 0.45), st.floats(0.1, 0.95))
def test_lower_bound_and_monotone(ex13, s, r, shrink):
    c = BoundaryPoint("P", s)
    big, small = area(ex13, c, r), area(ex13, c, r * shrink)
    assert big >= 2 * r * r * (1 - 1e-9)
    assert small <= big + 1e-12


def test_domain_errors(ex13):
    with pytest.raises(DomainError):
        decompose_ball(ex13, ("P", (0.5, 0.5)), 0.0)
    tri = PairingScheme(MultiPolygon((Polygon("T", ((0, 0), (1, 0), (0, 1))),)),
                        (SegmentPairing("T", 0.0, "T", 0.5, 0.5),))
    with pytest.raises(DomainError):
        decompose_ball(tri, ("T", (0.2, 0.2)), 0.1)


def test_pieces_csv(ex13):
    text = pieces_csv(decompose_ball(ex13, ("P", (0.5, 0.5)), 0.1))
    assert text.splitlines()[0] == "cx,cy,r,polygon,provenance,hx,hy"
    assert text.splitlines()[1].startswith("0.5,0.5,0.1,P,main")
