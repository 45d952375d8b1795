import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from papersurf.errors import DomainError
from papersurf.quotient import (build_chain_graph, default_spacing, distance_matrix, quotient_distance,
                                reach, refine_until, resolve)
from papersurf.scheme import BoundaryPoint
from oracles import torus_distance

unit = st.floats(0.0, 1.0)


def test_torus_wrap(torus):
    assert quotient_distance(torus, ("P", (0.1, 0.5)), ("P", (0.9, 0.5))).value == pytest.approx(0.2)
    res = refine_until(torus, ("P", (0.1, 0.5)), ("P", (0.9, 0.5)))
    assert res.converged and abs(res.value - 0.2) < 1e-4


def test_paired_points_are_at_zero(torus, ex13):
    assert quotient_distance(torus, ("P", (0.3, 0.0)), ("P", (0.3, 1.0))).value == 0.0
    assert quotient_distance(ex13, ("P", (1.0, 0.3)), ("P", (1.0, 0.7))).value == 0.0
    assert quotient_distance(ex13, ("P", (0.0, 0.0)), ("P", (0.0, 1.0))).value == 0.0


def test_fold_neighbourhood(ex13):
    res = refine_until(ex13, ("P", (1.0, 0.3)), ("P", (1.0, 0.8)))
    assert res.value == pytest.approx(0.1, abs=1e-4)
    assert any(step.kind == "jump" for step in res.path)


@settings(max_examples=15, deadline=None)
@given(st.tuples(unit, unit), st.tuples(unit, unit))
def test_torus_matches_translate_oracle(torus, p, q):
    h = 0.02
    d = quotient_distance(torus, ("P", p), ("P", q), h=h).value
    true = torus_distance(p, q)
    assert true - 1e-9 <= d <= true + h


def test_refinement_never_increases(ex13):
    x, y = ("P", (0.2, 0.9)), ("P", (0.95, 0.15))
    h = default_spacing(ex13)
    values = [quotient_distance(ex13, x, y, h=h / 2 ** k).value for k in range(3)]
    assert values[0] >= values[1] - 1e-12 >= values[2] - 2e-12


def test_distance_matrix_symmetric_zero_diagonal(ex13):
    pts = [("P", (0.5, 0.5)), ("P", (0.0, 0.3)), ("P", (1.0, 0.9))]
    m = distance_matrix(ex13, pts)
    assert np.allclose(m, m.T) and np.all(np.diag(m) == 0)


def test_triangle_inequality_on_graph(ex13):
    rng = np.random.default_rng(5)
    pts = [("P", tuple(rng.random(2))) for _ in range(8)] + [BoundaryPoint("P", 3.75)]
    g = build_chain_graph(ex13, default_spacing(ex13), None, pts)
    d = np.array([g.dijkstra([q])[0][g.queries] for q in g.queries])
    # d[i, k] <= d[i, j] + d[j, k]
    assert np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + 1e-9)


def test_resolve_forms(ex13):
    assert resolve(ex13, BoundaryPoint("P", 4.5)).s == pytest.approx(0.5)
    assert resolve(ex13, (0.5, 0.5)).s is None
    assert resolve(ex13, ("P", (0.0, 0.25))).s == pytest.approx(3.75)
    with pytest.raises(DomainError):
        resolve(ex13, ("P", (2.0, 2.0)))


def test_reach_budget(torus):
    xy, poly, budget = reach(torus, ("P", (0.5, 0.05)), 0.1, 0.01)
    assert np.all(budget > 0) and np.all(budget <= 0.1)
    assert np.any(xy[:, 1] > 0.9)  # crossed the bottom-top gluing


def test_bad_spacing(torus):
    with pytest.raises(DomainError):
        build_chain_graph(torus, 0.0)
    with pytest.raises(DomainError):
        refine_until(torus, (0.1, 0.1), (0.2, 0.2), tol=0)
