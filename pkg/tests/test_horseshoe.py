import pytest

from papersurf.errors import DomainError
from papersurf.horseshoe import (AreaTable, HorseshoeSpec, area_experiment, build_tight_horseshoe,
                                 horseshoe_area_experiment)
from papersurf.scheme import BoundaryPoint, SequenceSpec, check_full, classify_point
from papersurf.schemefile import builtin_text, dumps
from oracles import least_squares


@pytest.fixture(scope="module")
def table():
    return horseshoe_area_experiment()


def test_small_depth_layout():
    sc = build_tight_horseshoe(4)
    starts = [(round(p.a_start, 9), round(p.b_start, 9), p.length) for p in sc.expanded]
    # each fold pairs [x, x + a_i] with [x + a_i, x + 2 a_i], walking away from (1, 1)
    assert starts == [(2.0, 2.5, 0.5), (3.0, 3.25, 0.25), (3.5, 3.625, 0.125), (3.75, 3.8125, 0.0625),
                      (1.0, 1.5, 0.5), (0.5, 0.75, 0.25), (0.25, 0.375, 0.125), (0.125, 0.1875, 0.0625)]
    assert check_full(sc).ok


def test_builtin_is_depth_24():
    assert dumps(build_tight_horseshoe(24)) == builtin_text("tight-horseshoe")


def test_fold_endpoints_form_one_singular_class(horseshoe):
    assert classify_point(horseshoe, BoundaryPoint("P", 0.0)).singular
    assert classify_point(horseshoe, BoundaryPoint("P", 2.0)).singular


def test_ratio_grows(table):
    assert table.strictly_increasing
    assert [k for k, *_ in table.rows] == list(range(3, 11))
    assert table.slope > 0 and table.r2 >= 0.99
    # ratio = 4 k exactly in the max metric
    assert table.ratios == pytest.approx([4.0 * k for k in range(3, 11)])


def test_fit_matches_oracle(table):
    slope, intercept = least_squares([row[0] for row in table.rows], table.ratios)
    assert (table.slope, table.intercept) == pytest.approx((slope, intercept))


def test_contrast_on_regular_example(ex13):
    t = area_experiment(ex13, BoundaryPoint("P", 3.75))
    assert abs(t.slope) < 0.05
    assert t.ratios == pytest.approx([10 / 3] * len(t.rows))


def test_table_output(table):
    assert isinstance(table, AreaTable)
    assert table.to_csv().splitlines()[0] == "k,r,area,ratio,pieces,tail_bound"
    assert table.summary().startswith("fit: ratio = 4.0000 * log2(1/r)")


def test_errors():
    with pytest.raises(DomainError):
        build_tight_horseshoe(1)
    with pytest.raises(DomainError):
        horseshoe_area_experiment(depth=8)
    with pytest.raises(DomainError):
        build_tight_horseshoe(6, HorseshoeSpec(6, SequenceSpec.geometric(0.25, 2.0)))
