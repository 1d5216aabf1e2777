from __future__ import annotations

import random
from fractions import Fraction

import pytest

from dicontext.errors import DimensionError, DomainError, SpecError
from dicontext.order_core import (
    Affine,
    Box,
    Case,
    Classification,
    Const,
    Constraint,
    Max,
    OrderRelation,
    Piecewise,
    RectRegion,
    Var,
    compare_points,
    expr_from_json,
    format_point,
    format_rat,
    leq,
    make_point,
    parse_rat,
    region_classify,
)


def test_parse_rat_reads_strings_and_integers() -> None:
    assert parse_rat("3/6") == Fraction(1, 2)
    assert parse_rat(" 2 ") == 2
    assert parse_rat(7) == Fraction(7)
    assert format_rat(Fraction(4, 2)) == "2"
    assert format_point(make_point("1/2", 2)) == "(1/2,2)"


@pytest.mark.parametrize("bad", [0.5, "0.5", "1e3", "x", True, None, "1/0"])
def test_parse_rat_refuses_inexact_or_garbage(bad: object) -> None:
    with pytest.raises(SpecError):
        parse_rat(bad)


def test_compare_points_examples() -> None:
    assert compare_points(make_point(0, 0), make_point(1, 1)) is OrderRelation.LESS_EQ
    assert compare_points(make_point(1, 1), make_point(0, 1)) is OrderRelation.GREATER_EQ
    assert compare_points(make_point("1/2", 0), make_point("1/2", 0)) is OrderRelation.EQUAL
    assert compare_points(make_point(0, "1/4"), make_point("3/4", 0)) is OrderRelation.INCOMPARABLE
    with pytest.raises(DimensionError):
        compare_points(make_point(0), make_point(0, 0))


def test_componentwise_order_is_a_partial_order() -> None:
    rng = random.Random(7)

    def point() -> tuple[Fraction, ...]:
        return tuple(Fraction(rng.randint(0, 4), 4) for _ in range(2))

    for _ in range(1000):
        p, q, r = point(), point(), point()
        assert leq(p, p)
        if leq(p, q) and leq(q, p):
            assert p == q
        if leq(p, q) and leq(q, r):
            assert leq(p, r)


def test_region_classify_square_removed() -> None:
    r = RectRegion(Box.closed((0, 0), (1, 1)), (Box.open(("1/3", "1/3"), ("2/3", "2/3")),))
    assert region_classify(r, make_point("1/2", "1/2")) is Classification.REMOVED
    assert region_classify(r, make_point("1/3", "1/2")) is Classification.ON_FORBIDDEN_BOUNDARY
    assert region_classify(r, make_point(0, 0)) is Classification.INSIDE
    assert region_classify(r, make_point(2, 0)) is Classification.OUTSIDE_OUTER
    assert r.mandatory_lines()[0] == [0, Fraction(1, 3), Fraction(2, 3), 1]


def test_shared_walls_vanish_only_in_the_union_reading() -> None:
    boxes = (Box.open(("2/5", "2/5"), ("3/5", "3/5")), Box.open(("2/5", "1/5"), ("3/5", "2/5")))
    wall = make_point("1/2", "2/5")
    union = RectRegion(Box.closed((0, 0), (1, 1)), boxes)
    per_box = RectRegion(Box.closed((0, 0), (1, 1)), boxes, interior_of_union=False)
    assert region_classify(union, wall) is Classification.REMOVED
    assert region_classify(per_box, wall) is Classification.ON_FORBIDDEN_BOUNDARY


def test_shrinking_a_forbidden_box_never_removes_a_point() -> None:
    rng = random.Random(17)
    quarters = [Fraction(k, 4) for k in range(5)]
    eighth = Fraction(1, 8)
    unit = Box.closed((0, 0), (1, 1))
    for _ in range(1000):
        boxes = []
        for _ in range(rng.randint(1, 2)):
            xs, ys = sorted(rng.sample(quarters, 2)), sorted(rng.sample(quarters, 2))
            boxes.append(Box.open((xs[0], ys[0]), (xs[1], ys[1])))
        big = boxes[0]
        lo = tuple(a + rng.choice((0, eighth)) for a in big.lo)
        hi = tuple(b - rng.choice((0, eighth)) for b in big.hi)
        if any(a >= b for a, b in zip(lo, hi)):
            continue
        p = make_point(f"{rng.randint(0, 8)}/8", f"{rng.randint(0, 8)}/8")
        for union in (True, False):
            before = RectRegion(unit, tuple(boxes), interior_of_union=union)
            after = RectRegion(unit, (Box.open(lo, hi), *boxes[1:]), interior_of_union=union)
            if region_classify(before, p) is not Classification.REMOVED:
                assert region_classify(after, p) is not Classification.REMOVED, (boxes, lo, hi, p)


def test_boxes_reject_bad_bounds() -> None:
    with pytest.raises(SpecError):
        Box.open((0, 0), (0, 1))
    with pytest.raises(SpecError):
        Box.closed((1,), (0,))
    with pytest.raises(SpecError):
        RectRegion(Box.open((0, 0), (1, 1)))
    with pytest.raises(SpecError):
        RectRegion(Box.closed((0, 0), (1, 1)), (Box.open((0, 0), (2, 2)),))


def test_expression_arithmetic_normalizes_to_affine() -> None:
    x, y = Var(0), Var(1)
    e = 2 * x - y + Fraction(1, 3)
    assert isinstance(e, Affine)
    assert e.evaluate(make_point("1/2", "1/3")) == Fraction(1)
    assert e.arity() == 2
    assert (x - x).terms == ()
    assert Max((x, y, Const(Fraction(1, 2)))).evaluate(make_point("1/4", "1/5")) == Fraction(1, 2)


def test_piecewise_takes_the_first_matching_case() -> None:
    x = Var(0)
    pw = Piecewise((
        Case((Constraint(x, "<", Fraction(1, 2)),), Const(Fraction(0))),
        Case((Constraint(x, ">=", Fraction(1, 2)),), 2 * x - 1),
    ))
    assert pw.evaluate(make_point("1/4")) == 0
    assert pw.evaluate(make_point("3/4")) == Fraction(1, 2)
    gap = Piecewise((Case((Constraint(x, "<", Fraction(1, 2)),), x),))
    with pytest.raises(DomainError):
        gap.evaluate(make_point(1))


def test_expression_json_round_trip_and_errors() -> None:
    doc = {
        "op": "piecewise",
        "cases": [
            {"when": [{"expr": {"op": "var", "index": 0}, "cmp": "<=", "bound": "1/3"}], "value": {"op": "var", "index": 0}},
            {"when": [], "value": "1"},
        ],
    }
    e = expr_from_json(doc)
    assert e.evaluate(make_point("1/5")) == Fraction(1, 5)
    assert e.evaluate(make_point("1/2")) == 1
    assert expr_from_json(e.to_json()) == e
    with pytest.raises(SpecError):
        expr_from_json({"op": "sqrt", "args": []})
    with pytest.raises(SpecError):
        expr_from_json({"op": "var", "index": -1})
    with pytest.raises(SpecError):
        expr_from_json({"op": "affine", "terms": [{"coef": "1"}]})
