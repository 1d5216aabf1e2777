from __future__ import annotations

import json
import random
from fractions import Fraction
from pathlib import Path

import pytest

from dicontext.documents import DATA_DIR, load_certificate, load_space, read_json
from dicontext.errors import ContextError, DimensionError, DiscretizationError, DomainError, SpecError, UnknownNameError
from dicontext.fundcat import equivalence_obstruction
from dicontext.order_core import Case, Const, Constraint, Max, Min, Piecewise, Var, eval_pl, leq, parse_rat
from dicontext.plmaps import (
    STAIRCASE_F_X,
    STAIRCASE_G_X,
    STAIRCASE_Y,
    PLMap,
    check_context_preserving,
    check_dihomotopy,
    check_dimap,
    compose,
    constant_map,
    discretize,
    general_homotopy,
    identity_map,
    linear_interpolation,
    maps_equal,
    preset_map,
    verify_equivalence_certificate,
)
from dicontext.reports import Status
from dicontext.spaces import ProductSpace, RegionSpace, named_space

X = Var(0)


def _di() -> RegionSpace:
    return named_space("dI").space


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload), encoding="utf-8")


def test_max_and_diagonal_are_dimaps() -> None:
    assert check_dimap(preset_map("max")).status is Status.PASS
    assert check_dimap(preset_map("diagonal")).status is Status.PASS
    assert preset_map("max")(["1/3", "1/2"]) == (Fraction(1, 2),)


def test_dimap_failures_name_their_premise() -> None:
    reverse = PLMap(_di(), _di(), ((1 - X,),), name="1-x")
    v = check_dimap(reverse)
    assert (v.status, v.stage, v.premise) == (Status.FAIL, "1-x", "monotonicity")

    double = PLMap(_di(), _di(), ((2 * X,),), name="2x")
    assert check_dimap(double).premise == "containment"

    jump = Piecewise((
        Case((Constraint(X, "<", Fraction(1, 2)),), Const(Fraction(0))),
        Case((Constraint(X, ">=", Fraction(1, 2)),), X),
    ))
    assert check_dimap(PLMap(_di(), _di(), ((jump,),), name="jump")).premise == "continuity"


def test_preset_values() -> None:
    assert preset_map("F1")(["2/3"]) == (1,)
    assert preset_map("F2")(["1/3"]) == (0,)
    assert preset_map("dX-h")(["1/4", "1/2"]) == (Fraction(1, 2), Fraction(1, 2))
    assert preset_map("swiss-f4")(["1/2", "1/5"]) == (Fraction(2, 5), Fraction(1, 5))
    assert check_dimap(preset_map("swiss-f3")).ok
    assert check_dimap(preset_map("F2F1xF2F1")).ok
    with pytest.raises(DomainError):
        preset_map("F1")(["2"])
    with pytest.raises(DomainError):
        preset_map("dX-h")(["1/4", "1/4"])


def test_swiss_f3_may_reverse_points_no_dipath_joins() -> None:
    f3 = preset_map("swiss-f3")
    # (2/5,3/5) <= (3/5,3/5) in the plane, but the images are incomparable
    assert f3(["2/5", "3/5"]) == (Fraction(2, 5), Fraction(4, 5))
    assert f3(["3/5", "3/5"]) == (Fraction(3, 5), Fraction(3, 5))
    v = check_dimap(f3)
    assert v.status is Status.PASS, v.to_json()
    for step in ("swiss-f1", "swiss-f2", "swiss-f4", "swiss-f"):
        assert check_dimap(preset_map(step)).ok, step


def test_preset_errors() -> None:
    with pytest.raises(UnknownNameError):
        preset_map("rotate")
    with pytest.raises(SpecError):
        preset_map("F1(3)")
    with pytest.raises(SpecError):
        preset_map("collapse(4,0,1/2)")
    assert preset_map("collapse(4,1/4,1/2)").name == "collapse(4,1/4,1/2)"


def test_compose_chains_stages() -> None:
    f = compose(preset_map("F2"), preset_map("F1"))
    assert f.name == "F2∘F1"
    assert f(["1/2"]) == (Fraction(1, 2),)
    assert maps_equal(compose(identity_map(_di()), preset_map("F1")), preset_map("F1"))
    assert not maps_equal(preset_map("F1"), preset_map("F2"))


def test_eval_checks_the_domain() -> None:
    ident = identity_map(_di())
    assert eval_pl(ident, (Fraction(1, 3),)) == (Fraction(1, 3),)
    with pytest.raises(DimensionError):
        eval_pl(ident, (Fraction(0), Fraction(0)))
    with pytest.raises(DomainError) as info:
        eval_pl(ident, (Fraction(3, 2),))
    assert info.value.point == (Fraction(3, 2),)


def test_context_preservation() -> None:
    ends = named_space("dI").with_marking({"a": ["0"], "b": ["1"]})
    assert check_context_preserving(identity_map(_di()), ends, ends).ok

    top = check_context_preserving(constant_map(_di(), _di(), ["1"]), ends, ends)
    assert (top.status, top.premise) == (Status.FAIL, "context")
    assert top.witness["context"] == "a"

    merged = named_space("dI").with_marking({"a": ["0"], "b": ["0"]})
    v = check_context_preserving(identity_map(_di()), merged, ends)
    assert v.premise == "context" and v.witness == {"a": "a", "b": "b"}

    with pytest.raises(ContextError):
        check_context_preserving(identity_map(_di()), ends, named_space("dI").with_marking({"a": ["0"]}))


def test_interpolation_up_to_the_top_passes() -> None:
    ident = identity_map(_di())
    top = constant_map(_di(), _di(), ["1"])
    h = linear_interpolation(ident, top)
    assert h.name == "id~const(1)"
    assert h(["1/2"], "1/2") == (Fraction(3, 4),)
    assert check_dihomotopy(h, ident, top).status is Status.PASS
    with pytest.raises(DomainError):
        h(["1/2"], "2")


def test_interpolation_down_to_the_bottom_fails() -> None:
    h = linear_interpolation(identity_map(_di()), constant_map(_di(), _di(), ["0"]))
    assert check_dihomotopy(h).premise == "monotonicity-in-t"
    assert check_dihomotopy(h, method="lemma").premise == "order"
    with pytest.raises(SpecError):
        check_dihomotopy(h, method="fast")


def test_interpolation_endpoint_and_rel() -> None:
    ident = identity_map(_di())
    h = linear_interpolation(ident, constant_map(_di(), _di(), ["1"]))
    assert check_dihomotopy(h, f=preset_map("F1")).premise == "endpoint"
    zero = (Fraction(0),)
    assert check_dihomotopy(h, rel={"a": (zero, zero)}).premise == "rel"
    one = (Fraction(1),)
    assert check_dihomotopy(h, rel={"b": (one, one)}).ok


def test_interpolation_leaving_the_plus_fails_containment() -> None:
    dx = named_space("dX").space
    low = constant_map(dx, dx, ["0", "1/2"])
    high = constant_map(dx, dx, ["1/2", "1"])
    v = check_dihomotopy(linear_interpolation(low, high))
    assert (v.status, v.premise) == (Status.FAIL, "containment")


def test_general_homotopy_is_checked_as_a_dimap() -> None:
    di = _di()
    up = general_homotopy(PLMap(ProductSpace(di), di, ((Max((Var(0), Var(1))),),), name="max-t"))
    assert up(["1/4"], "1/2") == (Fraction(1, 2),)
    assert check_dihomotopy(up, identity_map(di), constant_map(di, di, ["1"])).ok
    with pytest.raises(SpecError):
        check_dihomotopy(up, method="lemma")
    down = general_homotopy(PLMap(ProductSpace(di), di, ((Min((Var(0), 1 - Var(1))),),), name="min-t"))
    assert check_dihomotopy(down).premise == "monotonicity"


@pytest.mark.parametrize("name", ["swiss-flag.cert.json", "square-removed.cert.json"])
def test_certificate_homotopies_pass_both_checks(name: str) -> None:
    for step in load_certificate(DATA_DIR / name).zigzag_b:
        h = step.homotopy
        assert check_dihomotopy(h, method="lemma").ok, h.name
        v = check_dihomotopy(h, method="general")
        assert v.ok, v.to_json()
        assert "on the product" in v.detail


def test_staircase_stretch_against_both_checks() -> None:
    f = preset_map("staircase-f")
    assert check_dihomotopy(linear_interpolation(f, f), method="lemma").ok
    assert check_dihomotopy(linear_interpolation(f, f), method="general").ok
    # pulling everything to the top corner crosses the wide hole
    up = linear_interpolation(f, constant_map(f.domain, f.codomain, ["1", "1"]))
    lemma, general = check_dihomotopy(up, method="lemma"), check_dihomotopy(up, method="general")
    assert (lemma.premise, general.premise) == ("containment", "containment")


def test_order_criterion_acceptance_implies_product_acceptance() -> None:
    di = _di()
    rng = random.Random(41)
    quarters = [str(Fraction(k, 4)) for k in range(5)]
    choices = [
        lambda: identity_map(di),
        lambda: preset_map("F1"),
        lambda: preset_map("F2"),
        lambda: constant_map(di, di, [rng.choice(quarters)]),
    ]
    agreed = 0
    for _ in range(1000):
        f, g = rng.choice(choices)(), rng.choice(choices)()
        h = linear_interpolation(f, g)
        lemma, general = check_dihomotopy(h, method="lemma"), check_dihomotopy(h, method="general")
        if lemma.ok:
            assert general.ok, (f.name, g.name)
            agreed += 1
    assert agreed > 0


@pytest.mark.parametrize(
    "name",
    [
        "di-point.cert.json",
        "dx-point.cert.json",
        "dii-di-corners.cert.json",
        "square-removed.cert.json",
        "swiss-flag.cert.json",
    ],
)
def test_shipped_certificates_pass(name: str) -> None:
    v = verify_equivalence_certificate(load_certificate(DATA_DIR / name))
    assert v.status is Status.PASS, v.to_json()
    assert [c.stage for c in v.checks] == ["f", "g", "f context", "g context", "zigzag B", "zigzag C"]


def test_two_points_cannot_be_kept_apart_by_a_point() -> None:
    v = verify_equivalence_certificate(load_certificate(DATA_DIR / "di-point-s0.cert.json"))
    assert (v.status, v.stage, v.premise) == (Status.FAIL, "g context", "context")


def test_tampered_certificate_fails_at_the_broken_step(tmp_path: Path) -> None:
    doc = json.loads((DATA_DIR / "square-removed.cert.json").read_text(encoding="utf-8"))
    doc["zigzagB"][1]["direction"] = "fwd"
    _write_json(tmp_path / "bad.cert.json", doc)
    v = verify_equivalence_certificate(load_certificate(tmp_path / "bad.cert.json"))
    assert (v.stage, v.premise) == ("zigzag B step 2", "chain-endpoint")
    assert [c.status for c in v.checks][:4] == [Status.PASS] * 4


def test_discretize_square_removed_retraction() -> None:
    cm = discretize(preset_map("F1xF1"))
    assert cm.vertex_map["(2/3,2/3)"] == "(1,1)"
    assert cm.vertex_map["(1/3,0)"] == "(1/3,0)"
    cm.check_cells()
    with pytest.raises(DiscretizationError):
        discretize(preset_map("F1"))


@pytest.mark.parametrize(
    ("name", "axis", "knots"),
    [
        ("F1", 0, [("0", "0"), ("1/3", "1/3"), ("2/3", "1"), ("1", "1")]),
        ("F2", 0, [("0", "0"), ("1/3", "0"), ("1", "1")]),
        ("staircase-f", 0, STAIRCASE_F_X),
        ("staircase-f", 1, STAIRCASE_Y),
        ("staircase-g", 0, STAIRCASE_G_X),
        ("staircase-g", 1, STAIRCASE_Y),
    ],
)
def test_eval_at_breakpoints_agrees_with_every_case(name: str, axis: int, knots: list) -> None:
    m = preset_map(name)
    pw = m.stages[0][axis]
    assert isinstance(pw, Piecewise)
    for x, value in knots:
        p = tuple(parse_rat(x) if i == axis else Fraction(0) for i in range(m.domain.dimension))
        assert eval_pl(m, p)[axis] == parse_rat(value)
        assert {c.value.evaluate(p) for c in pw.cases if c.applies(p)} == {parse_rat(value)}


def test_passing_dimaps_are_monotone_on_a_dense_grid() -> None:
    rng = random.Random(40)
    di = _di()
    grid = [Fraction(k, 40) for k in range(41)]
    slopes = [Fraction(c) for c in ("-1", "0", "1/2", "1", "2")]
    offsets = [Fraction(c) for c in ("-1/2", "0", "1/4", "1/2")]
    passed = 0
    for _ in range(1000):
        parts = tuple(rng.choice(slopes) * X + rng.choice(offsets) for _ in range(rng.randint(2, 3)))
        e = Max(parts) if rng.random() < 0.5 else Min(parts)
        if rng.random() < 0.5:
            e = Min((Max((e, Const(Fraction(0)))), Const(Fraction(1))))
        m = PLMap(di, di, ((e,),), name="sample")
        if not check_dimap(m).ok:
            continue
        passed += 1
        values = [m([x])[0] for x in grid]
        assert all(0 <= v <= 1 for v in values), e
        assert values == sorted(values), e
    assert passed > 100


@pytest.mark.parametrize("name", ["max", "F1xF1", "swiss-f1", "swiss-f2", "swiss-f3", "collapse(4,1/4,1/2)"])
def test_passing_presets_are_monotone_along_sampled_dipaths(name: str) -> None:
    m = preset_map(name)
    assert check_dimap(m).ok
    rng = random.Random(name)
    step = Fraction(1, 40)
    for _ in range(300):
        p = tuple(Fraction(rng.randint(0, 39), 40) for _ in range(m.domain.dimension))
        axis = rng.randrange(m.domain.dimension)
        q = tuple(x + step if i == axis else x for i, x in enumerate(p))
        if not m.domain.contains(p) or m.domain.hull_witness([p, q]) is not None:
            continue
        assert m.codomain.contains(m(p))
        assert leq(m(p), m(q)), (p, q)


@pytest.mark.parametrize("name", ["dii-di-corners.cert.json", "square-removed.cert.json", "swiss-flag.cert.json"])
def test_verified_certificates_leave_no_obstruction(name: str) -> None:
    assert verify_equivalence_certificate(load_certificate(DATA_DIR / name)).ok
    doc = read_json(DATA_DIR / name)
    b, c = load_space(doc["B"], DATA_DIR).contexted, load_space(doc["C"], DATA_DIR).contexted
    v = equivalence_obstruction(b, c)
    assert v.status is Status.NECESSARY_CONDITIONS_PASS, v.to_json()
