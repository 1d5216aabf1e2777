from __future__ import annotations

import itertools
import random
from fractions import Fraction

import networkx as nx
import pytest

from dicontext.complex import (
    DiComplex,
    Edge,
    Vertex,
    build_grid_complex,
    discrete_context,
    is_isomorphic,
    mark_context,
    standard_space,
    unit_region,
    vertex_id,
)
from dicontext.errors import InclusionError, UnknownNameError
from dicontext.fundcat import CombMap, equivalence_obstruction, hom_set
from dicontext.glue import (
    GlueSpec,
    hom_diff,
    pushout_along_map,
    pushout_identify,
    qualify,
    section1_pair,
    staircase_chain,
    z_pushout,
    z_space,
)
from dicontext.order_core import Max, Var, make_point
from dicontext.reports import Status

HALVES = [[Fraction(0), Fraction(1, 2), Fraction(1)]]


def test_two_intervals_at_their_midpoints_make_the_plus() -> None:
    di = build_grid_complex(unit_region(1), HALVES, name="dI")
    result = pushout_identify(GlueSpec({"p": di, "q": di}, ((("p", "(1/2)"), ("q", "(1/2)")),)))
    assert is_isomorphic(result.complex, standard_space("dX"))
    assert result.vertex("q.(1/2)") == result.vertex("p.(1/2)")
    assert not result.report.local_only


def test_two_intervals_at_both_ends_make_the_circle_pair() -> None:
    di = standard_space("dI")
    spec = GlueSpec({"p": di, "q": di}, ((("p", "(0)"), ("q", "(0)")), (("p", "(1)"), ("q", "(1)"))))
    result = pushout_identify(spec)
    assert is_isomorphic(result.complex, standard_space("dO"))
    assert not result.geometry_dropped
    assert len(hom_set(result.complex, result.vertex("p.(0)"), result.vertex("q.(1)")).classes) == 2


def test_closing_an_interval_into_a_loop() -> None:
    di = standard_space("dI")
    result = pushout_identify(GlueSpec({"p": di}, ((("p", "(0)"), ("p", "(1)")),)))
    assert result.report.local_only
    assert result.geometry_dropped
    assert result.complex.dimension is None
    assert result.to_json()["validation"]["localOnly"] is True


def test_offsets_keep_stacked_parts_embedded() -> None:
    di = standard_space("dI")
    spec = GlueSpec({"p": di, "q": di}, ((("p", "(1)"), ("q", "(0)")),), offsets={"q": make_point(1)})
    result = pushout_identify(spec)
    assert not result.geometry_dropped
    assert sorted(v.coords for v in result.complex.vertices) == [make_point(0), make_point(1), make_point(2)]


def test_unknown_parts_and_vertices() -> None:
    di = standard_space("dI")
    with pytest.raises(UnknownNameError):
        pushout_identify(GlueSpec({"p": di}, ((("p", "(0)"), ("r", "(0)")),)))
    with pytest.raises(UnknownNameError):
        pushout_identify(GlueSpec({"p": di}, ((("p", "(0)"), ("p", "(1/2)")),)))
    with pytest.raises(UnknownNameError):
        pushout_identify(GlueSpec({"p": di})).vertex("p.(7)")


def test_collapsing_the_square_creates_a_dipath() -> None:
    b, c, watch = section1_pair()
    names = {q for pair in watch for q in pair}
    vertex_map = {b.vertex(q): c.vertex(q) for q in names}
    pairs = [(b.vertex(x), b.vertex(y)) for x, y in watch]
    diff = hom_diff(b.complex, c.complex, pairs, vertex_map)
    (row,) = diff["pairs"]
    assert row["before"]["classCount"] == 0
    # two independent loops on either side of the seam
    assert row["after"]["classCount"] == 4
    assert row["created"] and row["changed"] and row["witness"]
    assert diff["changed"] == 1
    with pytest.raises(UnknownNameError):
        hom_diff(b.complex, c.complex, pairs, {})


@pytest.mark.parametrize("n", [2, 3, 4])
def test_z_columns_only_reach_themselves(n: int) -> None:
    z, x, y = z_space(n)
    assert len(x.vertices) == (n + 1) ** 2
    cols = [Fraction(i, n) for i in range(n + 1)]
    for s, t in itertools.product(cols, repeat=2):
        src = z.vertex(qualify("Y", vertex_id((s, Fraction(0)))))
        dst = z.vertex(qualify("Y", vertex_id((t, Fraction(1)))))
        assert bool(hom_set(z.complex, src, dst).classes) == (s == t)


def test_collapse_pushout_creates_cross_dipaths() -> None:
    z, zp, pairs = z_pushout(4, Fraction(1, 4), Fraction(1, 2))
    diff = hom_diff(z.complex, zp.complex, pairs, zp.induced)
    created = [row["created"] for row in diff["pairs"]]
    assert created == [False, True, True, False]
    assert all(row["after"]["classCount"] > 0 for row in diff["pairs"])
    assert zp.identifications
    zp.induced.validate()


def test_pushout_needs_an_injective_inclusion() -> None:
    di = standard_space("dI")
    squash = CombMap(di, di, {"(0)": "(0)", "(1)": "(0)"}, {"(0)->(1)": ()}, "squash")
    with pytest.raises(InclusionError):
        pushout_along_map(squash, CombMap.identity(di))


def test_pushout_along_the_identity_changes_nothing() -> None:
    dii = standard_space("dII")
    result = pushout_along_map(CombMap.identity(dii), CombMap.identity(dii))
    assert is_isomorphic(result.complex, dii)
    assert result.identifications == ()


@pytest.mark.parametrize("primed", [False, True])
def test_staircase_seam_groups(primed: bool) -> None:
    groups = staircase_chain(primed).seam_groups()
    assert groups == [
        (Fraction(0), Fraction(1, 5)),
        (Fraction(2, 5), Fraction(1, 2), Fraction(3, 5)),
        (Fraction(4, 5), Fraction(1)),
    ]


@pytest.mark.parametrize(
    ("primed", "status", "premise"),
    [
        (False, Status.OBSTRUCTION_FOUND, "cardinality"),
        (True, Status.NECESSARY_CONDITIONS_PASS, ""),
    ],
)
def test_staircase_against_its_skeleton(primed: bool, status: Status, premise: str) -> None:
    chain = staircase_chain(primed)
    names = discrete_context(chain.marking_f)
    f = mark_context(chain.f.complex, names, chain.marking_f)
    g = mark_context(chain.g, names, chain.marking_g)
    v = equivalence_obstruction(f, g)
    assert (v.status, v.premise) == (status, premise)


def test_drawn_skeleton_has_extra_dipaths_from_a_to_c() -> None:
    chain = staircase_chain(False)
    names = discrete_context(chain.marking_f)
    f = mark_context(chain.f.complex, names, chain.marking_f)
    g = mark_context(chain.g, names, chain.marking_g)
    v = equivalence_obstruction(f, g)
    assert v.stage == "a->c"
    # F only has the seam row, G adds both sides of its frame
    assert (v.witness["homB"], v.witness["homC"]) == (1, 3)
    # collapsing [1/2,1]^2 by max sends the seam end of F to the corner G marks as c
    corner = Max((Var(0), Var(1)))
    assert corner.evaluate((Fraction(1), Fraction(1, 2))) == 1


def _random_span(rng: random.Random) -> tuple[CombMap, CombMap]:
    """B ↪ D with at most six vertices, and f: B → B′ merging runs of B's vertices."""
    n = rng.randint(2, 6)
    ids = [f"d{i}" for i in range(n)]
    d_edges = tuple(
        Edge(f"d{i}->d{j}", f"d{i}", f"d{j}") for i, j in itertools.combinations(range(n), 2) if rng.random() < 0.4
    )
    d = DiComplex(tuple(Vertex(v) for v in ids), d_edges, (), "D")
    kept = sorted(rng.sample(ids, rng.randint(1, n)))
    b_edges = tuple(e for e in d_edges if e.src in kept and e.dst in kept and rng.random() < 0.7)
    b = DiComplex(tuple(Vertex(v) for v in kept), b_edges, (), "B")
    labels = dict(zip(kept, (f"p{k}" for k in sorted(rng.choices(range(len(kept)), k=len(kept))))))
    bp_edges: dict[str, Edge] = {}
    routes = {}
    for e in b_edges:
        u, w = labels[e.src], labels[e.dst]
        if u == w:
            routes[e.id] = ()
            continue
        bp_edges[f"{u}->{w}"] = Edge(f"{u}->{w}", u, w)
        routes[e.id] = (f"{u}->{w}",)
    bp = DiComplex(tuple(Vertex(v) for v in sorted(set(labels.values()))), tuple(bp_edges[k] for k in sorted(bp_edges)), (), "B'")
    inclusion = CombMap(b, d, {v: v for v in kept}, {e.id: (e.id,) for e in b_edges}, "i")
    return inclusion, CombMap(b, bp, labels, routes, "f")


def test_small_pushouts_have_the_universal_property() -> None:
    rng = random.Random(6)
    for _ in range(1000):
        inclusion, f = _random_span(rng)
        result = pushout_along_map(inclusion, f)
        induced = result.induced
        induced.validate()
        glued = nx.Graph()
        glued.add_nodes_from(v.id for v in inclusion.target.vertices)
        fibres: dict[str, list[str]] = {}
        for v, label in f.vertex_map.items():
            fibres.setdefault(label, []).append(v)
        for fibre in fibres.values():
            nx.add_path(glued, fibre)
        component = {v: k for k, comp in enumerate(nx.connected_components(glued)) for v in comp}
        assert len(result.complex.vertices) == len(set(component.values()))
        # every vertex of the pushout comes from D, so a mediating map is unique
        assert set(induced.vertex_map.values()) == {v.id for v in result.complex.vertices}
        for u, w in itertools.combinations(component, 2):
            assert (induced(u) == induced(w)) == (component[u] == component[w])
        # a cone with u∘i = v∘f factors through the pushout
        v_cone = {label: rng.randrange(3) for label in fibres}
        u_cone = {x: v_cone[f(x)] if x in f.vertex_map else rng.randrange(3) for x in component}
        mediating: dict[str, int] = {}
        for x, value in u_cone.items():
            assert mediating.setdefault(induced(x), value) == value
