"""Combinatorial pushouts.

`pushout_identify` glues complexes along vertex and edge identifications;
`pushout_along_map` pushes a cellular map out along an inclusion. Both
re-validate the result, so loops created by gluing show up as
`localOnly` instead of an error. `hom_diff` compares hom-sets before and
after a gluing; the builders at the bottom produce the worked examples.

Usage
-----
>>> from dicontext.glue import GlueSpec, pushout_identify
>>> from dicontext.complex import standard_space
>>> dI = standard_space("dI")
>>> spec = GlueSpec({"p": dI, "q": dI}, identify=((("p", "(0)"), ("q", "(0)")), (("p", "(1)"), ("q", "(1)"))))
>>> len(pushout_identify(spec).complex.edges)
2
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from networkx.utils import UnionFind

from .complex import (
    STAIRCASE_X,
    Cell2,
    DiComplex,
    Edge,
    EdgeKind,
    ValidationReport,
    Vertex,
    build_grid_complex,
    embedded_complex,
    region_preset,
    standard_space,
    unit_lines,
    unit_region,
    validate_complex,
    vertex_id,
)
from .errors import InclusionError, SpecError, UnknownNameError
from .fundcat import CombMap, compose_maps, hom_set
from .order_core import Point, make_point
from .plmaps import discretize, preset_map

log = logging.getLogger(__name__)

HALF = Fraction(1, 2)

VertexRef = tuple[str, str]


def qualify(part: str, item: str) -> str:
    return f"{part}.{item}"


def _shift(p: Point | None, offset: Point | None) -> Point | None:
    if p is None or offset is None:
        return p
    return tuple(a + b for a, b in zip(p, offset))


def _class_coords(members: Sequence[Point | None]) -> tuple[Point | None, bool]:
    """Common position of a class, and whether its members agree."""
    if all(p is None for p in members):
        return None, True
    if any(p is None for p in members) or len(set(members)) > 1:
        return None, False
    return members[0], True


# ───── gluing by identification ─────


@dataclass(frozen=True, eq=False)
class GlueSpec:
    """Parts to glue and the vertex and edge pairs to identify.

    `offsets` translate a part's embedding before gluing, so parts drawn
    in their own unit squares can be stacked.
    """

    parts: Mapping[str, DiComplex]
    identify: tuple[tuple[VertexRef, VertexRef], ...] = ()
    identify_edges: tuple[tuple[VertexRef, VertexRef], ...] = ()
    offsets: Mapping[str, Point] = field(default_factory=dict)
    name: str = ""

    def check(self) -> None:
        for (pa, va), (pb, vb) in self.identify:
            for part, vid in ((pa, va), (pb, vb)):
                if part not in self.parts:
                    raise UnknownNameError(f"unknown part {part!r}")
                self.parts[part].vertex(vid)
        for (pa, ea), (pb, eb) in self.identify_edges:
            for part, eid in ((pa, ea), (pb, eb)):
                if part not in self.parts:
                    raise UnknownNameError(f"unknown part {part!r}")
                self.parts[part].edge(eid)


@dataclass(frozen=True, eq=False)
class GlueResult:
    complex: DiComplex
    classes: Mapping[str, tuple[str, ...]]
    edge_classes: Mapping[str, tuple[str, ...]]
    geometry_dropped: bool
    report: ValidationReport

    @cached_property
    def _rep(self) -> dict[str, str]:
        return {m: rep for rep, members in self.classes.items() for m in members}

    @cached_property
    def _edge_rep(self) -> dict[str, str]:
        return {m: rep for rep, members in self.edge_classes.items() for m in members}

    def vertex(self, qualified: str) -> str:
        """Quotient vertex holding `part.vertex`."""
        try:
            return self._rep[qualified]
        except KeyError:
            raise UnknownNameError(f"{qualified!r} is not a vertex of any part") from None

    def inclusion(self, part: str, source: DiComplex) -> CombMap:
        """The map from one part into the quotient."""
        vertex_map = {v.id: self.vertex(qualify(part, v.id)) for v in source.vertices}
        routes = {e.id: (self._edge_rep[qualify(part, e.id)],) for e in source.edges}
        return CombMap(source, self.complex, vertex_map, routes, f"{part}->{self.complex.name or 'glued'}")

    def to_json(self) -> dict:
        return {
            "complex": self.complex.to_json(),
            "identified": {k: list(v) for k, v in sorted(self.classes.items()) if len(v) > 1},
            "geometryDropped": self.geometry_dropped,
            "validation": self.report.to_json(),
        }


def _quotient(
    vertices: Mapping[str, Point | None],
    edges: Mapping[str, Edge],
    cells: Mapping[str, Cell2],
    vertex_uf: UnionFind,
    edge_uf: UnionFind,
    name: str,
    primary: set[str] | None = None,
) -> tuple[DiComplex, dict[str, tuple[str, ...]], dict[str, tuple[str, ...]], bool]:
    """Quotient of qualified vertices, edges and cells.

    Only `primary` members decide a class's position when given.
    """
    classes = {}
    for group in vertex_uf.to_sets():
        members = tuple(sorted(group))
        classes[members[0]] = members
    rep = {m: r for r, members in classes.items() for m in members}
    dropped = False
    out_vertices = []
    for r, members in sorted(classes.items()):
        chosen = [m for m in members if primary is None or m in primary] or list(members)
        coords, ok = _class_coords([vertices[m] for m in chosen])
        dropped |= not ok
        out_vertices.append(Vertex(r, coords))
    if dropped or any(v.coords is None for v in out_vertices):
        out_vertices = [Vertex(v.id) for v in out_vertices]
    edge_classes = {}
    for group in edge_uf.to_sets():
        members = tuple(sorted(group))
        edge_classes[members[0]] = members
    edge_rep = {m: r for r, members in edge_classes.items() for m in members}
    out_edges = []
    for r, members in sorted(edge_classes.items()):
        kinds = {edges[m].kind for m in members}
        if len(kinds) > 1:
            raise SpecError(f"identified edges {', '.join(members)} differ in kind")
        e = edges[r]
        out_edges.append(Edge(r, rep[e.src], rep[e.dst], e.kind))
    out_cells = []
    for cid, cell in sorted(cells.items()):
        a = tuple(edge_rep[x] for x in cell.path_a)
        b = tuple(edge_rep[x] for x in cell.path_b)
        if a != b:
            out_cells.append(Cell2(cid, a, b))
    c = DiComplex(tuple(out_vertices), tuple(out_edges), tuple(out_cells), name)
    return c, classes, edge_classes, dropped


def pushout_identify(spec: GlueSpec) -> GlueResult:
    """Glue the parts of `spec` and validate the quotient."""
    spec.check()
    vertices: dict[str, Point | None] = {}
    edges: dict[str, Edge] = {}
    cells: dict[str, Cell2] = {}
    for part, c in spec.parts.items():
        offset = spec.offsets.get(part)
        for v in c.vertices:
            vertices[qualify(part, v.id)] = _shift(v.coords, offset)
        for e in c.edges:
            eid = qualify(part, e.id)
            edges[eid] = Edge(eid, qualify(part, e.src), qualify(part, e.dst), e.kind)
        for x in c.cells:
            cells[qualify(part, x.id)] = Cell2(
                qualify(part, x.id),
                tuple(qualify(part, k) for k in x.path_a),
                tuple(qualify(part, k) for k in x.path_b),
            )
    vertex_uf = UnionFind(vertices)
    edge_uf = UnionFind(edges)
    for a, b in spec.identify:
        vertex_uf.union(qualify(*a), qualify(*b))
    for a, b in spec.identify_edges:
        ea, eb = edges[qualify(*a)], edges[qualify(*b)]
        vertex_uf.union(ea.src, eb.src)
        vertex_uf.union(ea.dst, eb.dst)
        edge_uf.union(ea.id, eb.id)
    c, classes, edge_classes, dropped = _quotient(vertices, edges, cells, vertex_uf, edge_uf, spec.name)
    report = validate_complex(c)
    if dropped:
        log.info("%s: identified vertices disagree in position, embedding dropped", spec.name or "glue")
    if report.local_only:
        log.info("%s: gluing created directed loops", spec.name or "glue")
    return GlueResult(c, classes, edge_classes, dropped, report)


def seam(a_part: str, a: DiComplex, b_part: str, b: DiComplex, correspondence: Mapping[str, str]) -> tuple[tuple, tuple]:
    """Vertex and edge pairs identifying a sub-complex of `a` with one of `b`."""
    vertex_pairs = tuple(((a_part, u), (b_part, w)) for u, w in sorted(correspondence.items()))
    edge_pairs = []
    for e in a.edges:
        if e.src not in correspondence or e.dst not in correspondence:
            continue
        src, dst = correspondence[e.src], correspondence[e.dst]
        match = next((x for x in b.out_edges(src) if x.dst == dst and x.kind == e.kind), None)
        if match is not None:
            edge_pairs.append(((a_part, e.id), (b_part, match.id)))
    return vertex_pairs, tuple(edge_pairs)


def row_correspondence(a: DiComplex, a_y: Fraction, b: DiComplex, b_y: Fraction) -> dict[str, str]:
    """Pair the vertices of row y=a_y in `a` with the row y=b_y in `b` by x."""
    out = {}
    for v in a.vertices:
        if v.coords[1] == a_y:
            w = b.vertex_at((v.coords[0], b_y))
            if w is not None:
                out[v.id] = w
    return out


# ───── pushout along a map ─────


@dataclass(frozen=True, eq=False)
class PushoutResult:
    complex: DiComplex
    induced: CombMap
    identifications: tuple[tuple[str, ...], ...]
    geometry_dropped: bool
    report: ValidationReport

    def to_json(self) -> dict:
        return {
            "complex": self.complex.to_json(),
            "identifications": [list(x) for x in self.identifications],
            "geometryDropped": self.geometry_dropped,
            "validation": self.report.to_json(),
        }


def _injective(inclusion: CombMap) -> str | None:
    images = list(inclusion.vertex_map.values())
    if len(set(images)) != len(images):
        dup = next(v for v in images if images.count(v) > 1)
        return f"two vertices are sent to {dup}"
    seen = set()
    for eid, route in inclusion.edge_routes.items():
        if len(route) != 1:
            return f"edge {eid} is not sent to a single edge"
        if route[0] in seen:
            return f"two edges are sent to {route[0]}"
        seen.add(route[0])
    return None


def pushout_along_map(
    inclusion: CombMap,
    f: CombMap,
    allow_identifications: bool = False,
    names: tuple[str, str] = ("D", "B'"),
    offset: Point | None = None,
    name: str = "",
) -> PushoutResult:
    """Push f: B → B′ out along inclusion: B → D.

    The result replaces the image of B in D by B′. With
    `allow_identifications` the inclusion may collapse vertices and send
    edges to paths. Each edge of B then identifies its path P in D with
    its path Q in B′: a single edge on one side is replaced by the other
    side's path, and an empty side contracts the other.
    """
    if inclusion.source is not f.source and inclusion.source.to_json() != f.source.to_json():
        raise SpecError("the inclusion and the map must start at the same complex")
    problem = _injective(inclusion)
    if problem and not allow_identifications:
        raise InclusionError(f"{inclusion.name or 'inclusion'} is not injective: {problem}")
    d, bp = inclusion.target, f.target
    dn, bn = names
    vertices: dict[str, Point | None] = {qualify(dn, v.id): v.coords for v in d.vertices}
    vertices.update({qualify(bn, v.id): _shift(v.coords, offset) for v in bp.vertices})
    uf = UnionFind(vertices)
    for b in inclusion.source.vertices:
        uf.union(qualify(dn, inclusion(b.id)), qualify(bn, f(b.id)))
    covered: dict[str, tuple[str, ...]] = {}
    replaced: dict[str, tuple[str, ...]] = {}
    contracted: set[str] = set()

    def contract(c: DiComplex, prefix: str, path: Sequence[str]) -> None:
        for x in path:
            edge = c.edge(x)
            uf.union(qualify(prefix, edge.src), qualify(prefix, edge.dst))

    for e in inclusion.source.edges:
        p, q = inclusion.route(e.id), f.route(e.id)
        image = tuple(qualify(bn, x) for x in q)
        if len(p) == 1:
            covered[p[0]] = image
        elif not p:
            contracted.update(image)
            contract(bp, bn, q)
        elif not q:
            covered.update((x, ()) for x in p)
            contract(d, dn, p)
        elif len(q) == 1:
            replaced[image[0]] = tuple(qualify(dn, x) for x in p)
        else:
            raise InclusionError(f"edge {e.id} goes to a path on both sides; no common subdivision is computed")

    def rewrite(path: Sequence[str]) -> tuple[str, ...]:
        out: list[str] = []
        for x in path:
            out.extend(covered[x] if x in covered else (qualify(dn, x),))
        return tuple(z for y in out for z in replaced.get(y, (y,)) if z not in contracted)

    def rewrite_target(path: Sequence[str]) -> tuple[str, ...]:
        out: list[str] = []
        for x in (qualify(bn, y) for y in path):
            out.extend(replaced.get(x, (x,)))
        return tuple(y for y in out if y not in contracted)

    edges: dict[str, Edge] = {}
    for e in d.edges:
        if e.id not in covered:
            eid = qualify(dn, e.id)
            edges[eid] = Edge(eid, qualify(dn, e.src), qualify(dn, e.dst), e.kind)
    for e in bp.edges:
        eid = qualify(bn, e.id)
        if eid not in contracted and eid not in replaced:
            edges[eid] = Edge(eid, qualify(bn, e.src), qualify(bn, e.dst), e.kind)
    cells: dict[str, Cell2] = {}
    for x in d.cells:
        if all(k in covered for k in x.path_a + x.path_b):
            continue
        a, b = rewrite(x.path_a), rewrite(x.path_b)
        if a and b and a != b:
            cells[qualify(dn, x.id)] = Cell2(qualify(dn, x.id), a, b)
    for x in bp.cells:
        a, b = rewrite_target(x.path_a), rewrite_target(x.path_b)
        if a and b and a != b:
            cells[qualify(bn, x.id)] = Cell2(qualify(bn, x.id), a, b)

    image_vertices = {qualify(dn, inclusion(b.id)) for b in inclusion.source.vertices}
    primary = set(vertices) - image_vertices
    c, classes, _, dropped = _quotient(vertices, edges, cells, uf, UnionFind(edges), name, primary)
    rep = {m: r for r, members in classes.items() for m in members}
    vertex_map = {v.id: rep[qualify(dn, v.id)] for v in d.vertices}
    routes = {e.id: rewrite((e.id,)) for e in d.edges}
    induced = CombMap(d, c, vertex_map, routes, f"{f.name or 'f'}'")
    # A class identifies something when it holds two vertices from one side.
    identifications = tuple(
        members
        for members in classes.values()
        if sum(m.startswith(bn + ".") for m in members) > 1
        or sum(m.startswith(dn + ".") for m in members) > 1
    )
    report = validate_complex(c)
    log.info("%s: %d vertices, %d edges, %d identifications", name or "pushout", len(c.vertices), len(c.edges), len(identifications))
    return PushoutResult(c, induced, tuple(sorted(identifications)), dropped, report)


# ───── hom-set comparison ─────


def _bound(c: DiComplex, max_len: int | None) -> int | None:
    if c.loop_free:
        return None
    return max_len if max_len is not None else len(c.edges)


def hom_diff(
    before: DiComplex,
    after: DiComplex,
    pairs: Sequence[tuple[str, str]],
    vertex_map: Mapping[str, str] | CombMap | None = None,
    max_len: int | None = None,
) -> dict:
    """Hom-set sizes for each pair before and after a gluing.

    `vertex_map` carries `before` vertex ids to `after` ids; without it the
    ids are shared. Newly created dipaths come with a witness.
    """
    to_after = (lambda v: v) if vertex_map is None else (vertex_map if callable(vertex_map) else vertex_map.__getitem__)
    rows = []
    for x, y in pairs:
        for v in (x, y):
            before.vertex(v)
        try:
            ax, ay = to_after(x), to_after(y)
        except KeyError as exc:
            raise UnknownNameError(f"vertex {exc.args[0]!r} has no image") from None
        for v in (ax, ay):
            after.vertex(v)
        hb = hom_set(before, x, y, _bound(before, max_len))
        ha = hom_set(after, ax, ay, _bound(after, max_len))
        row = {
            "source": x,
            "target": y,
            "before": {"classCount": len(hb.classes), "pathCount": hb.path_count},
            "after": {"source": ax, "target": ay, "classCount": len(ha.classes), "pathCount": ha.path_count},
            "created": not hb.classes and bool(ha.classes),
            "changed": len(hb.classes) != len(ha.classes),
        }
        if row["created"]:
            row["witness"] = list(ha.classes[0].representative.edges)
        rows.append(row)
    return {"pairs": rows, "changed": sum(r["changed"] for r in rows)}


# ───── worked examples ─────


def _quarter_interval() -> DiComplex:
    return build_grid_complex(unit_region(1), [[Fraction(i, 4) for i in range(5)]], name="dI")


def section1_pair() -> tuple[GlueResult, GlueResult, list[tuple[str, str]]]:
    """The square with two loops attached, and the same after collapsing the square.

    Returns B, C and the watched pair (a₁, b₂) as qualified names.
    """
    square = build_grid_complex(unit_region(2), unit_lines(4), name="dII")
    interval = _quarter_interval()
    o = standard_space("dO")
    b = GlueSpec(
        {"dII": square, "dO1": o, "dO2": o},
        identify=((("dO1", "b"), ("dII", "(0,1/4)")), (("dO2", "a"), ("dII", "(3/4,0)"))),
        name="B",
    )
    c = GlueSpec(
        {"dI": interval, "dO1": o, "dO2": o},
        identify=((("dO1", "b"), ("dI", "(1/4)")), (("dO2", "a"), ("dI", "(3/4)"))),
        name="C",
    )
    return pushout_identify(b), pushout_identify(c), [("dO1.a", "dO2.b")]


def z_space(n: int) -> tuple[GlueResult, DiComplex, DiComplex]:
    """Z: the triangulated n-grid X glued to Y = I × dI along the anti-diagonal.

    Y has a directed column over each grid abscissa; its horizontal edges
    are undirected. Returns Z with X and Y.
    """
    if n < 2:
        raise SpecError("the Z construction needs n >= 2")
    x = build_grid_complex(unit_region(2), unit_lines(n), triangulate=True, name="X")
    heights = (Fraction(0), HALF, Fraction(1))
    cols = [Fraction(i, n) for i in range(n + 1)]
    y_vertices = tuple(Vertex(vertex_id((s, h)), (s, h)) for s in cols for h in heights)
    y_edges = []
    for s in cols:
        for lo, hi in zip(heights, heights[1:]):
            y_edges.append(Edge(f"{vertex_id((s, lo))}->{vertex_id((s, hi))}", vertex_id((s, lo)), vertex_id((s, hi))))
    for s, t in zip(cols, cols[1:]):
        for h in heights:
            y_edges.append(Edge(f"{vertex_id((s, h))}--{vertex_id((t, h))}", vertex_id((s, h)), vertex_id((t, h)), EdgeKind.UNDIRECTED))
    y = DiComplex(y_vertices, tuple(sorted(y_edges, key=lambda e: e.id)), (), "Y")
    spec = GlueSpec(
        {"X": x, "Y": y},
        identify=tuple((("Y", vertex_id((s, HALF))), ("X", vertex_id((s, 1 - s)))) for s in cols),
        name="Z",
    )
    return pushout_identify(spec), x, y


def collapse_map(n: int, a: Fraction, b: Fraction, x: DiComplex | None = None) -> CombMap:
    """The collapse of [a,b] × I on the triangulated n-grid, as a cellular map."""
    m = preset_map(f"collapse({n},{a},{b})")
    x = x if x is not None else build_grid_complex(unit_region(2), unit_lines(n), triangulate=True, name="X")
    return discretize(m, x, x)


def z_pushout(n: int, a: Fraction, b: Fraction) -> tuple[GlueResult, PushoutResult, list[tuple[str, str]]]:
    """Z and Z′ with the watched pairs (p⁰_s, p¹_t) as Z vertex ids, for s, t ∈ {a, b}."""
    z, x, _ = z_space(n)
    f = collapse_map(n, a, b, x)
    zp = pushout_along_map(z.inclusion("X", x), f, names=("Z", "X'"), name="Z'")
    p0 = {s: z.vertex(qualify("Y", vertex_id((s, Fraction(0))))) for s in (a, b)}
    p1 = {s: z.vertex(qualify("Y", vertex_id((s, Fraction(1))))) for s in (a, b)}
    return z, zp, [(p0[s], p1[t]) for s, t in itertools.product((a, b), repeat=2)]


@dataclass(frozen=True, eq=False)
class StaircaseChain:
    d: GlueResult
    e: PushoutResult
    f: PushoutResult
    g: DiComplex
    marking_d: Mapping[str, str]
    marking_f: Mapping[str, str]
    marking_g: Mapping[str, str]
    seam: Mapping[Fraction, str]

    def seam_groups(self) -> list[tuple[Fraction, ...]]:
        """Seam abscissae that end up at one vertex of F."""
        groups: dict[str, list[Fraction]] = {}
        for x, vid in sorted(self.seam.items()):
            groups.setdefault(self.f.induced(self.e.induced(vid)), []).append(x)
        return [tuple(g) for g in groups.values() if len(g) > 1]


def _g_space(primed: bool) -> tuple[DiComplex, dict[str, Point]]:
    if not primed:
        c = embedded_complex(
            "G", [], [[(0, 0), (1, 0), (1, 1)], [(0, 0), (0, 1), (1, 1)], [(0, 0), ("1/2", "1/2"), (1, 1)]]
        )
        return c, {"a": make_point(0, 0), "b": make_point(HALF, HALF), "c": make_point(1, 1)}
    c = embedded_complex(
        "G'",
        [],
        [[(0, 0), (0, "1/2"), ("1/2", "1/2"), (1, "1/2"), (1, 1)], [(0, 0), ("1/2", "1/2"), (1, 1)]],
    )
    return c, {"a": make_point(0, HALF), "b": make_point(HALF, HALF), "c": make_point(1, HALF)}


def staircase_chain(primed: bool = False) -> StaircaseChain:
    """D → E → F and the one-dimensional G, or their primed variants.

    Unprimed: B (hole on the left) sits on top of C (hole on the right),
    marked along the seam. Primed: C sits on top of B.
    """
    marks_b, marks_c = ("top", "bottom") if primed else ("bottom", "top")
    pb, pc = region_preset("staircase-left", marks_b), region_preset("staircase-right", marks_c)
    b, c = pb.build(), pc.build()
    up = make_point(0, 1)
    top, bottom = ("C", "B") if primed else ("B", "C")
    parts = {"B": b, "C": c}
    rows = row_correspondence(parts[top], Fraction(0), parts[bottom], Fraction(1))
    vertex_pairs, edge_pairs = seam(top, parts[top], bottom, parts[bottom], rows)
    d = pushout_identify(GlueSpec(parts, vertex_pairs, edge_pairs, {top: up}, "D'" if primed else "D"))
    marking_b = {a: vertex_id(p) for a, p in pb.marking.items()}
    marking_d = {a: d.vertex(qualify("B", v)) for a, v in marking_b.items()}

    f = discretize(preset_map("staircase-f"), b)
    e = pushout_along_map(
        d.inclusion("B", b), f, names=("D", "B'"), offset=up if top == "B" else None, name="E'" if primed else "E"
    )
    g = discretize(preset_map("staircase-g"), c)
    c_into_e = compose_maps(e.induced, d.inclusion("C", c))
    fr = pushout_along_map(
        c_into_e, g, allow_identifications=True, names=("E", "C'"),
        offset=up if top == "C" else None, name="F'" if primed else "F",
    )
    marking_f = {a: fr.induced(e.induced(v)) for a, v in marking_d.items()}
    gc, gpoints = _g_space(primed)
    marking_g = {a: gc.vertex_at(p) for a, p in gpoints.items()}
    seam_ids = {x: d.vertex(qualify(bottom, vertex_id((x, Fraction(1))))) for x in STAIRCASE_X}
    return StaircaseChain(d, e, fr, gc, marking_d, marking_f, marking_g, seam_ids)
