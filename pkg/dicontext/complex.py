"""Finite directed cell complexes and the spaces built from them.

A `DiComplex` holds vertices (optionally embedded in Q^n), directed or
undirected edges, and 2-cells given as pairs of parallel edge paths. Grid
builders turn a `RectRegion` into a complex; `standard_space` and
`region_preset` provide every named space the checks and the suite use.

Usage
-----
>>> from dicontext.complex import standard_space, validate_complex
>>> validate_complex(standard_space("dS1")).acyclic
False
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable, Mapping, Sequence

import networkx as nx

from .errors import GridError, MarkingError, SpecError, UnknownNameError
from .order_core import (
    Box,
    Classification,
    OrderRelation,
    Point,
    RectRegion,
    compare_points,
    format_point,
    format_rat,
    make_point,
    parse_rat,
    region_classify,
)

log = logging.getLogger(__name__)

HALF = Fraction(1, 2)


class EdgeKind(str, Enum):
    DIRECTED = "directed"
    UNDIRECTED = "undirected"


@dataclass(frozen=True)
class Vertex:
    id: str
    coords: Point | None = None


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    dst: str
    kind: EdgeKind = EdgeKind.DIRECTED

    @property
    def directed(self) -> bool:
        return self.kind is EdgeKind.DIRECTED


@dataclass(frozen=True)
class Cell2:
    """Two parallel directed edge paths declared dihomotopic."""

    id: str
    path_a: tuple[str, ...]
    path_b: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class DiComplex:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...] = ()
    cells: tuple[Cell2, ...] = ()
    name: str = ""

    # ───── lookups ─────

    @cached_property
    def _vertex_index(self) -> dict[str, Vertex]:
        return {v.id: v for v in self.vertices}

    @cached_property
    def _edge_index(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def _out(self) -> dict[str, list[Edge]]:
        out: dict[str, list[Edge]] = {v.id: [] for v in self.vertices}
        for e in sorted(self.edges, key=lambda e: e.id):
            if e.directed and e.src in out:
                out[e.src].append(e)
        return out

    @cached_property
    def _in(self) -> dict[str, list[Edge]]:
        inc: dict[str, list[Edge]] = {v.id: [] for v in self.vertices}
        for e in sorted(self.edges, key=lambda e: e.id):
            if e.directed and e.dst in inc:
                inc[e.dst].append(e)
        return inc

    @cached_property
    def _by_point(self) -> dict[Point, str]:
        return {v.coords: v.id for v in self.vertices if v.coords is not None}

    def has_vertex(self, vid: str) -> bool:
        return vid in self._vertex_index

    def vertex(self, vid: str) -> Vertex:
        try:
            return self._vertex_index[vid]
        except KeyError:
            raise UnknownNameError(f"unknown vertex {vid!r} in {self.name or 'complex'}") from None

    def edge(self, eid: str) -> Edge:
        try:
            return self._edge_index[eid]
        except KeyError:
            raise UnknownNameError(f"unknown edge {eid!r} in {self.name or 'complex'}") from None

    def out_edges(self, vid: str) -> list[Edge]:
        """Directed out-edges of a vertex, sorted by edge id."""
        self.vertex(vid)
        return self._out[vid]

    def in_edges(self, vid: str) -> list[Edge]:
        self.vertex(vid)
        return self._in[vid]

    def vertex_at(self, p: Sequence[Fraction]) -> str | None:
        return self._by_point.get(tuple(p))

    # ───── structure ─────

    @property
    def embedded(self) -> bool:
        return bool(self.vertices) and all(v.coords is not None for v in self.vertices)

    @property
    def dimension(self) -> int | None:
        """Embedding dimension, or None for an abstract complex."""
        return len(self.vertices[0].coords) if self.embedded else None

    def digraph(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(v.id for v in self.vertices)
        for e in self.edges:
            if e.directed:
                g.add_edge(e.src, e.dst, key=e.id)
        return g

    @cached_property
    def loop_free(self) -> bool:
        return nx.is_directed_acyclic_graph(nx.DiGraph(self.digraph()))

    @property
    def local_only(self) -> bool:
        """A complex with directed cycles only models a local pospace."""
        return not self.loop_free

    def reachable(self, x: str, y: str) -> bool:
        self.vertex(x), self.vertex(y)
        return nx.has_path(self.digraph(), x, y)

    def to_json(self) -> dict:
        return complex_to_json(self)


# ───── grid builders ─────


def vertex_id(p: Sequence[Fraction]) -> str:
    return format_point(p).replace(" ", "")


def _check_lines(region: RectRegion, grid_lines: Sequence[Sequence[Any]], required: Iterable[Point]) -> list[list[Fraction]]:
    if len(grid_lines) != region.dimension:
        raise GridError(f"need grid lines for {region.dimension} axes, got {len(grid_lines)}")
    lines = [[parse_rat(c) for c in axis] for axis in grid_lines]
    for i, axis in enumerate(lines):
        if any(a >= b for a, b in zip(axis, axis[1:])):
            raise GridError(f"grid lines on axis {i} must be strictly increasing")
    mandatory = region.mandatory_lines()
    for i, axis in enumerate(lines):
        lo, hi = region.outer.lo[i], region.outer.hi[i]
        if axis and (axis[0] < lo or axis[-1] > hi):
            raise GridError(f"grid lines on axis {i} leave the outer box")
        missing = [c for c in mandatory[i] if c not in axis]
        if missing:
            raise GridError(f"axis {i} is missing mandatory grid lines " + ", ".join(str(c) for c in missing))
    for p in required:
        if any(c not in lines[i] for i, c in enumerate(p)):
            raise GridError(f"marked point {format_point(p)} is not on a grid vertex")
    return lines


def _retained(region: RectRegion, p: Sequence[Fraction]) -> bool:
    return region_classify(region, p) in (Classification.INSIDE, Classification.ON_FORBIDDEN_BOUNDARY)


def build_grid_complex(
    region: RectRegion,
    grid_lines: Sequence[Sequence[Any]],
    triangulate: bool = False,
    required_points: Iterable[Sequence[Fraction]] = (),
    name: str = "",
) -> DiComplex:
    """Grid model of a region.

    A vertex, edge or square is kept iff the centre of its relative
    interior is not removed; on a grid containing every box face this is
    the same as its whole relative interior surviving.
    """
    lines = _check_lines(region, grid_lines, [tuple(p) for p in required_points])
    n = region.dimension
    if triangulate and n != 2:
        raise GridError("triangulation needs a planar grid")

    vertices = [
        Vertex(vertex_id(p), p) for p in itertools.product(*lines) if _retained(region, p)
    ]
    kept = {v.coords for v in vertices}

    def step(p: Point, axis: int) -> Point | None:
        k = lines[axis].index(p[axis])
        if k + 1 >= len(lines[axis]):
            return None
        return p[:axis] + (lines[axis][k + 1],) + p[axis + 1:]

    def mid(p: Point, q: Point) -> Point:
        return tuple((a + b) / 2 for a, b in zip(p, q))

    edges: list[Edge] = []
    edge_ids: dict[tuple[Point, Point], str] = {}

    def add_edge(p: Point, q: Point) -> None:
        eid = f"{vertex_id(p)}->{vertex_id(q)}"
        edges.append(Edge(eid, vertex_id(p), vertex_id(q)))
        edge_ids[(p, q)] = eid

    for p in sorted(kept):
        for axis in range(n):
            q = step(p, axis)
            if q is not None and q in kept and _retained(region, mid(p, q)):
                add_edge(p, q)

    cells: list[Cell2] = []
    for p in sorted(kept):
        for i, j in itertools.combinations(range(n), 2):
            pi, pj = step(p, i), step(p, j)
            if pi is None or pj is None:
                continue
            pij = step(pi, j)
            if pij is None or not _retained(region, mid(p, pij)):
                continue
            right, up = edge_ids[(p, pi)], edge_ids[(pi, pij)]
            up0, right1 = edge_ids[(p, pj)], edge_ids[(pj, pij)]
            tag = "sq" if n == 2 else f"sq{i}{j}"
            cells.append(Cell2(f"{tag}:{vertex_id(p)}", (right, up), (up0, right1)))
            if triangulate:
                add_edge(p, pij)
                diag = edge_ids[(p, pij)]
                cells.append(Cell2(f"tri-lo:{vertex_id(p)}", (right, up), (diag,)))
                cells.append(Cell2(f"tri-up:{vertex_id(p)}", (up0, right1), (diag,)))

    c = DiComplex(tuple(vertices), tuple(sorted(edges, key=lambda e: e.id)), tuple(cells), name)
    log.debug("grid complex %s: %d vertices, %d edges, %d cells", name, len(vertices), len(edges), len(cells))
    return c


def refine_lines(grid_lines: Sequence[Sequence[Fraction]], factor: int) -> list[list[Fraction]]:
    """Split every grid interval into `factor` equal parts."""
    if factor < 1:
        raise GridError("refinement factor must be positive")
    out = []
    for axis in grid_lines:
        pts = [parse_rat(c) for c in axis]
        refined = [pts[0]] if pts else []
        for a, b in zip(pts, pts[1:]):
            refined.extend(a + (b - a) * Fraction(k, factor) for k in range(1, factor + 1))
        out.append(refined)
    return out


def unit_lines(k: int, n: int = 2) -> list[list[Fraction]]:
    return [[Fraction(i, k) for i in range(k + 1)] for _ in range(n)]


# ───── named spaces ─────


def unit_region(n: int) -> RectRegion:
    return RectRegion(Box.closed((0,) * n, (1,) * n))


def _abstract(name: str, vertices: Sequence[str], edges: Sequence[tuple[str, str, str]]) -> DiComplex:
    return DiComplex(
        tuple(Vertex(v) for v in vertices),
        tuple(Edge(eid, s, d) for eid, s, d in edges),
        (),
        name,
    )


def plus_complex() -> DiComplex:
    """dX: two intervals glued at their midpoints, drawn as a plus sign.

    Branch 1 runs along y = 1/2, branch 2 along x = 1/2; the componentwise
    order restricted to the plus is exactly the glued order.
    """
    pts = [make_point(0, HALF), make_point(HALF, 0), make_point(HALF, HALF), make_point(1, HALF), make_point(HALF, 1)]
    centre = pts[2]
    vertices = tuple(Vertex(vertex_id(p), p) for p in pts)
    edges = []
    for p in (pts[0], pts[1]):
        edges.append(Edge(f"{vertex_id(p)}->{vertex_id(centre)}", vertex_id(p), vertex_id(centre)))
    for q in (pts[3], pts[4]):
        edges.append(Edge(f"{vertex_id(centre)}->{vertex_id(q)}", vertex_id(centre), vertex_id(q)))
    return DiComplex(vertices, tuple(sorted(edges, key=lambda e: e.id)), (), "dX")


STANDARD_NAMES = ("dI", "dII", "dX", "dO", "dS1", "dIIgrid", "point")


def standard_space(name: str, k: int | None = None) -> DiComplex:
    """dI, dII (2×2 grid), dX, dO, dS1, point, or dIIgrid with `k`.

    `"dIIgrid(3)"` is accepted as shorthand for `("dIIgrid", 3)`.
    """
    if name.startswith("dIIgrid(") and name.endswith(")"):
        name, k = "dIIgrid", int(name[len("dIIgrid("):-1])
    if name == "dI":
        return build_grid_complex(unit_region(1), unit_lines(1, 1), name="dI")
    if name == "point":
        return build_grid_complex(RectRegion(Box.closed((0,), (0,))), [[0]], name="point")
    if name == "dII":
        return build_grid_complex(unit_region(2), unit_lines(2), name="dII")
    if name == "dIIgrid":
        if k is None or k < 1:
            raise UnknownNameError("dIIgrid needs a positive grid size k")
        return build_grid_complex(unit_region(2), unit_lines(k), name=f"dIIgrid({k})")
    if name == "dX":
        return plus_complex()
    if name == "dO":
        return _abstract("dO", ["a", "b"], [("e1", "a", "b"), ("e2", "a", "b")])
    if name == "dS1":
        return _abstract("dS1", ["v0", "v1", "v2"], [("e0", "v0", "v1"), ("e1", "v1", "v2"), ("e2", "v2", "v0")])
    raise UnknownNameError(f"unknown standard space {name!r}; expected one of {', '.join(STANDARD_NAMES)}")


@dataclass(frozen=True)
class RegionPreset:
    """A region with its default grid and marked points."""

    name: str
    region: RectRegion
    grid_lines: tuple[tuple[Fraction, ...], ...]
    marking: Mapping[str, Point] = field(default_factory=dict)
    triangulate: bool = False

    def build(self) -> DiComplex:
        return build_grid_complex(
            self.region, self.grid_lines, self.triangulate, self.marking.values(), name=self.name
        )


def _fifths() -> tuple[Fraction, ...]:
    return tuple(Fraction(i, 5) for i in range(6))


def _thirds() -> tuple[Fraction, ...]:
    return tuple(Fraction(i, 3) for i in range(4))


SWISS_CROSS = (
    Box.open(("2/5", "2/5"), ("3/5", "3/5")),
    Box.open(("1/5", "2/5"), ("2/5", "3/5")),
    Box.open(("3/5", "2/5"), ("4/5", "3/5")),
    Box.open(("2/5", "1/5"), ("3/5", "2/5")),
    Box.open(("2/5", "3/5"), ("3/5", "4/5")),
)

SWISS_MARKING = {
    "a": make_point(0, 0),
    "b": make_point(1, 1),
    "c": make_point("2/5", "2/5"),
    "d": make_point("3/5", "3/5"),
}

STAIRCASE_X = tuple(map(Fraction, ("0", "1/5", "2/5", "1/2", "3/5", "4/5", "1")))
STAIRCASE_Y = tuple(map(Fraction, ("0", "2/5", "3/5", "1")))


def _bottom_marks() -> dict[str, Point]:
    return {"a": make_point(0, 0), "b": make_point(HALF, 0), "c": make_point(1, 0)}


def _top_marks() -> dict[str, Point]:
    return {"a": make_point(0, 1), "b": make_point(HALF, 1), "c": make_point(1, 1)}


def region_preset(name: str, marks: str | None = None) -> RegionPreset:
    """Region presets for the worked examples.

    The staircase halves are marked on their bottom edge (`staircase-left*`)
    or top edge (`staircase-right*`) by default; `marks="top"` or
    `marks="bottom"` swaps the edge for the mirrored gluing chain.
    """
    unit = Box.closed((0, 0), (1, 1))
    corners = {"a": make_point(0, 0), "b": make_point(1, 1)}
    if name == "square-removed":
        region = RectRegion(unit, (Box.open(("1/3", "1/3"), ("2/3", "2/3")),))
        return RegionPreset(name, region, (_thirds(), _thirds()), corners)
    if name == "boundary":
        region = RectRegion(unit, (Box.open((0, 0), (1, 1)),))
        return RegionPreset(name, region, (_thirds(), _thirds()), corners)
    if name == "swiss-flag":
        return RegionPreset(name, RectRegion(unit, SWISS_CROSS), (_fifths(), _fifths()), dict(SWISS_MARKING))
    if name == "swiss-inner":
        inner = Box.closed(("1/5", "1/5"), ("4/5", "4/5"))
        lines = _fifths()[1:-1]
        return RegionPreset(name, RectRegion(inner, SWISS_CROSS), (lines, lines), {})
    holes = {
        "staircase-left": Box.open(("1/5", "2/5"), ("2/5", "3/5")),
        "staircase-right": Box.open(("3/5", "2/5"), ("4/5", "3/5")),
        "staircase-left-wide": Box.open((0, 0), ("1/2", 1)),
        "staircase-right-wide": Box.open(("1/2", 0), (1, 1)),
    }
    if name in holes:
        edge = marks or ("bottom" if name.startswith("staircase-left") else "top")
        if edge not in ("top", "bottom"):
            raise UnknownNameError(f"marks must be 'top' or 'bottom', got {edge!r}")
        marking = _bottom_marks() if edge == "bottom" else _top_marks()
        return RegionPreset(name, RectRegion(unit, (holes[name],)), (STAIRCASE_X, STAIRCASE_Y), marking)
    raise UnknownNameError(f"unknown region preset {name!r}")


PRESET_REGIONS = (
    "square-removed",
    "boundary",
    "swiss-flag",
    "swiss-inner",
    "staircase-left",
    "staircase-right",
    "staircase-left-wide",
    "staircase-right-wide",
)


def embedded_complex(name: str, points: Iterable[Sequence[Any]], chains: Iterable[Sequence[Sequence[Any]]]) -> DiComplex:
    """A 1-complex from polylines of points; consecutive points become edges."""
    pts = {make_point(*p) for p in points}
    edges: dict[str, Edge] = {}
    for chain in chains:
        path = [make_point(*p) for p in chain]
        pts.update(path)
        for p, q in zip(path, path[1:]):
            eid = f"{vertex_id(p)}->{vertex_id(q)}"
            edges[eid] = Edge(eid, vertex_id(p), vertex_id(q))
    vertices = tuple(Vertex(vertex_id(p), p) for p in sorted(pts))
    return DiComplex(vertices, tuple(edges[k] for k in sorted(edges)), (), name)


def swiss_skeleton() -> DiComplex:
    """The one-dimensional sub-pospace of the flag: two diagonals and a loop."""
    f = "{}/5".format
    return embedded_complex(
        "swiss-skeleton",
        [],
        [
            [(0, 0), (f(1), f(1)), (f(2), f(2))],
            [(f(3), f(3)), (f(4), f(4)), (1, 1)],
            [(f(1), f(1)), (f(1), f(2)), (f(1), f(3)), (f(2), f(4)), (f(3), f(4)), (f(4), f(4))],
            [(f(1), f(1)), (f(2), f(1)), (f(3), f(1)), (f(4), f(2)), (f(4), f(3)), (f(4), f(4))],
        ],
    )


# ───── validation ─────


@dataclass(frozen=True)
class ValidationReport:
    acyclic: bool
    embedding_monotone: bool
    face_closed: bool
    cycles: tuple[tuple[str, ...], ...] = ()
    deadlocks: tuple[str, ...] = ()
    unreachable: tuple[str, ...] = ()
    problems: tuple[str, ...] = ()

    @property
    def local_only(self) -> bool:
        return not self.acyclic

    def ok(self, allow_loops: bool = False) -> bool:
        return self.face_closed and self.embedding_monotone and (self.acyclic or allow_loops)

    def to_json(self) -> dict:
        return {
            "acyclic": self.acyclic,
            "embeddingMonotone": self.embedding_monotone,
            "faceClosed": self.face_closed,
            "localOnly": self.local_only,
            "cycles": [list(c) for c in self.cycles],
            "deadlocks": list(self.deadlocks),
            "unreachable": list(self.unreachable),
            "problems": list(self.problems),
        }


MAX_REPORTED_CYCLES = 16


def find_cycles(c: DiComplex) -> list[tuple[str, ...]]:
    """Directed cycles as edge-id sequences, shortest first."""
    simple = nx.DiGraph()
    best: dict[tuple[str, str], str] = {}
    for e in c.edges:
        if e.directed:
            key = (e.src, e.dst)
            best[key] = min(best.get(key, e.id), e.id)
    simple.add_edges_from(best)
    cycles = []
    for cyc in itertools.islice(nx.simple_cycles(simple), 4 * MAX_REPORTED_CYCLES):
        start = cyc.index(min(cyc))
        cyc = cyc[start:] + cyc[:start]
        cycles.append(tuple(best[(a, b)] for a, b in zip(cyc, cyc[1:] + cyc[:1])))
    return sorted(cycles, key=lambda t: (len(t), t))[:MAX_REPORTED_CYCLES]


def deadlocks(c: DiComplex) -> list[str]:
    """Embedded sinks that still have some vertex above them."""
    if not c.embedded:
        return []
    out = []
    for v in c.vertices:
        if c.out_edges(v.id):
            continue
        if any(w.id != v.id and compare_points(v.coords, w.coords) is OrderRelation.LESS_EQ for w in c.vertices):
            out.append(v.id)
    return sorted(out)


def unreachable(c: DiComplex) -> list[str]:
    """Embedded sources that still have some vertex below them."""
    if not c.embedded:
        return []
    out = []
    for v in c.vertices:
        if c.in_edges(v.id):
            continue
        if any(w.id != v.id and compare_points(w.coords, v.coords) is OrderRelation.LESS_EQ for w in c.vertices):
            out.append(v.id)
    return sorted(out)


def _path_endpoints(c: DiComplex, path: Sequence[str]) -> tuple[str, str] | None:
    if not path:
        return None
    edges = [c._edge_index.get(eid) for eid in path]
    if any(e is None or not e.directed for e in edges):
        return None
    if any(a.dst != b.src for a, b in zip(edges, edges[1:])):
        return None
    return edges[0].src, edges[-1].dst


def validate_complex(c: DiComplex) -> ValidationReport:
    problems: list[str] = []
    vids = [v.id for v in c.vertices]
    eids = [e.id for e in c.edges]
    face_closed = True
    for label, ids in (("vertex", vids), ("edge", eids), ("cell", [x.id for x in c.cells])):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        if dup:
            face_closed = False
            problems.append(f"duplicate {label} ids: {', '.join(dup)}")
    known = set(vids)
    for e in c.edges:
        if e.src not in known or e.dst not in known:
            face_closed = False
            problems.append(f"edge {e.id} has an endpoint that is not a vertex")
    edge_set = set(eids)
    for cell in c.cells:
        if any(eid not in edge_set for eid in (*cell.path_a, *cell.path_b)):
            face_closed = False
            problems.append(f"cell {cell.id} uses an unknown edge")
            continue
        ends_a, ends_b = _path_endpoints(c, cell.path_a), _path_endpoints(c, cell.path_b)
        if ends_a is None or ends_b is None or ends_a != ends_b:
            face_closed = False
            problems.append(f"cell {cell.id} sides are not parallel directed paths")

    monotone = True
    for e in c.edges:
        if not e.directed or e.src not in known or e.dst not in known:
            continue
        p, q = c.vertex(e.src).coords, c.vertex(e.dst).coords
        if p is None or q is None:
            continue
        if len(p) != len(q) or compare_points(p, q) is not OrderRelation.LESS_EQ:
            monotone = False
            problems.append(f"edge {e.id} is not increasing in the embedding")

    cycles = find_cycles(c)
    acyclic = not cycles
    report = ValidationReport(
        acyclic=acyclic,
        embedding_monotone=monotone,
        face_closed=face_closed,
        cycles=tuple(cycles),
        deadlocks=tuple(deadlocks(c)) if face_closed else (),
        unreachable=tuple(unreachable(c)) if face_closed else (),
        problems=tuple(problems),
    )
    if report.local_only:
        log.info("%s has directed cycles; treating it as a local pospace", c.name or "complex")
    return report


def is_isomorphic(c1: DiComplex, c2: DiComplex) -> bool:
    """Isomorphic as edge-kinded multigraphs with the same number of 2-cells."""
    if len(c1.cells) != len(c2.cells):
        return False

    def graph(c: DiComplex) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(v.id for v in c.vertices)
        for e in c.edges:
            g.add_edge(e.src, e.dst, kind=e.kind.value)
        return g

    return nx.is_isomorphic(graph(c1), graph(c2), edge_match=lambda a, b: sorted(x["kind"] for x in a.values()) == sorted(x["kind"] for x in b.values()))


# ───── contexts ─────


def discrete_context(names: Iterable[str]) -> DiComplex:
    return DiComplex(tuple(Vertex(n) for n in sorted(set(names))), (), (), "context")


@dataclass(frozen=True, eq=False)
class ContextedComplex:
    """A complex under a context: `marking` sends context vertices to space vertices."""

    space: DiComplex
    context: DiComplex
    marking: Mapping[str, str]

    def iota(self, a: str) -> str:
        try:
            return self.marking[a]
        except KeyError:
            raise MarkingError(f"context vertex {a!r} is not marked") from None

    @property
    def names(self) -> list[str]:
        return sorted(v.id for v in self.context.vertices)


def mark_context(space: DiComplex, context: DiComplex, marking: Mapping[str, str]) -> ContextedComplex:
    for v in context.vertices:
        if v.id not in marking:
            raise MarkingError(f"context vertex {v.id!r} has no marked point")
    for a, target in marking.items():
        if not context.has_vertex(a):
            raise MarkingError(f"{a!r} is not a context vertex")
        if not space.has_vertex(target):
            raise MarkingError(f"context vertex {a!r} is marked at {target!r}, which is not a vertex of {space.name or 'the space'}")
    for e in context.edges:
        if e.directed and not space.reachable(marking[e.src], marking[e.dst]):
            raise MarkingError(f"context edge {e.id} is not preserved: {marking[e.dst]} is not reachable from {marking[e.src]}")
    return ContextedComplex(space, context, dict(marking))


def mark_points(space: DiComplex, marking: Mapping[str, Sequence[Fraction]]) -> ContextedComplex:
    """Discrete context whose vertices are marked by coordinates."""
    ids = {}
    for a, p in marking.items():
        vid = space.vertex_at(tuple(p))
        if vid is None:
            raise MarkingError(f"marked point {a}={format_point(p)} is not a vertex of {space.name or 'the space'}")
        ids[a] = vid
    return mark_context(space, discrete_context(ids), ids)


# ───── JSON ─────


def complex_to_json(c: DiComplex) -> dict:
    doc: dict[str, Any] = {
        "vertices": [
            {"id": v.id, **({"coords": [format_rat(x) for x in v.coords]} if v.coords is not None else {})}
            for v in c.vertices
        ],
        "edges": [{"id": e.id, "src": e.src, "dst": e.dst, "kind": e.kind.value} for e in c.edges],
        "cells": [{"id": x.id, "pathA": list(x.path_a), "pathB": list(x.path_b)} for x in c.cells],
    }
    if c.dimension is not None:
        doc["dimension"] = c.dimension
    if c.name:
        doc["name"] = c.name
    return doc


def complex_from_json(doc: Mapping[str, Any], name: str = "") -> DiComplex:
    try:
        vertices = []
        for v in doc["vertices"]:
            coords = v.get("coords")
            vertices.append(Vertex(str(v["id"]), make_point(*coords) if coords is not None else None))
        dim = doc.get("dimension")
        if dim is not None and any(v.coords is not None and len(v.coords) != dim for v in vertices):
            raise SpecError("vertex coordinates do not match the declared dimension")
        edges = []
        for e in doc.get("edges", []):
            kind = EdgeKind(e.get("kind", "directed"))
            edges.append(Edge(str(e["id"]), str(e["src"]), str(e["dst"]), kind))
        cells = [
            Cell2(str(x["id"]), tuple(x["pathA"]), tuple(x["pathB"])) for x in doc.get("cells", [])
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed space document: {exc}") from exc
    return DiComplex(tuple(vertices), tuple(edges), tuple(cells), doc.get("name", name))
