"""Fundamental-category engine.

Dipaths are directed edge paths of a `DiComplex`; two dipaths are
dihomotopic when a sequence of elementary flips (swap one side of a 2-cell
for the other) turns one into the other. `hom_set` groups every dipath
between two vertices into flip classes, and `equivalence_obstruction`
compares hom-sets of two contexted complexes pair by pair.

Usage
-----
>>> from dicontext.complex import standard_space
>>> from dicontext.fundcat import hom_set
>>> len(hom_set(standard_space("dO"), "a", "b").classes)
2
"""
from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping, Sequence

import networkx as nx
from networkx.utils import UnionFind

from .complex import ContextedComplex, DiComplex, Edge
from .errors import ContextError, EndpointError, NeedsBoundError, NotAFunctorError, SpecError, UnknownNameError
from .reports import Verdict

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dipath:
    source: str
    target: str
    edges: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.edges)

    def to_json(self) -> dict:
        return {"source": self.source, "target": self.target, "edges": list(self.edges)}


def dipath(c: DiComplex, edges: Sequence[str], source: str | None = None) -> Dipath:
    """Build a dipath from edge ids, checking that consecutive edges chain."""
    if not edges:
        if source is None:
            raise SpecError("an empty dipath needs its vertex")
        c.vertex(source)
        return Dipath(source, source, ())
    chain = [c.edge(eid) for eid in edges]
    for e in chain:
        if not e.directed:
            raise SpecError(f"dipaths cannot traverse undirected edge {e.id}")
    for a, b in zip(chain, chain[1:]):
        if a.dst != b.src:
            raise SpecError(f"edges {a.id} and {b.id} do not chain")
    return Dipath(chain[0].src, chain[-1].dst, tuple(edges))


# ───── enumeration ─────


def _distance_to(c: DiComplex, y: str) -> dict[str, int]:
    return nx.single_source_shortest_path_length(c.digraph().reverse(copy=False), y)


def iter_dipaths(c: DiComplex, x: str, y: str, max_len: int | None = None) -> Iterator[Dipath]:
    """Dipaths from x to y in lexicographic order of their edge ids.

    A prefix comes before its extensions, which is the order a depth-first
    walk over id-sorted out-edges produces.
    """
    c.vertex(x), c.vertex(y)
    if not c.loop_free and max_len is None:
        raise NeedsBoundError(f"{c.name or 'complex'} has directed cycles; pass max_len to enumerate dipaths")
    dist = _distance_to(c, y)
    budget = max_len if max_len is not None else len(c.edges)

    def walk(v: str, path: list[str]) -> Iterator[Dipath]:
        if v == y:
            yield Dipath(x, y, tuple(path))
        for e in c.out_edges(v):
            if e.dst not in dist or len(path) + 1 + dist[e.dst] > budget:
                continue
            path.append(e.id)
            yield from walk(e.dst, path)
            path.pop()

    if x in dist and dist[x] <= budget:
        yield from walk(x, [])


def enumerate_dipaths(c: DiComplex, x: str, y: str, max_len: int | None = None) -> list[Dipath]:
    return list(iter_dipaths(c, x, y, max_len))


# ───── flips ─────


def _flip_table(c: DiComplex) -> dict[str, list[tuple[tuple[str, ...], tuple[str, ...]]]]:
    table: dict[str, list[tuple[tuple[str, ...], tuple[str, ...]]]] = {}
    for cell in c.cells:
        for old, new in ((cell.path_a, cell.path_b), (cell.path_b, cell.path_a)):
            if old:
                table.setdefault(old[0], []).append((tuple(old), tuple(new)))
    return table


def flips(c: DiComplex, edges: tuple[str, ...], table: Mapping | None = None) -> Iterator[tuple[str, ...]]:
    """Every path one elementary flip away."""
    table = _flip_table(c) if table is None else table
    for i, eid in enumerate(edges):
        for old, new in table.get(eid, ()):
            if edges[i:i + len(old)] == old:
                yield edges[:i] + new + edges[i + len(old):]


def dihomotopic(c: DiComplex, p: Dipath, q: Dipath, max_len: int | None = None) -> bool:
    if (p.source, p.target) != (q.source, q.target):
        raise EndpointError(f"dipaths {p.source}->{p.target} and {q.source}->{q.target} have different endpoints")
    if p.edges == q.edges:
        return True
    if not c.loop_free and max_len is None:
        raise NeedsBoundError("comparing dipaths in a cyclic complex needs max_len")
    table = _flip_table(c)
    seen = {p.edges}
    queue = deque([p.edges])
    while queue:
        cur = queue.popleft()
        for nxt in flips(c, cur, table):
            if nxt == q.edges:
                return True
            if nxt in seen or (max_len is not None and len(nxt) > max_len):
                continue
            seen.add(nxt)
            queue.append(nxt)
    return False


# ───── hom-sets ─────


@dataclass(frozen=True)
class HomClass:
    class_id: int
    representative: Dipath
    members: int


@dataclass(frozen=True)
class HomSet:
    source: str
    target: str
    classes: tuple[HomClass, ...]
    path_count: int
    bounded: bool = False
    index: Mapping[tuple[str, ...], int] = field(default_factory=dict, repr=False, compare=False)

    def class_of(self, path: Dipath) -> int | None:
        """Class id of an enumerated path, or None if it was not enumerated."""
        return self.index.get(path.edges)

    def to_json(self) -> dict:
        doc = {
            "source": self.source,
            "target": self.target,
            "classCount": len(self.classes),
            "pathCount": self.path_count,
            "representatives": [list(k.representative.edges) for k in self.classes],
        }
        if self.bounded:
            doc["bounded"] = True
            doc["note"] = "bounded enumeration on a cyclic complex, not a fundamental-category computation"
        return doc


def hom_set(c: DiComplex, x: str, y: str, max_len: int | None = None) -> HomSet:
    paths = enumerate_dipaths(c, x, y, max_len)
    known = {p.edges for p in paths}
    table = _flip_table(c)
    uf = UnionFind(known)
    for p in paths:
        for q in flips(c, p.edges, table):
            if q in known:
                uf.union(p.edges, q)
    groups = sorted((sorted(g) for g in uf.to_sets()), key=lambda g: g[0])
    classes, index = [], {}
    for cid, group in enumerate(groups):
        classes.append(HomClass(cid, Dipath(x, y, group[0]), len(group)))
        for edges in group:
            index[edges] = cid
    log.debug("hom(%s, %s): %d paths in %d classes", x, y, len(paths), len(classes))
    return HomSet(x, y, tuple(classes), len(paths), not c.loop_free, index)


# ───── combinatorial maps ─────


@dataclass(frozen=True, eq=False)
class CombMap:
    """A cellular map: vertices to vertices, edges to edge paths."""

    source: DiComplex
    target: DiComplex
    vertex_map: Mapping[str, str]
    edge_routes: Mapping[str, tuple[str, ...]]
    name: str = ""

    @classmethod
    def identity(cls, c: DiComplex) -> "CombMap":
        return cls(c, c, {v.id: v.id for v in c.vertices}, {e.id: (e.id,) for e in c.edges}, "id")

    def __call__(self, vid: str) -> str:
        try:
            return self.vertex_map[vid]
        except KeyError:
            raise UnknownNameError(f"vertex {vid!r} is not mapped by {self.name or 'the map'}") from None

    def route(self, eid: str) -> tuple[str, ...]:
        try:
            return tuple(self.edge_routes[eid])
        except KeyError:
            raise UnknownNameError(f"edge {eid!r} is not routed by {self.name or 'the map'}") from None

    def image(self, path: Dipath) -> Dipath:
        edges = tuple(itertools.chain.from_iterable(self.route(e) for e in path.edges))
        return Dipath(self(path.source), self(path.target), edges)

    def validate(self) -> None:
        """Raise SpecError unless every route runs between the images of its edge's endpoints."""
        problems = []
        for v in self.source.vertices:
            if v.id not in self.vertex_map:
                problems.append(f"vertex {v.id} is not mapped")
            elif not self.target.has_vertex(self.vertex_map[v.id]):
                problems.append(f"vertex {v.id} maps to unknown {self.vertex_map[v.id]}")
        if problems:
            raise SpecError("; ".join(problems[:5]))
        for e in self.source.edges:
            if e.id not in self.edge_routes:
                problems.append(f"edge {e.id} is not routed")
                continue
            problem = _route_problem(self.target, e, self.route(e.id), self(e.src), self(e.dst))
            if problem:
                problems.append(problem)
        if problems:
            raise SpecError("; ".join(problems[:5]))

    @cached_property
    def _cells_checked(self) -> bool:
        bound = None if self.target.loop_free else max(
            (sum(len(self.route(e)) for e in side) for cell in self.source.cells for side in (cell.path_a, cell.path_b)),
            default=0,
        )
        for cell in self.source.cells:
            src = self.source.edge(cell.path_a[0]).src
            dst = self.source.edge(cell.path_a[-1]).dst
            a = self.image(Dipath(src, dst, cell.path_a))
            b = self.image(Dipath(src, dst, cell.path_b))
            if not dihomotopic(self.target, a, b, bound):
                raise NotAFunctorError(
                    f"{self.name or 'map'} sends the sides of 2-cell {cell.id} to distinct classes", cell.id
                )
        return True

    def check_cells(self) -> None:
        """Raise NotAFunctorError unless every 2-cell's sides land in one class."""
        self._cells_checked

    def to_json(self) -> dict:
        return {
            "vertices": dict(sorted(self.vertex_map.items())),
            "edges": {k: list(v) for k, v in sorted(self.edge_routes.items())},
        }


def _route_problem(target: DiComplex, edge: Edge, route: Sequence[str], u: str, w: str) -> str | None:
    if not route:
        return None if u == w else f"edge {edge.id} collapses but its endpoints map to {u} and {w}"
    try:
        chain = [target.edge(eid) for eid in route]
    except UnknownNameError as exc:
        return str(exc)
    if edge.directed:
        if any(not e.directed for e in chain):
            return f"directed edge {edge.id} is routed through an undirected edge"
        if chain[0].src != u or chain[-1].dst != w or any(a.dst != b.src for a, b in zip(chain, chain[1:])):
            return f"route of {edge.id} does not run from {u} to {w}"
        return None
    at = u
    for e in chain:
        if e.src == at:
            at = e.dst
        elif e.dst == at:
            at = e.src
        else:
            return f"route of {edge.id} is not connected"
    return None if at == w else f"route of {edge.id} does not end at {w}"


def compose_maps(g: CombMap, f: CombMap) -> CombMap:
    """g after f."""
    vertex_map = {v: g(f(v)) for v in f.vertex_map}
    routes = {
        eid: tuple(itertools.chain.from_iterable(g.route(x) for x in route)) for eid, route in f.edge_routes.items()
    }
    return CombMap(f.source, g.target, vertex_map, routes, f"{g.name}∘{f.name}")


def _induced(f: CombMap, h: HomSet) -> tuple[dict[int, int], HomSet]:
    f.check_cells()
    images = {k.class_id: f.image(k.representative) for k in h.classes}
    bound = None if f.target.loop_free else max((len(p) for p in images.values()), default=0)
    th = hom_set(f.target, f(h.source), f(h.target), bound)
    mapping = {}
    for cid, img in images.items():
        tid = th.class_of(img)
        if tid is None:
            tid = next(k.class_id for k in th.classes if dihomotopic(f.target, img, k.representative, bound))
        mapping[cid] = tid
    return mapping, th


def induced_map(f: CombMap, h: HomSet) -> dict[int, int]:
    """[γ] ↦ [f∘γ] on class ids."""
    return _induced(f, h)[0]


# ───── obstruction check ─────


def _totally_ordered(c: DiComplex) -> bool:
    g = nx.DiGraph(c.digraph())
    if not nx.is_directed_acyclic_graph(g):
        return False
    closure = nx.transitive_closure_dag(g)
    ids = [v.id for v in c.vertices]
    return all(closure.has_edge(a, b) or closure.has_edge(b, a) for a, b in itertools.combinations(ids, 2))


def equivalence_obstruction(B: ContextedComplex, C: ContextedComplex, f: CombMap | None = None) -> Verdict:
    """Compare hom-sets between context points of B and C.

    With `f`, every induced set map must be a bijection. Without it, only
    obstructions valid for every context-preserving map are reported.
    Passing is a necessary condition for equivalence, nothing more.
    """
    if B.names != C.names:
        raise ContextError(f"contexts differ: {B.names} vs {C.names}")
    names = B.names
    pairs = [(a, b) for a, b in itertools.product(names, repeat=2) if a != b]
    rows = []

    if f is not None:
        for a in names:
            if f(B.iota(a)) != C.iota(a):
                return Verdict.obstruction(
                    a, "context", f"the map does not fix context vertex {a}",
                    {"a": a, "image": f(B.iota(a)), "expected": C.iota(a)},
                )
        for a, b in pairs:
            hb = hom_set(B.space, B.iota(a), B.iota(b))
            mapping, hc = _induced(f, hb)
            row = {"a": a, "b": b, "homB": len(hb.classes), "homC": len(hc.classes)}
            rows.append(row)
            values = set(mapping.values())
            if len(values) != len(mapping) or values != {k.class_id for k in hc.classes}:
                return Verdict.obstruction(
                    f"{a}->{b}", "not-bijective", "the induced map on classes is not a bijection",
                    {**row, "mapping": {str(k): v for k, v in sorted(mapping.items())}},
                )
        return Verdict.necessary("every induced map on context hom-sets is a bijection", {"pairs": rows})

    homs = {(a, b): hom_set(B.space, B.iota(a), B.iota(b)) for a, b in pairs}
    if _totally_ordered(C.space):
        for a, b in itertools.combinations(names, 2):
            if not homs[(a, b)].classes and not homs[(b, a)].classes and B.iota(a) != B.iota(b):
                return Verdict.obstruction(
                    f"{a}<->{b}", "total-order",
                    f"no dipath between {a} and {b} in either direction, but every pair of points of the target is comparable",
                    {"a": a, "b": b, "homB": 0, "homBReverse": 0},
                )
    for a, b in pairs:
        hc = hom_set(C.space, C.iota(a), C.iota(b))
        row = {"a": a, "b": b, "homB": len(homs[(a, b)].classes), "homC": len(hc.classes)}
        rows.append(row)
        if row["homB"] != row["homC"]:
            return Verdict.obstruction(
                f"{a}->{b}", "cardinality", "hom-set sizes differ, so no context-preserving map induces a bijection", row
            )
    return Verdict.necessary("hom-set sizes agree for every ordered pair of context vertices", {"pairs": rows})
