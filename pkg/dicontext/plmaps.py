"""Piecewise-linear dimaps, dihomotopies and equivalence certificates.

A `PLMap` is a list of coordinate-expression stages between geometric
spaces. Everything is decided on the affine pieces that `cells.map_pieces`
cuts out of the domain cells, so every Pass is exact; sampling is only
used to produce counterexamples.

Usage
-----
>>> from dicontext.plmaps import check_dimap, preset_map
>>> check_dimap(preset_map("max")).status.value
'pass'
>>> preset_map("F1")(["2/3"])
(Fraction(1, 1),)
"""
from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Iterator, Mapping, Sequence

import numpy as np

from .cells import ConvexCell, Env, apply_env, bisect, linear_part, map_pieces, order_cone_rays
from .complex import DiComplex, Edge, embedded_complex, region_preset
from .errors import (
    ContextError,
    DimensionError,
    DiscretizationError,
    DomainError,
    SpecError,
    UnknownNameError,
)
from .fundcat import CombMap
from .order_core import (
    Affine,
    Box,
    Case,
    Const,
    Constraint,
    Expr,
    Max,
    Min,
    Piecewise,
    Point,
    RectRegion,
    Var,
    apply_stages,
    eval_pl,
    format_point,
    format_rat,
    leq,
    parse_rat,
)
from .reports import Verdict
from .spaces import (
    ComplexSpace,
    ContextedSpace,
    ProductSpace,
    RegionSpace,
    Space,
    UnionSpace,
    named_space,
    point_space,
    segment_parameter,
)

log = logging.getLogger(__name__)

ZERO, ONE = Fraction(0), Fraction(1)

Stage = tuple[Expr, ...]


# ───── maps ─────


@dataclass(frozen=True, eq=False)
class PLMap:
    """A PL map applied stage by stage.

    Stage k reads the coordinates stage k-1 produced. `stage_domains[k-1]`
    is the space those coordinates must stay in; None skips the check.
    """

    domain: Space
    codomain: Space
    stages: tuple[Stage, ...]
    stage_domains: tuple[Space | None, ...] = ()
    name: str = ""

    def __post_init__(self) -> None:
        if not self.stages:
            raise SpecError("a map needs at least one stage")
        if not self.stage_domains:
            object.__setattr__(self, "stage_domains", (None,) * (len(self.stages) - 1))
        if len(self.stage_domains) != len(self.stages) - 1:
            raise SpecError("one intermediate domain per stage boundary")
        width = self.domain.dimension
        for k, stage in enumerate(self.stages):
            if not stage:
                raise DimensionError(f"stage {k + 1} of {self.name or 'map'} has no coordinates")
            inner = self.stage_domains[k - 1] if k else None
            if inner is not None and inner.dimension != width:
                raise DimensionError(f"stage {k + 1} of {self.name or 'map'} is fed {width} coordinates by a {inner.dimension}-dimensional domain")
            need = max(e.arity() for e in stage)
            if need > width:
                raise DimensionError(f"stage {k + 1} of {self.name or 'map'} reads x{need - 1} but gets {width} coordinates")
            width = len(stage)
        if width != self.codomain.dimension:
            raise DimensionError(f"{self.name or 'map'} produces {width} coordinates for a {self.codomain.dimension}-dimensional codomain")

    def __call__(self, p: Sequence[Any]) -> Point:
        return eval_pl(self, tuple(parse_rat(c) for c in p))

    def _between(self, k: int, cell: ConvexCell, env: Env) -> None:
        space = self.stage_domains[k - 1]
        if space is None:
            return
        bad = space.hull_witness([apply_env(env, v) for v in cell.points])
        if bad:
            raise DomainError(f"stage {k + 1} of {self.name or 'the map'} is fed points outside its domain: {bad}", cell.centroid)

    def pieces_over(self, cell: ConvexCell) -> list[tuple[ConvexCell, Env]]:
        return map_pieces(self.stages, cell, self._between)

    @cached_property
    def pieces(self) -> tuple[tuple[ConvexCell, Env], ...]:
        out = [piece for cell in self.domain.cells() for piece in self.pieces_over(cell)]
        log.debug("%s: %d affine pieces", self.name or "map", len(out))
        return tuple(out)

    def with_spaces(self, domain: Space | None = None, codomain: Space | None = None, name: str | None = None) -> "PLMap":
        return replace(
            self,
            domain=domain or self.domain,
            codomain=codomain or self.codomain,
            name=self.name if name is None else name,
        )

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "domain": self.domain.name,
            "codomain": self.codomain.name,
            "stages": [[e.to_json() for e in stage] for stage in self.stages],
        }


def _identity_stage(n: int) -> Stage:
    return tuple(Var(i) for i in range(n))


def identity_map(space: Space) -> PLMap:
    return PLMap(space, space, (_identity_stage(space.dimension),), name="id")


def inclusion_map(sub: Space, sup: Space) -> PLMap:
    if sub.dimension != sup.dimension:
        raise DimensionError("an inclusion needs spaces of one dimension")
    return PLMap(sub, sup, (_identity_stage(sub.dimension),), name=f"{sub.name}->{sup.name}")


def constant_map(domain: Space, codomain: Space, value: Sequence[Any]) -> PLMap:
    point = tuple(parse_rat(c) for c in value)
    return PLMap(domain, codomain, (tuple(Const(c) for c in point),), name=f"const{format_point(point)}")


def compose(outer: PLMap, inner: PLMap, name: str | None = None) -> PLMap:
    """outer ∘ inner; the stages are chained, not expanded."""
    if inner.codomain.dimension != outer.domain.dimension:
        raise DimensionError(f"cannot compose {outer.name} after {inner.name}: dimensions differ")
    return PLMap(
        inner.domain,
        outer.codomain,
        inner.stages + outer.stages,
        inner.stage_domains + (outer.domain,) + outer.stage_domains,
        name if name is not None else f"{outer.name}∘{inner.name}",
    )


def common_pieces(f: PLMap, g: PLMap) -> Iterator[tuple[ConvexCell, Env, Env]]:
    """Pieces of f's domain on which both maps are affine."""
    if f.domain.dimension != g.domain.dimension:
        raise DimensionError(f"{f.name} and {g.name} have domains of different dimension")
    for cell, ef in f.pieces:
        for sub, eg in g.pieces_over(cell):
            yield sub, ef, eg


def first_difference(f: PLMap, g: PLMap) -> tuple[Point, Point, Point] | None:
    """(point, f(point), g(point)) where the maps first differ, else None."""
    if f.codomain.dimension != g.codomain.dimension:
        raise DimensionError(f"{f.name} and {g.name} have codomains of different dimension")
    for cell, ef, eg in common_pieces(f, g):
        for v in cell.points:
            a, b = apply_env(ef, v), apply_env(eg, v)
            if a != b:
                return v, a, b
    return None


def maps_equal(f: PLMap, g: PLMap) -> bool:
    return first_difference(f, g) is None


# ───── dimap check ─────


def _monotonicity(pieces: Sequence[tuple[ConvexCell, Env]]) -> dict | None:
    for cell, env in pieces:
        jac = linear_part(env)
        for ray in order_cone_rays(cell):
            image = jac.dot(ray)
            if any(x < 0 for x in image):
                return {"cell": cell.describe(), "direction": list(ray), "image": list(image)}
    return None


def _containment(codomain: Space, pieces: Sequence[tuple[ConvexCell, Env]]) -> dict | None:
    for cell, env in pieces:
        image = [apply_env(env, v) for v in cell.points]
        bad = codomain.hull_witness(image)
        if bad:
            return {"cell": cell.describe(), "image": [format_point(p) for p in image], "outside": bad}
    return None


def _vertex_values(pieces: Sequence[tuple[ConvexCell, Env]]) -> dict | None:
    values: dict[Point, Point] = {}
    for cell, env in pieces:
        for v in cell.points:
            val = apply_env(env, v)
            seen = values.setdefault(v, val)
            if seen != val:
                return {"point": v, "values": [seen, val]}
    # a vertex of one piece may sit inside a face of another
    for cell, env in pieces:
        lo, hi = cell.bounds()
        for v, val in values.items():
            if v in cell.points or any(x < a or x > b for x, a, b in zip(v, lo, hi)):
                continue
            if cell.contains(v) and apply_env(env, v) != val:
                return {"point": v, "values": [val, apply_env(env, v)]}
    return None


def check_dimap(m: PLMap, stage: str = "") -> Verdict:
    """Exact check that `m` is monotone, continuous and lands in its codomain."""
    stage = stage or m.name or "map"
    try:
        pieces = m.pieces
    except DomainError as exc:
        return Verdict.failed(stage, "domain", str(exc), {"point": exc.point} if exc.point else None)
    witness = _monotonicity(pieces)
    if witness:
        return Verdict.failed(stage, "monotonicity", "an affine piece decreases along an order direction", witness)
    witness = _containment(m.codomain, pieces)
    if witness:
        return Verdict.failed(stage, "containment", f"a piece leaves {m.codomain.name or 'the codomain'}", witness)
    witness = _vertex_values(pieces)
    if witness:
        return Verdict.failed(stage, "continuity", f"pieces disagree at {format_point(witness['point'])}", witness)
    return Verdict.passed(stage, f"{len(pieces)} affine pieces")


def check_context_preserving(m: PLMap, b: ContextedSpace, c: ContextedSpace, stage: str = "") -> Verdict:
    """m(ι_B(a)) = ι_C(a) for every context vertex a."""
    stage = stage or m.name or "map"
    if b.names != c.names:
        raise ContextError(f"contexts differ: {b.names} vs {c.names}")
    for a1, a2 in itertools.combinations(b.names, 2):
        if b.point(a1) == b.point(a2) and c.point(a1) != c.point(a2):
            return Verdict.failed(
                stage, "context",
                f"{a1} and {a2} share a point in {b.name or 'the source'} but not in {c.name or 'the target'}, so no map preserves the context",
                {"a": a1, "b": a2},
            )
    for a in b.names:
        try:
            image = m(b.point(a))
        except DomainError as exc:
            return Verdict.failed(stage, "context", str(exc), {"context": a})
        if image != c.point(a):
            return Verdict.failed(
                stage, "context", f"{a} is not sent to its marked point",
                {"context": a, "image": image, "expected": c.point(a)},
            )
    return Verdict.passed(stage, f"fixes {len(b.names)} context points")


# ───── homotopies ─────


@dataclass(frozen=True, eq=False)
class Homotopy:
    """H: B × dI → C with H(·,0) = source and H(·,1) = target.

    Without `product` it is the linear interpolation of its endpoints.
    """

    source: PLMap
    target: PLMap
    product: PLMap | None = None
    name: str = ""

    @property
    def domain(self) -> Space:
        return self.source.domain

    @property
    def codomain(self) -> Space:
        return self.source.codomain

    def __call__(self, p: Sequence[Any], t: Any) -> Point:
        t = parse_rat(t)
        if not ZERO <= t <= ONE:
            raise DomainError(f"homotopy parameter {format_rat(t)} is outside [0,1]")
        p = tuple(parse_rat(c) for c in p)
        if self.product is not None:
            return self.product(p + (t,))
        return tuple((1 - t) * a + t * b for a, b in zip(self.source(p), self.target(p)))

    def with_spaces(self, domain: Space | None = None, codomain: Space | None = None) -> "Homotopy":
        if self.product is not None:
            prod = self.product.with_spaces(ProductSpace(domain) if domain else None, codomain)
            return general_homotopy(prod, self.name)
        return Homotopy(self.source.with_spaces(domain, codomain), self.target.with_spaces(domain, codomain), None, self.name)


def linear_interpolation(f: PLMap, g: PLMap, name: str = "") -> Homotopy:
    """H(b,t) = (1-t)·f(b) + t·g(b)."""
    if f.domain.dimension != g.domain.dimension or f.codomain.dimension != g.codomain.dimension:
        raise DimensionError(f"cannot interpolate between {f.name} and {g.name}")
    return Homotopy(f, g, None, name or f"{f.name}~{g.name}")


def section(h: PLMap, t: Any) -> PLMap:
    """b ↦ h(b, t) as a map on the base space."""
    if not isinstance(h.domain, ProductSpace):
        raise SpecError(f"{h.name or 'map'} is not defined on a product with dI")
    t = parse_rat(t)
    embed = _identity_stage(h.domain.base.dimension) + (Const(t),)
    return PLMap(h.domain.base, h.codomain, (embed,) + h.stages, (h.domain,) + h.stage_domains, f"{h.name}(·,{format_rat(t)})")


def general_homotopy(product: PLMap, name: str = "") -> Homotopy:
    return Homotopy(section(product, 0), section(product, 1), product, name or product.name)


METHODS = ("auto", "lemma", "general")
CONTAINMENT_DEPTH = 6


def _hull_inside(codomain: Space, cell: ConvexCell, ef: Env, eg: Env, depth: int) -> str | None:
    points = [apply_env(e, v) for v in cell.points for e in (ef, eg)]
    bad = codomain.hull_witness(points)
    if bad is None or depth == 0:
        return bad
    parts = bisect(cell)
    if len(parts) == 1:
        return bad
    return next((w for part in parts if (w := _hull_inside(codomain, part, ef, eg, depth - 1))), None)


def _falsify_containment(codomain: Space, cell: ConvexCell, ef: Env, eg: Env) -> Point | None:
    for v in cell.samples:
        a, b = apply_env(ef, v), apply_env(eg, v)
        for k in range(9):
            t = Fraction(k, 8)
            p = tuple((1 - t) * x + t * y for x, y in zip(a, b))
            if not codomain.contains(p):
                return p
    return None


def _interpolation_endpoints(h: Homotopy, stage: str) -> Verdict | None:
    for t, m in ((0, h.source), (1, h.target)):
        v = check_dimap(m, f"{stage}: H(·,{t})")
        if not v.ok:
            return v
    return None


def _interpolation_containment(h: Homotopy, pieces: Sequence[tuple[ConvexCell, Env, Env]], stage: str) -> Verdict | None:
    for cell, ef, eg in pieces:
        bad = _hull_inside(h.codomain, cell, ef, eg, CONTAINMENT_DEPTH)
        if bad is None:
            continue
        point = _falsify_containment(h.codomain, cell, ef, eg)
        if point is not None:
            return Verdict.failed(stage, "containment", f"the interpolation passes through {format_point(point)}", {"point": point, "cell": cell.describe()})
        return Verdict.failed(stage, "containment", f"the interpolation could not be certified inside {h.codomain.name or 'the codomain'}: {bad}", {"cell": cell.describe()})
    return None


def _check_by_order(h: Homotopy, stage: str) -> Verdict:
    """Both ends are dimaps, H(·,0) ≤ H(·,1) and every segment stays in C."""
    bad = _interpolation_endpoints(h, stage)
    if bad:
        return bad
    pieces = list(common_pieces(h.source, h.target))
    for cell, ef, eg in pieces:
        for v in cell.points:
            a, b = apply_env(ef, v), apply_env(eg, v)
            if not leq(a, b):
                return Verdict.failed(
                    stage, "order", f"H(·,0) ≤ H(·,1) fails at {format_point(v)}",
                    {"point": v, "source": a, "target": b},
                )
    return _interpolation_containment(h, pieces, stage) or Verdict.passed(stage, f"linear interpolation over {len(pieces)} pieces")


def _prism(cell: ConvexCell) -> ConvexCell:
    return ConvexCell.from_points([v + (t,) for v in cell.points for t in (ZERO, ONE)])


def _prism_slopes(cell: ConvexCell, ef: Env, eg: Env) -> Iterator[tuple[ConvexCell, np.ndarray, Point, np.ndarray]]:
    # along (r, s) the slope of (1-t)·f + t·g is affine on the prism, so corners decide
    prism = _prism(cell)
    jf, jg = linear_part(ef), linear_part(eg)
    for ray in order_cone_rays(prism):
        r, s = ray[:-1], ray[-1]
        for corner in prism.points:
            x, t = corner[:-1], corner[-1]
            gap = np.array(apply_env(eg, x), dtype=object) - np.array(apply_env(ef, x), dtype=object)
            yield prism, ray, corner, (1 - t) * jf.dot(r) + t * jg.dot(r) + s * gap


def _check_on_product(h: Homotopy, stage: str) -> Verdict:
    """H as a map on B × dI: monotone for the product order and inside C.

    Continuity on the product follows from continuity of both ends.
    """
    bad = _interpolation_endpoints(h, stage)
    if bad:
        return bad
    pieces = list(common_pieces(h.source, h.target))
    for cell, ef, eg in pieces:
        for prism, ray, corner, slope in _prism_slopes(cell, ef, eg):
            if all(x >= 0 for x in slope):
                continue
            premise = "monotonicity-in-t" if not any(ray[:-1]) else "monotonicity"
            return Verdict.failed(
                stage, premise, f"H decreases along {format_point(tuple(ray))} at {format_point(corner)}",
                {"cell": prism.describe(), "direction": list(ray), "point": corner, "image": list(slope)},
            )
    return _interpolation_containment(h, pieces, stage) or Verdict.passed(stage, f"interpolation on the product over {len(pieces)} pieces")


def _check_rel(h: Homotopy, rel: Mapping[str, tuple[Point, Point]], stage: str) -> Verdict:
    for a, (p, q) in sorted(rel.items()):
        if h.product is None:
            for t, m in ((0, h.source), (1, h.target)):
                image = m(p)
                if image != q:
                    return Verdict.failed(stage, "rel", f"context point {a} moves", {"context": a, "t": t, "image": image, "expected": q})
            continue
        track = PLMap(
            named_space("dI").space,
            h.codomain,
            (tuple(Const(c) for c in p) + (Var(0),),) + h.product.stages,
            (h.product.domain,) + h.product.stage_domains,
            f"{h.name} at {a}",
        )
        for cell, env in track.pieces:
            for v in cell.points:
                image = apply_env(env, v)
                if image != q:
                    return Verdict.failed(stage, "rel", f"context point {a} moves", {"context": a, "t": v[0], "image": image, "expected": q})
    return Verdict.passed(stage)


def check_dihomotopy(
    h: Homotopy,
    f: PLMap | None = None,
    g: PLMap | None = None,
    rel: Mapping[str, tuple[Point, Point]] | None = None,
    method: str = "auto",
    stage: str = "",
) -> Verdict:
    """Check that `h` is a dihomotopy from f to g, optionally rel a context.

    `rel` maps each context vertex to (point in the domain, point it must
    stay at). Interpolations use the exact interpolation criterion; other
    homotopies are checked as dimaps on the product.
    """
    if method not in METHODS:
        raise SpecError(f"unknown method {method!r}; expected one of {METHODS}")
    stage = stage or h.name or "homotopy"
    for t, expected, actual in ((0, f, h.source), (1, g, h.target)):
        if expected is None:
            continue
        try:
            diff = first_difference(expected, actual)
        except DomainError as exc:
            return Verdict.failed(stage, "domain", str(exc))
        if diff is not None:
            point, want, got = diff
            return Verdict.failed(
                stage, "endpoint", f"H(·,{t}) differs from {expected.name or 'the given map'} at {format_point(point)}",
                {"point": point, "expected": want, "actual": got},
            )
    if h.product is None:
        verdict = _check_by_order(h, stage) if method == "lemma" else _check_on_product(h, stage)
    elif method == "lemma":
        raise SpecError("the interpolation criterion applies to linear interpolations only")
    else:
        verdict = check_dimap(h.product, stage)
    if not verdict.ok:
        return verdict
    if rel:
        checked = _check_rel(h, rel, stage)
        if not checked.ok:
            return checked
    return Verdict.passed(stage, verdict.detail)


# ───── certificates ─────


@dataclass(frozen=True, eq=False)
class ZigzagStep:
    """One link of a chain; forward means H(·,0) is the previous map."""

    homotopy: Homotopy
    forward: bool = True


@dataclass(frozen=True, eq=False)
class Certificate:
    b: ContextedSpace
    c: ContextedSpace
    f: PLMap
    g: PLMap
    zigzag_b: tuple[ZigzagStep, ...] = ()
    zigzag_c: tuple[ZigzagStep, ...] = ()
    name: str = ""


def _check_chain(stage: str, space: ContextedSpace, steps: Sequence[ZigzagStep], end: PLMap) -> Verdict:
    x = space.space
    rel = {a: (space.point(a), space.point(a)) for a in space.names}
    current = identity_map(x)
    end = end.with_spaces(x, x)
    for i, step in enumerate(steps, 1):
        label = f"{stage} step {i}"
        h = step.homotopy.with_spaces(x, x)
        start, finish = (h.source, h.target) if step.forward else (h.target, h.source)
        try:
            diff = first_difference(current, start)
        except DomainError as exc:
            return Verdict.failed(label, "domain", str(exc))
        if diff is not None:
            point, want, got = diff
            side = "H(·,0)" if step.forward else "H(·,1)"
            return Verdict.failed(
                label, "chain-endpoint", f"{side} of {h.name} is not the previous map at {format_point(point)}",
                {"point": point, "expected": want, "actual": got},
            )
        verdict = check_dihomotopy(h, rel=rel, stage=label)
        if not verdict.ok:
            return verdict
        current = finish
    try:
        diff = first_difference(current, end)
    except DomainError as exc:
        return Verdict.failed(stage, "domain", str(exc))
    if diff is not None:
        point, want, got = diff
        return Verdict.failed(
            stage, "chain-end", f"the chain ends at a map that differs from {end.name} at {format_point(point)}",
            {"point": point, "chainEnd": want, "expected": got},
        )
    return Verdict.passed(stage, f"{len(steps)} dihomotopies from the identity to {end.name}")


def verify_equivalence_certificate(cert: Certificate) -> Verdict:
    """Replay a certificate that B and C are dihomotopy equivalent rel their context."""
    if cert.b.names != cert.c.names:
        raise ContextError(f"contexts differ: {cert.b.names} vs {cert.c.names}")
    b, c = cert.b.space, cert.c.space
    f = cert.f.with_spaces(b, c)
    g = cert.g.with_spaces(c, b)
    checks: list[Verdict] = []
    stages: list[Callable[[], Verdict]] = [
        lambda: check_dimap(f, "f"),
        lambda: check_dimap(g, "g"),
        lambda: check_context_preserving(f, cert.b, cert.c, "f context"),
        lambda: check_context_preserving(g, cert.c, cert.b, "g context"),
        lambda: _check_chain("zigzag B", cert.b, cert.zigzag_b, compose(g, f, "g∘f")),
        lambda: _check_chain("zigzag C", cert.c, cert.zigzag_c, compose(f, g, "f∘g")),
    ]
    for run in stages:
        verdict = run()
        checks.append(verdict)
        log.info("%s: %s", verdict.stage, verdict.status.value)
        if not verdict.ok:
            return replace(verdict, checks=tuple(checks))
    return Verdict.passed(cert.name or "certificate", "B and C are dihomotopy equivalent rel the context", tuple(checks))


# ───── discretization ─────


def _box_path(target: DiComplex, a: str, b: str) -> list[str] | None:
    lo, hi = target.vertex(a).coords, target.vertex(b).coords
    if not leq(lo, hi):
        return None
    seen: set[str] = set()

    def walk(v: str) -> list[str] | None:
        if v == b:
            return []
        seen.add(v)
        for e in target.out_edges(v):
            p = target.vertex(e.dst).coords
            if not e.directed or e.dst in seen or not (leq(lo, p) and leq(p, hi)):
                continue
            rest = walk(e.dst)
            if rest is not None:
                return [e.id] + rest
        return None

    return walk(a)


def _straight_path(target: DiComplex, a: str, b: str) -> list[str] | None:
    pa, pb = target.vertex(a).coords, target.vertex(b).coords
    path, at, t_at = [], a, ZERO
    while at != b:
        step = None
        for e in target.out_edges(at):
            if not e.directed:
                continue
            t = segment_parameter(pa, pb, target.vertex(e.dst).coords)
            if t is not None and t_at < t <= ONE:
                step, t_at = e, t
                break
        if step is None:
            return None
        path.append(step.id)
        at = step.dst
    return path


def _route_edge(m: PLMap, target: DiComplex, edge: Edge, p: Point, q: Point, u: str, w: str) -> tuple[str, ...]:
    if not edge.directed:
        if u == w:
            return ()
        for e in target.edges:
            if {e.src, e.dst} == {u, w}:
                return (e.id,)
        raise DiscretizationError(f"undirected edge {edge.id} has no image edge between {u} and {w}")
    breaks: set[Point] = set()
    for cell, _ in map_pieces(m.stages, ConvexCell.from_points([p, q])):
        breaks.update(cell.points)
    ordered = sorted(breaks, key=lambda v: segment_parameter(p, q, v))
    stops = [u]
    for v in ordered:
        vid = target.vertex_at(apply_stages(m.stages, v))
        if vid is not None and vid != stops[-1]:
            stops.append(vid)
    if stops[-1] != w:
        stops.append(w)
    route: list[str] = []
    for a, b in zip(stops, stops[1:]):
        leg = _straight_path(target, a, b) or _box_path(target, a, b)
        if leg is None:
            raise DiscretizationError(f"no dipath from {a} to {b} for the image of edge {edge.id}")
        route.extend(leg)
    return tuple(route)


def discretize(m: PLMap, source: DiComplex | None = None, target: DiComplex | None = None) -> CombMap:
    """The combinatorial map a PL map induces between grid complexes.

    Grid vertices must land on target vertices; each edge is routed
    along the images of its affine pieces.
    """
    source = source if source is not None else m.domain.complex
    target = target if target is not None else m.codomain.complex
    if not source.embedded or not target.embedded:
        raise DiscretizationError("discretization needs embedded complexes")
    vertex_map = {}
    for v in source.vertices:
        try:
            image = m(v.coords)
        except DomainError as exc:
            raise DiscretizationError(f"vertex {v.id}: {exc}") from exc
        vid = target.vertex_at(image)
        if vid is None:
            raise DiscretizationError(
                f"{m.name or 'map'} sends vertex {v.id} to {format_point(image)}, which is not a vertex of {target.name or 'the target'}"
            )
        vertex_map[v.id] = vid
    routes = {
        e.id: _route_edge(m, target, e, source.vertex(e.src).coords, source.vertex(e.dst).coords, vertex_map[e.src], vertex_map[e.dst])
        for e in source.edges
    }
    cm = CombMap(source, target, vertex_map, routes, m.name)
    cm.validate()
    return cm


# ───── presets ─────

X, Y = Var(0), Var(1)
F = Fraction


def _when(*parts: tuple[Expr, str, Any]) -> tuple[Constraint, ...]:
    return tuple(Constraint(e, op, parse_rat(b)) for e, op, b in parts)


def _expr(value: Any) -> Expr:
    return value if isinstance(value, Expr) else Const(parse_rat(value))


def _cases(rows: Sequence[tuple[tuple[Constraint, ...], Sequence[Any]]]) -> Stage:
    """Coordinatewise piecewise stage from (guard, values) rows; first match wins."""
    width = len(rows[0][1])
    return tuple(Piecewise(tuple(Case(guard, _expr(values[i])) for guard, values in rows)) for i in range(width))


def _breakpoints(var: Expr, knots: Sequence[tuple[Any, Any]]) -> Expr:
    """Interpolate through (x, value) knots, constant outside them."""
    knots = [(parse_rat(a), parse_rat(b)) for a, b in knots]
    cases = []
    for (x0, y0), (x1, y1) in zip(knots, knots[1:]):
        slope = (y1 - y0) / (x1 - x0)
        cases.append(Case(_when((var, ">=", x0), (var, "<=", x1)), slope * (var - x0) + y0))
    return Piecewise(tuple(cases))


def _space(name: str) -> Space:
    return named_space(name).space


def _F1() -> Expr:
    return Piecewise((
        Case(_when((X, "<", F(1, 3))), X),
        Case(_when((X, ">=", F(1, 3)), (X, "<=", F(2, 3))), 2 * X - F(1, 3)),
        Case(_when((X, ">", F(2, 3))), Const(ONE)),
    ))


def _F2() -> Expr:
    return Piecewise((
        Case(_when((X, "<", F(1, 3))), Const(ZERO)),
        Case(_when((X, ">=", F(1, 3))), F(3, 2) * X - F(1, 2)),
    ))


def _product(stage: Stage) -> Stage:
    """Apply a one-variable stage to x and y independently."""
    (e,) = stage
    return (e, _substitute(e, Y))


def _substitute(e: Expr, var: Var) -> Expr:
    match e:
        case Var():
            return var
        case Const():
            return e
        case Max(args=args):
            return Max(tuple(_substitute(a, var) for a in args))
        case Min(args=args):
            return Min(tuple(_substitute(a, var) for a in args))
        case Piecewise(cases=cases):
            return Piecewise(tuple(
                Case(tuple(Constraint(_substitute(c.expr, var), c.op, c.bound) for c in case.guard), _substitute(case.value, var))
                for case in cases
            ))
        case Affine(terms=terms, const=const):
            return Affine.combine([(k, _substitute(t, var)) for k, t in terms], const)
    raise TypeError(f"unsupported expression node {type(e).__name__}")


def _swiss_f1() -> Stage:
    fifth = F(1, 5)
    return _cases([
        (_when((X, "<=", fifth), (Y, "<=", fifth)), (Max((X, Y)), Max((X, Y)))),
        (_when((X, "<=", fifth), (Y, ">", fifth)), (fifth, Y)),
        (_when((Y, "<=", fifth), (X, ">", fifth)), (X, fifth)),
        ((), (X, Y)),
    ])


def _swiss_f2() -> Stage:
    four = F(4, 5)
    return _cases([
        (_when((X, ">=", four), (Y, ">=", four)), (Min((X, Y)), Min((X, Y)))),
        (_when((X, ">=", four), (Y, "<", four)), (four, Y)),
        (_when((Y, ">=", four), (X, "<", four)), (X, four)),
        ((), (X, Y)),
    ])


def _swiss_f3() -> Stage:
    a, b, c, d = F(1, 5), F(2, 5), F(3, 5), F(4, 5)
    return _cases([
        (_when((X, ">=", a), (X, "<=", b), (Y, ">=", c), (Y, "<=", d)), (Max((X, Y - b)), Max((X + b, Y)))),
        (_when((Y, ">=", a), (Y, "<=", b), (X, ">=", c), (X, "<=", d)), (Max((X, Y + b)), Max((X - b, Y)))),
        (_when((X, ">=", c), (X, "<=", d), (Y, ">=", c), (Y, "<=", d)), (Max((X, Y)), Max((X, Y)))),
        (_when((X, ">=", b), (X, "<=", c), (Y, "==", d)), (b + 2 * (X - b), Y)),
        (_when((Y, ">=", b), (Y, "<=", c), (X, "==", d)), (X, b + 2 * (Y - b))),
        ((), (X, Y)),
    ])


def _swiss_f4() -> Stage:
    a, b, c = F(1, 5), F(2, 5), F(3, 5)
    return _cases([
        (_when((X, ">=", a), (X, "<=", b), (Y, ">=", a), (Y, "<=", b)), (Min((X, Y)), Min((X, Y)))),
        (_when((X, ">=", b), (X, "<=", c), (Y, "==", a)), (c - 2 * (c - X), Y)),
        (_when((Y, ">=", b), (Y, "<=", c), (X, "==", a)), (X, c - 2 * (c - Y))),
        ((), (X, Y)),
    ])


def swiss_stage_domains() -> dict[str, Space]:
    """Where each Swiss-flag step is applied: the image of the steps before it."""
    fifths = tuple(F(i, 5) for i in range(6))
    flag = _space("swiss-flag")
    inner = RegionSpace.from_preset(region_preset("swiss-inner"))
    ends = ComplexSpace(
        embedded_complex("swiss-diagonal-ends", [], [[(0, 0), ("1/5", "1/5")], [("4/5", "4/5"), (1, 1)]]),
        "swiss-diagonal-ends",
    )
    corner = RegionSpace(RectRegion(Box.closed(("1/5", "1/5"), ("2/5", "2/5"))), (fifths[1:3],) * 2, "swiss-corner")
    return {
        "flag": flag,
        "skeleton": _space("swiss-skeleton"),
        "f3": UnionSpace((inner, ends), "swiss-f3-domain"),
        "f4": UnionSpace((corner, _space("swiss-skeleton")), "swiss-f4-domain"),
    }


def _swiss(step: str) -> PLMap:
    s = swiss_stage_domains()
    maps = {
        "f1": PLMap(s["flag"], s["flag"], (_swiss_f1(),), name="swiss-f1"),
        "f2": PLMap(s["flag"], s["flag"], (_swiss_f2(),), name="swiss-f2"),
        "f3": PLMap(s["f3"], s["flag"], (_swiss_f3(),), name="swiss-f3"),
        "f4": PLMap(s["f4"], s["skeleton"], (_swiss_f4(),), name="swiss-f4"),
    }
    if step in maps:
        return maps[step]
    f = maps["f1"]
    for k in ("f2", "f3", "f4"):
        f = compose(maps[k], f)
    return f.with_spaces(name="swiss-f")


def _collapse(n: Any, a: Any, b: Any) -> PLMap:
    """Collapse [a,b] × I of the n-grid so the anti-diagonal points at a and b meet."""
    n, a, b = int(n), parse_rat(a), parse_rat(b)
    step = F(1, n)
    if not (a * n).denominator == (b * n).denominator == 1 or not step <= a < b <= 1 - step:
        raise SpecError(f"collapse needs grid points 1/{n} <= a < b <= 1 - 1/{n}")
    a0, c0 = a - step, 1 - b - step
    cx = _breakpoints(X, [(0, 0), (a0, a0), (a, b), (b, b), (1, 1)] if a0 > 0 else [(0, 0), (a, b), (b, b), (1, 1)])
    cy = _breakpoints(Y, [(0, 0), (c0, c0), (1 - b, 1 - a), (1 - a, 1 - a), (1, 1)] if c0 > 0 else [(0, 0), (1 - b, 1 - a), (1 - a, 1 - a), (1, 1)])
    grid = named_space("dIIgrid", n).space
    return PLMap(grid, grid, ((cx, cy),), name=f"collapse({n},{format_rat(a)},{format_rat(b)})")


STAIRCASE_F_X = [(0, 0), ("1/5", 0), ("2/5", "1/2"), ("1/2", "1/2"), (1, 1)]
STAIRCASE_G_X = [(0, 0), ("1/2", "1/2"), ("3/5", "1/2"), ("4/5", 1), (1, 1)]
STAIRCASE_Y = [(0, 0), ("2/5", 0), ("3/5", 1), (1, 1)]


def _staircase(which: str) -> PLMap:
    knots, src, dst = {
        "f": (STAIRCASE_F_X, "staircase-left", "staircase-left-wide"),
        "g": (STAIRCASE_G_X, "staircase-right", "staircase-right-wide"),
    }[which]
    stage = (_breakpoints(X, knots), _breakpoints(Y, STAIRCASE_Y))
    return PLMap(_space(src), _space(dst), (stage,), name=f"staircase-{which}")


def _id(space: str = "dI") -> PLMap:
    return identity_map(_space(space)).with_spaces(name=f"id({space})")


def _const(space: str = "dI", *value: str) -> PLMap:
    s = _space(space)
    if len(value) != s.dimension:
        raise SpecError(f"const on {space} needs {s.dimension} coordinates")
    return constant_map(s, s, value)


def _interval(stage: Stage, src: str, dst: str, name: str) -> PLMap:
    return PLMap(_space(src), _space(dst), (stage,), name=name)


HALF = F(1, 2)

PRESETS: dict[str, Callable[..., PLMap]] = {
    "id": _id,
    "const": _const,
    "dI-to-point": lambda: PLMap(_space("dI"), point_space(), ((Const(ZERO),),), name="dI-to-point"),
    "point-to-dI-top": lambda: PLMap(point_space(), _space("dI"), ((Const(ONE),),), name="point-to-dI-top"),
    "point-to-dI-bottom": lambda: PLMap(point_space(), _space("dI"), ((Const(ZERO),),), name="point-to-dI-bottom"),
    "dX-h": lambda: _interval((Max((X, Const(HALF))), Max((Y, Const(HALF)))), "dX", "dX", "dX-h"),
    "dX-mid": lambda: _interval((Const(HALF), Const(HALF)), "dX", "dX", "dX-mid"),
    "dX-to-point": lambda: PLMap(_space("dX"), point_space(), ((Const(ZERO),),), name="dX-to-point"),
    "point-to-dX-mid": lambda: PLMap(point_space(), _space("dX"), ((Const(HALF), Const(HALF)),), name="point-to-dX-mid"),
    "max": lambda: _interval((Max((X, Y)),), "dII", "dI", "max"),
    "diagonal": lambda: _interval((X, X), "dI", "dII", "diagonal"),
    "F1": lambda: _interval((_F1(),), "dI", "dI", "F1"),
    "F2": lambda: _interval((_F2(),), "dI", "dI", "F2"),
    "F1xF1": lambda: _interval(_product((_F1(),)), "square-removed", "square-removed", "F1xF1"),
    "F2F1xF2F1": lambda: PLMap(
        _space("square-removed"), _space("boundary"), (_product((_F1(),)), _product((_F2(),))), name="F2F1xF2F1"
    ),
    "square-inclusion": lambda: inclusion_map(_space("boundary"), _space("square-removed")).with_spaces(name="square-inclusion"),
    "swiss-f1": lambda: _swiss("f1"),
    "swiss-f2": lambda: _swiss("f2"),
    "swiss-f3": lambda: _swiss("f3"),
    "swiss-f4": lambda: _swiss("f4"),
    "swiss-f": lambda: _swiss("f"),
    "swiss-inclusion": lambda: inclusion_map(_space("swiss-skeleton"), _space("swiss-flag")).with_spaces(name="swiss-inclusion"),
    "collapse": _collapse,
    "staircase-f": lambda: _staircase("f"),
    "staircase-g": lambda: _staircase("g"),
}

_CALL = re.compile(r"^\s*([\w-]+)\s*(?:\((.*)\))?\s*$")


def preset_map(name: str) -> PLMap:
    """A named map; parameters go in parentheses, e.g. `collapse(4,1/4,1/2)`."""
    match = _CALL.match(name)
    if not match or match.group(1) not in PRESETS:
        raise UnknownNameError(f"unknown map preset {name!r}; expected one of {', '.join(sorted(PRESETS))}")
    args = [a.strip() for a in match.group(2).split(",")] if match.group(2) else []
    try:
        return PRESETS[match.group(1)](*args)
    except TypeError as exc:
        raise SpecError(f"bad arguments for preset {match.group(1)!r}: {exc}") from exc
