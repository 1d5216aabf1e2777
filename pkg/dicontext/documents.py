"""Input documents: spaces, maps, homotopies, certificates, glue and pushout specs.

Every reference to another document is either a name (a standard space, a
region preset or a map preset) or a path; paths resolve against the
directory of the document that mentions them. The shipped examples live in
`DATA_DIR`.

Usage
-----
>>> from dicontext.documents import DATA_DIR, load_certificate
>>> cert = load_certificate(DATA_DIR / "dii-di-corners.cert.json")
>>> cert.f.name
'max'
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Mapping

from .complex import (
    ContextedComplex,
    DiComplex,
    Edge,
    Vertex,
    build_grid_complex,
    complex_from_json,
    embedded_complex,
    mark_context,
    region_preset,
    standard_space,
    swiss_skeleton,
)
from .errors import MarkingError, SpecError, UnknownNameError, UnsupportedGeometryError
from .fundcat import CombMap
from .glue import GlueResult, GlueSpec, PushoutResult, hom_diff, pushout_along_map, pushout_identify, seam, z_space
from .order_core import Box, Point, RectRegion, expr_from_json, make_point, parse_rat
from .plmaps import (
    Certificate,
    Homotopy,
    PLMap,
    ZigzagStep,
    compose,
    discretize,
    general_homotopy,
    linear_interpolation,
    preset_map,
)
from .spaces import ComplexSpace, ContextedSpace, ProductSpace, RegionSpace, Space, named_space

log = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent / "data"

_GRID_NAME = re.compile(r"^dIIgrid\((\d+)\)$")
_PRESET_CALL = re.compile(r"^[\w'-]+\(.*\)$")


def read_json(path: Path) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise SpecError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def _is_path(ref: str) -> bool:
    # preset calls carry rationals such as 1/4
    if _PRESET_CALL.match(ref):
        return False
    return ref.endswith(".json") or "/" in ref


def _deref(ref: Any, base: Path) -> tuple[Any, Path]:
    """Inline documents stay put; path strings are read relative to `base`."""
    if isinstance(ref, Path) or (isinstance(ref, str) and _is_path(ref)):
        path = Path(ref) if Path(ref).is_absolute() else base / ref
        return read_json(path), path.parent
    return ref, base


def _require(doc: Mapping[str, Any], key: str, what: str) -> Any:
    if key not in doc:
        raise SpecError(f"{what} document is missing {key!r}")
    return doc[key]


# ───── spaces ─────


@dataclass(frozen=True, eq=False)
class SpaceDoc:
    """A loaded space: its complex, its geometry when it has one, and its context."""

    complex: DiComplex
    geometry: Space | None = None
    marking: Mapping[str, str] = field(default_factory=dict)
    context_edges: tuple[tuple[str, str], ...] = ()
    name: str = ""

    @property
    def points(self) -> dict[str, Point]:
        out = {}
        for a, vid in self.marking.items():
            coords = self.complex.vertex(vid).coords
            if coords is None:
                raise MarkingError(f"context vertex {a!r} sits at {vid!r}, which has no coordinates")
            out[a] = coords
        return out

    @cached_property
    def contexted(self) -> ContextedComplex:
        names = sorted(self.marking)
        edges = tuple(Edge(f"{a}->{b}", a, b) for a, b in self.context_edges)
        context = DiComplex(tuple(Vertex(a) for a in names), edges, (), "context")
        return mark_context(self.complex, context, self.marking)

    @cached_property
    def contexted_space(self) -> ContextedSpace:
        if self.geometry is None:
            raise SpecError(f"{self.name or 'space'} has no geometric model")
        return ContextedSpace(self.geometry, self.points)


def _named(name: str, marks: str | None = None) -> tuple[DiComplex, Space | None, dict[str, Point]]:
    k = None
    if (m := _GRID_NAME.match(name)) is not None:
        name, k = "dIIgrid", int(m.group(1))
    try:
        geometry = named_space(name, k, marks)
    except UnknownNameError:
        return standard_space(name, k), None, {}
    if name == "swiss-skeleton":
        c = swiss_skeleton()
    elif isinstance(geometry.space, RegionSpace) and name not in ("dI", "dII", "dIIgrid", "point"):
        c = region_preset(name, marks).build()
    else:
        c = standard_space(name, k)
    return c, geometry.space, dict(geometry.marking)


def _box(doc: Mapping[str, Any], closed: bool) -> Box:
    lo, hi = _require(doc, "lo", "box"), _require(doc, "hi", "box")
    return Box.closed(lo, hi) if closed else Box.open(lo, hi)


def region_from_json(doc: Mapping[str, Any]) -> RectRegion:
    semantics = doc.get("semantics", "interior-of-union")
    if semantics not in ("interior-of-union", "per-box"):
        raise SpecError(f"unknown region semantics {semantics!r}")
    return RectRegion(
        _box(_require(doc, "outer", "region"), closed=True),
        tuple(_box(b, closed=False) for b in doc.get("forbidden", [])),
        semantics == "interior-of-union",
    )


def _resolve_marking(c: DiComplex, marking: Mapping[str, Any]) -> dict[str, str]:
    out = {}
    for a, value in marking.items():
        if isinstance(value, str):
            if not c.has_vertex(value):
                raise MarkingError(f"context vertex {a!r} is marked at unknown vertex {value!r}")
            out[a] = value
            continue
        p = make_point(*value)
        vid = c.vertex_at(p)
        if vid is None:
            raise MarkingError(f"marked point {a} is not a vertex of {c.name or 'the space'}")
        out[a] = vid
    return out


def load_space(ref: Any, base: Path = Path(".")) -> SpaceDoc:
    """Load a space from a name, a path or an inline document."""
    doc, base = _deref(ref, base)
    if isinstance(doc, str):
        c, geometry, points = _named(doc)
        return SpaceDoc(c, geometry, _resolve_marking(c, points), (), doc)
    if not isinstance(doc, dict):
        raise SpecError(f"space document must be a name or an object, got {doc!r}")
    try:
        name = doc.get("name", "")
        if "space" in doc:
            c, geometry, points = _named(doc["space"], doc.get("marks"))
            name = name or doc["space"]
        elif "region" in doc:
            region = region_from_json(doc["region"])
            lines = [[parse_rat(x) for x in axis] for axis in _require(doc, "grid", "region")]
            raw = doc.get("marking", {})
            required = [make_point(*p) for p in raw.values() if not isinstance(p, str)]
            c = build_grid_complex(region, lines, bool(doc.get("triangulate", False)), required, name=name)
            geometry = RegionSpace(region, tuple(tuple(a) for a in lines), name)
            points = {}
        elif "chains" in doc:
            c = embedded_complex(name, doc.get("points", []), doc["chains"])
            geometry, points = _complex_geometry(c, name), {}
        else:
            c = complex_from_json(doc, name)
            geometry, points = _complex_geometry(c, name), {}
        marking = _resolve_marking(c, doc.get("marking", points))
        edges = tuple((str(a), str(b)) for a, b in doc.get("contextEdges", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed space document: {exc}") from exc
    return SpaceDoc(c, geometry, marking, edges, name or c.name)


def _complex_geometry(c: DiComplex, name: str) -> Space | None:
    if not c.embedded:
        return None
    try:
        return ComplexSpace(c, name or c.name)
    except UnsupportedGeometryError as exc:
        log.debug("%s: no geometric model (%s)", name or "complex", exc)
        return None


# ───── maps and homotopies ─────


def _geometry(ref: Any, base: Path) -> Space:
    space = load_space(ref, base)
    if space.geometry is None:
        raise SpecError(f"{space.name or 'space'} has no geometric model for a PL map")
    return space.geometry


def _stages(doc: Mapping[str, Any]) -> tuple[tuple, ...]:
    if "coords" in doc:
        raw = [doc["coords"]]
    else:
        raw = _require(doc, "stages", "map")
    return tuple(tuple(expr_from_json(e) for e in stage) for stage in raw)


def load_map(ref: Any, base: Path = Path(".")) -> PLMap:
    """A map from a preset name, a path, `{"compose": [outer, ..., inner]}` or an inline document."""
    doc, base = _deref(ref, base)
    if isinstance(doc, str):
        return preset_map(doc)
    if not isinstance(doc, dict):
        raise SpecError(f"map document must be a name or an object, got {doc!r}")
    if "preset" in doc:
        m = preset_map(doc["preset"])
        return m.with_spaces(name=doc["name"]) if "name" in doc else m
    if "compose" in doc:
        maps = [load_map(r, base) for r in doc["compose"]]
        if not maps:
            raise SpecError("compose needs at least one map")
        out = maps[-1]
        for outer in reversed(maps[:-1]):
            out = compose(outer, out)
        return out.with_spaces(name=doc["name"]) if "name" in doc else out
    domain = _geometry(_require(doc, "domain", "map"), base)
    codomain = _geometry(_require(doc, "codomain", "map"), base)
    stage_domains = tuple(None if s is None else _geometry(s, base) for s in doc.get("stageDomains", []))
    return PLMap(domain, codomain, _stages(doc), stage_domains, doc.get("name", ""))


def load_homotopy(ref: Any, base: Path = Path(".")) -> Homotopy:
    """`{"interpolate": [f, g]}` or a general homotopy `{"domain": B, "codomain": C, "coords": [...]}`."""
    doc, base = _deref(ref, base)
    if not isinstance(doc, dict):
        raise SpecError(f"homotopy document must be an object, got {doc!r}")
    name = doc.get("name", "")
    if "interpolate" in doc:
        pair = doc["interpolate"]
        if not isinstance(pair, list) or len(pair) != 2:
            raise SpecError("interpolate takes exactly two maps")
        return linear_interpolation(load_map(pair[0], base), load_map(pair[1], base), name)
    domain = ProductSpace(_geometry(_require(doc, "domain", "homotopy"), base))
    codomain = _geometry(_require(doc, "codomain", "homotopy"), base)
    stage_domains = tuple(None if s is None else _geometry(s, base) for s in doc.get("stageDomains", []))
    return general_homotopy(PLMap(domain, codomain, _stages(doc), stage_domains, name), name)


@dataclass(frozen=True, eq=False)
class HomotopyDoc:
    homotopy: Homotopy
    source: PLMap | None
    target: PLMap | None
    rel: Mapping[str, tuple[Point, Point]]
    method: str


def load_homotopy_doc(ref: Any, base: Path = Path(".")) -> HomotopyDoc:
    """A homotopy with the endpoints it should have and the context it must fix."""
    doc, base = _deref(ref, base)
    h = load_homotopy(doc, base)
    source = load_map(doc["from"], base) if "from" in doc else None
    target = load_map(doc["to"], base) if "to" in doc else None
    rel = {}
    if "rel" in doc:
        b = load_space(doc["rel"]["B"], base)
        c = load_space(doc["rel"].get("C", doc["rel"]["B"]), base)
        if sorted(b.marking) != sorted(c.marking):
            raise SpecError("rel spaces carry different context vertices")
        rel = {a: (b.points[a], c.points[a]) for a in b.marking}
    return HomotopyDoc(h, source, target, rel, doc.get("method", "auto"))


# ───── certificates ─────


def _zigzag(raw: Any, base: Path) -> tuple[ZigzagStep, ...]:
    steps = []
    for i, step in enumerate(raw, 1):
        direction = step.get("direction", "fwd")
        if direction not in ("fwd", "bwd"):
            raise SpecError(f"zigzag step {i}: direction must be 'fwd' or 'bwd', got {direction!r}")
        steps.append(ZigzagStep(load_homotopy(_require(step, "homotopy", "zigzag step"), base), direction == "fwd"))
    return tuple(steps)


def load_certificate(ref: Any, base: Path = Path(".")) -> Certificate:
    """A certificate; `"zigzagC": "restrict"` reuses the B chain on C."""
    doc, base = _deref(ref, base)
    if not isinstance(doc, dict):
        raise SpecError("certificate must be an object")
    try:
        b = load_space(_require(doc, "B", "certificate"), base).contexted_space
        c = load_space(_require(doc, "C", "certificate"), base).contexted_space
        f = load_map(_require(doc, "f", "certificate"), base)
        g = load_map(_require(doc, "g", "certificate"), base)
        zigzag_b = _zigzag(doc.get("zigzagB", []), base)
        raw_c = doc.get("zigzagC", [])
        zigzag_c = zigzag_b if raw_c == "restrict" else _zigzag(raw_c, base)
    except (KeyError, TypeError, AttributeError) as exc:
        raise SpecError(f"malformed certificate: {exc}") from exc
    return Certificate(b, c, f, g, zigzag_b, zigzag_c, doc.get("name", ""))


# ───── gluing ─────


@dataclass(frozen=True, eq=False)
class GlueDoc:
    result: GlueResult
    parts: Mapping[str, DiComplex]
    name: str = ""


def _vertex_ref(raw: Any) -> tuple[str, str]:
    if isinstance(raw, dict):
        return str(raw["part"]), str(raw["vertex"])
    if isinstance(raw, list) and len(raw) == 2:
        return str(raw[0]), str(raw[1])
    raise SpecError(f"vertex reference must be {{part, vertex}}, got {raw!r}")


def load_glue(ref: Any, base: Path = Path(".")) -> GlueDoc:
    """Glue spec: parts, vertex identifications, seams and offsets, or a builder."""
    doc, base = _deref(ref, base)
    if not isinstance(doc, dict):
        raise SpecError("glue spec must be an object")
    name = doc.get("name", "")
    if "builder" in doc:
        if doc["builder"] != "z":
            raise UnknownNameError(f"unknown glue builder {doc['builder']!r}")
        result, x, y = z_space(int(doc.get("n", 4)))
        return GlueDoc(result, {"X": x, "Y": y}, name or "Z")
    try:
        raw_parts = _require(doc, "parts", "glue")
        parts = {str(k): load_space(v, base).complex for k, v in raw_parts.items()}
        identify = [tuple(_vertex_ref(x) for x in pair) for pair in doc.get("identify", [])]
        edges: list[tuple] = []
        for s in doc.get("seams", []):
            a, b = s["parts"]
            vertex_pairs, edge_pairs = seam(a, parts[a], b, parts[b], s["vertices"])
            identify.extend(vertex_pairs)
            edges.extend(edge_pairs)
        offsets = {k: make_point(*v) for k, v in doc.get("offsets", {}).items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed glue spec: {exc}") from exc
    for pair in identify:
        if len(pair) != 2:
            raise SpecError("each identification pairs exactly two vertices")
    spec = GlueSpec(parts, tuple(identify), tuple(edges), offsets, name)
    return GlueDoc(pushout_identify(spec), parts, name)


def glue_report(doc: Any, base: Path = Path(".")) -> tuple[GlueDoc, dict]:
    """Glue, then diff hom-sets of the watched pairs against the `compare` spec if given."""
    raw, base = _deref(doc, base)
    glued = load_glue(raw, base)
    report: dict[str, Any] = {"glue": glued.result.to_json()}
    watch = [tuple(pair) for pair in raw.get("watch", [])]
    if watch and "compare" in raw:
        other = load_glue(raw["compare"], base)
        names = {q for pair in watch for q in pair}
        vertex_map = {glued.result.vertex(q): other.result.vertex(q) for q in names}
        pairs = [(glued.result.vertex(x), glued.result.vertex(y)) for x, y in watch]
        report["compare"] = other.result.to_json()
        report["homDiff"] = hom_diff(glued.result.complex, other.result.complex, pairs, vertex_map, raw.get("maxLen"))
    elif watch:
        pairs = [(glued.result.vertex(x), glued.result.vertex(y)) for x, y in watch]
        report["homDiff"] = hom_diff(glued.result.complex, glued.result.complex, pairs, None, raw.get("maxLen"))
    return glued, report


def _comb_map(doc: Mapping[str, Any], source: DiComplex, base: Path) -> CombMap:
    if "discretize" in doc:
        target = load_space(doc["target"], base).complex if "target" in doc else source
        return discretize(load_map(doc["discretize"], base), source, target)
    target = load_space(_require(doc, "target", "cellular map"), base).complex
    routes = {k: tuple(v) for k, v in _require(doc, "edgeRoutes", "cellular map").items()}
    m = CombMap(source, target, dict(_require(doc, "vertexMap", "cellular map")), routes, doc.get("name", ""))
    m.validate()
    return m


def pushout_report(doc: Any, base: Path = Path(".")) -> tuple[PushoutResult, dict]:
    """Push a cellular map out along the inclusion of one glued part."""
    raw, base = _deref(doc, base)
    if not isinstance(raw, dict):
        raise SpecError("pushout spec must be an object")
    try:
        glued = load_glue(_require(raw, "space", "pushout"), base)
        part = _require(raw, "part", "pushout")
        source = glued.parts[part]
        f = _comb_map(_require(raw, "map", "pushout"), source, base)
        names = tuple(raw.get("names", ("D", "B'")))
        offset = make_point(*raw["offset"]) if "offset" in raw else None
    except KeyError as exc:
        raise SpecError(f"malformed pushout spec: unknown {exc}") from exc
    result = pushout_along_map(
        glued.result.inclusion(part, source), f, bool(raw.get("allowIdentifications", False)),
        names, offset, raw.get("name", ""),
    )
    report: dict[str, Any] = {"pushout": result.to_json()}
    watch = [tuple(pair) for pair in raw.get("watch", [])]
    if watch:
        pairs = [(glued.result.vertex(x), glued.result.vertex(y)) for x, y in watch]
        report["homDiff"] = hom_diff(glued.result.complex, result.complex, pairs, result.induced, raw.get("maxLen"))
    return result, report
