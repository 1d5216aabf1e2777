"""Geometric spaces for the continuous checks.

A space answers three questions exactly: does it contain a point, which
closed convex cells cover it, and does the convex hull of some points stay
inside it (`hull_witness` returns None when it does, and a description of
the offending part of the complement otherwise).

`RegionSpace` wraps a `RectRegion` with its grid, `ComplexSpace` is the
realization of an embedded 1-complex, and `ProductSpace` is space × dI,
the domain of a homotopy.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Mapping, Protocol, Sequence

from .cells import ConvexCell, OpenCell, hull_meets
from .complex import (
    ContextedComplex,
    DiComplex,
    RegionPreset,
    build_grid_complex,
    mark_points,
    plus_complex,
    region_preset,
    standard_space,
    swiss_skeleton,
    unit_lines,
    unit_region,
)
from .errors import DimensionError, MarkingError, UnknownNameError, UnsupportedGeometryError
from .order_core import Box, Point, RectRegion, format_point, parse_rat

log = logging.getLogger(__name__)

ZERO, ONE = Fraction(0), Fraction(1)


class Space(Protocol):
    name: str

    @property
    def dimension(self) -> int: ...

    @property
    def bounds(self) -> tuple[Point, Point]: ...

    def contains(self, p: Sequence[Fraction]) -> bool: ...

    def cells(self) -> tuple[ConvexCell, ...]: ...

    def hull_witness(self, points: Sequence[Point]) -> str | None: ...


def _outside_bounds(space: Space, points: Sequence[Point]) -> str | None:
    lo, hi = space.bounds
    for p in points:
        if len(p) != len(lo):
            raise DimensionError(f"{space.name or 'space'} has dimension {len(lo)}, got a {len(p)}-point")
        if any(x < a or x > b for x, a, b in zip(p, lo, hi)):
            return f"{format_point(p)} is outside {space.name or 'the space'}"
    return None


@dataclass(frozen=True, eq=False)
class RegionSpace:
    region: RectRegion
    grid_lines: tuple[tuple[Fraction, ...], ...]
    name: str = ""

    @classmethod
    def from_preset(cls, preset: RegionPreset) -> "RegionSpace":
        return cls(preset.region, tuple(tuple(a) for a in preset.grid_lines), preset.name)

    @property
    def dimension(self) -> int:
        return self.region.dimension

    @property
    def bounds(self) -> tuple[Point, Point]:
        return self.region.outer.lo, self.region.outer.hi

    def contains(self, p: Sequence[Fraction]) -> bool:
        if len(p) != self.dimension:
            raise DimensionError(f"{self.name or 'region'} has dimension {self.dimension}, got a {len(p)}-point")
        return self.region.contains(p)

    @cached_property
    def _grid_cells(self) -> tuple[tuple[Point, Point, bool], ...]:
        # Every open grid cell as (lo, hi, retained); an axis is either a
        # grid line (lo == hi) or the open interval between two lines.
        lines = [sorted(set(parse_rat(c) for c in axis)) for axis in self.grid_lines]
        per_axis = [[(a, a) for a in axis] + list(zip(axis, axis[1:])) for axis in lines]
        out = []
        for combo in itertools.product(*per_axis):
            lo = tuple(a for a, _ in combo)
            hi = tuple(b for _, b in combo)
            centre = tuple((a + b) / 2 for a, b in combo)
            out.append((lo, hi, self.region.contains(centre)))
        return tuple(out)

    def cells(self) -> tuple[ConvexCell, ...]:
        """Closed grid cells that are not faces of a larger retained cell."""
        retained = {(lo, hi) for lo, hi, keep in self._grid_cells if keep}
        lines = [sorted(set(parse_rat(c) for c in axis)) for axis in self.grid_lines]
        out = []
        for lo, hi, keep in self._grid_cells:
            if not keep:
                continue
            maximal = True
            for i in range(self.dimension):
                if lo[i] != hi[i]:
                    continue
                k = lines[i].index(lo[i])
                for j in (k - 1, k + 1):
                    if 0 <= j < len(lines[i]):
                        a, b = sorted((lines[i][k], lines[i][j]))
                        if (lo[:i] + (a,) + lo[i + 1:], hi[:i] + (b,) + hi[i + 1:]) in retained:
                            maximal = False
            if maximal:
                out.append(ConvexCell.from_points(itertools.product(*zip(lo, hi))))
        return tuple(out)

    @cached_property
    def removed_cells(self) -> tuple[OpenCell, ...]:
        return tuple(
            OpenCell.box(lo, hi, label=f"removed cell {format_point(lo)}..{format_point(hi)}")
            for lo, hi, keep in self._grid_cells
            if not keep
        )

    def hull_witness(self, points: Sequence[Point]) -> str | None:
        bad = _outside_bounds(self, points)
        if bad:
            return bad
        lo = tuple(min(p[i] for p in points) for i in range(self.dimension))
        hi = tuple(max(p[i] for p in points) for i in range(self.dimension))
        for cell in self.removed_cells:
            if cell.overlaps_box(lo, hi) and hull_meets(points, cell):
                return cell.label
        return None

    @cached_property
    def complex(self) -> DiComplex:
        return build_grid_complex(self.region, self.grid_lines, name=self.name)


def segment_parameter(a: Point, b: Point, x: Sequence[Fraction]) -> Fraction | None:
    """Parameter t with x = a + t(b - a), or None if x is off the line."""
    d = tuple(q - p for p, q in zip(a, b))
    k = next(i for i, v in enumerate(d) if v != 0)
    t = (x[k] - a[k]) / d[k]
    if all(x[i] == a[i] + t * d[i] for i in range(len(a))):
        return t
    return None


@dataclass(frozen=True, eq=False)
class ComplexSpace:
    """Realization of an embedded 1-complex: its vertices and straight edges.

    Filled 2-cells are not realized; a space with area is a RegionSpace.
    """

    complex: DiComplex
    name: str = ""

    def __post_init__(self) -> None:
        if not self.complex.embedded:
            raise UnsupportedGeometryError(f"{self.complex.name or 'complex'} has no embedding")
        if self.complex.cells:
            raise UnsupportedGeometryError("filled 2-cells need a region space, not an embedded complex")
        for e in self.complex.edges:
            if self.complex.vertex(e.src).coords == self.complex.vertex(e.dst).coords:
                raise UnsupportedGeometryError(f"edge {e.id} has coincident endpoints")

    @property
    def dimension(self) -> int:
        return self.complex.dimension

    @cached_property
    def bounds(self) -> tuple[Point, Point]:
        pts = [v.coords for v in self.complex.vertices]
        n = self.dimension
        return tuple(min(p[i] for p in pts) for i in range(n)), tuple(max(p[i] for p in pts) for i in range(n))

    @cached_property
    def _segments(self) -> tuple[tuple[Point, Point], ...]:
        c = self.complex
        return tuple(sorted((c.vertex(e.src).coords, c.vertex(e.dst).coords) for e in c.edges))

    def contains(self, p: Sequence[Fraction]) -> bool:
        p = tuple(p)
        if len(p) != self.dimension:
            raise DimensionError(f"{self.name or 'complex'} has dimension {self.dimension}, got a {len(p)}-point")
        if self.complex.vertex_at(p) is not None:
            return True
        for a, b in self._segments:
            t = segment_parameter(a, b, p)
            if t is not None and ZERO <= t <= ONE:
                return True
        return False

    def cells(self) -> tuple[ConvexCell, ...]:
        on_edge = {pt for seg in self._segments for pt in seg}
        points = [ConvexCell.from_points([v.coords]) for v in self.complex.vertices if v.coords not in on_edge]
        return tuple(points + [ConvexCell.from_points(seg) for seg in self._segments])

    def hull_witness(self, points: Sequence[Point]) -> str | None:
        bad = _outside_bounds(self, points)
        if bad:
            return bad
        hull = ConvexCell.from_points(points)
        if hull.dimension >= 2:
            return f"{format_point(hull.centroid)} fills an area, but {self.name or 'the complex'} is one-dimensional"
        if hull.dimension == 0:
            p = hull.points[0]
            return None if self.contains(p) else f"{format_point(p)} is off {self.name or 'the complex'}"
        p, q = hull.points
        spans = []
        for a, b in self._segments:
            ta, tb = segment_parameter(p, q, a), segment_parameter(p, q, b)
            if ta is not None and tb is not None:
                lo, hi = max(min(ta, tb), ZERO), min(max(ta, tb), ONE)
                if lo <= hi:
                    spans.append((lo, hi))
        reach = ZERO
        for lo, hi in sorted(spans):
            if lo > reach:
                break
            reach = max(reach, hi)
        if reach >= ONE and spans and min(s[0] for s in spans) <= ZERO:
            return None
        gap = reach if not spans or min(s[0] for s in spans) <= ZERO else ZERO
        nxt = min((lo for lo, _ in spans if lo > gap), default=ONE)
        t = (gap + nxt) / 2
        witness = tuple(a + t * (b - a) for a, b in zip(p, q))
        return f"{format_point(witness)} is off {self.name or 'the complex'}"


@dataclass(frozen=True, eq=False)
class ProductSpace:
    """base × dI; the last coordinate is the homotopy parameter."""

    base: Space
    name: str = ""

    @property
    def dimension(self) -> int:
        return self.base.dimension + 1

    @property
    def bounds(self) -> tuple[Point, Point]:
        lo, hi = self.base.bounds
        return lo + (ZERO,), hi + (ONE,)

    def contains(self, p: Sequence[Fraction]) -> bool:
        if len(p) != self.dimension:
            raise DimensionError(f"product has dimension {self.dimension}, got a {len(p)}-point")
        return ZERO <= p[-1] <= ONE and self.base.contains(p[:-1])

    def cells(self) -> tuple[ConvexCell, ...]:
        return tuple(
            ConvexCell.from_points([p + (t,) for p in cell.points for t in (ZERO, ONE)]) for cell in self.base.cells()
        )

    def hull_witness(self, points: Sequence[Point]) -> str | None:
        bad = _outside_bounds(self, points)
        if bad:
            return bad
        return self.base.hull_witness([p[:-1] for p in points])


@dataclass(frozen=True, eq=False)
class UnionSpace:
    """Union of spaces of one dimension.

    A hull counts as inside when one part holds all of it, so a union can
    reject a hull that only the union covers.
    """

    parts: tuple[Space, ...]
    name: str = ""

    def __post_init__(self) -> None:
        if not self.parts or len({p.dimension for p in self.parts}) != 1:
            raise DimensionError("a union needs parts of one dimension")

    @property
    def dimension(self) -> int:
        return self.parts[0].dimension

    @property
    def bounds(self) -> tuple[Point, Point]:
        los, his = zip(*(p.bounds for p in self.parts))
        return tuple(map(min, zip(*los))), tuple(map(max, zip(*his)))

    def contains(self, p: Sequence[Fraction]) -> bool:
        return any(part.contains(p) for part in self.parts)

    def cells(self) -> tuple[ConvexCell, ...]:
        return tuple(dict.fromkeys(c for part in self.parts for c in part.cells()))

    def hull_witness(self, points: Sequence[Point]) -> str | None:
        witnesses = [part.hull_witness(points) for part in self.parts]
        if any(w is None for w in witnesses):
            return None
        return witnesses[0]


# ───── contexted spaces ─────


@dataclass(frozen=True, eq=False)
class ContextedSpace:
    """A geometric space with context points marked by coordinates."""

    space: Space
    marking: Mapping[str, Point] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for a, p in self.marking.items():
            if not self.space.contains(p):
                raise MarkingError(f"marked point {a}={format_point(p)} is not in {self.space.name or 'the space'}")

    @property
    def name(self) -> str:
        return self.space.name

    @property
    def names(self) -> list[str]:
        return sorted(self.marking)

    def point(self, a: str) -> Point:
        try:
            return self.marking[a]
        except KeyError:
            raise MarkingError(f"context vertex {a!r} is not marked on {self.name or 'the space'}") from None

    def with_marking(self, marking: Mapping[str, Sequence[Any]]) -> "ContextedSpace":
        return ContextedSpace(self.space, {a: tuple(parse_rat(c) for c in p) for a, p in marking.items()})

    def contexted_complex(self) -> ContextedComplex:
        return mark_points(self.space.complex, self.marking)


HALVES = [ZERO, Fraction(1, 2), ONE]


def point_space() -> RegionSpace:
    return RegionSpace(RectRegion(Box.closed((0,), (0,))), ((ZERO,),), "point")


def named_space(name: str, k: int | None = None, marks: str | None = None) -> ContextedSpace:
    """Standard and worked-example spaces with their default markings."""
    if name == "point":
        return ContextedSpace(point_space())
    if name == "dI":
        return ContextedSpace(RegionSpace(unit_region(1), (tuple(HALVES),), "dI"))
    if name == "dII":
        return ContextedSpace(RegionSpace(unit_region(2), (tuple(HALVES),) * 2, "dII"))
    if name == "dIIgrid":
        if k is None:
            raise UnknownNameError("dIIgrid needs a grid size")
        return ContextedSpace(RegionSpace(unit_region(2), tuple(map(tuple, unit_lines(k))), f"dIIgrid({k})"))
    if name == "dX":
        return ContextedSpace(ComplexSpace(plus_complex(), "dX"))
    if name == "swiss-skeleton":
        c = swiss_skeleton()
        marking = {a: p for a, p in region_preset("swiss-flag").marking.items()}
        return ContextedSpace(ComplexSpace(c, "swiss-skeleton"), marking)
    try:
        preset = region_preset(name, marks)
    except UnknownNameError:
        standard_space(name, k)
        raise UnknownNameError(f"{name!r} has no geometric model; use it as a combinatorial space") from None
    return ContextedSpace(RegionSpace.from_preset(preset), dict(preset.marking))
