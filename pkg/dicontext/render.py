"""SVG drawings of embedded complexes and dipath-class representatives.

Usage
-----
>>> from dicontext.complex import standard_space
>>> from dicontext.render import render_complex
>>> svg = render_complex(standard_space("dII"))
>>> svg.startswith("<svg")
True
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from bs4 import BeautifulSoup

from .complex import DiComplex
from .errors import UnsupportedGeometryError
from .order_core import Point

log = logging.getLogger(__name__)

SVG_NS = "http://www.w3.org/2000/svg"

PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


@dataclass(frozen=True)
class RenderStyle:
    size: int = 400
    margin: int = 24
    stroke_width: float = 1.5
    class_stroke_width: float = 4.0
    class_colors: tuple[str, ...] = PALETTE
    edge_color: str = "#333333"
    cell_fill: str = "#dddddd"


@dataclass(frozen=True)
class Figure:
    """What to draw on top of the complex."""

    paths: Sequence[Sequence[str]] = ()
    marks: Mapping[str, str] = field(default_factory=dict)
    title: str = ""


def _plane(p: Point) -> tuple[Fraction, Fraction]:
    if len(p) == 1:
        return p[0], Fraction(0)
    if len(p) == 2:
        return p[0], p[1]
    raise UnsupportedGeometryError(f"only 1- and 2-dimensional embeddings can be drawn, got dimension {len(p)}")


class _Canvas:
    def __init__(self, c: DiComplex, style: RenderStyle) -> None:
        pts = [_plane(v.coords) for v in c.vertices]
        self.lo = tuple(min(p[i] for p in pts) for i in (0, 1))
        span = max(max(p[i] for p in pts) - self.lo[i] for i in (0, 1))
        self.scale = Fraction(style.size - 2 * style.margin) / (span or 1)
        self.style = style

    def xy(self, p: Point) -> tuple[float, float]:
        x, y = _plane(p)
        sx = self.style.margin + (x - self.lo[0]) * self.scale
        sy = self.style.size - self.style.margin - (y - self.lo[1]) * self.scale
        return round(float(sx), 2), round(float(sy), 2)


def _polyline(canvas: _Canvas, points: Sequence[Point]) -> str:
    return " ".join(f"{x},{y}" for x, y in map(canvas.xy, points))


def render_complex(c: DiComplex, figure: Figure | None = None, style: RenderStyle | None = None) -> str:
    """Draw `c`: shaded 2-cells, edges with arrowheads at their midpoints,
    one coloured polyline per path in `figure`, and labelled marked vertices."""
    if not c.embedded:
        raise UnsupportedGeometryError(f"{c.name or 'complex'} has no embedding to draw")
    figure = figure or Figure()
    style = style or RenderStyle()
    canvas = _Canvas(c, style)
    at = {v.id: v.coords for v in c.vertices}

    soup = BeautifulSoup("", "html.parser")
    svg = soup.new_tag(
        "svg",
        attrs={
            "xmlns": SVG_NS,
            "width": str(style.size),
            "height": str(style.size),
            "viewBox": f"0 0 {style.size} {style.size}",
        },
    )
    soup.append(svg)
    if figure.title:
        title = soup.new_tag("title")
        title.string = figure.title
        svg.append(title)

    defs = soup.new_tag("defs")
    marker = soup.new_tag(
        "marker",
        attrs={"id": "arrow", "viewBox": "0 0 10 10", "refX": "5", "refY": "5",
               "markerWidth": "6", "markerHeight": "6", "orient": "auto"},
    )
    marker.append(soup.new_tag("path", attrs={"d": "M 0 0 L 10 5 L 0 10 z", "fill": style.edge_color}))
    defs.append(marker)
    svg.append(defs)

    cells = soup.new_tag("g", attrs={"class": "cells"})
    for cell in c.cells:
        ring = [at[c.edge(cell.path_a[0]).src]]
        ring += [at[c.edge(e).dst] for e in cell.path_a]
        ring += [at[c.edge(e).src] for e in reversed(cell.path_b)]
        cells.append(soup.new_tag(
            "polygon", attrs={"points": _polyline(canvas, ring), "fill": style.cell_fill, "data-cell": cell.id},
        ))
    svg.append(cells)

    edges = soup.new_tag("g", attrs={"class": "edges", "stroke": style.edge_color, "stroke-width": str(style.stroke_width)})
    for e in c.edges:
        (x1, y1), (x2, y2) = canvas.xy(at[e.src]), canvas.xy(at[e.dst])
        attrs = {
            "d": f"M {x1} {y1} L {round((x1 + x2) / 2, 2)} {round((y1 + y2) / 2, 2)} L {x2} {y2}",
            "fill": "none",
            "data-edge": e.id,
        }
        if e.directed:
            attrs["marker-mid"] = "url(#arrow)"
        else:
            attrs["stroke-dasharray"] = "4 3"
        edges.append(soup.new_tag("path", attrs=attrs))
    svg.append(edges)

    if figure.paths:
        reps = soup.new_tag("g", attrs={"class": "classes", "fill": "none", "stroke-width": str(style.class_stroke_width)})
        for i, path in enumerate(figure.paths):
            if not path:
                continue
            points = [at[c.edge(path[0]).src]] + [at[c.edge(e).dst] for e in path]
            color = style.class_colors[i % len(style.class_colors)]
            reps.append(soup.new_tag(
                "polyline",
                attrs={"points": _polyline(canvas, points), "stroke": color, "stroke-opacity": "0.7", "data-class": str(i)},
            ))
        svg.append(reps)

    if figure.marks:
        marks = soup.new_tag("g", attrs={"class": "marks"})
        for name, vid in sorted(figure.marks.items()):
            x, y = canvas.xy(at[vid])
            marks.append(soup.new_tag("circle", attrs={"cx": str(x), "cy": str(y), "r": "4", "fill": "#000000"}))
            label = soup.new_tag("text", attrs={"x": str(x + 6), "y": str(y - 6), "font-size": "14"})
            label.string = name
            marks.append(label)
        svg.append(marks)
    return str(soup) + "\n"


def parse_svg(text: str) -> BeautifulSoup:
    return BeautifulSoup(text, "html.parser")


def write_svg(text: str, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    log.info("wrote %s", path)
