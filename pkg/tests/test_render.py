from __future__ import annotations

from pathlib import Path

import pytest

from dicontext.complex import region_preset, standard_space
from dicontext.errors import UnsupportedGeometryError
from dicontext.fundcat import hom_set
from dicontext.render import Figure, RenderStyle, parse_svg, render_complex, write_svg


def test_every_edge_and_cell_is_drawn() -> None:
    c = region_preset("square-removed").build()
    soup = parse_svg(render_complex(c))
    assert soup.find("marker", id="arrow") is not None
    assert len(soup.find_all("path", attrs={"data-edge": True})) == len(c.edges)
    assert len(soup.find_all("polygon")) == len(c.cells)
    assert all(p["marker-mid"] == "url(#arrow)" for p in soup.find_all("path", attrs={"data-edge": True}))


def test_class_representatives_and_marks(tmp_path: Path) -> None:
    c = region_preset("square-removed").build()
    h = hom_set(c, "(0,0)", "(1,1)")
    figure = Figure([k.representative.edges for k in h.classes], {"a": "(0,0)", "b": "(1,1)"}, "square-removed")
    style = RenderStyle(size=200, class_colors=("#000001", "#000002"))
    text = render_complex(c, figure, style)
    soup = parse_svg(text)
    lines = soup.find_all("polyline")
    assert [line["stroke"] for line in lines] == ["#000001", "#000002"]
    assert [t.string for t in soup.find_all("text")] == ["a", "b"]
    assert soup.find("title").string == "square-removed"
    assert soup.find("svg")["width"] == "200"
    write_svg(text, tmp_path / "out" / "sq.svg")
    assert (tmp_path / "out" / "sq.svg").read_text(encoding="utf-8") == text


def test_abstract_complexes_cannot_be_drawn() -> None:
    with pytest.raises(UnsupportedGeometryError):
        render_complex(standard_space("dO"))


def test_interval_lies_on_the_baseline() -> None:
    soup = parse_svg(render_complex(standard_space("dI"), style=RenderStyle(size=100, margin=10)))
    (edge,) = soup.find_all("path", attrs={"data-edge": True})
    assert edge["d"] == "M 10.0 90.0 L 50.0 90.0 L 90.0 90.0"
