from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import pytest

from dicontext.documents import (
    DATA_DIR,
    glue_report,
    load_certificate,
    load_glue,
    load_homotopy,
    load_homotopy_doc,
    load_map,
    load_space,
    pushout_report,
    read_json,
)
from dicontext.errors import MarkingError, SpecError, UnknownNameError
from dicontext.plmaps import check_dihomotopy


def _write_json(path: Path, payload: object) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload), encoding="utf-8")


def test_read_json_reports_bad_files(tmp_path: Path) -> None:
    with pytest.raises(SpecError, match="not found"):
        read_json(tmp_path / "missing.json")
    (tmp_path / "broken.json").write_text("{", encoding="utf-8")
    with pytest.raises(SpecError, match="invalid JSON"):
        read_json(tmp_path / "broken.json")


def test_named_spaces_bring_their_markings() -> None:
    s = load_space("swiss-flag")
    assert s.marking == {"a": "(0,0)", "b": "(1,1)", "c": "(2/5,2/5)", "d": "(3/5,3/5)"}
    assert s.points["c"] == (Fraction(2, 5), Fraction(2, 5))
    assert load_space("dO").geometry is None
    assert load_space("dIIgrid(3)").complex.name == "dIIgrid(3)"
    with pytest.raises(UnknownNameError):
        load_space("dQ")


def test_space_document_shapes(tmp_path: Path) -> None:
    region = {
        "name": "notch",
        "region": {"outer": {"lo": ["0", "0"], "hi": ["1", "1"]}, "forbidden": [{"lo": ["1/2", "1/2"], "hi": ["1", "1"]}]},
        "grid": [["0", "1/2", "1"], ["0", "1/2", "1"]],
        "marking": {"a": ["0", "0"], "b": ["1", "1/2"]},
    }
    s = load_space(region)
    assert s.name == "notch" and s.marking["b"] == "(1,1/2)"
    assert s.complex.has_vertex("(1,1)") and len(s.complex.cells) == 3
    assert s.contexted_space.point("a") == (0, 0)

    chains = {"name": "vee", "chains": [[["0", "0"], ["1", "1"]], [["0", "0"], ["1", "0"]]]}
    assert len(load_space(chains).complex.edges) == 2

    _write_json(tmp_path / "spaces" / "o.space.json", {"vertices": [{"id": "a"}, {"id": "b"}], "edges": [{"id": "e", "src": "a", "dst": "b"}]})
    assert len(load_space("spaces/o.space.json", tmp_path).complex.vertices) == 2

    with pytest.raises(MarkingError):
        load_space({"space": "dII", "marking": {"a": ["1/4", "0"]}})
    with pytest.raises(MarkingError):
        load_space({"space": "dO", "marking": {"a": "z"}})
    with pytest.raises(SpecError):
        load_space(7)
    with pytest.raises(SpecError):
        load_space({"region": {"outer": {"lo": ["0"], "hi": ["1"]}, "semantics": "fuzzy"}, "grid": [["0", "1"]]})
    with pytest.raises(SpecError):
        load_space("dO").contexted_space


def test_context_edges_must_be_preserved() -> None:
    doc = {"space": "dII", "marking": {"a": ["1", "1"], "b": ["0", "0"]}, "contextEdges": [["a", "b"]]}
    with pytest.raises(MarkingError, match="not preserved"):
        load_space(doc).contexted


def test_map_documents() -> None:
    inline = {"domain": "dI", "codomain": "dI", "name": "half", "coords": [{"op": "affine", "terms": [{"coef": "1/2", "expr": {"op": "var", "index": 0}}]}]}
    assert load_map(inline)(["1"]) == (Fraction(1, 2),)
    composed = load_map({"compose": ["F2", "F1"], "name": "F2F1"})
    assert composed.name == "F2F1" and composed(["1/2"]) == (Fraction(1, 2),)
    assert load_map({"preset": "max", "name": "join"}).name == "join"
    with pytest.raises(SpecError):
        load_map({"compose": []})
    with pytest.raises(SpecError):
        load_map({"domain": "dO", "codomain": "dI", "coords": ["0"]})
    with pytest.raises(SpecError):
        load_map({"domain": "dI", "codomain": "dI"})


def test_homotopy_documents() -> None:
    h = load_homotopy({"interpolate": ["id(dI)", "const(dI,1)"], "name": "up"})
    assert h.name == "up"
    with pytest.raises(SpecError):
        load_homotopy({"interpolate": ["F1"]})
    general = load_homotopy({
        "domain": "dI", "codomain": "dI", "name": "max-t",
        "coords": [{"op": "max", "args": [{"op": "var", "index": 0}, {"op": "var", "index": 1}]}],
    })
    assert general(["1/4"], "1/2") == (Fraction(1, 2),)
    doc = load_homotopy_doc({
        "interpolate": ["id(dI)", "const(dI,1)"],
        "from": "id(dI)",
        "rel": {"B": {"space": "dI", "marking": {"top": ["1"]}}},
        "method": "lemma",
    })
    assert doc.rel == {"top": ((Fraction(1),), (Fraction(1),))}
    assert check_dihomotopy(doc.homotopy, doc.source, doc.target, doc.rel, doc.method).ok


def test_certificate_documents(tmp_path: Path) -> None:
    cert = load_certificate(DATA_DIR / "square-removed.cert.json")
    assert cert.zigzag_c is cert.zigzag_b
    assert [s.forward for s in cert.zigzag_b] == [True, False]
    doc = json.loads((DATA_DIR / "di-point.cert.json").read_text(encoding="utf-8"))
    doc["zigzagB"][0]["direction"] = "sideways"
    _write_json(tmp_path / "bad.cert.json", doc)
    with pytest.raises(SpecError, match="direction"):
        load_certificate(tmp_path / "bad.cert.json")
    with pytest.raises(SpecError):
        load_certificate({"B": "dI", "C": "point", "f": "dI-to-point"})


def test_glue_documents_resolve_relative_parts() -> None:
    glued = load_glue(DATA_DIR / "dX-from-two-dI.glue.json")
    assert len(glued.result.complex.vertices) == 5
    _, report = glue_report(DATA_DIR / "b-vs-c.glue.json")
    (row,) = report["homDiff"]["pairs"]
    assert row["created"]
    with pytest.raises(UnknownNameError):
        load_glue({"builder": "w"})
    with pytest.raises(SpecError):
        load_glue({"parts": {"p": "dI"}, "identify": [["p", "(0)"]]})


def test_pushout_document() -> None:
    result, report = pushout_report(DATA_DIR / "z-zprime.pushout.json")
    assert result.complex.name == "Z'"
    rows = report["homDiff"]["pairs"]
    assert [(r["before"]["classCount"], r["after"]["classCount"]) for r in rows] == [(1, 1), (0, 1), (0, 1)]
    assert [r["created"] for r in rows] == [False, True, True]
    assert result.report.acyclic
    with pytest.raises(SpecError):
        pushout_report({"space": {"builder": "z", "n": 3}})


def test_preset_calls_with_rationals_are_not_paths() -> None:
    m = load_map("collapse(4,1/4,1/2)")
    assert m.name == "collapse(4,1/4,1/2)"
    inline = load_map({"preset": "collapse(4,1/4,1/2)", "name": "squash"})
    assert inline.name == "squash"
    with pytest.raises(SpecError, match="not found"):
        load_map("maps/missing.json")
