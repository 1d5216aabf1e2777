from __future__ import annotations

import json
import shutil
from pathlib import Path

import pytest

from dicontext.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, OUTPUT_DIR_VAR, main
from dicontext.documents import DATA_DIR


@pytest.fixture(autouse=True)
def _no_output_dir(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv(OUTPUT_DIR_VAR, raising=False)


def _write_json(path: Path, payload: object) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload), encoding="utf-8")


def _stdout_json(capsys: pytest.CaptureFixture[str]) -> dict:
    return json.loads(capsys.readouterr().out)


def test_validate_directed_circle(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["validate", "dS1"]) == EXIT_FAIL
    captured = capsys.readouterr()
    assert json.loads(captured.out)["localOnly"] is True
    assert "[error]" in captured.err
    assert main(["validate", "dS1", "--allow-loops"]) == EXIT_OK
    assert "[ok]" in capsys.readouterr().err


def test_homset_with_context_names_and_svg(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    svg = tmp_path / "ab.svg"
    code = main(["homset", "square-removed", "--from", "a", "--to", "b", "--svg", str(svg), "--class-colors", "#111111,#222222"])
    assert code == EXIT_OK
    doc = _stdout_json(capsys)
    assert (doc["classCount"], doc["pathCount"]) == (2, 20)
    assert "#222222" in svg.read_text(encoding="utf-8")


def test_homset_rejects_unknown_vertices(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["homset", "dII", "--from", "(0,0)", "--to", "(2,2)"]) == EXIT_INPUT
    assert "[error]" in capsys.readouterr().err


def test_paths_on_a_cycle_need_a_bound(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["paths", "dS1", "--from", "v0", "--to", "v2"]) == EXIT_INPUT
    capsys.readouterr()
    assert main(["paths", "dS1", "--from", "v0", "--to", "v2", "--max-len", "5"]) == EXIT_OK
    assert _stdout_json(capsys)["count"] == 2


def test_check_map_outcomes(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["check-map", "max"]) == EXIT_OK
    assert _stdout_json(capsys)["verdict"] == "pass"
    reverse = {
        "domain": "dI", "codomain": "dI", "name": "1-x",
        "coords": [{"op": "affine", "terms": [{"coef": "-1", "expr": {"op": "var", "index": 0}}], "const": "1"}],
    }
    _write_json(tmp_path / "reverse.map.json", reverse)
    assert main(["check-map", str(tmp_path / "reverse.map.json")]) == EXIT_FAIL
    assert _stdout_json(capsys)["premise"] == "monotonicity"
    corners_b = {"space": "dII", "marking": {"a": ["0", "0"], "b": ["1", "1"]}}
    corners_c = {"space": "dI", "marking": {"a": ["0"], "b": ["1"]}}
    _write_json(tmp_path / "b.space.json", corners_b)
    _write_json(tmp_path / "c.space.json", corners_c)
    assert main(["check-map", "max", "--rel", str(tmp_path / "b.space.json"), str(tmp_path / "c.space.json")]) == EXIT_OK


def test_check_homotopy_method_override(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    _write_json(tmp_path / "down.json", {"interpolate": ["id(dI)", "const(dI,0)"], "name": "down"})
    assert main(["check-homotopy", str(tmp_path / "down.json")]) == EXIT_FAIL
    assert _stdout_json(capsys)["premise"] == "monotonicity-in-t"
    assert main(["check-homotopy", str(tmp_path / "down.json"), "--method", "lemma"]) == EXIT_FAIL
    assert _stdout_json(capsys)["premise"] == "order"


def test_check_certificates(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    out = tmp_path / "reports" / "dii.json"
    assert main(["check", str(DATA_DIR / "dii-di-corners.cert.json"), "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text(encoding="utf-8"))["verdict"] == "pass"
    assert "[ok] wrote report" in capsys.readouterr().err
    assert main(["check", str(DATA_DIR / "di-point-s0.cert.json")]) == EXIT_FAIL
    assert _stdout_json(capsys)["stage"] == "g context"


def test_malformed_documents_exit_with_input_error(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    bad = tmp_path / "bad.cert.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["check", str(bad)]) == EXIT_INPUT
    assert "invalid JSON" in capsys.readouterr().err
    assert main(["check", str(tmp_path / "missing.cert.json")]) == EXIT_INPUT


def test_output_dir_from_environment(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv(OUTPUT_DIR_VAR, str(tmp_path))
    code = main(["glue", str(DATA_DIR / "b-vs-c.glue.json"), "--out", "glue.json", "--complex-out", "B.json"])
    assert code == EXIT_OK
    report = json.loads((tmp_path / "glue.json").read_text(encoding="utf-8"))
    assert report["homDiff"]["pairs"][0]["created"] is True
    assert json.loads((tmp_path / "B.json").read_text(encoding="utf-8"))["vertices"]


def test_pushout_and_render(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    out = tmp_path / "zprime.json"
    assert main(["pushout", str(DATA_DIR / "z-zprime.pushout.json"), "--complex-out", str(out)]) == EXIT_OK
    report = _stdout_json(capsys)
    assert report["homDiff"]["changed"] >= 2
    assert out.exists()
    assert main(["render", "swiss-flag", "--from", "a", "--to", "b"]) == EXIT_OK
    text = capsys.readouterr().out
    assert text.startswith("<svg") and text.count("<polyline") == 2


def test_paper_suite_group(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["paper-suite", "--only", "square-removed"]) == EXIT_OK
    report = _stdout_json(capsys)
    assert report["failed"] == 0 and report["passed"] == 3
    with pytest.raises(SystemExit):
        main(["paper-suite", "--only", "knots"])


def test_paper_suite_fails_on_corrupted_data(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    data = tmp_path / "data"
    shutil.copytree(DATA_DIR, data)
    (data / "square-removed.cert.json").write_text("[]", encoding="utf-8")
    assert main(["paper-suite", "--only", "square-removed", "--data-dir", str(data)]) == EXIT_FAIL
    captured = capsys.readouterr()
    assert json.loads(captured.out)["failed"] == 1
    assert "[error] square-removed" in captured.err


def test_style_flags_reach_the_drawing(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    svg = tmp_path / "dii.svg"
    assert main(["render", "dII", "--svg", str(svg), "--stroke-width", "7"]) == EXIT_OK
    assert 'stroke-width="7' in svg.read_text(encoding="utf-8")
    assert capsys.readouterr().err.startswith("[ok] wrote")


def test_status_lines_are_tagged_and_there_is_no_verbosity_flag(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["check", str(DATA_DIR / "swiss-flag.cert.json")]) == EXIT_OK
    err = capsys.readouterr().err
    assert err.strip() and all(line.startswith("[") for line in err.splitlines())
    with pytest.raises(SystemExit) as exc:
        main(["check", str(DATA_DIR / "swiss-flag.cert.json"), "-v"])
    assert exc.value.code == 2
