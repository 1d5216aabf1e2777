from __future__ import annotations

import shutil
from pathlib import Path

import pytest

from dicontext.documents import DATA_DIR
from dicontext.errors import UnknownNameError
from dicontext.reports import canonical_json
from dicontext.suite import EXAMPLES, GROUPS, run_suite, suite_report


def test_every_example_matches() -> None:
    rows = run_suite(DATA_DIR)
    mismatched = [(r.group, r.name, r.expected, r.computed) for r in rows if not r.match]
    assert mismatched == []
    assert len(rows) == len(EXAMPLES)
    assert {r.group for r in rows} == set(GROUPS)
    report = suite_report(rows)
    assert (report["passed"], report["failed"]) == (len(EXAMPLES), 0)


def test_two_runs_give_the_same_bytes() -> None:
    first = canonical_json(suite_report(run_suite(DATA_DIR)))
    assert canonical_json(suite_report(run_suite(DATA_DIR))) == first


def test_only_runs_one_group() -> None:
    rows = run_suite(only="pushouts")
    assert rows and all(r.group == "pushouts" for r in rows)
    with pytest.raises(UnknownNameError):
        run_suite(only="knots")


def test_errors_become_rows(tmp_path: Path) -> None:
    data = tmp_path / "data"
    shutil.copytree(DATA_DIR, data)
    (data / "b-vs-c.glue.json").unlink()
    rows = run_suite(data, only="pushouts")
    broken = [r for r in rows if not r.match]
    assert len(broken) == 1 and broken[0].computed.startswith("error: ")
    report = suite_report(rows)
    assert report["failed"] == 1 and report["passed"] == len(rows) - 1
    assert report["rows"][0]["match"] is False
