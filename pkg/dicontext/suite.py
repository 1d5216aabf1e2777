"""Replay of the worked examples: one row per example, expected against computed.

Usage
-----
>>> from dicontext.suite import run_suite
>>> rows = run_suite(only="swiss-flag")
>>> all(row.match for row in rows)
True
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from .complex import (
    deadlocks,
    discrete_context,
    is_isomorphic,
    mark_context,
    standard_space,
    unreachable,
    validate_complex,
    vertex_id,
)
from .documents import (
    DATA_DIR,
    glue_report,
    load_certificate,
    load_map,
    load_space,
    pushout_report,
)
from .errors import DicontextError, UnknownNameError
from .fundcat import equivalence_obstruction, hom_set
from .glue import GlueSpec, pushout_identify, qualify, staircase_chain, z_space
from .order_core import format_point, format_rat
from .plmaps import (
    check_dihomotopy,
    check_dimap,
    constant_map,
    identity_map,
    linear_interpolation,
    preset_map,
    verify_equivalence_certificate,
)
from .reports import Verdict

log = logging.getLogger(__name__)

GROUPS = ("basics", "square-removed", "swiss-flag", "pushouts", "non-discrete-context", "staircase")


@dataclass(frozen=True)
class Example:
    group: str
    name: str
    expected: str
    run: Callable[[Path], str]


@dataclass(frozen=True)
class Row:
    group: str
    name: str
    expected: str
    computed: str

    @property
    def match(self) -> bool:
        return self.expected == self.computed

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "example": self.name,
            "expected": self.expected,
            "computed": self.computed,
            "match": self.match,
        }


# ───── row helpers ─────


def _hom(space: Any, x: str, y: str, paths: bool = True) -> Callable[[Path], str]:
    def run(data: Path) -> str:
        s = load_space(space, data)
        src, dst = (s.marking.get(v, v) for v in (x, y))
        h = hom_set(s.complex, src, dst)
        return f"classes={len(h.classes)} paths={h.path_count}" if paths else f"classes={len(h.classes)}"

    return run


def _verdict(v: Verdict) -> str:
    if v.ok:
        return v.status.value
    if v.premise:
        return f"{v.status.value} at {v.stage} ({v.premise})"
    return f"{v.status.value} at {v.stage}"


def _certificate(name: str) -> Callable[[Path], str]:
    return lambda data: _verdict(verify_equivalence_certificate(load_certificate(name, data)))


def _obstruction(b: Any, c: Any) -> Callable[[Path], str]:
    def run(data: Path) -> str:
        v = equivalence_obstruction(load_space(b, data).contexted, load_space(c, data).contexted)
        return f"{v.status.value} ({v.premise})" if v.premise else v.status.value

    return run


def _dimap(ref: Any) -> Callable[[Path], str]:
    return lambda data: _verdict(check_dimap(load_map(ref, data)))


def _value(ref: str, point: tuple[str, ...]) -> Callable[[Path], str]:
    return lambda data: format_point(preset_map(ref)(point))


def _interval_homotopy(value: str) -> Callable[[Path], str]:
    def run(data: Path) -> str:
        dI = load_space("dI", data).geometry
        h = linear_interpolation(identity_map(dI), constant_map(dI, dI, [value]))
        return _verdict(check_dihomotopy(h))

    return run


def _validate(ref: str) -> Callable[[Path], str]:
    def run(data: Path) -> str:
        c = load_space(ref, data).complex
        report = validate_complex(c)
        return f"acyclic={str(report.acyclic).lower()} localOnly={str(report.local_only).lower()}"

    return run


def _corners(ref: str) -> Callable[[Path], str]:
    def run(data: Path) -> str:
        c = load_space(ref, data).complex
        return f"deadlocks={' '.join(deadlocks(c))} unreachable={' '.join(unreachable(c))}"

    return run


def _diff(report: dict, row: int = 0) -> str:
    pair = report["homDiff"]["pairs"][row]
    state = lambda n: "empty" if n == 0 else "nonempty"  # noqa: E731
    return f"{state(pair['before']['classCount'])} -> {state(pair['after']['classCount'])}"


def _glue(ref: str) -> Callable[[Path], str]:
    return lambda data: _diff(glue_report(ref, data)[1])


def _glued_like(ref: str, standard: str) -> Callable[[Path], str]:
    def run(data: Path) -> str:
        glued, _ = glue_report(ref, data)
        same = is_isomorphic(glued.result.complex, standard_space(standard))
        return f"isomorphic to {standard}" if same else f"not isomorphic to {standard}"

    return run


def _two_intervals(ends: tuple[str, ...], standard: str) -> Callable[[Path], str]:
    def run(data: Path) -> str:
        dI = standard_space("dI")
        spec = GlueSpec({"p": dI, "q": dI}, tuple((("p", v), ("q", v)) for v in ends))
        same = is_isomorphic(pushout_identify(spec).complex, standard_space(standard))
        return f"isomorphic to {standard}" if same else f"not isomorphic to {standard}"

    return run


def _loop(data: Path) -> str:
    dI = standard_space("dI")
    result = pushout_identify(GlueSpec({"p": dI}, ((("p", "(0)"), ("p", "(1)")),)))
    return f"localOnly={str(result.report.local_only).lower()}"


def _z_law(n: int) -> Callable[[Path], str]:
    def run(data: Path) -> str:
        z, _, _ = z_space(n)
        cols = [Fraction(i, n) for i in range(n + 1)]
        for s, t in itertools.product(cols, repeat=2):
            src = z.vertex(qualify("Y", vertex_id((s, Fraction(0)))))
            dst = z.vertex(qualify("Y", vertex_id((t, Fraction(1)))))
            if bool(hom_set(z.complex, src, dst).classes) != (s == t):
                return f"fails at s={format_rat(s)} t={format_rat(t)}"
        return "holds"

    return run


def _pushout(ref: str, row: int) -> Callable[[Path], str]:
    return lambda data: _diff(pushout_report(ref, data)[1], row)


def _seam(primed: bool) -> Callable[[Path], str]:
    def run(data: Path) -> str:
        groups = staircase_chain(primed).seam_groups()
        return " | ".join(",".join(format_rat(x) for x in g) for g in groups)

    return run


def _staircase(primed: bool) -> Callable[[Path], str]:
    def run(data: Path) -> str:
        chain = staircase_chain(primed)
        names = discrete_context(chain.marking_f)
        f = mark_context(chain.f.complex, names, chain.marking_f)
        g = mark_context(chain.g, names, chain.marking_g)
        v = equivalence_obstruction(f, g)
        if v.premise == "cardinality":
            return f"{v.status.value} ({v.premise} at {v.stage}: {v.witness['homB']} vs {v.witness['homC']})"
        return f"{v.status.value} ({v.premise})" if v.premise else v.status.value

    return run


# ───── the examples ─────

QUARTERS = [["0", "1/4", "1/2", "3/4", "1"]]
DI_QUARTERS = {"region": {"outer": {"lo": ["0"], "hi": ["1"]}}, "grid": QUARTERS, "name": "dI"}
DII_CORNERS = {"space": "dII", "marking": {"a": ["0", "0"], "b": ["1", "1"]}}
REVERSE = {"domain": "dI", "codomain": "dI", "name": "1-x",
           "coords": [{"op": "affine", "terms": [{"coef": "-1", "expr": {"op": "var", "index": 0}}], "const": "1"}]}

EXAMPLES: tuple[Example, ...] = (
    Example("basics", "hom dII corner to corner", "classes=1 paths=6", _hom(DII_CORNERS, "a", "b")),
    Example("basics", "hom dO", "classes=2 paths=2", _hom("dO", "a", "b")),
    Example("basics", "hom dX across branches", "classes=1", _hom("dX", "(0,1/2)", "(1/2,1)", paths=False)),
    Example("basics", "hom dX lower ends", "classes=0", _hom("dX", "(0,1/2)", "(1/2,0)", paths=False)),
    Example("basics", "dS1 is a local pospace", "acyclic=false localOnly=true", _validate("dS1")),
    Example("basics", "max is a dimap", "pass", _dimap("max")),
    Example("basics", "1-x is not a dimap", "fail at 1-x (monotonicity)", _dimap(REVERSE)),
    Example("basics", "contraction of dI to its top", "pass", _interval_homotopy("1")),
    Example("basics", "contraction of dI to its bottom", "fail at id~const(0) (monotonicity-in-t)", _interval_homotopy("0")),
    Example("basics", "h on dX", "(1/2,1/2)", _value("dX-h", ("1/4", "1/2"))),
    Example("basics", "dI contracts to a point", "pass", _certificate("di-point.cert.json")),
    Example("basics", "dX contracts to a point", "pass", _certificate("dx-point.cert.json")),
    Example("basics", "dII and dI rel corners", "pass", _certificate("dii-di-corners.cert.json")),
    Example("basics", "dI and point rel two points", "fail at g context (context)", _certificate("di-point-s0.cert.json")),
    Example(
        "basics", "dII rel incomparable points against dI", "obstruction-found (total-order)",
        _obstruction(
            {"space": "dIIgrid(4)", "marking": {"x": ["0", "1/4"], "y": ["3/4", "0"]}},
            {**DI_QUARTERS, "marking": {"x": ["1/4"], "y": ["3/4"]}},
        ),
    ),
    Example(
        "basics", "dX rel its ends against dI", "obstruction-found (total-order)",
        _obstruction(
            {"space": "dX", "marking": {"l": ["0", "1/2"], "r": ["1", "1/2"], "d": ["1/2", "0"], "u": ["1/2", "1"]}},
            {**DI_QUARTERS, "marking": {"l": ["0"], "d": ["1/4"], "u": ["3/4"], "r": ["1"]}},
        ),
    ),
    Example("square-removed", "hom across the hole", "classes=2 paths=20", _hom("square-removed", "a", "b")),
    Example("square-removed", "F1 at 2/3", "(1)", _value("F1", ("2/3",))),
    Example("square-removed", "square minus hole and its boundary rel corners", "pass", _certificate("square-removed.cert.json")),
    Example("swiss-flag", "hom a to b", "classes=2", _hom("swiss-flag", "a", "b", paths=False)),
    Example("swiss-flag", "hom a to c", "classes=1", _hom("swiss-flag", "a", "c", paths=False)),
    Example("swiss-flag", "hom c to b", "classes=0", _hom("swiss-flag", "c", "b", paths=False)),
    Example("swiss-flag", "hom a to d", "classes=0", _hom("swiss-flag", "a", "d", paths=False)),
    Example("swiss-flag", "hom d to b", "classes=1", _hom("swiss-flag", "d", "b", paths=False)),
    Example("swiss-flag", "hom c to d", "classes=0", _hom("swiss-flag", "c", "d", paths=False)),
    Example("swiss-flag", "deadlock and unreachable corners", "deadlocks=(2/5,2/5) unreachable=(3/5,3/5)", _corners("swiss-flag")),
    Example("swiss-flag", "f3 is a dimap", "pass", _dimap("swiss-f3")),
    Example("swiss-flag", "f4 at (1/2,1/5)", "(2/5,1/5)", _value("swiss-f4", ("1/2", "1/5"))),
    Example("swiss-flag", "flag and skeleton rel a, b, c, d", "pass", _certificate("swiss-flag.cert.json")),
    Example("pushouts", "loops attached to dII and to dI", "empty -> nonempty", _glue("b-vs-c.glue.json")),
    Example("pushouts", "two dI glued at midpoints", "isomorphic to dX", _glued_like("dX-from-two-dI.glue.json", "dX")),
    Example("pushouts", "two dI glued at both ends", "isomorphic to dO", _two_intervals(("(0)", "(1)"), "dO")),
    Example("pushouts", "dI with its ends identified", "localOnly=true", _loop),
    Example("non-discrete-context", "collapse keeps p0(a) to p1(a)", "nonempty -> nonempty", _pushout("z-zprime.pushout.json", 0)),
    Example("non-discrete-context", "columns of Z meet only themselves", "holds", _z_law(4)),
    Example("non-discrete-context", "collapse creates p0(a) to p1(b)", "empty -> nonempty", _pushout("z-zprime.pushout.json", 1)),
    Example("non-discrete-context", "collapse creates p0(b) to p1(a)", "empty -> nonempty", _pushout("z-zprime.pushout.json", 2)),
    Example("staircase", "seam identifications in F", "0,1/5 | 2/5,1/2,3/5 | 4/5,1", _seam(False)),
    Example("staircase", "F against G as drawn, whose c is the collapsed corner", "obstruction-found (cardinality at a->c: 1 vs 3)", _staircase(False)),
    Example("staircase", "seam identifications in F'", "0,1/5 | 2/5,1/2,3/5 | 4/5,1", _seam(True)),
    Example("staircase", "F' against G'", "necessary-conditions-pass", _staircase(True)),
)


def run_suite(data_dir: Path = DATA_DIR, only: str | None = None) -> list[Row]:
    if only is not None and only not in GROUPS:
        raise UnknownNameError(f"unknown suite group {only!r}; expected one of {', '.join(GROUPS)}")
    rows = []
    for example in EXAMPLES:
        if only is not None and example.group != only:
            continue
        try:
            computed = example.run(data_dir)
        except DicontextError as exc:
            computed = f"error: {exc}"
        row = Row(example.group, example.name, example.expected, computed)
        log.info("%s / %s: %s", row.group, row.name, row.computed)
        rows.append(row)
    return rows


def suite_report(rows: list[Row]) -> dict:
    return {
        "rows": [r.to_json() for r in rows],
        "passed": sum(r.match for r in rows),
        "failed": sum(not r.match for r in rows),
    }
