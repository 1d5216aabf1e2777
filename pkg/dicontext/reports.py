"""Verdicts and canonical JSON output.

Every analytic check returns a `Verdict` instead of raising. Reports are
written with sorted keys and a trailing newline so two runs over the same
inputs produce byte-identical files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .order_core import format_rat


class Status(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    OBSTRUCTION_FOUND = "obstruction-found"
    NECESSARY_CONDITIONS_PASS = "necessary-conditions-pass"


@dataclass(frozen=True)
class Verdict:
    """Outcome of a check.

    `stage` names the map, homotopy or pair that was being checked and
    `premise` the condition that failed. NECESSARY_CONDITIONS_PASS means
    no obstruction was found; it never means "equivalent".
    """

    status: Status
    stage: str = ""
    premise: str = ""
    detail: str = ""
    witness: Mapping[str, Any] | None = None
    checks: tuple["Verdict", ...] = field(default=())

    @property
    def ok(self) -> bool:
        return self.status in (Status.PASS, Status.NECESSARY_CONDITIONS_PASS)

    @classmethod
    def passed(cls, stage: str = "", detail: str = "", checks: tuple["Verdict", ...] = ()) -> "Verdict":
        return cls(Status.PASS, stage, "", detail, None, checks)

    @classmethod
    def failed(
        cls,
        stage: str,
        premise: str,
        detail: str = "",
        witness: Mapping[str, Any] | None = None,
        checks: tuple["Verdict", ...] = (),
    ) -> "Verdict":
        return cls(Status.FAIL, stage, premise, detail, witness, checks)

    @classmethod
    def obstruction(cls, stage: str, kind: str, detail: str, witness: Mapping[str, Any]) -> "Verdict":
        return cls(Status.OBSTRUCTION_FOUND, stage, kind, detail, witness)

    @classmethod
    def necessary(cls, detail: str = "", witness: Mapping[str, Any] | None = None) -> "Verdict":
        return cls(Status.NECESSARY_CONDITIONS_PASS, "", "", detail, witness)

    def at_stage(self, stage: str) -> "Verdict":
        """The same verdict relabelled under an outer stage name."""
        inner = f"{stage}: {self.stage}" if self.stage else stage
        return Verdict(self.status, inner, self.premise, self.detail, self.witness, self.checks)

    def to_json(self) -> dict:
        doc: dict[str, Any] = {"verdict": self.status.value}
        if self.stage:
            doc["stage"] = self.stage
        if self.premise:
            doc["premise"] = self.premise
        if self.detail:
            doc["detail"] = self.detail
        if self.witness is not None:
            doc["witness"] = jsonable(self.witness)
        if self.checks:
            doc["checks"] = [c.to_json() for c in self.checks]
        return doc


def jsonable(obj: Any) -> Any:
    """Rationals become canonical strings, tuples become lists."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return format_rat(obj)
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [jsonable(x) for x in obj]
        return sorted(items, key=str) if isinstance(obj, (set, frozenset)) else items
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    if hasattr(obj, "tolist"):
        return jsonable(obj.tolist())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    # Sorted keys for stable diffs.
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(obj: Any, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(canonical_json(obj))
