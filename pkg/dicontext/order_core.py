"""Exact numeric substrate: rationals, the componentwise order, rectilinear
regions and piecewise-linear expression trees.

Every coordinate in the package is a `fractions.Fraction`. Nothing in a
verdict-producing path ever touches a float.

Usage
-----
>>> from dicontext.order_core import make_point, compare_points
>>> compare_points(make_point("0", "1/4"), make_point("3/4", "0"))
<OrderRelation.INCOMPARABLE: 'incomparable'>
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Protocol, Sequence

from .errors import DimensionError, DomainError, SpecError

log = logging.getLogger(__name__)

Point = tuple[Fraction, ...]


# ───── rationals ─────


def parse_rat(value: Any) -> Fraction:
    """Read a rational from `"p/q"`, `"p"`, an int or a Fraction.

    Floats are refused: they cannot carry the exact breakpoints (fifths,
    thirds) the maps are built from.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise SpecError(f"rational expected as 'p/q' string or integer, got {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise SpecError(f"decimal notation is not exact enough: {value!r}")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecError(f"not a rational: {value!r}") from exc
    raise SpecError(f"not a rational: {value!r}")


def format_rat(q: Fraction | int) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def make_point(*coords: Any) -> Point:
    if not coords:
        raise DimensionError("points need at least one coordinate")
    return tuple(parse_rat(c) for c in coords)


def format_point(p: Sequence[Fraction]) -> str:
    return "(" + ",".join(format_rat(c) for c in p) + ")"


# ───── componentwise order ─────


class OrderRelation(str, Enum):
    LESS_EQ = "less-eq"
    GREATER_EQ = "greater-eq"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def _same_dimension(p: Sequence, q: Sequence) -> None:
    if len(p) != len(q):
        raise DimensionError(f"cannot compare a {len(p)}-point with a {len(q)}-point")


def compare_points(p: Sequence[Fraction], q: Sequence[Fraction]) -> OrderRelation:
    _same_dimension(p, q)
    below = all(a <= b for a, b in zip(p, q))
    above = all(a >= b for a, b in zip(p, q))
    if below and above:
        return OrderRelation.EQUAL
    if below:
        return OrderRelation.LESS_EQ
    if above:
        return OrderRelation.GREATER_EQ
    return OrderRelation.INCOMPARABLE


def leq(p: Sequence[Fraction], q: Sequence[Fraction]) -> bool:
    return compare_points(p, q) in (OrderRelation.LESS_EQ, OrderRelation.EQUAL)


# ───── boxes and regions ─────


@dataclass(frozen=True)
class Box:
    """Axis-aligned box with per-face openness."""

    lo: Point
    hi: Point
    open_lo: tuple[bool, ...]
    open_hi: tuple[bool, ...]

    def __post_init__(self) -> None:
        n = len(self.lo)
        if not n or len(self.hi) != n or len(self.open_lo) != n or len(self.open_hi) != n:
            raise DimensionError("box bounds and openness flags must share one dimension")
        for i in range(n):
            if self.lo[i] > self.hi[i]:
                raise SpecError(f"box has lo > hi on axis {i}: {format_point(self.lo)} {format_point(self.hi)}")
            if self.lo[i] == self.hi[i] and (self.open_lo[i] or self.open_hi[i]):
                raise SpecError(f"degenerate face on axis {i} must be closed")

    @classmethod
    def closed(cls, lo: Sequence[Any], hi: Sequence[Any]) -> "Box":
        lo_p, hi_p = make_point(*lo), make_point(*hi)
        flags = (False,) * len(lo_p)
        return cls(lo_p, hi_p, flags, flags)

    @classmethod
    def open(cls, lo: Sequence[Any], hi: Sequence[Any]) -> "Box":
        lo_p, hi_p = make_point(*lo), make_point(*hi)
        if any(a >= b for a, b in zip(lo_p, hi_p)):
            raise SpecError("an open box needs lo < hi on every axis")
        flags = (True,) * len(lo_p)
        return cls(lo_p, hi_p, flags, flags)

    @property
    def dimension(self) -> int:
        return len(self.lo)

    def contains(self, p: Sequence[Fraction]) -> bool:
        _same_dimension(self.lo, p)
        for i, x in enumerate(p):
            if x < self.lo[i] or x > self.hi[i]:
                return False
            if self.open_lo[i] and x == self.lo[i]:
                return False
            if self.open_hi[i] and x == self.hi[i]:
                return False
        return True

    def closure_contains(self, p: Sequence[Fraction]) -> bool:
        _same_dimension(self.lo, p)
        return all(self.lo[i] <= x <= self.hi[i] for i, x in enumerate(p))

    def to_json(self) -> dict:
        return {"lo": [format_rat(c) for c in self.lo], "hi": [format_rat(c) for c in self.hi]}


class Classification(str, Enum):
    INSIDE = "inside"
    ON_FORBIDDEN_BOUNDARY = "on-forbidden-boundary"
    REMOVED = "removed"
    OUTSIDE_OUTER = "outside-outer"


@dataclass(frozen=True)
class RectRegion:
    """A closed outer box minus a finite union of open forbidden boxes.

    With `interior_of_union` set (the default), a point is removed iff it
    lies in the interior of the union of the closed forbidden boxes, so
    walls shared by adjacent boxes disappear. The per-box reading keeps
    those walls and is only offered for comparison.
    """

    outer: Box
    forbidden: tuple[Box, ...] = ()
    interior_of_union: bool = True

    def __post_init__(self) -> None:
        if any(self.outer.open_lo) or any(self.outer.open_hi):
            raise SpecError("the outer box of a region must be closed")
        for box in self.forbidden:
            if box.dimension != self.outer.dimension:
                raise DimensionError("forbidden box dimension differs from the outer box")
            if not (self.outer.closure_contains(box.lo) and self.outer.closure_contains(box.hi)):
                raise SpecError(f"forbidden box {box.to_json()} is not inside the outer box")

    @property
    def dimension(self) -> int:
        return self.outer.dimension

    def mandatory_lines(self) -> list[list[Fraction]]:
        lines: list[set[Fraction]] = [set() for _ in range(self.dimension)]
        for box in (self.outer, *self.forbidden):
            for i in range(self.dimension):
                lines[i].update((box.lo[i], box.hi[i]))
        return [sorted(axis) for axis in lines]

    def contains(self, p: Sequence[Fraction]) -> bool:
        return region_classify(self, p) in (Classification.INSIDE, Classification.ON_FORBIDDEN_BOUNDARY)

    def to_json(self) -> dict:
        return {
            "outer": self.outer.to_json(),
            "forbidden": [b.to_json() for b in self.forbidden],
            "semantics": "interior-of-union" if self.interior_of_union else "per-box",
        }


def _covers_neighbourhood(boxes: Iterable[Box], p: Sequence[Fraction]) -> bool:
    # Every open orthant at p must be entered by one closed box containing p.
    containing = [b for b in boxes if b.closure_contains(p)]
    if not containing:
        return False
    for signs in itertools.product((-1, 1), repeat=len(p)):
        if not any(
            all((b.hi[i] > p[i]) if s > 0 else (b.lo[i] < p[i]) for i, s in enumerate(signs))
            for b in containing
        ):
            return False
    return True


def region_classify(r: RectRegion, p: Sequence[Fraction]) -> Classification:
    _same_dimension(r.outer.lo, p)
    if not r.outer.closure_contains(p):
        return Classification.OUTSIDE_OUTER
    if r.interior_of_union:
        removed = _covers_neighbourhood(r.forbidden, p)
    else:
        removed = any(b.contains(p) for b in r.forbidden)
    if removed:
        return Classification.REMOVED
    if any(b.closure_contains(p) for b in r.forbidden):
        return Classification.ON_FORBIDDEN_BOUNDARY
    return Classification.INSIDE


# ───── expression trees ─────


class Expr:
    """Base of the coordinate expression grammar.

    Arithmetic operators build normalized `Affine` nodes so presets can be
    written as `2 * x - Fraction(1, 3)`.
    """

    def evaluate(self, p: Sequence[Fraction]) -> Fraction:
        raise NotImplementedError

    def arity(self) -> int:
        """One more than the largest variable index used (0 for constants)."""
        raise NotImplementedError

    def to_json(self) -> Any:
        raise NotImplementedError

    def __add__(self, other: Any) -> "Affine":
        return Affine.combine([(Fraction(1), self), (Fraction(1), _as_expr(other))])

    __radd__ = __add__

    def __sub__(self, other: Any) -> "Affine":
        return Affine.combine([(Fraction(1), self), (Fraction(-1), _as_expr(other))])

    def __rsub__(self, other: Any) -> "Affine":
        return Affine.combine([(Fraction(-1), self), (Fraction(1), _as_expr(other))])

    def __mul__(self, k: Any) -> "Affine":
        return Affine.combine([(parse_rat(k), self)])

    __rmul__ = __mul__

    def __neg__(self) -> "Affine":
        return Affine.combine([(Fraction(-1), self)])


def _as_expr(value: Any) -> Expr:
    return value if isinstance(value, Expr) else Const(parse_rat(value))


@dataclass(frozen=True, eq=True)
class Var(Expr):
    index: int

    def evaluate(self, p: Sequence[Fraction]) -> Fraction:
        if self.index >= len(p):
            raise DimensionError(f"variable x{self.index} used on a {len(p)}-point")
        return p[self.index]

    def arity(self) -> int:
        return self.index + 1

    def to_json(self) -> Any:
        return {"op": "var", "index": self.index}


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: Fraction

    def evaluate(self, p: Sequence[Fraction]) -> Fraction:
        return self.value

    def arity(self) -> int:
        return 0

    def to_json(self) -> Any:
        return {"op": "const", "value": format_rat(self.value)}


@dataclass(frozen=True, eq=True)
class Affine(Expr):
    terms: tuple[tuple[Fraction, Expr], ...]
    const: Fraction = Fraction(0)

    @classmethod
    def combine(cls, parts: Iterable[tuple[Fraction, Expr]], const: Fraction = Fraction(0)) -> "Affine":
        coeffs: dict[Expr, Fraction] = {}
        order: list[Expr] = []
        total = Fraction(const)
        stack = [(Fraction(k), e) for k, e in parts]
        while stack:
            k, e = stack.pop(0)
            if isinstance(e, Const):
                total += k * e.value
            elif isinstance(e, Affine):
                total += k * e.const
                stack[0:0] = [(k * c, sub) for c, sub in e.terms]
            else:
                if e not in coeffs:
                    order.append(e)
                    coeffs[e] = Fraction(0)
                coeffs[e] += k
        return cls(tuple((coeffs[e], e) for e in order if coeffs[e] != 0), total)

    def evaluate(self, p: Sequence[Fraction]) -> Fraction:
        return self.const + sum((k * e.evaluate(p) for k, e in self.terms), Fraction(0))

    def arity(self) -> int:
        return max((e.arity() for _, e in self.terms), default=0)

    def to_json(self) -> Any:
        return {
            "op": "affine",
            "terms": [{"coef": format_rat(k), "expr": e.to_json()} for k, e in self.terms],
            "const": format_rat(self.const),
        }


@dataclass(frozen=True, eq=True)
class Max(Expr):
    args: tuple[Expr, ...]

    def __post_init__(self) -> None:
        if not self.args:
            raise SpecError("max needs at least one argument")

    def evaluate(self, p: Sequence[Fraction]) -> Fraction:
        return max(a.evaluate(p) for a in self.args)

    def arity(self) -> int:
        return max(a.arity() for a in self.args)

    def to_json(self) -> Any:
        return {"op": "max", "args": [a.to_json() for a in self.args]}


@dataclass(frozen=True, eq=True)
class Min(Expr):
    args: tuple[Expr, ...]

    def __post_init__(self) -> None:
        if not self.args:
            raise SpecError("min needs at least one argument")

    def evaluate(self, p: Sequence[Fraction]) -> Fraction:
        return min(a.evaluate(p) for a in self.args)

    def arity(self) -> int:
        return max(a.arity() for a in self.args)

    def to_json(self) -> Any:
        return {"op": "min", "args": [a.to_json() for a in self.args]}


COMPARATORS = ("<=", "<", "==", ">=", ">")


@dataclass(frozen=True, eq=True)
class Constraint:
    """`expr <op> bound`, a rational linear guard."""

    expr: Expr
    op: str
    bound: Fraction

    def __post_init__(self) -> None:
        if self.op not in COMPARATORS:
            raise SpecError(f"unknown comparator {self.op!r}; expected one of {COMPARATORS}")

    def holds(self, p: Sequence[Fraction]) -> bool:
        return compare_value(self.expr.evaluate(p) - self.bound, self.op)

    def to_json(self) -> dict:
        return {"expr": self.expr.to_json(), "cmp": self.op, "bound": format_rat(self.bound)}


def compare_value(delta: Fraction, op: str) -> bool:
    """Decide `delta <op> 0`."""
    return {
        "<=": delta <= 0,
        "<": delta < 0,
        "==": delta == 0,
        ">=": delta >= 0,
        ">": delta > 0,
    }[op]


@dataclass(frozen=True, eq=True)
class Case:
    guard: tuple[Constraint, ...]
    value: Expr

    def applies(self, p: Sequence[Fraction]) -> bool:
        return all(c.holds(p) for c in self.guard)


@dataclass(frozen=True, eq=True)
class Piecewise(Expr):
    """Guarded cases; the first case whose guard holds gives the value.

    Overlapping cases must agree where they overlap. `plmaps` verifies
    that when a map is built, so the case order never matters.
    """

    cases: tuple[Case, ...]

    def __post_init__(self) -> None:
        if not self.cases:
            raise SpecError("piecewise needs at least one case")

    def evaluate(self, p: Sequence[Fraction]) -> Fraction:
        for case in self.cases:
            if case.applies(p):
                return case.value.evaluate(p)
        raise DomainError(f"no piecewise case covers {format_point(p)}", tuple(p))

    def arity(self) -> int:
        return max(
            max([case.value.arity()] + [c.expr.arity() for c in case.guard]) for case in self.cases
        )

    def to_json(self) -> Any:
        return {
            "op": "piecewise",
            "cases": [
                {"when": [c.to_json() for c in case.guard], "value": case.value.to_json()}
                for case in self.cases
            ],
        }


def expr_from_json(doc: Any) -> Expr:
    if isinstance(doc, (str, int)) and not isinstance(doc, bool):
        return Const(parse_rat(doc))
    if not isinstance(doc, dict) or "op" not in doc:
        raise SpecError(f"expression must be an object with an 'op' field, got {doc!r}")
    op = doc["op"]
    try:
        if op == "var":
            index = doc["index"]
            if not isinstance(index, int) or isinstance(index, bool) or index < 0:
                raise SpecError(f"variable index must be a non-negative integer, got {index!r}")
            return Var(index)
        if op == "const":
            return Const(parse_rat(doc["value"]))
        if op == "affine":
            parts = [(parse_rat(t["coef"]), expr_from_json(t["expr"])) for t in doc.get("terms", [])]
            return Affine.combine(parts, parse_rat(doc.get("const", "0")))
        if op in ("max", "min"):
            args = tuple(expr_from_json(a) for a in doc["args"])
            return Max(args) if op == "max" else Min(args)
        if op == "piecewise":
            cases = []
            for case in doc["cases"]:
                guard = tuple(
                    Constraint(expr_from_json(c["expr"]), c["cmp"], parse_rat(c["bound"]))
                    for c in case.get("when", [])
                )
                cases.append(Case(guard, expr_from_json(case["value"])))
            return Piecewise(tuple(cases))
    except (KeyError, TypeError) as exc:
        raise SpecError(f"malformed {op!r} expression: {exc}") from exc
    raise SpecError(f"unknown expression op {op!r}")


def expr_to_json(e: Expr) -> Any:
    return e.to_json()


# ───── evaluation ─────


class HasPoints(Protocol):
    @property
    def dimension(self) -> int: ...

    def contains(self, p: Sequence[Fraction]) -> bool: ...


class StagedMap(Protocol):
    @property
    def domain(self) -> HasPoints: ...

    @property
    def stages(self) -> tuple[tuple[Expr, ...], ...]: ...


def apply_stages(stages: Sequence[Sequence[Expr]], p: Sequence[Fraction]) -> Point:
    point = tuple(p)
    for stage in stages:
        point = tuple(e.evaluate(point) for e in stage)
    return point


def eval_pl(m: StagedMap, p: Sequence[Fraction]) -> Point:
    """Evaluate a PL map exactly, refusing points outside its domain."""
    if len(p) != m.domain.dimension:
        raise DimensionError(f"map expects {m.domain.dimension} coordinates, got {len(p)}")
    if not m.domain.contains(p):
        raise DomainError(f"{format_point(p)} is outside the domain", tuple(p))
    return apply_stages(m.stages, p)
