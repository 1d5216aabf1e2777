"""Exact convex cells and the affine decomposition of PL expression trees.

A `ConvexCell` is a closed polytope given by its points (V-representation).
Cutting a cell by the zero set of an affine form, clipping a hull against
half-spaces and testing a hull against an open cell are all done with
`Fraction` arithmetic, so every answer is exact.

`map_pieces` walks a multi-stage coordinate map over a cell and returns
pieces on which the whole map is affine. The environment carries each
stage's coordinates as affine forms in the base variables, so composites
never expand their expression trees.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainError, PiecewiseConflictError
from .order_core import (
    Affine,
    Case,
    Const,
    Expr,
    Max,
    Min,
    Piecewise,
    Point,
    Var,
    compare_value,
    format_point,
)

log = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


# ───── exact linear algebra ─────


def _sub(p: Sequence[Fraction], q: Sequence[Fraction]) -> Point:
    return tuple(a - b for a, b in zip(p, q))


def _dot(p: Sequence[Fraction], q: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(p, q)), ZERO)


def row_reduce(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [list(map(Fraction, r)) for r in rows]
    pivots: list[int] = []
    if not m:
        return m, pivots
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        lead = m[r][c]
        m[r] = [x / lead for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                k = m[i][c]
                m[i] = [a - k * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[Point]:
    if not rows:
        return [tuple(ONE if j == i else ZERO for j in range(ncols)) for i in range(ncols)]
    reduced, pivots = row_reduce(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [ZERO] * ncols
        v[f] = ONE
        for row, p in zip(reduced, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return basis


def affine_basis(points: Sequence[Point]) -> list[Point]:
    """Independent direction vectors spanning the affine hull."""
    if len(points) < 2:
        return []
    diffs = [_sub(p, points[0]) for p in points[1:]]
    reduced, _ = row_reduce(diffs)
    return [tuple(r) for r in reduced]


def affine_dimension(points: Sequence[Point]) -> int:
    return len(affine_basis(points))


def _invert(matrix: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    n = len(matrix)
    augmented = [list(row) + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(matrix)]
    reduced, pivots = row_reduce(augmented)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in reduced]


# ───── affine forms ─────


@dataclass(frozen=True)
class AffineForm:
    """`coeffs · x + const` over the base variables of a decomposition."""

    coeffs: tuple[Fraction, ...]
    const: Fraction = ZERO

    @classmethod
    def constant(cls, n: int, value: Fraction) -> "AffineForm":
        return cls((ZERO,) * n, Fraction(value))

    @classmethod
    def coordinate(cls, n: int, i: int) -> "AffineForm":
        return cls(tuple(ONE if j == i else ZERO for j in range(n)), ZERO)

    def __call__(self, p: Sequence[Fraction]) -> Fraction:
        return self.const + _dot(self.coeffs, p)

    def __add__(self, other: "AffineForm") -> "AffineForm":
        return AffineForm(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.const + other.const)

    def __sub__(self, other: "AffineForm") -> "AffineForm":
        return AffineForm(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)), self.const - other.const)

    def __mul__(self, k: Fraction) -> "AffineForm":
        return AffineForm(tuple(a * k for a in self.coeffs), self.const * k)

    __rmul__ = __mul__

    def __neg__(self) -> "AffineForm":
        return self * Fraction(-1)


Env = tuple[AffineForm, ...]


def identity_env(n: int) -> Env:
    return tuple(AffineForm.coordinate(n, i) for i in range(n))


def apply_env(env: Env, p: Sequence[Fraction]) -> Point:
    return tuple(f(p) for f in env)


def linear_part(env: Env) -> np.ndarray:
    """Jacobian of an affine piece as an object array of Fractions."""
    return np.array([list(f.coeffs) for f in env], dtype=object).reshape(len(env), -1)


# ───── convex cells ─────


def _cross(o: Sequence[Fraction], a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _planar_hull(points: list[Point], i: int, j: int) -> list[Point]:
    # Monotone chain on the (i, j) projection; collinear points are dropped.
    proj = sorted(points, key=lambda p: (p[i], p[j]))

    def chain(seq: Iterable[Point]) -> list[Point]:
        out: list[Point] = []
        for p in seq:
            while len(out) >= 2 and _cross((out[-2][i], out[-2][j]), (out[-1][i], out[-1][j]), (p[i], p[j])) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = chain(proj)
    upper = chain(reversed(proj))
    return lower[:-1] + upper[:-1]


def prune(points: Iterable[Point]) -> tuple[Point, ...]:
    """Drop duplicates and, up to dimension two, non-extreme points."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return tuple(pts)
    basis = affine_basis(pts)
    d = len(basis)
    if d == 0:
        return (pts[0],)
    if d == 1:
        u = basis[0]
        ts = [_dot(_sub(p, pts[0]), u) for p in pts]
        return tuple(sorted({pts[ts.index(min(ts))], pts[ts.index(max(ts))]}))
    if d == 2:
        u, v = basis
        n = len(u)
        for i, j in itertools.combinations(range(n), 2):
            if u[i] * v[j] - u[j] * v[i] != 0:
                return tuple(sorted(_planar_hull(pts, i, j)))
    return tuple(pts)


@dataclass(frozen=True)
class ConvexCell:
    points: tuple[Point, ...]

    @classmethod
    def from_points(cls, points: Iterable[Sequence[Fraction]]) -> "ConvexCell":
        return cls(prune(tuple(Fraction(c) for c in p) for p in points))

    @property
    def ambient(self) -> int:
        return len(self.points[0])

    @cached_property
    def dimension(self) -> int:
        return affine_dimension(self.points)

    @cached_property
    def centroid(self) -> Point:
        k = len(self.points)
        return tuple(sum((p[i] for p in self.points), ZERO) / k for i in range(self.ambient))

    @cached_property
    def samples(self) -> tuple[Point, ...]:
        """Vertices, pairwise midpoints and the centroid."""
        mids = [tuple((a + b) / 2 for a, b in zip(p, q)) for p, q in itertools.combinations(self.points, 2)]
        return tuple(dict.fromkeys([*self.points, *mids, self.centroid]))

    def bounds(self) -> tuple[Point, Point]:
        lo = tuple(min(p[i] for p in self.points) for i in range(self.ambient))
        hi = tuple(max(p[i] for p in self.points) for i in range(self.ambient))
        return lo, hi

    def contains(self, p: Sequence[Fraction]) -> bool:
        return hull_meets(self.points, OpenCell.simplex([tuple(p)]))

    def describe(self) -> list[str]:
        return [format_point(p) for p in self.points]


def clip(points: Sequence[Point], form: AffineForm) -> list[Point]:
    """V-representation of hull(points) ∩ {form ≥ 0}."""
    values = [form(p) for p in points]
    keep = [p for p, v in zip(points, values) if v >= 0]
    for (p, vp), (q, vq) in itertools.product(zip(points, values), repeat=2):
        if vp > 0 > vq:
            lam = vp / (vp - vq)
            keep.append(tuple(a + lam * (b - a) for a, b in zip(p, q)))
    return list(dict.fromkeys(keep))


def split(cell: ConvexCell, form: AffineForm) -> list[ConvexCell]:
    """Cut a cell by `form = 0`; an uncut cell comes back alone."""
    values = [form(p) for p in cell.points]
    if all(v >= 0 for v in values) or all(v <= 0 for v in values):
        return [cell]
    below = ConvexCell.from_points(clip(cell.points, -form))
    above = ConvexCell.from_points(clip(cell.points, form))
    return [below, above]


def bisect(cell: ConvexCell) -> list[ConvexCell]:
    lo, hi = cell.bounds()
    axis = max(range(cell.ambient), key=lambda i: (hi[i] - lo[i], -i))
    if hi[axis] == lo[axis]:
        return [cell]
    mid = (lo[axis] + hi[axis]) / 2
    form = AffineForm(tuple(ONE if j == axis else ZERO for j in range(cell.ambient)), -mid)
    return split(cell, form)


# ───── open cells and hull intersection ─────


@dataclass(frozen=True)
class OpenCell:
    """Relative interior of a polytope: equalities plus strict inequalities.

    `lo`/`hi` bound its closure and let callers skip far-away cells.
    """

    equalities: tuple[AffineForm, ...]
    strict: tuple[AffineForm, ...]
    lo: Point
    hi: Point
    label: str = ""

    @classmethod
    def box(cls, lo: Sequence[Fraction], hi: Sequence[Fraction], label: str = "") -> "OpenCell":
        n = len(lo)
        eqs, strict = [], []
        for i in range(n):
            axis = AffineForm.coordinate(n, i)
            if lo[i] == hi[i]:
                eqs.append(axis - AffineForm.constant(n, lo[i]))
            else:
                strict.append(axis - AffineForm.constant(n, lo[i]))
                strict.append(AffineForm.constant(n, hi[i]) - axis)
        return cls(tuple(eqs), tuple(strict), tuple(lo), tuple(hi), label)

    @classmethod
    def simplex(cls, vertices: Sequence[Point], label: str = "") -> "OpenCell":
        """Relative interior of the simplex spanned by affinely independent vertices."""
        v0 = vertices[0]
        n = len(v0)
        dirs = [_sub(v, v0) for v in vertices[1:]]
        eqs = []
        for w in nullspace(dirs, n):
            eqs.append(AffineForm(w, -_dot(w, v0)))
        strict = []
        if dirs:
            k = len(dirs)
            _, pivots = row_reduce([[d[i] for d in dirs] for i in range(n)])
            # rows of the n×k direction matrix that make a k×k invertible block
            rows = []
            for i in range(n):
                if len(rows) == k:
                    break
                trial = rows + [i]
                sub = [[dirs[c][r] for c in range(k)] for r in trial]
                if len(row_reduce(sub)[1]) == len(trial):
                    rows = trial
            inv = _invert([[dirs[c][r] for c in range(k)] for r in rows])
            bary = []
            for c in range(k):
                coeffs = [ZERO] * n
                const = ZERO
                for idx, r in enumerate(rows):
                    coeffs[r] += inv[c][idx]
                    const -= inv[c][idx] * v0[r]
                bary.append(AffineForm(tuple(coeffs), const))
            total = AffineForm.constant(n, ONE)
            for b in bary:
                total = total - b
            strict = [*bary, total]
        lo = tuple(min(v[i] for v in vertices) for i in range(n))
        hi = tuple(max(v[i] for v in vertices) for i in range(n))
        return cls(tuple(eqs), tuple(strict), lo, hi, label)

    def overlaps_box(self, lo: Sequence[Fraction], hi: Sequence[Fraction]) -> bool:
        return all(self.lo[i] <= hi[i] and lo[i] <= self.hi[i] for i in range(len(lo)))


def hull_meets(points: Sequence[Point], cell: OpenCell) -> bool:
    """Does hull(points) intersect the open cell?"""
    pts = list(points)
    for e in cell.equalities:
        pts = clip(clip(pts, e), -e)
        if not pts:
            return False
    for s in cell.strict:
        pts = clip(pts, s)
        if not pts:
            return False
    # The closure part is nonempty; it meets the open part unless some
    # strict constraint is tight on all of it.
    return all(any(s(p) > 0 for p in pts) for s in cell.strict)


# ───── order cone ─────


def order_cone_rays(cell: ConvexCell) -> list[np.ndarray]:
    """Extreme rays of {w ≥ 0} within the cell's direction space.

    A map affine on the cell is monotone there iff its linear part sends
    every ray to a nonnegative vector.
    """
    basis = affine_basis(cell.points)
    d, n = len(basis), cell.ambient
    if d == 0:
        return []
    if d == n:
        return [np.array([ONE if j == i else ZERO for j in range(n)], dtype=object) for i in range(n)]
    found: dict[Point, None] = {}
    for subset in itertools.combinations(range(n), d - 1):
        rows = [[basis[k][i] for k in range(d)] for i in subset]
        kernel = nullspace(rows, d)
        if len(kernel) != 1:
            continue
        w = tuple(sum((kernel[0][k] * basis[k][i] for k in range(d)), ZERO) for i in range(n))
        for cand in (w, tuple(-x for x in w)):
            if all(x >= 0 for x in cand):
                scale = next(x for x in cand if x != 0)
                found[tuple(x / scale for x in cand)] = None
    return [np.array(r, dtype=object) for r in sorted(found)]


# ───── decomposition of expression trees ─────

Piece = tuple[ConvexCell, AffineForm]


def _refine(cells: list[ConvexCell], forms: Iterable[AffineForm]) -> list[ConvexCell]:
    for form in forms:
        cells = [part for c in cells for part in split(c, form)]
    return cells


def joint_pieces(exprs: Sequence[Expr], cell: ConvexCell, env: Env) -> list[tuple[ConvexCell, tuple[AffineForm, ...]]]:
    acc: list[tuple[ConvexCell, tuple[AffineForm, ...]]] = [(cell, ())]
    for e in exprs:
        acc = [(sub, forms + (f,)) for c, forms in acc for sub, f in expr_pieces(e, c, env)]
    return acc


def _extreme(args: Sequence[Expr], cell: ConvexCell, env: Env, pick_max: bool) -> list[Piece]:
    out: list[Piece] = []
    for sc, forms in joint_pieces(args, cell, env):
        diffs = [forms[i] - forms[j] for i, j in itertools.combinations(range(len(forms)), 2)]
        for part in _refine([sc], diffs):
            values = [f(part.centroid) for f in forms]
            best = max(values) if pick_max else min(values)
            out.append((part, forms[values.index(best)]))
    return out


def _check_cases(cases: Sequence[Case], part: ConvexCell, env: Env) -> None:
    guarded = [c for c in cases if c.guard]
    fallback = next((c for c in cases if not c.guard), None)
    for base in part.samples:
        point = apply_env(env, base)
        values = {c.value.evaluate(point) for c in guarded if c.applies(point)}
        if not values and fallback is not None:
            continue
        if not values:
            raise DomainError(f"no piecewise case covers {format_point(point)}", point)
        if len(values) > 1:
            raise PiecewiseConflictError(
                f"overlapping piecewise cases disagree at {format_point(point)}: "
                + ", ".join(sorted(str(v) for v in values))
            )


def _piecewise(cases: Sequence[Case], cell: ConvexCell, env: Env) -> list[Piece]:
    guards = [g for case in cases for g in case.guard]
    out: list[Piece] = []
    for sc, forms in joint_pieces([g.expr for g in guards], cell, env):
        n = sc.ambient
        shifted = [f - AffineForm.constant(n, g.bound) for f, g in zip(forms, guards)]
        for part in _refine([sc], shifted):
            c = part.centroid
            chosen, k = None, 0
            for case in cases:
                width = len(case.guard)
                if all(compare_value(shifted[k + i](c), g.op) for i, g in enumerate(case.guard)):
                    chosen = case
                    break
                k += width
            if chosen is None:
                point = apply_env(env, c)
                raise DomainError(f"no piecewise case covers {format_point(point)}", point)
            _check_cases(cases, part, env)
            out.extend(expr_pieces(chosen.value, part, env))
    return out


def expr_pieces(expr: Expr, cell: ConvexCell, env: Env) -> list[Piece]:
    """Pieces of `cell` on which `expr` (read through `env`) is affine."""
    n = cell.ambient
    match expr:
        case Var(index=i):
            return [(cell, env[i])]
        case Const(value=v):
            return [(cell, AffineForm.constant(n, v))]
        case Affine(terms=terms, const=const):
            out = []
            for sc, forms in joint_pieces([e for _, e in terms], cell, env):
                acc = AffineForm.constant(n, const)
                for (k, _), f in zip(terms, forms):
                    acc = acc + f * k
                out.append((sc, acc))
            return out
        case Max(args=args):
            return _extreme(args, cell, env, pick_max=True)
        case Min(args=args):
            return _extreme(args, cell, env, pick_max=False)
        case Piecewise(cases=cases):
            return _piecewise(cases, cell, env)
    raise TypeError(f"unsupported expression node {type(expr).__name__}")


StageHook = Callable[[int, ConvexCell, Env], None]


def map_pieces(
    stages: Sequence[Sequence[Expr]],
    cell: ConvexCell,
    between: StageHook | None = None,
) -> list[tuple[ConvexCell, Env]]:
    """Pieces of `cell` on which a staged map is affine, with its forms.

    `between(k, piece, env)` runs before stage `k` (k ≥ 1) sees a piece, so
    callers can check that the intermediate image lies in that stage's
    domain.
    """
    acc: list[tuple[ConvexCell, Env]] = [(cell, identity_env(cell.ambient))]
    for k, stage in enumerate(stages):
        if k and between is not None:
            for sc, env in acc:
                between(k, sc, env)
        acc = [(sub, tuple(forms)) for sc, env in acc for sub, forms in joint_pieces(stage, sc, env)]
    return acc
