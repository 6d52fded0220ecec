"""Finitely generated region algebras and magma-valued measures.

Three region families are supported, all with exact canonical forms:

* :class:`IntervalSet` -- finite unions of intervals on the line with exact
  rational endpoints and explicit open/closed ends (points are degenerate
  closed intervals);
* :class:`BoxSet` -- finite unions of axis-aligned boxes in the plane, stored
  as x-strips each carrying an :class:`IntervalSet` of y values;
* :class:`FiniteSet` -- finite sets of graph elements.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from .magma import (
    MagmaStructure,
    OrientationMap,
    fold_ordered,
    get_magma,
    mag_op,
    Atom,
)

INF = math.inf


class MixedSpaces(ValueError):
    """Operands live in different ambient spaces."""


class EmptyCarrier(ValueError):
    """A subspace was requested on an empty region."""


class NotMeasurable(ValueError):
    """The measure has no value assigned to the requested region."""


def num(v: Any) -> Any:
    """Exact endpoint: Fractions for finite values, float infinities kept."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float) and math.isinf(v):
        return v
    if isinstance(v, str):
        if v.strip() in ("inf", "+inf", "Infinity"):
            return INF
        if v.strip() in ("-inf", "-Infinity"):
            return -INF
        return Fraction(v)
    if isinstance(v, (np.floating,)):
        v = float(v)
    return Fraction(v)


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return "inf" if v > 0 else "-inf"
    if v.denominator == 1:
        return str(v.numerator)
    f = float(v)
    return repr(f) if Fraction(f) == v else str(v)


# ---------------------------------------------------------------------------
# 1D
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=False)
class Interval:
    lo: Any
    hi: Any
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        if math.isinf(self.lo) if isinstance(self.lo, float) else False:
            object.__setattr__(self, "lo_closed", False)
        if math.isinf(self.hi) if isinstance(self.hi, float) else False:
            object.__setattr__(self, "hi_closed", False)

    @property
    def empty(self) -> bool:
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.lo_closed and self.hi_closed)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def length(self) -> Any:
        return self.hi - self.lo

    def contains(self, x: Any) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def closure(self) -> "Interval":
        return Interval(self.lo, self.hi, True, True)

    def __repr__(self) -> str:
        if self.is_point:
            return "{" + _fmt(self.lo) + "}"
        return ("[" if self.lo_closed else "(") + f"{_fmt(self.lo)},{_fmt(self.hi)}" + ("]" if self.hi_closed else ")")


def _intersect(a: Interval, b: Interval) -> Interval:
    if a.lo > b.lo:
        lo, lc = a.lo, a.lo_closed
    elif a.lo < b.lo:
        lo, lc = b.lo, b.lo_closed
    else:
        lo, lc = a.lo, a.lo_closed and b.lo_closed
    if a.hi < b.hi:
        hi, hc = a.hi, a.hi_closed
    elif a.hi > b.hi:
        hi, hc = b.hi, b.hi_closed
    else:
        hi, hc = a.hi, a.hi_closed and b.hi_closed
    return Interval(lo, hi, lc, hc)


def _merge(intervals: Iterable[Interval]) -> tuple:
    items = sorted((iv for iv in intervals if not iv.empty), key=lambda iv: (iv.lo, not iv.lo_closed))
    out: list[Interval] = []
    for iv in items:
        if out:
            cur = out[-1]
            touches = iv.lo < cur.hi or (iv.lo == cur.hi and (cur.hi_closed or iv.lo_closed))
            if touches:
                if iv.hi > cur.hi:
                    hi, hc = iv.hi, iv.hi_closed
                elif iv.hi < cur.hi:
                    hi, hc = cur.hi, cur.hi_closed
                else:
                    hi, hc = cur.hi, cur.hi_closed or iv.hi_closed
                out[-1] = Interval(cur.lo, hi, cur.lo_closed, hc)
                continue
        out.append(iv)
    return tuple(out)


class Region:
    """Common interface of canonical regions."""

    ambient: str = ""

    def _check(self, other: "Region") -> None:
        if type(self) is not type(other) or self.ambient != other.ambient:
            raise MixedSpaces(f"cannot combine {self.ambient!r} and {other.ambient!r} regions")

    def __or__(self, other):
        return self.union(other)

    def __and__(self, other):
        return self.intersection(other)

    def __sub__(self, other):
        return self.difference(other)

    def issubset(self, other: "Region") -> bool:
        return self.difference(other).is_empty()

    def disjoint(self, other: "Region") -> bool:
        return self.intersection(other).is_empty()


@dataclass(frozen=True, repr=False)
class IntervalSet(Region):
    intervals: tuple = ()
    ambient: str = "R"

    @classmethod
    def of(cls, *intervals: Interval) -> "IntervalSet":
        return cls(_merge(intervals))

    @classmethod
    def closed(cls, lo: Any, hi: Any) -> "IntervalSet":
        return cls.of(Interval(num(lo), num(hi)))

    @classmethod
    def point(cls, x: Any) -> "IntervalSet":
        x = num(x)
        return cls.of(Interval(x, x))

    @classmethod
    def points(cls, xs: Iterable[Any]) -> "IntervalSet":
        return cls.of(*(Interval(num(x), num(x)) for x in xs))

    def is_empty(self) -> bool:
        return not self.intervals

    def union(self, other: "IntervalSet") -> "IntervalSet":
        self._check(other)
        return IntervalSet(_merge(self.intervals + other.intervals))

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        self._check(other)
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            iv = _intersect(a[i], b[j])
            if not iv.empty:
                out.append(iv)
            if (a[i].hi, a[i].hi_closed) < (b[j].hi, b[j].hi_closed):
                i += 1
            else:
                j += 1
        return IntervalSet(_merge(out))

    def complement(self) -> "IntervalSet":
        out = []
        lo, lc = -INF, False
        for iv in self.intervals:
            gap = Interval(lo, iv.lo, lc, not iv.lo_closed)
            if not gap.empty:
                out.append(gap)
            lo, lc = iv.hi, not iv.hi_closed
        tail = Interval(lo, INF, lc, False)
        if not tail.empty:
            out.append(tail)
        return IntervalSet(_merge(out))

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        self._check(other)
        return self.intersection(other.complement())

    def closure(self) -> "IntervalSet":
        return IntervalSet(_merge(iv.closure() for iv in self.intervals))

    def contains(self, x: Any) -> bool:
        return any(iv.contains(x) for iv in self.intervals)

    def contains_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float).reshape(len(xs), -1)[:, 0]
        mask = np.zeros(xs.shape, dtype=bool)
        for iv in self.intervals:
            lo, hi = float(iv.lo), float(iv.hi)
            m = (xs >= lo) if iv.lo_closed else (xs > lo)
            m &= (xs <= hi) if iv.hi_closed else (xs < hi)
            mask |= m
        return mask

    def is_finite(self) -> bool:
        return all(iv.is_point for iv in self.intervals)

    def points_list(self) -> list:
        return [iv.lo for iv in self.intervals if iv.is_point]

    def length(self) -> Any:
        total = Fraction(0)
        for iv in self.intervals:
            total = total + iv.length
        return total

    def hull(self) -> Interval:
        return Interval(self.intervals[0].lo, self.intervals[-1].hi)

    @property
    def dim(self) -> int:
        return 1

    def pieces(self) -> list:
        """(dimension, geometry) pieces: points and intervals."""
        return [(0 if iv.is_point else 1, iv) for iv in self.intervals]

    def key(self) -> tuple:
        return tuple((iv.lo, iv.hi, iv.lo_closed, iv.hi_closed) for iv in self.intervals)

    def __repr__(self) -> str:
        if not self.intervals:
            return "∅"
        return "∪".join(repr(iv) for iv in self.intervals)

    def to_literal(self) -> list:
        return [[_fmt(iv.lo), _fmt(iv.hi)] for iv in self.intervals]


# ---------------------------------------------------------------------------
# 2D
# ---------------------------------------------------------------------------


def _elementary_pieces(breaks: Sequence[Any]) -> list[tuple[Interval, Any]]:
    """Points at breakpoints and the open gaps between them, with a sample x."""
    pieces: list[tuple[Interval, Any]] = []
    bs = sorted(set(breaks))
    if not bs:
        return [(Interval(-INF, INF, False, False), Fraction(0))]
    pieces.append((Interval(-INF, bs[0], False, False), bs[0] - 1))
    for i, b in enumerate(bs):
        pieces.append((Interval(b, b), b))
        nxt = bs[i + 1] if i + 1 < len(bs) else INF
        sample = (b + nxt) / 2 if nxt != INF else b + 1
        pieces.append((Interval(b, nxt, False, False), sample))
    return pieces


@dataclass(frozen=True)
class Box:
    x: Interval
    y: Interval

    @property
    def dims(self) -> int:
        return int(not self.x.is_point) + int(not self.y.is_point)

    def area(self) -> Any:
        return self.x.length * self.y.length

    def closure(self) -> "Box":
        return Box(self.x.closure(), self.y.closure())

    def __repr__(self) -> str:
        return f"{self.x!r}×{self.y!r}"


@dataclass(frozen=True, repr=False)
class BoxSet(Region):
    """Canonical form: strips ``(xset, yset)`` grouped by identical y-sets."""

    strips: tuple = ()
    ambient: str = "R2"

    @classmethod
    def box(cls, x0: Any, x1: Any, y0: Any, y1: Any) -> "BoxSet":
        return cls.from_boxes([Box(Interval(num(x0), num(x1)), Interval(num(y0), num(y1)))])

    @classmethod
    def point(cls, x: Any, y: Any) -> "BoxSet":
        return cls.box(x, x, y, y)

    @classmethod
    def from_boxes(cls, boxes: Iterable[Box]) -> "BoxSet":
        out = cls()
        for b in boxes:
            if b.x.empty or b.y.empty:
                continue
            out = out._combine(cls((( IntervalSet.of(b.x), IntervalSet.of(b.y)),)), lambda p, q: p.union(q))
        return out

    def _yset_at(self, x: Any) -> IntervalSet:
        for xs, ys in self.strips:
            if xs.contains(x):
                return ys
        return IntervalSet()

    def _breaks(self) -> list:
        bs = []
        for xs, _ in self.strips:
            for iv in xs.intervals:
                for v in (iv.lo, iv.hi):
                    if not (isinstance(v, float) and math.isinf(v)):
                        bs.append(v)
        return bs

    def _combine(self, other: "BoxSet", op: Callable[[IntervalSet, IntervalSet], IntervalSet]) -> "BoxSet":
        groups: dict[tuple, list[Interval]] = {}
        ysets: dict[tuple, IntervalSet] = {}
        for piece, sample in _elementary_pieces(self._breaks() + other._breaks()):
            ys = op(self._yset_at(sample), other._yset_at(sample))
            if ys.is_empty():
                continue
            k = ys.key()
            groups.setdefault(k, []).append(piece)
            ysets[k] = ys
        strips = [(IntervalSet(_merge(pcs)), ysets[k]) for k, pcs in groups.items()]
        strips.sort(key=lambda s: (s[0].intervals[0].lo, not s[0].intervals[0].lo_closed))
        return BoxSet(tuple(strips))

    def is_empty(self) -> bool:
        return not self.strips

    def union(self, other: "BoxSet") -> "BoxSet":
        self._check(other)
        return self._combine(other, lambda p, q: p.union(q))

    def intersection(self, other: "BoxSet") -> "BoxSet":
        self._check(other)
        return self._combine(other, lambda p, q: p.intersection(q))

    def difference(self, other: "BoxSet") -> "BoxSet":
        self._check(other)
        return self._combine(other, lambda p, q: p.difference(q))

    def boxes(self) -> list[Box]:
        out = []
        for xs, ys in self.strips:
            for xi in xs.intervals:
                for yi in ys.intervals:
                    out.append(Box(xi, yi))
        out.sort(key=lambda b: (b.y.lo, b.x.lo, b.y.hi, b.x.hi))
        return out

    def closure(self) -> "BoxSet":
        return BoxSet.from_boxes(b.closure() for b in self.boxes())

    def contains(self, p: Sequence[Any]) -> bool:
        return self._yset_at(p[0]).contains(p[1])

    def contains_array(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        mask = np.zeros(len(pts), dtype=bool)
        for xs, ys in self.strips:
            mask |= xs.contains_array(pts[:, 0]) & ys.contains_array(pts[:, 1])
        return mask

    def is_finite(self) -> bool:
        return all(b.dims == 0 for b in self.boxes())

    def points_list(self) -> list:
        return [(b.x.lo, b.y.lo) for b in self.boxes() if b.dims == 0]

    @property
    def dim(self) -> int:
        return 2

    def pieces(self) -> list:
        return [(b.dims, b) for b in self.boxes()]

    def key(self) -> tuple:
        return tuple((xs.key(), ys.key()) for xs, ys in self.strips)

    def __repr__(self) -> str:
        if not self.strips:
            return "∅"
        return "∪".join(repr(b) for b in self.boxes())

    def to_literal(self) -> list:
        return [[[_fmt(b.x.lo), _fmt(b.x.hi)], [_fmt(b.y.lo), _fmt(b.y.hi)]] for b in self.boxes()]


# ---------------------------------------------------------------------------
# Finite sets (graphs)
# ---------------------------------------------------------------------------


def _elem_key(e: Any) -> tuple:
    return (1, tuple(map(str, e))) if isinstance(e, tuple) else (0, (str(e),))


@dataclass(frozen=True, repr=False)
class FiniteSet(Region):
    elements: tuple = ()
    ambient: str = "graph"

    @classmethod
    def of(cls, elements: Iterable[Any], ambient: str = "graph") -> "FiniteSet":
        return cls(tuple(sorted(set(elements), key=_elem_key)), ambient)

    def _new(self, elems: Iterable[Any]) -> "FiniteSet":
        return FiniteSet.of(elems, self.ambient)

    def is_empty(self) -> bool:
        return not self.elements

    def union(self, other):
        self._check(other)
        return self._new(set(self.elements) | set(other.elements))

    def intersection(self, other):
        self._check(other)
        return self._new(set(self.elements) & set(other.elements))

    def difference(self, other):
        self._check(other)
        return self._new(set(self.elements) - set(other.elements))

    def closure(self) -> "FiniteSet":
        # discrete vertices; an edge's closure adds its endpoints
        extra = [v for e in self.elements if isinstance(e, tuple) for v in e]
        return self._new(list(self.elements) + extra)

    def contains(self, x: Any) -> bool:
        return x in self.elements

    def contains_array(self, xs: Sequence[Any]) -> np.ndarray:
        return np.array([x in self.elements for x in xs], dtype=bool)

    def is_finite(self) -> bool:
        return True

    def points_list(self) -> list:
        return list(self.elements)

    @property
    def dim(self) -> int:
        return 0

    def pieces(self) -> list:
        return [(1 if isinstance(e, tuple) else 0, e) for e in self.elements]

    def key(self) -> tuple:
        return self.elements

    def __repr__(self) -> str:
        if not self.elements:
            return "∅"
        return "{" + ",".join(map(str, self.elements)) + "}"


# ---------------------------------------------------------------------------
# Spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval1D:
    bounds: tuple = (-INF, INF)
    ambient: str = "R"

    def full(self) -> IntervalSet:
        lo, hi = num(self.bounds[0]), num(self.bounds[1])
        return IntervalSet.of(Interval(lo, hi))

    def empty(self) -> IntervalSet:
        return IntervalSet()

    def cell(self, literal: Any) -> IntervalSet:
        if isinstance(literal, Region):
            return literal
        if isinstance(literal, (list, tuple)) and len(literal) == 2 and not isinstance(literal[0], (list, tuple)):
            return IntervalSet.closed(literal[0], literal[1])
        if isinstance(literal, (int, float, Fraction, str)):
            return IntervalSet.point(literal)
        raise MixedSpaces(f"{literal!r} is not an interval cell")


@dataclass(frozen=True)
class Grid2D:
    bounds: tuple = ((0, 1), (0, 1))
    resolution: tuple = (1, 1)
    ambient: str = "R2"

    def _edges(self, axis: int) -> list:
        lo, hi = num(self.bounds[axis][0]), num(self.bounds[axis][1])
        n = self.resolution[axis]
        return [lo + (hi - lo) * Fraction(i, n) for i in range(n + 1)]

    def full(self) -> BoxSet:
        (x0, x1), (y0, y1) = self.bounds
        return BoxSet.box(x0, x1, y0, y1)

    def empty(self) -> BoxSet:
        return BoxSet()

    def grid_cell(self, i: int, j: int) -> BoxSet:
        xs, ys = self._edges(0), self._edges(1)
        return BoxSet.box(xs[i], xs[i + 1], ys[j], ys[j + 1])

    def cells(self) -> list[tuple[int, int]]:
        return [(i, j) for j in range(self.resolution[1]) for i in range(self.resolution[0])]

    def cell(self, literal: Any) -> BoxSet:
        if isinstance(literal, Region):
            return literal
        if isinstance(literal, (list, tuple)) and len(literal) == 2 and all(isinstance(v, int) for v in literal):
            return self.grid_cell(*literal)
        if isinstance(literal, (list, tuple)) and len(literal) == 2 and all(isinstance(v, (list, tuple)) for v in literal):
            (x0, x1), (y0, y1) = literal
            return BoxSet.box(x0, x1, y0, y1)
        raise MixedSpaces(f"{literal!r} is not a grid cell")


@dataclass(frozen=True)
class GraphSpace:
    vertices: tuple
    edges: tuple
    name: str = "graph"

    @property
    def ambient(self) -> str:
        return "graph:" + self.name

    def full(self) -> FiniteSet:
        return FiniteSet.of(list(self.vertices) + list(self.edges), self.ambient)

    def empty(self) -> FiniteSet:
        return FiniteSet((), self.ambient)

    def cell(self, literal: Any) -> FiniteSet:
        if isinstance(literal, Region):
            return literal
        if isinstance(literal, (list, tuple)):
            literal = tuple(literal)
            if literal not in self.edges:
                raise MixedSpaces(f"{literal!r} is not an edge of {self.name}")
        elif literal not in self.vertices:
            raise MixedSpaces(f"{literal!r} is not a vertex of {self.name}")
        return FiniteSet.of([literal], self.ambient)

    @classmethod
    def from_file(cls, path: str) -> "GraphSpace":
        with open(path) as fh:
            data = json.load(fh)
        return cls.from_dict(data, name=data.get("name", path))

    @classmethod
    def from_dict(cls, data: dict, name: str = "graph") -> "GraphSpace":
        verts = tuple(data["vertices"])
        edges = tuple(tuple(e) for e in data["edges"])
        for u, v in edges:
            if u not in verts or v not in verts:
                raise ValueError(f"edge {(u, v)} references unknown vertex")
        return cls(verts, edges, name)


@dataclass(frozen=True)
class Subspace:
    """Derived space of measurable subsets of ``carrier``."""

    parent: Any
    carrier: Region

    @property
    def ambient(self) -> str:
        return self.parent.ambient

    def full(self) -> Region:
        return self.carrier

    def empty(self) -> Region:
        return self.parent.empty()

    def cell(self, literal: Any) -> Region:
        return self.parent.cell(literal).intersection(self.carrier)

    def is_member(self, region: Region) -> bool:
        return region.issubset(self.carrier)


Space = Interval1D | Grid2D | GraphSpace | Subspace


def region_normalize(cells: Sequence[Any], space: Any = None) -> Region:
    """Canonical region of a list of cells (union, merged, sorted)."""
    if space is None:
        space = _infer_space(cells)
    regions = [space.cell(c) for c in cells]
    out = space.empty()
    for r in regions:
        if r.ambient != out.ambient or type(r) is not type(out):
            raise MixedSpaces(f"cell {r!r} is not in {space!r}")
        out = out.union(r)
    return out


def _infer_space(cells: Sequence[Any]) -> Any:
    for c in cells:
        if isinstance(c, IntervalSet):
            return Interval1D()
        if isinstance(c, BoxSet):
            return Grid2D()
        if isinstance(c, FiniteSet):
            return _AnyFinite(c.ambient)
        if isinstance(c, (list, tuple)) and c and isinstance(c[0], (list, tuple)):
            return Grid2D()
    return Interval1D()


@dataclass(frozen=True)
class _AnyFinite:
    ambient: str

    def empty(self) -> FiniteSet:
        return FiniteSet((), self.ambient)

    def cell(self, literal: Any) -> Region:
        return literal


def region_ops(a: Region, b: Region) -> dict:
    """Union, intersection and difference of two regions in one pass."""
    return {"union": a.union(b), "intersection": a.intersection(b), "difference": a.difference(b)}


def subspace_algebra(S: Region, space: Any) -> Subspace:
    if S.is_empty():
        raise EmptyCarrier("subspace of the empty region")
    if S.ambient != space.ambient:
        raise MixedSpaces(f"{S!r} is not a region of {space!r}")
    return Subspace(space, S)


def parse_region(literal: Any, space: Any = None) -> Region:
    """Problem-file region literal.

    ``[[a,b],[c,d]]`` intervals, ``{"cells": [[i,j],...]}`` grid cells,
    ``{"boxes": [[[x0,x1],[y0,y1]],...]}`` planar boxes, ``{"points": [...]}``
    line points and ``{"vertices": [...], "edges": [...]}`` graph elements.
    Interval endpoints may be given as ``"(a"`` / ``"b)"`` strings for open ends.
    """
    if isinstance(literal, Region):
        return literal
    if isinstance(literal, dict):
        if "cells" in literal:
            sp = space if isinstance(space, Grid2D) else Grid2D()
            return region_normalize([tuple(c) for c in literal["cells"]], sp)
        if "boxes" in literal:
            return BoxSet.from_boxes(
                Box(Interval(num(x0), num(x1)), Interval(num(y0), num(y1))) for (x0, x1), (y0, y1) in literal["boxes"]
            )
        if "points" in literal:
            return IntervalSet.points(literal["points"])
        if "vertices" in literal or "edges" in literal:
            ambient = space.ambient if space is not None else "graph"
            elems = list(literal.get("vertices", [])) + [tuple(e) for e in literal.get("edges", [])]
            return FiniteSet.of(elems, ambient)
        raise ValueError(f"unrecognised region literal {literal!r}")
    ivs = []
    for item in literal:
        lo, hi = item
        lc = hc = True
        if isinstance(lo, str) and lo.startswith("("):
            lo, lc = lo[1:], False
        if isinstance(hi, str) and hi.endswith(")"):
            hi, hc = hi[:-1], False
        ivs.append(Interval(num(lo), num(hi), lc, hc))
    return IntervalSet.of(*ivs)


# ---------------------------------------------------------------------------
# Vectorised cells (used by approximation policies)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Cells:
    """Boxes in ``dim`` dimensions as float arrays of shape (n, dim)."""

    lo: np.ndarray
    hi: np.ndarray
    lo_closed: np.ndarray
    hi_closed: np.ndarray
    ambient: str = "R"

    def __len__(self) -> int:
        return self.lo.shape[0]

    @property
    def dim(self) -> int:
        return self.lo.shape[1]

    def positive_dims(self) -> np.ndarray:
        return (self.hi > self.lo).sum(axis=1)

    def region(self, i: int) -> Region:
        ivs = [
            Interval(num(float(self.lo[i, k])), num(float(self.hi[i, k])), bool(self.lo_closed[i, k]), bool(self.hi_closed[i, k]))
            for k in range(self.dim)
        ]
        if self.dim == 1:
            return IntervalSet.of(ivs[0])
        return BoxSet.from_boxes([Box(ivs[0], ivs[1])])

    def take(self, mask: np.ndarray) -> "Cells":
        return Cells(self.lo[mask], self.hi[mask], self.lo_closed[mask], self.hi_closed[mask], self.ambient)


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------


class Measure:
    """Map from regions into an extended magma, sending ∅ to the identity.

    ``of_cells`` is an optional vectorised evaluation on :class:`Cells`
    lying inside ``within``; it returns ``None`` when unsupported.
    """

    codomain: MagmaStructure
    additive: bool = False
    space: Any = None
    name: str = "measure"

    def __init__(self, codomain: MagmaStructure, additive: bool = False, space: Any = None, name: str = "measure"):
        if additive and not codomain.commutative:
            raise ValueError("additive measures need a commutative codomain")
        self.codomain = codomain
        self.additive = additive
        self.space = space
        self.name = name

    def __call__(self, region: Region) -> Any:
        if region.is_empty():
            return self.codomain.identity
        return self.evaluate(region)

    def evaluate(self, region: Region) -> Any:  # pragma: no cover - abstract
        raise NotImplementedError

    def of_cells(self, cells: Cells, within: Optional[Region] = None) -> Optional[np.ndarray]:
        return None

    def atoms(self) -> list:
        """Points carrying positive mass on their own (used to align tags)."""
        return []

    def restrict(self, S: Region) -> "Measure":
        return RestrictedMeasure(self, S)

    def scaled(self, k: Any) -> "Measure":
        raise NotImplementedError(f"{self.name} does not support scaling")

    def __repr__(self) -> str:
        return self.name


def _default_codomain() -> MagmaStructure:
    return get_magma("ext_real_add")


class Lebesgue(Measure):
    """Length on the line, area in the plane (times ``scale``)."""

    def __init__(self, dim: int = 1, scale: Any = 1, codomain: Optional[MagmaStructure] = None):
        super().__init__(codomain or _default_codomain(), True, None, "lebesgue" if scale == 1 else f"{scale}*lebesgue")
        self.dim = dim
        self.scale = scale

    def evaluate(self, region: Region) -> float:
        if isinstance(region, IntervalSet):
            size = region.length()
        elif isinstance(region, BoxSet):
            if self.dim == 1:
                raise NotMeasurable("1D Lebesgue measure on a planar region")
            size = Fraction(0)
            for b in region.boxes():
                size = size + b.area()
        else:
            raise NotMeasurable("Lebesgue measure on a finite set")
        return self.scale * _to_float(size) if size != 0 else 0.0

    def of_cells(self, cells: Cells, within=None):
        if cells.dim != self.dim:
            return None
        return self.scale * np.prod(cells.hi - cells.lo, axis=1)

    def scaled(self, k):
        return Lebesgue(self.dim, self.scale * k, self.codomain)


def _to_float(v: Any) -> float:
    if isinstance(v, float):
        return v
    return float(v)


class Arclength(Measure):
    """One-dimensional Hausdorff measure of axis-aligned pieces in the plane."""

    def __init__(self, scale: Any = 1, codomain: Optional[MagmaStructure] = None):
        super().__init__(codomain or _default_codomain(), True, None, "arclength" if scale == 1 else f"{scale}*arclength")
        self.scale = scale

    def evaluate(self, region: Region) -> float:
        if isinstance(region, IntervalSet):
            return self.scale * _to_float(region.length()) if region.length() != 0 else 0.0
        if not isinstance(region, BoxSet):
            raise NotMeasurable("arclength on a finite set")
        total = Fraction(0)
        for b in region.boxes():
            if b.dims == 2:
                return INF
            if b.dims == 1:
                total = total + (b.x.length if not b.x.is_point else b.y.length)
        return self.scale * _to_float(total) if total != 0 else 0.0

    def of_cells(self, cells: Cells, within=None):
        pos = cells.positive_dims()
        lengths = np.max(cells.hi - cells.lo, axis=1)
        out = np.where(pos >= 2, INF, np.where(pos == 1, lengths, 0.0))
        return self.scale * out

    def scaled(self, k):
        return Arclength(self.scale * k, self.codomain)


class Counting(Measure):
    """Number of isolated points (``+inf`` as soon as a set has extent)."""

    def __init__(self, scale: Any = 1, codomain: Optional[MagmaStructure] = None):
        super().__init__(codomain or _default_codomain(), True, None, "counting" if scale == 1 else f"{scale}*counting")
        self.scale = scale

    def evaluate(self, region: Region) -> float:
        if isinstance(region, FiniteSet):
            return float(self.scale * len(region.elements))
        if not region.is_finite():
            return INF
        return float(self.scale * len(region.points_list()))

    def of_cells(self, cells: Cells, within=None):
        pos = cells.positive_dims()
        included = np.all(cells.lo_closed & cells.hi_closed, axis=1)
        return np.where(pos > 0, INF, np.where(included, float(self.scale), 0.0))

    def scaled(self, k):
        return Counting(self.scale * k, self.codomain)


class Dirac(Measure):
    def __init__(self, point: Any, scale: Any = 1, codomain: Optional[MagmaStructure] = None):
        pt = tuple(num(p) for p in point) if isinstance(point, (tuple, list)) else num(point)
        super().__init__(codomain or _default_codomain(), True, None, f"dirac:{point}")
        self.point = pt
        self.scale = scale

    def evaluate(self, region: Region) -> float:
        return float(self.scale) if region.contains(self.point) else 0.0

    def atoms(self) -> list:
        return [self.point]

    def of_cells(self, cells: Cells, within=None):
        p = np.atleast_1d(np.asarray(self.point, dtype=float))
        if p.shape[0] != cells.dim:
            return None
        inside = np.ones(len(cells), dtype=bool)
        for k in range(cells.dim):
            lo, hi = cells.lo[:, k], cells.hi[:, k]
            inside &= (lo < p[k]) | ((lo == p[k]) & cells.lo_closed[:, k])
            inside &= (p[k] < hi) | ((hi == p[k]) & cells.hi_closed[:, k])
        return np.where(inside, float(self.scale), 0.0)

    def scaled(self, k):
        return Dirac(self.point, self.scale * k, self.codomain)


class ZeroMeasure(Measure):
    def __init__(self, codomain: Optional[MagmaStructure] = None):
        cod = codomain or _default_codomain()
        super().__init__(cod, cod.commutative, None, "zero")

    def evaluate(self, region: Region) -> Any:
        return self.codomain.identity

    def of_cells(self, cells: Cells, within=None):
        if not self.codomain.numeric:
            return None
        return np.full(len(cells), float(self.codomain.identity))

    def scaled(self, k):
        return self


class TableMeasure(Measure):
    """Explicit region → value assignments.

    Additive tables treat entries as disjoint cells: a region is measured by
    folding the values of the entries it contains, and must be an exact union
    of entries. Non-additive tables are direct lookups.
    """

    def __init__(self, entries: Sequence[tuple], codomain: Optional[MagmaStructure] = None, additive: bool = False, name: str = "table"):
        cod = codomain or _default_codomain()
        super().__init__(cod, additive, None, name)
        self.entries = tuple((r, v) for r, v in entries)
        if additive:
            for (a, _), (b, _) in itertools.combinations(self.entries, 2):
                if not a.disjoint(b):
                    raise ValueError("additive table entries must be disjoint")

    def evaluate(self, region: Region) -> Any:
        if not self.additive:
            for r, v in self.entries:
                if r == region:
                    return v
            raise NotMeasurable(f"{self.name} has no entry for {region!r}")
        covered = region.intersection(region)
        acc = []
        for r, v in self.entries:
            if r.issubset(region):
                acc.append(v)
                covered = covered.difference(r)
            elif not r.disjoint(region):
                raise NotMeasurable(f"{region!r} splits table cell {r!r}")
        if not covered.is_empty():
            raise NotMeasurable(f"{region!r} is not covered by {self.name}")
        return fold_ordered(self.codomain, acc)

    @classmethod
    def from_file(cls, path: str, space: Any = None) -> "TableMeasure":
        with open(path) as fh:
            data = json.load(fh)
        entries = [(parse_region(e["region"], space), float(e["value"])) for e in data["entries"]]
        cod = get_magma(data.get("codomain", "ext_real_add"))
        return cls(entries, cod, bool(data.get("additive", False)), name=f"table:{path}")


class EdgeWeights(Measure):
    """Weighted counting on graph elements (vertices/edges)."""

    def __init__(self, weights: dict, default: float = 0.0, codomain: Optional[MagmaStructure] = None, name: str = "weights"):
        super().__init__(codomain or _default_codomain(), True, None, name)
        self.weights = dict(weights)
        self.default = default

    def evaluate(self, region: Region) -> float:
        if not isinstance(region, FiniteSet):
            raise NotMeasurable("edge weights live on graph regions")
        return float(sum(self.weights.get(e, self.default) for e in region.elements))

    def scaled(self, k):
        return EdgeWeights({e: k * w for e, w in self.weights.items()}, k * self.default, self.codomain, f"{k}*{self.name}")


class SumMeasure(Measure):
    def __init__(self, mu: Measure, nu: Measure):
        super().__init__(mu.codomain, mu.additive and nu.additive, mu.space, f"({mu.name}+{nu.name})")
        self.mu, self.nu = mu, nu

    def evaluate(self, region: Region) -> Any:
        return mag_op(self.codomain, self.mu(region), self.nu(region))

    def atoms(self) -> list:
        return self.mu.atoms() + [p for p in self.nu.atoms() if p not in self.mu.atoms()]

    def of_cells(self, cells, within=None):
        if self.codomain.name not in ("ext_real_add", "ext_nonneg_add", "real_add"):
            return None
        a, b = self.mu.of_cells(cells, within), self.nu.of_cells(cells, within)
        if a is None or b is None:
            return None
        if (np.isinf(a) & np.isinf(b)).any():
            return None
        return a + b


class OrientedMeasure(Measure):
    def __init__(self, iota: OrientationMap, mu: Measure):
        name = mu.name if iota.symbol == "e" else f"{iota.symbol}∘{mu.name}"
        super().__init__(mu.codomain, mu.additive, mu.space, name)
        self.iota, self.mu = iota, mu

    def evaluate(self, region: Region) -> Any:
        return self.iota(self.mu(region))

    def atoms(self) -> list:
        return self.mu.atoms()

    def of_cells(self, cells, within=None):
        base = self.mu.of_cells(cells, within)
        if base is None:
            return None
        out = self.iota(base)
        return np.where(out == 0, 0.0, out) if isinstance(out, np.ndarray) else out


class RestrictedMeasure(Measure):
    def __init__(self, mu: Measure, S: Region):
        super().__init__(mu.codomain, mu.additive, None, f"{mu.name}|{S!r}")
        self.mu, self.S = mu, S

    def evaluate(self, region: Region) -> Any:
        return self.mu(region.intersection(self.S))

    def atoms(self) -> list:
        return [p for p in self.mu.atoms() if self.S.contains(p)]

    def of_cells(self, cells, within=None):
        if within is not None and within.issubset(self.S):
            return self.mu.of_cells(cells, within)
        return None

    def scaled(self, k):
        return RestrictedMeasure(self.mu.scaled(k), self.S)


class FreeMeasure(Measure):
    """Formal measure: each nonempty region gets its own atom."""

    def __init__(self, label: str = "μ", codomain: Optional[MagmaStructure] = None):
        from .magma import free_magma

        super().__init__(codomain or free_magma(None, name="free"), False, None, label)
        self.label = label

    def evaluate(self, region: Region):
        return Atom(f"{self.label}{region!r}")


def zero_measure(codomain: Optional[MagmaStructure] = None) -> ZeroMeasure:
    return ZeroMeasure(codomain)


@dataclass(frozen=True)
class Measured:
    value: Any
    kind: str  # "zero" | "finite" | "infinite"


def measure_eval(mu: Measure, A: Region) -> Measured:
    v = mu(A)
    cod = mu.codomain
    if cod.is_extension(v):
        kind = "infinite"
    elif cod.equal(v, cod.identity) if cod.numeric else v == cod.identity:
        kind = "zero"
    else:
        kind = "finite"
    return Measured(v, kind)


def measure_add(mu: Measure, nu: Measure) -> Measure:
    if mu.codomain.name != nu.codomain.name:
        raise MixedSpaces("measures with different codomains")
    return SumMeasure(mu, nu)


def oriented_measure(iota: OrientationMap, mu: Measure) -> Measure:
    if iota.symbol == "e":
        return mu
    return OrientedMeasure(iota, mu)


def parse_measure(name: str, space: Any = None, codomain: Optional[MagmaStructure] = None) -> Measure:
    """Problem-file measure names: lebesgue, area, arclength, counting, dirac:<p>, table:<file>."""
    dim = 2 if isinstance(space, Grid2D) else 1
    if name in ("lebesgue", "area"):
        return Lebesgue(2 if name == "area" else dim, codomain=codomain)
    if name == "arclength":
        return Arclength(codomain=codomain)
    if name == "counting":
        return Counting(codomain=codomain)
    if name == "zero":
        return ZeroMeasure(codomain)
    if name.startswith("dirac:"):
        spec = name[6:]
        pt = tuple(num(p) for p in spec.split(",")) if "," in spec else num(spec)
        return Dirac(pt, codomain=codomain)
    if name.startswith("table:"):
        return TableMeasure.from_file(name[6:], space)
    if name.startswith("free"):
        return FreeMeasure(name.split(":", 1)[1] if ":" in name else "μ")
    raise KeyError(f"unknown measure {name!r}")
