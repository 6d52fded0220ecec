"""Function expressions evaluated pointwise on the line or in the plane."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from .region import parse_region

X, Y = sympy.symbols("x y", real=True)
_LOCALS = {"x": X, "y": Y, "e": sympy.E, "pi": sympy.pi, "exp": sympy.exp, "log": sympy.log,
           "abs": sympy.Abs, "sqrt": sympy.sqrt, "sin": sympy.sin, "cos": sympy.cos}


class FunctionExpr:
    """Base class; subclasses implement :meth:`eval_points`."""

    dim: int = 1

    def eval_points(self, pts: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def __call__(self, *coords: Any) -> Any:
        pt = np.array([[float(c) for c in coords]])
        out = self.eval_points(pt)[0]
        return float(out) if isinstance(out, (np.floating, float, int)) else out

    def pieces(self) -> Optional[list]:
        """``[(region or None, value), ...]`` for piecewise-constant functions."""
        return None

    def symbolic(self) -> Optional[sympy.Expr]:
        return None


def _as_points(pts: Any, dim: int) -> np.ndarray:
    a = np.asarray(pts, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1) if dim == 1 else a.reshape(1, -1)
    return a


@dataclass(frozen=True, eq=False)
class Constant(FunctionExpr):
    value: Any
    dim: int = 1

    def eval_points(self, pts):
        n = len(pts)
        if isinstance(self.value, (int, float)):
            return np.full(n, float(self.value))
        out = np.empty(n, dtype=object)
        out[:] = [self.value] * n
        return out

    def pieces(self):
        return [(None, self.value)]

    def symbolic(self):
        if isinstance(self.value, (int, float)):
            return sympy.nsimplify(self.value)
        return None

    def __repr__(self) -> str:
        return f"Constant({self.value!r})"


@dataclass(frozen=True, eq=False)
class SymExpr(FunctionExpr):
    """Expression string in ``x`` (and ``y``) compiled to a numpy function."""

    text: str
    dim: int = 1
    expr: Any = field(default=None, repr=False)
    fn: Any = field(default=None, repr=False)

    def __post_init__(self):
        expr = self.expr
        if expr is None:
            expr = parse_expr(self.text, local_dict=_LOCALS, transformations=standard_transformations + (convert_xor,))
        unknown = expr.free_symbols - {X, Y}
        if unknown:
            raise ValueError(f"unknown symbols {sorted(map(str, unknown))} in {self.text!r}")
        dim = max(self.dim, 2 if Y in expr.free_symbols else 1)
        object.__setattr__(self, "expr", expr)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "fn", sympy.lambdify((X, Y), expr, modules="numpy"))

    @classmethod
    def from_sympy(cls, expr: sympy.Expr, dim: int = 1) -> "SymExpr":
        return cls(str(expr), dim, expr)

    def eval_points(self, pts):
        pts = _as_points(pts, self.dim)
        xs = pts[:, 0]
        ys = pts[:, 1] if pts.shape[1] > 1 else np.zeros_like(xs)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = self.fn(xs, ys)
        return np.broadcast_to(np.asarray(out, dtype=float), xs.shape).copy()

    def symbolic(self):
        return self.expr

    def diff(self, var: str = "x") -> "SymExpr":
        return SymExpr.from_sympy(sympy.diff(self.expr, X if var == "x" else Y), self.dim)

    def __repr__(self) -> str:
        return f"SymExpr({self.text!r})"


@dataclass(frozen=True, eq=False)
class Named(FunctionExpr):
    """Numpy callable under a name (for functions with no closed-form text)."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    dim: int = 1

    def eval_points(self, pts):
        pts = _as_points(pts, self.dim)
        args = [pts[:, k] for k in range(self.dim)]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.asarray(self.fn(*args), dtype=float)


@dataclass(frozen=True, eq=False)
class Piecewise(FunctionExpr):
    """Disjoint pieces; the value off every piece is ``identity``."""

    parts: tuple
    identity: Any = 0.0
    dim: int = 1

    def __post_init__(self):
        regions = [r for r, _ in self.parts]
        for i in range(len(regions)):
            for j in range(i + 1, len(regions)):
                if not regions[i].disjoint(regions[j]):
                    raise ValueError(f"pieces {regions[i]!r} and {regions[j]!r} overlap")

    def eval_points(self, pts):
        pts = _as_points(pts, self.dim)
        numeric = isinstance(self.identity, (int, float))
        out = np.full(len(pts), float(self.identity)) if numeric else np.array([self.identity] * len(pts), dtype=object)
        for region, fx in self.parts:
            mask = region.contains_array(pts)
            if mask.any():
                out[mask] = fx.eval_points(pts[mask])
        return out

    def pieces(self):
        out = []
        for region, fx in self.parts:
            sub = fx.pieces()
            if sub is None or len(sub) != 1 or sub[0][0] is not None:
                return None
            out.append((region, sub[0][1]))
        return out


@dataclass(frozen=True, eq=False)
class GridFunction(FunctionExpr):
    """Piecewise constant on a tensor grid; cells are half-open, last one closed.

    Points outside the grid take the value of the nearest cell.
    """

    edges: tuple
    values: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:  # type: ignore[override]
        return len(self.edges)

    def _index(self, coords: np.ndarray, axis: int) -> np.ndarray:
        e = np.asarray(self.edges[axis], dtype=float)
        idx = np.searchsorted(e, coords, side="right") - 1
        return np.clip(idx, 0, len(e) - 2)

    def eval_points(self, pts):
        pts = _as_points(pts, self.dim)
        idx = tuple(self._index(pts[:, k], k) for k in range(self.dim))
        return np.asarray(self.values)[idx]

    def cell_regions(self) -> list:
        from .region import Box, BoxSet, Interval, IntervalSet, num

        def ivs(axis):
            e = self.edges[axis]
            n = len(e) - 1
            return [Interval(num(e[i]), num(e[i + 1]), True, i == n - 1) for i in range(n)]

        if self.dim == 1:
            return [(i, IntervalSet.of(iv)) for i, iv in enumerate(ivs(0))]
        out = []
        for i, xi in enumerate(ivs(0)):
            for j, yj in enumerate(ivs(1)):
                out.append(((i, j), BoxSet.from_boxes([Box(xi, yj)])))
        return out

    def pieces(self):
        vals = np.asarray(self.values)
        return [(r, float(vals[k])) for k, r in self.cell_regions()]


@dataclass(frozen=True, eq=False)
class Interpolant(FunctionExpr):
    """Piecewise-linear interpolation through (xs, ys), extrapolated linearly."""

    xs: np.ndarray = field(repr=False)
    ys: np.ndarray = field(repr=False)
    dim: int = 1

    def eval_points(self, pts):
        t = _as_points(pts, 1)[:, 0]
        xs, ys = np.asarray(self.xs, float), np.asarray(self.ys, float)
        if len(xs) == 1:
            return np.full(t.shape, ys[0])
        out = np.interp(t, xs, ys)
        lo, hi = t < xs[0], t > xs[-1]
        out[lo] = ys[0] + (t[lo] - xs[0]) * (ys[1] - ys[0]) / (xs[1] - xs[0])
        out[hi] = ys[-1] + (t[hi] - xs[-1]) * (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        return out


@dataclass(frozen=True, eq=False)
class GraphFunction(FunctionExpr):
    """Values on graph vertices and edges (``default`` elsewhere)."""

    values: dict = field(default_factory=dict)
    default: float = 0.0
    dim: int = 0

    def __call__(self, element: Any) -> Any:
        if isinstance(element, list):
            element = tuple(element)
        return self.values.get(element, self.default)

    def eval_points(self, pts):
        return np.array([self(p) for p in pts], dtype=float)


def parse_function(obj: Any, dim: int = 1, space: Any = None) -> FunctionExpr:
    """Problem-file function: expression string, number, or piecewise object.

    ``{"piecewise": [{"region": <region literal>, "f": <function>}], "identity": 0}``
    """
    if isinstance(obj, FunctionExpr):
        return obj
    if isinstance(obj, bool):
        raise ValueError("boolean is not a function")
    if isinstance(obj, (int, float)):
        return Constant(float(obj), dim)
    if isinstance(obj, str):
        return SymExpr(obj, dim)
    if isinstance(obj, dict) and "piecewise" in obj:
        parts = tuple((parse_region(p["region"], space), parse_function(p["f"], dim, space)) for p in obj["piecewise"])
        return Piecewise(parts, float(obj.get("identity", 0.0)), dim)
    raise ValueError(f"unrecognised function literal {obj!r}")
