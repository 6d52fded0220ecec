"""Oriented chains, integration over chains, and integrable chain complexes."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional, Sequence

import numpy as np

from .expr import Constant, FunctionExpr, Piecewise, SymExpr
from .integrate import (
    CalculusChoice,
    Defined,
    FundamentallyUndefinedAtCap,
    IAReport,
    NoNumericLimitAtCap,
    OutsideDomain,
    Undefined,
    get_calculus,
    ia_integrate,
)
from .magma import Atom, fold_ordered
from .region import (
    Arclength,
    BoxSet,
    Cells,
    Counting,
    Dirac,
    FiniteSet,
    FreeMeasure,
    Grid2D,
    GraphSpace,
    Interval,
    Interval1D,
    IntervalSet,
    Lebesgue,
    Measure,
    Region,
    num,
    oriented_measure,
    parse_region,
)


class LevelMismatch(ValueError):
    pass


class NotInCollection(ValueError):
    pass


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Chain:
    """Ordered formal sum of oriented regions at grading ``level``."""

    terms: tuple = ()
    level: int = 0

    @classmethod
    def of(cls, level: int, *terms: tuple) -> "Chain":
        return cls(tuple((o, r) for o, r in terms), level)

    def is_empty(self) -> bool:
        return not self.terms

    def base_set(self) -> Optional[Region]:
        """Union of term regions (``None`` for the empty chain)."""
        out = None
        for _, r in self.terms:
            out = r if out is None else out.union(r)
        return out

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return f"∅_{self.level}"
        return " ++ ".join(f"{o}·{r!r}" for o, r in self.terms)

    def to_literal(self) -> list:
        return [{"o": o, "r": r.to_literal() if hasattr(r, "to_literal") else list(r.elements)} for o, r in self.terms]


def empty_chain(level: int) -> Chain:
    return Chain((), level)


def chain_add(c1: Chain, c2: Chain) -> Chain:
    if c1.level != c2.level:
        raise LevelMismatch(f"cannot add a {c1.level}-chain and a {c2.level}-chain")
    return Chain(c1.terms + c2.terms, c1.level)


def same_base(c1: Chain, c2: Chain) -> bool:
    a, b = c1.base_set(), c2.base_set()
    if a is None or b is None:
        return (a is None or a.is_empty()) and (b is None or b.is_empty())
    return a == b


_FLIP = {"e": "neg", "neg": "e"}


def compose_symbols(outer: str, inner: str) -> str:
    """Orientation symbol of ``outer ∘ inner`` in the group {e, neg}."""
    if inner == "e":
        return outer
    if outer == "e":
        return inner
    if outer in _FLIP and inner in _FLIP:
        return "e" if outer == inner else "neg"
    return f"{outer}∘{inner}"


def reduce_chain(c: Chain) -> Chain:
    """Cancel ``e·S`` against ``neg·S``; valid for commutative group-valued calculi.

    Regions keep the position of their first occurrence.
    """
    net: dict[Any, int] = {}
    first: dict[Any, Region] = {}
    order: list[Any] = []
    for o, r in c.terms:
        if o not in _FLIP:
            return c
        k = (type(r).__name__, r.ambient, r.key())
        if k not in net:
            net[k] = 0
            first[k] = r
            order.append(k)
        net[k] += 1 if o == "e" else -1
    terms = []
    for k in order:
        n = net[k]
        terms.extend([("e" if n > 0 else "neg", first[k])] * abs(n))
    return Chain(tuple(terms), c.level)


# ---------------------------------------------------------------------------
# Integrable collections and complexes
# ---------------------------------------------------------------------------


def _piece_dim(region: Region) -> int:
    return max((d for d, _ in region.pieces()), default=0)


@dataclass(frozen=True, eq=False)
class IntegrableCollection:
    """Regions inside the union of ``generators`` whose pieces have dimension ≤ ``max_dim``.

    The family is closed under finite unions and under measurable subsets
    of members by construction of the membership predicate.
    """

    generators: tuple
    max_dim: int
    finite: bool = False

    def contains(self, region: Region) -> bool:
        if region.is_empty():
            return True
        hull = self.generators[0]
        for g in self.generators[1:]:
            hull = hull.union(g)
        try:
            if not region.issubset(hull):
                return False
        except ValueError:
            return False
        if self.finite and not region.is_finite():
            return False
        return _piece_dim(region) <= self.max_dim


class ChainComplex:
    """Graded chain spaces with boundary operators; subclasses supply ``_boundary_region``."""

    name: str = "complex"
    top: int = 1
    space: Any = None
    f_monovalued: bool = True

    def __init__(self, calc: Optional[CalculusChoice] = None):
        self.calc = calc or get_calculus("riemann")

    def collection(self, level: int) -> IntegrableCollection:  # pragma: no cover - abstract
        raise NotImplementedError

    def _boundary_region(self, level: int, region: Region) -> list[tuple[str, Region]]:  # pragma: no cover
        raise NotImplementedError

    def with_calculus(self, calc: CalculusChoice) -> "ChainComplex":
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone.calc = calc
        return clone

    def validate(self, c: Chain) -> Chain:
        if not 0 <= c.level <= self.top:
            raise LevelMismatch(f"{self.name} has no level {c.level}")
        coll = self.collection(c.level)
        for o, r in c.terms:
            if not coll.contains(r):
                raise NotInCollection(f"{r!r} is not a level-{c.level} set of {self.name}")
            self.calc.orientation(o) if o in self.calc.orientations else _check_symbol(o)
        return c

    def boundary(self, c: Chain) -> Chain:
        """Term-wise boundary: ``∂(ι·S) = (ι∘ι_j)·T_j`` over the faces ``ι_j·T_j`` of S."""
        if c.level == 0:
            return empty_chain(-1)
        terms = []
        for o, r in c.terms:
            for fo, face in self._boundary_region(c.level, r):
                terms.append((compose_symbols(o, fo), face))
        return Chain(tuple(terms), c.level - 1)

    def reduced_boundary(self, c: Chain) -> Chain:
        return reduce_chain(self.boundary(c))

    def cell_chain(self, level: int, region: Region, o: str = "e") -> Chain:
        return self.validate(Chain(((o, region),), level))

    def parse_chain(self, literal: Sequence[dict], level: int) -> Chain:
        terms = tuple((t.get("o", "e"), parse_region(t["r"], self.space)) for t in literal)
        return self.validate(Chain(terms, level))


def _check_symbol(o: str) -> None:
    if o not in _FLIP and "∘" not in o:
        raise KeyError(f"unknown orientation symbol {o!r}")


class Interval1DComplex(ChainComplex):
    """Points (level 0) and intervals (level 1) inside ``bounds``."""

    top = 1

    def __init__(self, bounds: tuple = (-64, 64), calc: Optional[CalculusChoice] = None):
        super().__init__(calc)
        self.bounds = (num(bounds[0]), num(bounds[1]))
        self.space = Interval1D(self.bounds)
        self.name = "interval1d"

    def collection(self, level: int) -> IntegrableCollection:
        full = IntervalSet.closed(*self.bounds)
        return IntegrableCollection((full,), level, finite=level == 0)

    def _boundary_region(self, level, region):
        out = []
        for iv in region.intervals:
            if iv.is_point:
                continue
            out.append(("e", IntervalSet.point(iv.hi)))
            out.append(("neg", IntervalSet.point(iv.lo)))
        return out


class Rect2DComplex(ChainComplex):
    """Boxes (2), axis-parallel segments (1) and points (0) in [0,W]×[0,H].

    ``∂`` of a box lists its edges counterclockwise from the bottom edge
    (top and left carry ``neg``); ``∂`` of a segment is ``e·end ++ neg·start``.
    """

    top = 2

    def __init__(self, width: Any = 1, height: Any = 1, resolution: tuple = (4, 4), calc: Optional[CalculusChoice] = None):
        super().__init__(calc)
        self.width, self.height = num(width), num(height)
        self.space = Grid2D(((self.width * 0, self.width), (self.height * 0, self.height)), resolution)
        self.name = f"rect2d:{width}x{height}"

    def collection(self, level: int) -> IntegrableCollection:
        return IntegrableCollection((self.space.full(),), level, finite=level == 0)

    def _boundary_region(self, level, region):
        out = []
        for b in region.boxes():
            x0, x1, y0, y1 = b.x.lo, b.x.hi, b.y.lo, b.y.hi
            if level == 2 and b.dims == 2:
                out += [
                    ("e", BoxSet.box(x0, x1, y0, y0)),
                    ("e", BoxSet.box(x1, x1, y0, y1)),
                    ("neg", BoxSet.box(x0, x1, y1, y1)),
                    ("neg", BoxSet.box(x0, x0, y0, y1)),
                ]
            elif level == 1 and b.dims == 1:
                if b.x.is_point:
                    out += [("e", BoxSet.point(x0, y1)), ("neg", BoxSet.point(x0, y0))]
                else:
                    out += [("e", BoxSet.point(x1, y0)), ("neg", BoxSet.point(x0, y0))]
        return out

    def rectangles(self) -> list[BoxSet]:
        """Every grid-aligned rectangle of the complex's grid."""
        nx, ny = self.space.resolution
        xs, ys = self.space._edges(0), self.space._edges(1)
        out = []
        for i0 in range(nx):
            for i1 in range(i0 + 1, nx + 1):
                for j0 in range(ny):
                    for j1 in range(j0 + 1, ny + 1):
                        out.append(BoxSet.box(xs[i0], xs[i1], ys[j0], ys[j1]))
        return out


class GraphComplex(ChainComplex):
    """Vertices (level 0) and directed edges (level 1) of a finite graph."""

    top = 1

    def __init__(self, graph: GraphSpace, weights: Optional[dict] = None, calc: Optional[CalculusChoice] = None):
        super().__init__(calc)
        self.space = graph
        self.graph = graph
        self.weights = dict(weights or {})
        self.name = f"graph:{graph.name}"

    def collection(self, level: int) -> IntegrableCollection:
        elems = self.graph.vertices if level == 0 else self.graph.edges
        return IntegrableCollection((FiniteSet.of(elems, self.graph.ambient),), level, finite=True)

    def _boundary_region(self, level, region):
        out = []
        for e in region.elements:
            if isinstance(e, tuple):
                u, v = e
                out += [("e", FiniteSet.of([v], region.ambient)), ("neg", FiniteSet.of([u], region.ambient))]
        return out

    @classmethod
    def from_file(cls, path: str, calc: Optional[CalculusChoice] = None) -> "GraphComplex":
        with open(path) as fh:
            data = json.load(fh)
        return cls.from_dict(data, name=data.get("name", path), calc=calc)

    @classmethod
    def from_dict(cls, data: dict, name: str = "graph", calc: Optional[CalculusChoice] = None) -> "GraphComplex":
        g = GraphSpace.from_dict(data, name)
        weights = {}
        for e, w in zip(g.edges, data.get("weights", [1.0] * len(g.edges))):
            weights[e] = float(w)
        return cls(g, weights, calc)


def get_complex(name: str, calc: Optional[CalculusChoice] = None) -> ChainComplex:
    """Registry: ``interval1d``, ``rect2d:<W>x<H>``, ``graph:<file>``."""
    if name == "interval1d":
        return Interval1DComplex(calc=calc)
    if name.startswith("rect2d:"):
        w, h = name[7:].lower().split("x")
        return Rect2DComplex(w, h, calc=calc)
    if name.startswith("graph:"):
        return GraphComplex.from_file(name[6:], calc=calc)
    raise KeyError(f"unknown complex {name!r}")


# ---------------------------------------------------------------------------
# Integration on chains
# ---------------------------------------------------------------------------

_SEVERITY = (OutsideDomain, Undefined, FundamentallyUndefinedAtCap, NoNumericLimitAtCap)


def integrate_chain(
    c: Chain,
    f: FunctionExpr,
    mu: Measure,
    calc: CalculusChoice,
    policies=None,
    tol: float = 1e-6,
    cap: int = 20,
    window: int = 4,
) -> IAReport:
    """Left fold over terms of the integral of ``f`` on ``S_k`` against ``ι_k μ``."""
    G = calc.g_out
    fast = _point_chain_integral(c, f, mu, calc)
    if fast is not None:
        return fast
    values, runs = [], []
    worst = None
    for o, S in c.terms:
        iota = calc.orientation(o)
        rep = ia_integrate(f, oriented_measure(iota, mu), S, calc, policies, tol, cap, window)
        runs.extend(rep.runs)
        if isinstance(rep.verdict, Defined):
            values.append(rep.verdict.value)
        elif worst is None or _SEVERITY.index(type(rep.verdict)) < _SEVERITY.index(type(worst)):
            worst = rep.verdict
    if worst is not None:
        return IAReport(worst, tuple(runs))
    return IAReport(Defined(fold_ordered(G, values), "chain"), tuple(runs))


def _point_chain_integral(c: Chain, f: FunctionExpr, mu: Measure, calc: CalculusChoice) -> Optional[IAReport]:
    """Vectorised integral over a chain of finite point sets on the line or plane.

    Returns ``None`` whenever the shortcut does not apply, so the caller falls
    back to term-by-term integration.
    """
    elem = calc.elem
    if not c.terms or elem.g_vec is None or not calc.y.numeric:
        return None
    groups = []
    for o, S in c.terms:
        if isinstance(S, FiniteSet) or not S.is_finite():
            return None
        pts = [p if isinstance(p, tuple) else (p,) for p in S.points_list()]
        groups.append((o, np.array([[float(v) for v in p] for p in pts]).reshape(len(pts), -1)))
    allpts = np.concatenate([g for _, g in groups])
    closed = np.ones(allpts.shape, dtype=bool)
    m = mu.of_cells(Cells(allpts, allpts, closed, closed, c.terms[0][1].ambient))
    if m is None:
        return None
    fv = np.asarray(f.eval_points(allpts), dtype=float)
    m = np.asarray(m, dtype=float)
    keep = fv != float(calc.y.identity)
    if not (np.isfinite(fv) | ~keep).all() or (np.isinf(m) & keep).any():
        return None
    if calc.y.name == "pos_mul" and (fv[keep] <= 0).any():
        return None
    G = calc.g_out
    values, start = [], 0
    for o, pts in groups:
        sl = slice(start, start + len(pts))
        start += len(pts)
        mo = np.asarray(calc.orientation(o)(m[sl]), dtype=float)
        k = keep[sl]
        values.append(G.fold_array(elem.g_vec(fv[sl][k], mo[k])))
    return IAReport(Defined(fold_ordered(G, values), "finite"))


@dataclass(frozen=True)
class Probe:
    name: str
    f: FunctionExpr
    mu: Measure


def standard_probes(dim: int = 1, points: Sequence[Any] = (0.25, 0.75), measures: bool = True) -> list[Probe]:
    """Monomials of degree ≤ 4 plus a step indicator, against Lebesgue,
    counting and two Dirac measures (and arclength in the plane)."""
    fns: list[tuple[str, FunctionExpr]] = []
    if dim == 1:
        fns += [(f"x^{k}", SymExpr(f"x^{k}")) for k in range(5)]
        step = Piecewise(((IntervalSet.of(Interval(num("1/2"), math.inf, True, False)), Constant(1.0)),))
        fns.append(("step", step))
        meas: list[tuple[str, Measure]] = [("lebesgue", Lebesgue(1)), ("counting", Counting())]
        meas += [(f"dirac:{p}", Dirac(p)) for p in points]
    else:
        fns += [(f"x^{i}*y^{j}", SymExpr(f"x^{i}*y^{j}")) for i in range(5) for j in range(5 - i)]
        step = Piecewise(((BoxSet.box("1/2", 10**6, -10**6, 10**6), Constant(1.0)),), dim=2)
        fns.append(("step", step))
        pts = [(p, 1 - p) for p in points]
        meas = [("area", Lebesgue(2)), ("arclength", Arclength()), ("counting", Counting())]
        meas += [(f"dirac:{p}", Dirac(p)) for p in pts]
    return [Probe(f"{fn}|{mn}", f, mu) for fn, f in fns for mn, mu in meas]


def product_probes(points: Sequence[Any] = (0.25, 0.75)) -> list[Probe]:
    """Positive probes for the multiplicative calculus."""
    fns = [(f"exp(x^{k})", SymExpr(f"exp(x^{k})")) for k in range(4)] + [("1+x^2", SymExpr("1+x^2"))]
    meas = [("lebesgue", Lebesgue(1)), ("counting", Counting())] + [(f"dirac:{p}", Dirac(p)) for p in points]
    return [Probe(f"{fn}|{mn}", f, mu) for fn, f in fns for mn, mu in meas]


def free_probes() -> list[Probe]:
    return [
        Probe("a|μ", Constant(Atom("a")), FreeMeasure("μ")),
        Probe("b|ν", Constant(Atom("b")), FreeMeasure("ν")),
    ]


def probes_for(calc: CalculusChoice, dim: int = 1) -> list[Probe]:
    if not calc.y.numeric:
        return free_probes()
    if calc.y.name == "pos_mul":
        return product_probes()
    return standard_probes(dim)


@dataclass(frozen=True)
class Equivalent:
    probes: int


@dataclass(frozen=True)
class Distinguished:
    probe: str
    left: Any
    right: Any


@dataclass(frozen=True)
class SameDomainRequiredFailure:
    left: Any
    right: Any


def _same_verdict(G, a, b, tol: float) -> bool:
    if isinstance(a, Defined) and isinstance(b, Defined):
        if not G.numeric:
            return a.value == b.value
        return G.distance(a.value, b.value) <= tol or G.equal(a.value, b.value, tol)
    return type(a) is type(b) and not isinstance(a, Defined)


def probe_policies(calc: CalculusChoice) -> list:
    """The calculus' deterministic policies (randomised ones converge too slowly
    on the discontinuous step probe to be useful for equivalence checks)."""
    pols = [p for p in calc.policies if "random" not in p.id]
    return pols or list(calc.policies)


def integration_equivalent(
    c1: Chain,
    c2: Chain,
    calc: CalculusChoice,
    probes: Optional[Sequence[Probe]] = None,
    tol: float = 1e-6,
    cap: int = 20,
    require_same_domain: bool = True,
    policies=None,
) -> Any:
    """Equivalence modulo a probe family and a policy family.

    Integral values are compared at ``10·tol`` since each side is itself only
    known to ``tol``. ``require_same_domain=False`` skips the base-set clause
    (used for null-chain checks).
    """
    if policies is None:
        policies = probe_policies(calc)
    if require_same_domain and not same_base(c1, c2):
        return SameDomainRequiredFailure(c1.base_set(), c2.base_set())
    if probes is None:
        dims = {r.dim for _, r in c1.terms + c2.terms}
        probes = probes_for(calc, max(dims) if dims else 1)
    if not probes:
        raise ValueError("probe family is empty")
    for p in probes:
        a = integrate_chain(c1, p.f, p.mu, calc, policies, tol=tol, cap=cap).verdict
        b = integrate_chain(c2, p.f, p.mu, calc, policies, tol=tol, cap=cap).verdict
        if not _same_verdict(calc.g_out, a, b, 10 * tol):
            return Distinguished(p.name, a, b)
    return Equivalent(len(probes))


@dataclass(frozen=True)
class AdditivityReport:
    calculus: str
    passed: bool
    samples: int
    witnesses: tuple
    commutative: bool


def region_additivity_check(
    calc: CalculusChoice,
    samples: int = 5,
    seed: int = 0,
    probes: Optional[Sequence[Probe]] = None,
    orientation: str = "e",
    tol: float = 1e-6,
) -> AdditivityReport:
    """Compare ``ι·S1 ++ ι·S2`` with ``ι·(S1 ∪ S2)`` for random disjoint dyadic intervals."""
    rng = np.random.default_rng(seed)
    if probes is None:
        probes = probes_for(calc)
        if calc.y.numeric:
            probes = [p for p in probes if "counting" not in p.name][:6]
    witnesses = []
    for _ in range(samples):
        cuts = sorted(rng.choice(np.arange(1, 16), size=3, replace=False))
        a, b, cpt = (Fraction(int(v), 16) for v in cuts)
        S1 = IntervalSet.closed(0, a)
        S2 = IntervalSet.closed(b, cpt)
        split = Chain(((orientation, S1), (orientation, S2)), 1)
        whole = Chain(((orientation, S1.union(S2)),), 1)
        verdict = integration_equivalent(split, whole, calc, probes, tol=tol)
        if not isinstance(verdict, Equivalent):
            witnesses.append((split, whole, verdict))
    passed = not witnesses
    if not passed and calc.g_out.commutative and calc.g_out.associative:
        raise AssertionError(f"{calc.name}: region additivity failed over a commutative codomain")
    return AdditivityReport(calc.name, passed, samples, tuple(witnesses), calc.g_out.commutative)


def dyadic_interval_chains(denominator: int = 8, lo: Any = 0, hi: Any = 1) -> list[Chain]:
    """``e·[a,b]`` for all dyadic a < b in [lo, hi] with the given denominator."""
    pts = [num(lo) + (num(hi) - num(lo)) * Fraction(k, denominator) for k in range(denominator + 1)]
    return [Chain((("e", IntervalSet.closed(a, b)),), 1) for i, a in enumerate(pts) for b in pts[i + 1:]]


def null_equivalent(c: Chain, calc: CalculusChoice, probes: Optional[Sequence[Probe]] = None, tol: float = 1e-9) -> bool:
    """Every probe integrates to the identity over ``c`` (base-set clause dropped)."""
    verdict = integration_equivalent(c, empty_chain(c.level), calc, probes, tol=tol, require_same_domain=False)
    return isinstance(verdict, Equivalent)
