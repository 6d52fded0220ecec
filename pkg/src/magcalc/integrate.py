"""Simple functions, integration elements and integration by approximation.

An integral is computed by running several *approximation policies*, each a
generator of simple functions of increasing depth, and checking whether the
resulting simple integrals converge (in the codomain's metric chart) and agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from .expr import FunctionExpr
from .magma import (
    IDENTITY,
    E,
    NEG,
    Atom,
    Converged,
    ConvergedToInfinity,
    FreeTerm,
    MagmaStructure,
    Node,
    NoLimitAtCap,
    OrientationMap,
    UndefinedPair,
    fold_ordered,
    free_magma,
    get_magma,
    limit,
    mag_op,
    node,
)
from .region import (
    Box,
    BoxSet,
    Cells,
    FiniteSet,
    Interval,
    IntervalSet,
    Measure,
    Region,
)


class NotIntegrable(ArithmeticError):
    """Term ``k`` meets the region in a set of infinite measure, or its coefficient is not in Y."""

    def __init__(self, k: int, reason: str = "infinite measure"):
        super().__init__(f"term {k}: {reason}")
        self.k = k
        self.reason = reason


class WrongSpaceKind(ValueError):
    pass


class WrongCodomain(ValueError):
    pass


class NoAdmissiblePolicy(ValueError):
    pass


# ---------------------------------------------------------------------------
# Simple functions
# ---------------------------------------------------------------------------


def _is_identity(y: MagmaStructure, c: Any) -> bool:
    if y.numeric:
        return isinstance(c, (int, float, np.floating)) and c == y.identity
    return c is IDENTITY or c == y.identity


@dataclass(frozen=True)
class SimpleFunction:
    """Ordered indicator sum ``c_1·1_{S_1} + ... + c_n·1_{S_n}`` (left fold)."""

    terms: tuple
    y: MagmaStructure

    def __post_init__(self):
        kept = tuple((r, c) for r, c in self.terms if not _is_identity(self.y, c) and not r.is_empty())
        object.__setattr__(self, "terms", kept)

    def value_at(self, x: Any) -> Any:
        return fold_ordered(self.y, [c for r, c in self.terms if r.contains(x)])

    def concat(self, other: "SimpleFunction") -> "SimpleFunction":
        """Formal sum: terms of ``self`` followed by terms of ``other``."""
        return SimpleFunction(self.terms + other.terms, self.y)

    def __add__(self, other: "SimpleFunction") -> "SimpleFunction":
        """Pointwise sum ``x ↦ self(x) + other(x)`` on the common refinement."""
        regions = [r for r, _ in self.terms + other.terms]
        atoms: list[Region] = []
        for r in regions:
            new = []
            rest = r
            for a in atoms:
                inside, outside = a.intersection(r), a.difference(r)
                new.extend(p for p in (inside, outside) if not p.is_empty())
                rest = rest.difference(a)
            if not rest.is_empty():
                new.append(rest)
            atoms = new
        terms = []
        for a in atoms:
            left = fold_ordered(self.y, [c for r, c in self.terms if a.issubset(r)])
            right = fold_ordered(self.y, [c for r, c in other.terms if a.issubset(r)])
            terms.append((a, mag_op(self.y, left, right)))
        return SimpleFunction(tuple(terms), self.y)

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True, eq=False)
class CellSimpleFunction:
    """Simple function on disjoint cells given as arrays (fast path).

    Every cell lies inside ``within``; coefficients equal to the identity are
    skipped when integrating, matching :class:`SimpleFunction`.
    """

    cells: Cells
    coeffs: np.ndarray
    within: Region
    y: MagmaStructure

    @property
    def terms(self) -> tuple:
        return tuple(
            (self.cells.region(i), float(self.coeffs[i]))
            for i in range(len(self.cells))
            if not _is_identity(self.y, float(self.coeffs[i]))
        )

    def to_simple(self) -> SimpleFunction:
        return SimpleFunction(self.terms, self.y)

    def value_at(self, x: Any) -> Any:
        pt = np.atleast_1d(np.asarray(x, dtype=float))
        inside = np.ones(len(self.cells), dtype=bool)
        c = self.cells
        for k in range(c.dim):
            inside &= (c.lo[:, k] < pt[k]) | ((c.lo[:, k] == pt[k]) & c.lo_closed[:, k])
            inside &= (pt[k] < c.hi[:, k]) | ((c.hi[:, k] == pt[k]) & c.hi_closed[:, k])
        return fold_ordered(self.y, [float(v) for v in self.coeffs[inside]])

    def values_at(self, pts: np.ndarray) -> np.ndarray:
        """Vectorised evaluation for 1D cells (each point in at most one cell)."""
        pts = np.asarray(pts, dtype=float).reshape(-1)
        c = self.cells
        order = np.argsort(c.lo[:, 0], kind="stable")
        lo, hi = c.lo[order, 0], c.hi[order, 0]
        idx = np.clip(np.searchsorted(lo, pts, side="right") - 1, 0, len(lo) - 1)
        out = np.full(pts.shape, float(self.y.identity))
        if len(lo) == 0:
            return out
        lc, hc = c.lo_closed[order, 0][idx], c.hi_closed[order, 0][idx]
        inside = ((lo[idx] < pts) | ((lo[idx] == pts) & lc)) & ((pts < hi[idx]) | ((pts == hi[idx]) & hc))
        out[inside] = self.coeffs[order][idx][inside]
        return out

    def __len__(self) -> int:
        return len(self.cells)


# ---------------------------------------------------------------------------
# Integration elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class IntegrationElement:
    """``g: Y × M̄ → Ḡ``, bi-distributive, with a declared expansion order.

    ``tag`` is ``"y_outer"`` when ``g(a+b, m+n)`` expands as
    ``(g(a,m)+g(a,n)) + (g(b,m)+g(b,n))`` and ``"m_outer"`` for
    ``(g(a,m)+g(b,m)) + (g(a,n)+g(b,n))``. ``g_vec`` is an optional
    elementwise numpy version of ``g``.
    """

    name: str
    y: MagmaStructure
    m: MagmaStructure
    g_out: MagmaStructure
    g: Callable[[Any, Any], Any]
    tag: str = "y_outer"
    g_vec: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def __call__(self, a: Any, m: Any) -> Any:
        return self.g(a, m)


@dataclass(frozen=True)
class LawFailure:
    law: str
    args: tuple
    lhs: Any
    rhs: Any


def check_element(elem: IntegrationElement, n: int = 500, seed: int = 0, tol: float = 1e-9) -> list[LawFailure]:
    """Sample the distributivity and annihilation laws of ``elem``.

    Pairs whose right-hand side is undefined in the extended codomain are
    skipped (the law only constrains defined sums).
    """
    rng = np.random.default_rng(seed)
    G = elem.g_out
    fails: list[LawFailure] = []

    def same(u, v):
        if not G.numeric:
            return u == v
        if G.is_extension(u) or G.is_extension(v):
            return u == v
        return math.isclose(u, v, rel_tol=tol, abs_tol=tol)

    def finite_m():
        for _ in range(100):
            v = elem.m.sample(rng)
            if not elem.m.is_extension(v):
                return v
        return elem.m.identity

    for _ in range(n):
        a, b = elem.y.sample(rng), elem.y.sample(rng)
        m, k = elem.m.sample(rng), finite_m()
        n_ = finite_m()
        try:
            rhs = mag_op(G, elem.g(a, m), elem.g(b, m))
            lhs = elem.g(mag_op(elem.y, a, b), m)
            if not same(lhs, rhs):
                fails.append(LawFailure("left distributivity", (a, b, m), lhs, rhs))
        except UndefinedPair:
            pass
        for first, second, law in ((k, n_, "right distributivity"), (n_, k, "right distributivity (reversed)")):
            try:
                rhs = mag_op(G, elem.g(a, first), elem.g(a, second))
                lhs = elem.g(a, mag_op(elem.m, first, second))
                if not same(lhs, rhs):
                    fails.append(LawFailure(law, (a, first, second), lhs, rhs))
            except UndefinedPair:
                pass
        z = elem.g(elem.y.identity, m)
        if not same(z, G.identity):
            fails.append(LawFailure("annihilation", (m,), z, G.identity))
    return fails


def _riemann_g(a: float, m: float) -> float:
    if a == 0 or m == 0:
        return 0.0
    return a * m


def _riemann_g_vec(a: np.ndarray, m: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", over="ignore"):
        out = a * m
    return np.where((a == 0) | (m == 0), 0.0, out)


def _product_g(a: float, m: float) -> float:
    if a == 1 or m == 0:
        return 1.0
    try:
        return a ** m
    except OverflowError:
        return math.inf


def _product_g_vec(a: np.ndarray, m: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        out = np.power(a, m)
    return np.where((a == 1) | (m == 0), 1.0, out)


def riemann_element() -> IntegrationElement:
    return IntegrationElement(
        "a·m", get_magma("real_add"), get_magma("ext_real_add"), get_magma("ext_real_add"),
        _riemann_g, "y_outer", _riemann_g_vec,
    )


def product_element() -> IntegrationElement:
    return IntegrationElement(
        "a^m", get_magma("pos_mul"), get_magma("ext_real_add"), get_magma("ext_nonneg_mul"),
        _product_g, "y_outer", _product_g_vec,
    )


def free_element(tag: str = "y_outer") -> IntegrationElement:
    """Formal element on free magmas: ``g(a, m)`` of atoms is the atom ``g(a,m)``."""
    if tag not in ("y_outer", "m_outer"):
        raise ValueError(f"unknown arithmetic structure {tag!r}")
    fm = free_magma(None, name="free")

    def g(a: FreeTerm, m: FreeTerm) -> FreeTerm:
        if a is IDENTITY or m is IDENTITY:
            return IDENTITY
        expand_y_first = tag == "y_outer"
        if isinstance(a, Node) and (expand_y_first or not isinstance(m, Node)):
            return node(g(a.left, m), g(a.right, m))
        if isinstance(m, Node):
            return node(g(a, m.left), g(a, m.right))
        return Atom(("g", _label(a), _label(m)))

    return IntegrationElement("free g", fm, fm, fm, g, tag)


def _label(t: Any) -> Any:
    return t.label if isinstance(t, Atom) else t


def expand_structure(elem: IntegrationElement, a: FreeTerm, b: FreeTerm, m: FreeTerm, n: FreeTerm) -> FreeTerm:
    """The declared expansion of ``g(a+b, m+n)`` built directly from the tag."""
    g = lambda u, v: Atom(("g", _label(u), _label(v)))
    if elem.tag == "y_outer":
        return node(node(g(a, m), g(a, n)), node(g(b, m), g(b, n)))
    return node(node(g(a, m), g(b, m)), node(g(a, n), g(b, n)))


# ---------------------------------------------------------------------------
# Simple integrals
# ---------------------------------------------------------------------------


def _carrier_mask(y: MagmaStructure, arr: np.ndarray) -> np.ndarray:
    if y.name in ("real_add", "ext_real_add"):
        return np.isfinite(arr)
    if y.name == "pos_mul":
        return np.isfinite(arr) & (arr > 0)
    return np.array([y.contains(float(v)) for v in arr], dtype=bool)


def simple_integral(s: SimpleFunction | CellSimpleFunction, mu: Measure, U: Region, elem: IntegrationElement) -> Any:
    """Left fold over terms of ``g(c_k, μ(S_k ∩ U))``."""
    G = elem.g_out
    if isinstance(s, CellSimpleFunction):
        coeffs = np.asarray(s.coeffs, dtype=float)
        keep = coeffs != float(elem.y.identity)
        ok = _carrier_mask(elem.y, coeffs)
        if not (ok | ~keep).all():
            k = int(np.flatnonzero(~ok & keep)[0])
            raise NotIntegrable(k, f"coefficient {coeffs[k]!r} outside {elem.y.name}")
        inside = s.within.issubset(U)
        m = mu.of_cells(s.cells, s.within) if inside else None
        if m is None:
            m = np.array([
                mu(s.cells.region(i).intersection(U)) if keep[i] else 0.0 for i in range(len(s.cells))
            ], dtype=float)
        m = np.asarray(m, dtype=float)
        bad = keep & np.isinf(m)
        if bad.any():
            raise NotIntegrable(int(np.flatnonzero(bad)[0]))
        cs, ms = coeffs[keep], m[keep]
        if elem.g_vec is not None:
            vals = elem.g_vec(cs, ms)
        else:
            vals = np.array([elem.g(float(c), float(v)) for c, v in zip(cs, ms)])
        return G.fold_array(vals)
    M = elem.m
    acc = []
    for k, (S, c) in enumerate(s.terms):
        if elem.y.numeric and not elem.y.contains(c):
            raise NotIntegrable(k, f"coefficient {c!r} outside {elem.y.name}")
        mv = mu(S.intersection(U))
        if M.is_extension(mv):
            raise NotIntegrable(k)
        acc.append(elem.g(c, mv))
    return fold_ordered(G, acc)


# ---------------------------------------------------------------------------
# Partitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scheme:
    kind: str  # uniform | dyadic | randomized | weighted
    seed: int = 0
    weights: tuple = ()

    @property
    def id(self) -> str:
        if self.kind == "randomized":
            return f"randomized:{self.seed}"
        if self.kind == "weighted":
            return "weighted:" + ":".join(map(str, self.weights))
        return self.kind


def _split(lo: float, hi: float, n: int, scheme: Scheme, depth: int, comp: int) -> np.ndarray:
    """Breakpoints lo = x_0 < ... < x_n = hi."""
    if scheme.kind == "dyadic":
        step = 2.0 ** -depth
        inner = np.arange(math.floor(lo / step) + 1, math.ceil(hi / step)) * step
        inner = inner[(inner > lo) & (inner < hi)]
        return np.concatenate(([lo], inner, [hi]))
    xs = np.linspace(lo, hi, n + 1)
    if scheme.kind == "randomized" and n > 1:
        rng = np.random.default_rng([scheme.seed, depth, comp])
        h = (hi - lo) / n
        xs[1:-1] += rng.uniform(-0.4 * h, 0.4 * h, n - 1)
    return xs


def _cells_1d(ivs: Sequence[Interval], depth: int, scheme: Scheme, ambient: str) -> Cells:
    los, his, lcs, hcs = [], [], [], []
    for comp, iv in enumerate(ivs):
        lo, hi = float(iv.lo), float(iv.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise WrongSpaceKind(f"cannot partition unbounded interval {iv!r}")
        if iv.is_point:
            los.append([lo]); his.append([hi]); lcs.append([True]); hcs.append([True])
            continue
        n = 2 ** depth
        if scheme.kind == "weighted" and scheme.weights:
            n *= scheme.weights[comp % len(scheme.weights)]
        xs = _split(lo, hi, n, scheme, depth, comp)
        k = len(xs) - 1
        lc = np.ones(k, dtype=bool); lc[0] = iv.lo_closed
        hc = np.zeros(k, dtype=bool); hc[-1] = iv.hi_closed
        los.append(xs[:-1]); his.append(xs[1:]); lcs.append(lc); hcs.append(hc)
    if not los:
        e = np.zeros((0, 1))
        return Cells(e, e.copy(), e.astype(bool), e.astype(bool), ambient)
    cat = lambda parts, dt: np.concatenate([np.asarray(p, dtype=dt) for p in parts]).reshape(-1, 1)
    return Cells(cat(los, float), cat(his, float), cat(lcs, bool), cat(hcs, bool), ambient)


def _axis(iv: Interval, n: int, scheme: Scheme, depth: int, comp: int):
    lo, hi = float(iv.lo), float(iv.hi)
    if iv.is_point:
        return np.array([lo]), np.array([hi]), np.array([True]), np.array([True])
    xs = _split(lo, hi, n, scheme, depth, comp)
    k = len(xs) - 1
    lc = np.ones(k, dtype=bool); lc[0] = iv.lo_closed
    hc = np.zeros(k, dtype=bool); hc[-1] = iv.hi_closed
    return xs[:-1], xs[1:], lc, hc


def _cells_2d(boxes: Sequence[Box], depth: int, scheme: Scheme, ambient: str) -> Cells:
    parts = []
    for comp, b in enumerate(boxes):
        if b.dims == 2:
            nx, ny = 2 ** ((depth + 1) // 2), 2 ** (depth // 2)
        else:
            nx = ny = 2 ** depth
        ax = _axis(b.x, nx, scheme, (depth + 1) // 2 if b.dims == 2 else depth, 2 * comp)
        ay = _axis(b.y, ny, scheme, depth // 2 if b.dims == 2 else depth, 2 * comp + 1)
        # x varies fastest so cells are ordered row by row
        gx = [np.tile(a, len(ay[0])) for a in ax]
        gy = [np.repeat(a, len(ax[0])) for a in ay]
        parts.append([np.stack([gx[i], gy[i]], axis=1) for i in range(4)])
    if not parts:
        e = np.zeros((0, 2))
        return Cells(e, e.copy(), e.astype(bool), e.astype(bool), ambient)
    arrs = [np.concatenate([p[i] for p in parts]) for i in range(4)]
    return Cells(arrs[0], arrs[1], arrs[2].astype(bool), arrs[3].astype(bool), ambient)


def partition(U: Region, depth: int, scheme: Scheme = Scheme("uniform")) -> Cells:
    """Disjoint cells covering ``U`` exactly (half-open inside each piece)."""
    if isinstance(U, IntervalSet):
        return _cells_1d(U.intervals, depth, scheme, U.ambient)
    if isinstance(U, BoxSet):
        return _cells_2d(U.boxes(), depth, scheme, U.ambient)
    raise WrongSpaceKind(f"no partition scheme for {type(U).__name__}")


def tags(cells: Cells, rule: str, seed: int = 0, depth: int = 0) -> np.ndarray:
    if rule == "left":
        return cells.lo.copy()
    if rule == "right":
        return cells.hi.copy()
    if rule == "midpoint":
        return (cells.lo + cells.hi) / 2
    if rule == "random":
        rng = np.random.default_rng([seed, depth, 7])
        return cells.lo + rng.random(cells.lo.shape) * (cells.hi - cells.lo)
    raise ValueError(f"unknown tag rule {rule!r}")


def align_tags(cells: Cells, t: np.ndarray, mu: Optional[Measure]) -> np.ndarray:
    """Move the tag of every cell holding an atom of ``mu`` onto that atom.

    Any point of a cell is a legitimate tag; pinning atoms makes integrals
    against point masses exact at every depth.
    """
    if mu is None or not len(cells):
        return t
    for p in mu.atoms():
        pt = np.atleast_1d(np.asarray(p, dtype=float))
        if pt.shape[0] != cells.dim:
            continue
        inside = np.ones(len(cells), dtype=bool)
        for k in range(cells.dim):
            inside &= (cells.lo[:, k] < pt[k]) | ((cells.lo[:, k] == pt[k]) & cells.lo_closed[:, k])
            inside &= (pt[k] < cells.hi[:, k]) | ((cells.hi[:, k] == pt[k]) & cells.hi_closed[:, k])
        if inside.any():
            t = t.copy()
            t[inside] = pt
    return t


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class IAPolicy:
    """Named generator of simple functions ``depth ↦ s_depth``."""

    id: str
    generate: Callable[[FunctionExpr, Region, Measure, int, IntegrationElement], Any] = field(repr=False)
    admissible: Callable[[FunctionExpr, Region, Measure, IntegrationElement], tuple] = field(
        default=lambda f, U, mu, elem: (True, ""), repr=False
    )
    depth_invariant: bool = False

    def __repr__(self) -> str:
        return f"IAPolicy({self.id!r})"


def _finite_region_function(f: FunctionExpr, U: Region, elem: IntegrationElement) -> SimpleFunction:
    pts = U.points_list()
    terms = []
    for p in pts:
        r = U.intersection(_point_region(U, p))
        v = f(*(p if isinstance(p, tuple) else (p,))) if not isinstance(U, FiniteSet) else f(p)
        terms.append((r, v))
    return SimpleFunction(tuple(terms), elem.y)


def _point_region(U: Region, p: Any) -> Region:
    if isinstance(U, IntervalSet):
        return IntervalSet.point(p)
    if isinstance(U, BoxSet):
        return BoxSet.point(*p)
    return FiniteSet.of([p], U.ambient)


def riemann_policy(scheme: Scheme | str = "uniform", tag: str = "midpoint", seed: int = 0) -> IAPolicy:
    """Tagged-partition approximations: ``Σ f(t_i)·1_{cell_i}`` with 2^depth cells per piece."""
    if isinstance(scheme, str):
        scheme = parse_scheme(scheme, seed)
    tag_id = f"random:{seed}" if tag == "random" else tag

    def generate(f, U, mu, depth, elem):
        if isinstance(U, FiniteSet):
            return _finite_region_function(f, U, elem)
        cells = partition(U, depth, scheme)
        t = align_tags(cells, tags(cells, tag, seed, depth), mu)
        coeffs = f.eval_points(t) if len(cells) else np.zeros(0)
        return CellSimpleFunction(cells, np.asarray(coeffs, dtype=float), U, elem.y)

    def admissible(f, U, mu, elem):
        if not elem.y.numeric:
            return False, "tagged partitions need a numeric codomain"
        if not isinstance(U, (IntervalSet, BoxSet, FiniteSet)):
            return False, "unsupported region"
        return True, ""

    return IAPolicy(f"{scheme.id}-{tag_id}", generate, admissible)


def geometric_policy(scheme: Scheme | str = "uniform", tag: str = "midpoint", seed: int = 0) -> IAPolicy:
    """Tagged partitions read as products ``Π f(t_i)^{μ(cell_i)}`` (indicator value 1 off-cell)."""
    base = riemann_policy(scheme, tag, seed)

    def admissible(f, U, mu, elem):
        if elem.y.name != "pos_mul":
            raise WrongCodomain(f"geometric approximations need Y = pos_mul, got {elem.y.name}")
        return base.admissible(f, U, mu, elem)

    return IAPolicy("geometric:" + base.id, base.generate, admissible)


def _quantize(v: np.ndarray, depth: int) -> np.ndarray:
    """Level quantization at resolution 2^-depth, clipped toward 0 and capped."""
    scale = 2.0 ** depth
    with np.errstate(invalid="ignore", over="ignore"):
        q = np.floor(np.abs(v) * scale) / scale
    q = np.minimum(np.where(np.isnan(q), 0.0, q), 2.0 ** (depth + 1))
    return np.sign(np.nan_to_num(v, nan=0.0)) * q


def _level_breaks(f: FunctionExpr, lo: float, hi: float, depth: int) -> np.ndarray:
    """Points where the quantized level of ``f`` changes inside (lo, hi)."""
    n = max(2 ** (depth + 2), 256)
    xs = np.linspace(lo, hi, n + 1)
    q = _quantize(f.eval_points(xs), depth)
    idx = np.flatnonzero(q[1:] != q[:-1])
    a, b = xs[idx], xs[idx + 1]
    qa = q[idx]
    breaks = []
    for _ in range(64):
        if len(a) == 0:
            break
        for _ in range(60):
            mid = (a + b) / 2
            qm = _quantize(f.eval_points(mid), depth)
            same = qm == qa
            a = np.where(same, mid, a)
            b = np.where(same, b, mid)
        breaks.append(b)
        # a later level change inside (b, original b) is picked up next round
        qb = _quantize(f.eval_points(b), depth)
        nxt = np.searchsorted(xs, b, side="right")
        nxt = np.clip(nxt, 0, n)
        end = xs[nxt]
        more = (_quantize(f.eval_points(end), depth) != qb) & (end > b)
        a, b, qa = b[more], end[more], qb[more]
    if not breaks:
        return np.zeros(0)
    out = np.unique(np.concatenate(breaks))
    return out[(out > lo) & (out < hi)]


def lebesgue_policy() -> IAPolicy:
    """Level-set approximations ``s_d = sign(f)·min(⌊|f|·2^d⌋/2^d, 2^(d+1))``.

    ``|s_d| ≤ |f|`` and ``|s_d| ≤ |s_{d+1}|`` hold pointwise. Level sets are
    located by dense sampling followed by bisection.
    """

    def generate(f, U, mu, depth, elem):
        if isinstance(U, FiniteSet):
            s = _finite_region_function(f, U, elem)
            return SimpleFunction(tuple((r, float(_quantize(np.array([c]), depth)[0])) for r, c in s.terms), elem.y)
        pieces = f.pieces()
        if pieces is not None:
            terms = []
            for r, v in pieces:
                region = U if r is None else r.intersection(U)
                terms.append((region, float(_quantize(np.array([float(v)]), depth)[0])))
            return SimpleFunction(tuple(terms), elem.y)
        if not isinstance(U, IntervalSet):
            raise WrongSpaceKind("level-set approximation is implemented on the line")
        los, his, lcs, hcs = [], [], [], []
        for iv in U.intervals:
            lo, hi = float(iv.lo), float(iv.hi)
            if iv.is_point:
                xs = np.array([lo, hi])
            else:
                xs = np.concatenate(([lo], _level_breaks(f, lo, hi, depth), [hi]))
            k = len(xs) - 1
            lc = np.ones(k, dtype=bool); lc[0] = iv.lo_closed
            hc = np.zeros(k, dtype=bool); hc[-1] = iv.hi_closed
            if iv.is_point:
                hc[-1] = True
            los.append(xs[:-1]); his.append(xs[1:]); lcs.append(lc); hcs.append(hc)
        cells = Cells(
            np.concatenate(los).reshape(-1, 1), np.concatenate(his).reshape(-1, 1),
            np.concatenate(lcs).reshape(-1, 1), np.concatenate(hcs).reshape(-1, 1), U.ambient,
        )
        # the level on a cell is read off at an interior point
        mids = np.where(cells.hi[:, 0] > cells.lo[:, 0], (cells.lo[:, 0] + cells.hi[:, 0]) / 2, cells.lo[:, 0])
        coeffs = _quantize(f.eval_points(mids), depth)
        return CellSimpleFunction(cells, coeffs, U, elem.y)

    def admissible(f, U, mu, elem):
        if elem.y.name not in ("real_add", "ext_real_add"):
            raise WrongCodomain(f"level-set approximations need ordered Y = real_add, got {elem.y.name}")
        return True, ""

    return IAPolicy("lebesgue", generate, admissible)


def lebesgue_dominance(f: FunctionExpr, U: IntervalSet, depth: int, n: int = 100, seed: int = 0) -> dict:
    """Check ``|s_d| ≤ |f|`` and ``|s_d| ≤ |s_{d+1}|`` at ``n`` random points of ``U``."""
    elem = riemann_element()
    pol = lebesgue_policy()
    rng = np.random.default_rng(seed)
    hull = U.hull()
    pts = []
    while len(pts) < n:
        cand = rng.uniform(float(hull.lo), float(hull.hi), n)
        pts.extend(cand[U.contains_array(cand)].tolist())
    pts = np.array(pts[:n])
    s_d = pol.generate(f, U, None, depth, elem)
    s_next = pol.generate(f, U, None, depth + 1, elem)
    vd = _values(s_d, pts)
    vn = _values(s_next, pts)
    fv = f.eval_points(pts)
    eps = 1e-12
    below_f = np.abs(vd) <= np.abs(fv) + eps
    monotone = np.abs(vd) <= np.abs(vn) + eps
    return {
        "points": pts,
        "below_f": bool(below_f.all()),
        "monotone": bool(monotone.all()),
        "violations": pts[~(below_f & monotone)].tolist(),
    }


def _values(s: Any, pts: np.ndarray) -> np.ndarray:
    if isinstance(s, CellSimpleFunction) and s.cells.dim == 1:
        return s.values_at(pts)
    return np.array([s.value_at(p) for p in pts], dtype=float)


def exact_policy() -> IAPolicy:
    """The function itself when it is piecewise constant (same at every depth)."""

    def generate(f, U, mu, depth, elem):
        if isinstance(U, FiniteSet):
            return _finite_region_function(f, U, elem)
        pieces = f.pieces()
        terms = tuple((U if r is None else r.intersection(U), v) for r, v in pieces)
        return SimpleFunction(terms, elem.y)

    def admissible(f, U, mu, elem):
        if f.pieces() is None and not isinstance(U, FiniteSet):
            return False, "function is not piecewise constant"
        return True, ""

    return IAPolicy("exact", generate, admissible, depth_invariant=True)


def _clip_axis(edges: np.ndarray, iv: Interval):
    lo, hi = float(iv.lo), float(iv.hi)
    a = np.clip(edges[:-1], lo, hi)
    b = np.clip(edges[1:], lo, hi)
    idx = np.arange(len(a))
    if iv.is_point:
        keep = (edges[:-1] <= lo) & ((lo < edges[1:]) | (idx == len(a) - 1) & (lo <= edges[1:]))
        keep |= (idx == 0) & (lo < edges[0])
        keep |= (idx == len(a) - 1) & (lo > edges[-1])
        return np.full(keep.sum(), lo), np.full(keep.sum(), lo), idx[keep]
    keep = b > a
    return a[keep], b[keep], idx[keep]


def grid_policy() -> IAPolicy:
    """Exact approximation of a :class:`GridFunction`: its cells clipped to the region."""
    from .expr import GridFunction

    def generate(f, U, mu, depth, elem):
        vals = np.asarray(f.values, dtype=float)
        if isinstance(U, IntervalSet):
            e = np.asarray(f.edges[0], dtype=float)
            parts = [_clip_axis(e, iv) for iv in U.intervals]
            lo = np.concatenate([p[0] for p in parts]).reshape(-1, 1)
            hi = np.concatenate([p[1] for p in parts]).reshape(-1, 1)
            coeffs = np.concatenate([vals[p[2]] for p in parts])
        else:
            ex, ey = (np.asarray(e, dtype=float) for e in f.edges)
            los, his, cs = [], [], []
            for b in U.boxes():
                ax0, ax1, ix = _clip_axis(ex, b.x)
                ay0, ay1, iy = _clip_axis(ey, b.y)
                gx0, gy0 = np.meshgrid(ax0, ay0, indexing="ij")
                gx1, gy1 = np.meshgrid(ax1, ay1, indexing="ij")
                gi, gj = np.meshgrid(ix, iy, indexing="ij")
                los.append(np.stack([gx0.ravel(), gy0.ravel()], axis=1))
                his.append(np.stack([gx1.ravel(), gy1.ravel()], axis=1))
                cs.append(vals[gi.ravel(), gj.ravel()])
            lo, hi = np.concatenate(los), np.concatenate(his)
            coeffs = np.concatenate(cs)
        # clipped cells are treated as closed; only atom-free measures are exact here
        closed = np.ones(lo.shape, dtype=bool)
        return CellSimpleFunction(Cells(lo, hi, closed, ~closed | closed, U.ambient), coeffs, U, elem.y)

    def admissible(f, U, mu, elem):
        if not isinstance(f, GridFunction):
            return False, "not a grid function"
        if not isinstance(U, (IntervalSet, BoxSet)):
            return False, "unsupported region"
        if mu is not None and mu.atoms():
            return False, "clipped cells double-count atoms"
        return True, ""

    return IAPolicy("grid", generate, admissible, depth_invariant=True)


def restrict_policies(policies: Iterable[IAPolicy], predicate: Callable[[IAPolicy], bool]) -> list[IAPolicy]:
    """Keep only policies passing ``predicate`` (e.g. principal-value families)."""
    return [p for p in policies if predicate(p)]


def symmetric_about(center: float, U: IntervalSet, depth: int = 3) -> Callable[[IAPolicy], bool]:
    """Predicate: the policy's depth-``depth`` cell boundaries are mirror-symmetric about ``center``."""

    def pred(policy: IAPolicy) -> bool:
        probe = FunctionExprProbe()
        s = policy.generate(probe, U, None, depth, riemann_element())
        if not isinstance(s, CellSimpleFunction):
            return False
        edges = np.unique(np.concatenate([s.cells.lo[:, 0], s.cells.hi[:, 0]]))
        mirrored = np.sort(2 * center - edges)
        return len(edges) == len(mirrored) and np.allclose(edges, mirrored, atol=1e-12)

    return pred


class FunctionExprProbe(FunctionExpr):
    """Constant-one probe used to inspect partitions."""

    def eval_points(self, pts):
        return np.ones(len(np.atleast_1d(pts)))


_SCHEMES = ("uniform", "dyadic", "randomized", "weighted")
_TAGS = ("left", "right", "midpoint", "random")


def parse_scheme(text: str, seed: int = 0) -> Scheme:
    head, *rest = text.split(":")
    if head not in _SCHEMES:
        raise KeyError(f"unknown partition scheme {text!r}")
    if head == "randomized":
        return Scheme(head, int(rest[0]) if rest else seed)
    if head == "weighted":
        if not rest:
            raise KeyError("weighted scheme needs weights, e.g. weighted:1:2")
        return Scheme(head, seed, tuple(int(w) for w in rest))
    return Scheme(head, seed)


def parse_policy(name: str, seed: int = 0) -> IAPolicy:
    """Policy names: ``exact``, ``lebesgue``, ``[geometric:]<scheme>-<tag>``.

    Schemes: ``uniform``, ``dyadic``, ``randomized[:seed]``, ``weighted:w1:w2...``;
    tags: ``left``, ``right``, ``midpoint``, ``random[:seed]``.
    """
    if name == "exact":
        return exact_policy()
    if name == "lebesgue":
        return lebesgue_policy()
    if name == "grid":
        return grid_policy()
    geometric = name.startswith("geometric:")
    body = name[len("geometric:"):] if geometric else name
    if "-" not in body:
        raise KeyError(f"unknown policy {name!r}")
    scheme_txt, tag_txt = body.rsplit("-", 1)
    tag, *tag_seed = tag_txt.split(":")
    if tag not in _TAGS:
        raise KeyError(f"unknown tag rule in {name!r}")
    tseed = int(tag_seed[0]) if tag_seed else seed
    scheme = parse_scheme(scheme_txt, seed)
    maker = geometric_policy if geometric else riemann_policy
    return maker(scheme, tag, tseed)


# ---------------------------------------------------------------------------
# Calculi
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CalculusChoice:
    """Orientations, integration element and default approximation policies."""

    name: str
    elem: IntegrationElement
    orientations: dict = field(default_factory=lambda: {"e": E})
    policies: tuple = ()

    @property
    def y(self) -> MagmaStructure:
        return self.elem.y

    @property
    def m(self) -> MagmaStructure:
        return self.elem.m

    @property
    def g_out(self) -> MagmaStructure:
        return self.elem.g_out

    def orientation(self, symbol: str) -> OrientationMap:
        try:
            return self.orientations[symbol]
        except KeyError:
            raise KeyError(f"calculus {self.name} has no orientation {symbol!r}") from None

    def __repr__(self) -> str:
        return f"CalculusChoice({self.name!r})"


class LawViolation(ValueError):
    pass


def make_calculus(name: str, elem: IntegrationElement, orientations: dict, policies: Sequence[IAPolicy], check: bool = True) -> CalculusChoice:
    if "e" not in orientations or orientations["e"].symbol != "e":
        raise ValueError("a calculus needs the identity orientation 'e'")
    if check:
        fails = check_element(elem, n=500) if elem.y.numeric else check_free_element(elem)
        if fails:
            raise LawViolation(f"{name}: {fails[0]}")
    return CalculusChoice(name, elem, dict(orientations), tuple(policies))


def check_free_element(elem: IntegrationElement, n: int = 200, seed: int = 0) -> list[LawFailure]:
    """Laws of a formal element: the outer expansion side is checked on arbitrary
    terms, the inner side on atoms (where expansion order is irrelevant)."""
    rng = np.random.default_rng(seed)
    elem.g_out
    fails = []
    atoms = [Atom(c) for c in "abcd"]
    for _ in range(n):
        a, b = elem.y.sample(rng), elem.y.sample(rng)
        m, k = elem.m.sample(rng), elem.m.sample(rng)
        pa, pb = atoms[int(rng.integers(4))], atoms[int(rng.integers(4))]
        am = atoms[int(rng.integers(4))]
        if elem.tag == "y_outer":
            checks = [("left distributivity", elem.g(node(a, b), m), node(elem.g(a, m), elem.g(b, m))),
                      ("right distributivity", elem.g(pa, node(m, k)), node(elem.g(pa, m), elem.g(pa, k)))]
        else:
            checks = [("right distributivity", elem.g(a, node(m, k)), node(elem.g(a, m), elem.g(a, k))),
                      ("left distributivity", elem.g(node(pa, pb), am), node(elem.g(pa, am), elem.g(pb, am)))]
        checks.append(("annihilation", elem.g(IDENTITY, m), IDENTITY))
        for law, lhs, rhs in checks:
            if lhs != rhs:
                fails.append(LawFailure(law, (a, b, m, k), lhs, rhs))
    return fails


DEFAULT_RIEMANN = ("uniform-midpoint", "randomized-midpoint", "dyadic-midpoint", "uniform-random")


def _riemann_calculus() -> CalculusChoice:
    return make_calculus("riemann", riemann_element(), {"e": E, "neg": NEG}, [parse_policy(p) for p in DEFAULT_RIEMANN])


def _product_calculus() -> CalculusChoice:
    return make_calculus(
        "product", product_element(), {"e": E, "neg": NEG}, [parse_policy("geometric:" + p) for p in DEFAULT_RIEMANN]
    )


def _lebesgue_calculus() -> CalculusChoice:
    return make_calculus("lebesgue", riemann_element(), {"e": E, "neg": NEG}, [lebesgue_policy()])


def _free_calculus(tag: str = "y_outer") -> CalculusChoice:
    return make_calculus("free" if tag == "y_outer" else "free:m_outer", free_element(tag), {"e": E}, [exact_policy()])


CALCULI: dict[str, Callable[[], CalculusChoice]] = {
    "riemann": _riemann_calculus,
    "product": _product_calculus,
    "lebesgue": _lebesgue_calculus,
    "free": _free_calculus,
    "free:m_outer": lambda: _free_calculus("m_outer"),
}
_calc_cache: dict[str, CalculusChoice] = {}


def get_calculus(name: str) -> CalculusChoice:
    if name not in _calc_cache:
        if name not in CALCULI:
            raise KeyError(f"unknown calculus {name!r}")
        _calc_cache[name] = CALCULI[name]()
    return _calc_cache[name]


# ---------------------------------------------------------------------------
# IA integration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Defined:
    value: Any
    policy: str = ""


@dataclass(frozen=True)
class Undefined:
    witness: tuple  # ((policy_a, value_a), (policy_b, value_b))

    @property
    def gap(self) -> float:
        (_, a), (_, b) = self.witness
        return abs(a - b) if isinstance(a, float) and isinstance(b, float) else math.nan


@dataclass(frozen=True)
class FundamentallyUndefinedAtCap:
    trends: tuple  # ((policy, extension point or None), ...)

    @property
    def diverges_to(self) -> Any:
        points = {t for _, t in self.trends}
        return points.pop() if len(points) == 1 else None


@dataclass(frozen=True)
class NoNumericLimitAtCap:
    converged: tuple
    pending: tuple


@dataclass(frozen=True)
class OutsideDomain:
    reason: str = ""


Verdict = Defined | Undefined | FundamentallyUndefinedAtCap | NoNumericLimitAtCap | OutsideDomain


@dataclass(frozen=True)
class PolicyRun:
    policy: str
    values: tuple  # value at depth 0, 1, ...
    outcome: Any
    stopped: str = ""


@dataclass(frozen=True)
class IAReport:
    verdict: Any
    runs: tuple = ()
    skipped: tuple = ()

    @property
    def value(self) -> Any:
        if isinstance(self.verdict, Defined):
            return self.verdict.value
        raise ValueError(f"integral is not defined: {self.verdict}")

    @property
    def defined(self) -> bool:
        return isinstance(self.verdict, Defined)

    def trace_rows(self, g_out: MagmaStructure) -> list[tuple]:
        rows = []
        for run in self.runs:
            if not run.values:
                continue
            final = run.values[-1]
            for d, v in enumerate(run.values):
                dist = g_out.distance(v, final) if g_out.numeric else float(v != final)
                rows.append((run.policy, d, v, dist))
        return rows


def policy_value(policy: IAPolicy, f: FunctionExpr, mu: Measure, U: Region, calc: CalculusChoice, depth: int) -> Any:
    """Simple integral of the policy's approximation at one depth."""
    return simple_integral(policy.generate(f, U, mu, depth, calc.elem), mu, U, calc.elem)


def _run_policy(policy, f, mu, U, calc, tol, window, cap) -> PolicyRun:
    stopped = []

    def seq():
        if policy.depth_invariant or isinstance(U, FiniteSet) or (U.is_finite() if hasattr(U, "is_finite") else False):
            try:
                v = policy_value(policy, f, mu, U, calc, 0)
            except (NotIntegrable, UndefinedPair) as exc:
                stopped.append(str(exc))
                return
            for _ in range(cap + 1):
                yield v
            return
        for d in range(cap + 1):
            try:
                yield policy_value(policy, f, mu, U, calc, d)
            except (NotIntegrable, UndefinedPair) as exc:
                stopped.append(f"depth {d}: {exc}")
                return

    outcome = limit(calc.g_out, seq(), tol=tol, window=window, cap=cap + 1)
    if isinstance(outcome, NoLimitAtCap) and stopped:
        outcome = NoLimitAtCap(outcome.trend, outcome.terms, stopped[0])
    return PolicyRun(policy.id, outcome.terms, outcome, stopped[0] if stopped else "")


def _is_finite_region(U: Region) -> bool:
    return isinstance(U, FiniteSet) or U.is_empty() or U.is_finite()


def _finite_report(f: FunctionExpr, mu: Measure, U: Region, calc: CalculusChoice) -> IAReport:
    """On a finite region every policy yields ``Σ f(p)·1_{p}``; integrate it once."""
    s = _finite_region_function(f, U, calc.elem)
    try:
        v = simple_integral(s, mu, U, calc.elem)
    except (NotIntegrable, UndefinedPair) as exc:
        run = PolicyRun("finite", (), NoLimitAtCap(None, (), str(exc)), str(exc))
        return IAReport(FundamentallyUndefinedAtCap((("finite", None),)), (run,))
    run = PolicyRun("finite", (v,), Converged(v, (v,)))
    return IAReport(Defined(v, "finite"), (run,))


def ia_integrate(
    f: FunctionExpr,
    mu: Measure,
    U: Region,
    calc: CalculusChoice,
    policies: Optional[Iterable[IAPolicy]] = None,
    tol: float = 1e-6,
    cap: int = 20,
    window: int = 4,
) -> IAReport:
    """Integrate ``f`` over ``U`` against ``μ`` across a policy family.

    Defined when every admissible policy converges and all limits agree within
    ``tol``; Undefined (with a witness pair) when two limits differ;
    FundamentallyUndefinedAtCap when none converges; NoNumericLimitAtCap when
    some converge (and agree) while others do not.
    """
    pols = list(calc.policies if policies is None else policies)
    if not pols:
        raise ValueError("policy family is empty")
    if _is_finite_region(U):
        return _finite_report(f, mu, U, calc)
    unique: dict[str, IAPolicy] = {}
    for p in pols:
        unique.setdefault(p.id, p)
    G = calc.g_out
    runs, skipped = [], []
    for pid in sorted(unique):
        p = unique[pid]
        ok, why = p.admissible(f, U, mu, calc.elem)
        if not ok:
            skipped.append((pid, why))
            continue
        runs.append(_run_policy(p, f, mu, U, calc, tol, window, cap))
    if not runs:
        raise NoAdmissiblePolicy("; ".join(f"{p}: {w}" for p, w in skipped))
    conv = [(r.policy, r.outcome.value) for r in runs if isinstance(r.outcome, (Converged, ConvergedToInfinity))]
    pending = [(r.policy, r.outcome.trend) for r in runs if isinstance(r.outcome, NoLimitAtCap)]
    for i in range(len(conv)):
        for j in range(i + 1, len(conv)):
            a, b = conv[i][1], conv[j][1]
            if G.distance(a, b) > tol and not (G.numeric and G.equal(a, b, tol)):
                return IAReport(Undefined((conv[i], conv[j])), tuple(runs), tuple(skipped))
    if not conv:
        verdict: Any = FundamentallyUndefinedAtCap(tuple(pending))
    elif pending:
        verdict = NoNumericLimitAtCap(tuple(conv), tuple(pending))
    else:
        verdict = Defined(conv[0][1], conv[0][0])
    return IAReport(verdict, tuple(runs), tuple(skipped))
