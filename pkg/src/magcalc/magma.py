"""Unital magmas, their compactified extensions, ordered folds and limits.

Elements of the real-valued instances are plain Python floats, with
``float('inf')`` / ``-float('inf')`` playing the role of the designated
infinities. Formal (free) instances use :class:`FreeTerm` trees.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "UndefinedPair",
    "MagmaStructure",
    "FreeTerm",
    "Atom",
    "Node",
    "IDENTITY",
    "node",
    "mag_op",
    "fold_ordered",
    "Converged",
    "ConvergedToInfinity",
    "NoLimitAtCap",
    "limit",
    "OrientationMap",
    "E",
    "NEG",
    "orient",
    "compose_orientations",
    "get_magma",
    "MAGMAS",
]

REAL_TOL = 1e-12


class UndefinedPair(ArithmeticError):
    """Both operands are infinities and the extension leaves the pair undefined."""

    def __init__(self, magma: str, a: Any, b: Any):
        super().__init__(f"{magma}: operation undefined on ({a!r}, {b!r})")
        self.magma = magma
        self.a = a
        self.b = b


# ---------------------------------------------------------------------------
# Free terms
# ---------------------------------------------------------------------------


class FreeTerm:
    """Base class of formal binary trees."""

    __slots__ = ()

    def atoms(self) -> tuple:
        return ()


@dataclass(frozen=True)
class Atom(FreeTerm):
    label: Any

    def atoms(self) -> tuple:
        return (self.label,)

    def __repr__(self) -> str:
        lab = self.label
        if isinstance(lab, tuple) and lab and lab[0] == "g":
            return f"g({lab[1]},{lab[2]})"
        return str(lab)


class _Identity(FreeTerm):
    _instance: Optional["_Identity"] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "0"

    def __reduce__(self):
        return (_Identity, ())


IDENTITY = _Identity()


@dataclass(frozen=True)
class Node(FreeTerm):
    left: FreeTerm
    right: FreeTerm

    def atoms(self) -> tuple:
        return self.left.atoms() + self.right.atoms()

    def __repr__(self) -> str:
        return f"({self.left!r} + {self.right!r})"


def node(a: FreeTerm, b: FreeTerm) -> FreeTerm:
    """Formal sum with identity absorption as the only rewrite."""
    if a is IDENTITY:
        return b
    if b is IDENTITY:
        return a
    return Node(a, b)


# ---------------------------------------------------------------------------
# Magma structures
# ---------------------------------------------------------------------------


def _atan_chart(x: float) -> float:
    return math.atan(x)


@dataclass(frozen=True, eq=False)
class MagmaStructure:
    """A unital magma with optional infinities and a bounded metric chart.

    ``contains`` tests membership of the finite carrier; ``extended_op`` is
    consulted whenever an operand is one of ``extension_points`` and raises
    :class:`UndefinedPair` where the extension leaves a pair undefined.
    ``chart`` maps the extended carrier into a bounded metric space and is used
    to decide convergence towards infinities. Between two finite elements the
    natural metric (``natural_distance``) is used when one is provided.
    """

    name: str
    contains: Callable[[Any], bool]
    op: Callable[[Any, Any], Any]
    identity: Any
    extension_points: tuple = ()
    extended_op: Optional[Callable[[Any, Any], Any]] = None
    chart: Callable[[Any], float] = _atan_chart
    commutative: bool = True
    associative: bool = True
    natural_distance: Optional[Callable[[Any, Any], float]] = None
    vector_fold: Optional[Callable[[np.ndarray], Any]] = None
    sampler: Optional[Callable[[np.random.Generator], Any]] = None
    numeric: bool = True

    def __repr__(self) -> str:
        return f"MagmaStructure({self.name!r})"

    def is_extension(self, a: Any) -> bool:
        if not self.extension_points:
            return False
        if self.numeric:
            return isinstance(a, (float, int, np.floating)) and math.isinf(a)
        return any(a == p for p in self.extension_points)

    def in_extended(self, a: Any) -> bool:
        return self.is_extension(a) or self.contains(a)

    def distance(self, a: Any, b: Any) -> float:
        if not self.numeric:
            return 0.0 if a == b else 1.0
        if self.is_extension(a) or self.is_extension(b) or self.natural_distance is None:
            if self.is_extension(a) and self.is_extension(b):
                return 0.0 if a == b else abs(self.chart(a) - self.chart(b))
            return abs(self.chart(a) - self.chart(b))
        return self.natural_distance(a, b)

    def equal(self, a: Any, b: Any, tol: float = REAL_TOL) -> bool:
        """Equality up to ``tol`` for reals (relative for large magnitudes)."""
        if not self.numeric:
            return a == b
        if self.is_extension(a) or self.is_extension(b):
            return a == b
        return math.isclose(a, b, rel_tol=tol, abs_tol=tol)

    def sample(self, rng: np.random.Generator) -> Any:
        if self.sampler is None:
            raise NotImplementedError(f"{self.name} has no sampler")
        return self.sampler(rng)

    def fold_array(self, values: np.ndarray) -> Any:
        """Left fold of a numeric array (sequential order preserved)."""
        if self.vector_fold is None:
            return fold_ordered(self, list(values))
        return self.vector_fold(values)


def mag_op(s: MagmaStructure, a: Any, b: Any) -> Any:
    a_ext = s.is_extension(a)
    b_ext = s.is_extension(b)
    if not (a_ext or b_ext):
        return s.op(a, b)
    if s.extended_op is None:
        raise UndefinedPair(s.name, a, b)
    return s.extended_op(a, b)


def fold_ordered(s: MagmaStructure, items: Iterable[Any]) -> Any:
    """((a1 + a2) + a3) + ... ; the empty fold is the identity."""
    acc = s.identity
    first = True
    for item in items:
        if first:
            # identity law makes 0 + a1 = a1; skipping the op keeps free trees clean
            acc = item
            first = False
        else:
            acc = mag_op(s, acc, item)
    return acc


# --- real instances -------------------------------------------------------

def _is_finite_real(a: Any) -> bool:
    return isinstance(a, (int, float, np.integer, np.floating)) and not isinstance(a, bool) and math.isfinite(a)


def _abs_diff(a: float, b: float) -> float:
    return abs(float(a) - float(b))


def _cumsum_fold(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    if np.isinf(values).any():
        pos = np.isposinf(values).any()
        neg = np.isneginf(values).any()
        n_inf = int(np.isinf(values).sum())
        if n_inf > 1 or (pos and neg):
            a = values[np.isinf(values)][0]
            raise UndefinedPair("ext_real_add", a, values[np.isinf(values)][-1])
        return float(values[np.isinf(values)][0])
    with np.errstate(over="ignore"):
        return float(np.cumsum(values)[-1])


def _cumprod_fold(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 1.0
    infs = np.isinf(values)
    if infs.any():
        if infs.sum() > 1 or (values == 0).any():
            raise UndefinedPair("ext_nonneg_mul", float(values[infs][0]), float(values[infs][-1]))
        return math.inf
    with np.errstate(over="ignore", under="ignore"):
        return float(np.cumprod(values)[-1])


def _sample_real(rng: np.random.Generator) -> float:
    if rng.random() < 0.3:
        return float(rng.integers(-20, 21))
    return float(rng.normal(scale=10.0))


def _sample_ext_real(rng: np.random.Generator) -> float:
    u = rng.random()
    if u < 0.05:
        return math.inf
    if u < 0.1:
        return -math.inf
    return _sample_real(rng)


def _sample_pos(rng: np.random.Generator) -> float:
    return float(math.exp(rng.normal(scale=1.5)))


def _sample_nonneg(rng: np.random.Generator) -> float:
    if rng.random() < 0.1:
        return 0.0
    return abs(_sample_real(rng))


def _sample_ext_nonneg(rng: np.random.Generator) -> float:
    if rng.random() < 0.08:
        return math.inf
    return _sample_nonneg(rng)


def _ext_add(a: float, b: float) -> float:
    a_inf, b_inf = math.isinf(a), math.isinf(b)
    if a_inf and b_inf:
        raise UndefinedPair("ext_real_add", a, b)
    return a if a_inf else b


def _ext_mul_nonneg(a: float, b: float) -> float:
    a_inf, b_inf = math.isinf(a), math.isinf(b)
    if a_inf and b_inf:
        raise UndefinedPair("ext_nonneg_mul", a, b)
    other = b if a_inf else a
    if other == 0:
        raise UndefinedPair("ext_nonneg_mul", a, b)
    return math.inf


def _pos_chart(x: float) -> float:
    if x == 0:
        return -math.pi / 2
    return math.atan(math.log(x)) if math.isfinite(x) else math.pi / 2


def real_add() -> MagmaStructure:
    return MagmaStructure(
        name="real_add",
        contains=_is_finite_real,
        op=lambda a, b: a + b,
        identity=0.0,
        natural_distance=_abs_diff,
        vector_fold=_cumsum_fold,
        sampler=_sample_real,
    )


def pos_mul() -> MagmaStructure:
    return MagmaStructure(
        name="pos_mul",
        contains=lambda a: _is_finite_real(a) and a > 0,
        op=lambda a, b: a * b,
        identity=1.0,
        chart=_pos_chart,
        natural_distance=_abs_diff,
        vector_fold=_cumprod_fold,
        sampler=_sample_pos,
    )


def ext_real_add() -> MagmaStructure:
    return MagmaStructure(
        name="ext_real_add",
        contains=_is_finite_real,
        op=lambda a, b: a + b,
        identity=0.0,
        extension_points=(math.inf, -math.inf),
        extended_op=_ext_add,
        natural_distance=_abs_diff,
        vector_fold=_cumsum_fold,
        sampler=_sample_ext_real,
    )


def ext_nonneg_add() -> MagmaStructure:
    return MagmaStructure(
        name="ext_nonneg_add",
        contains=lambda a: _is_finite_real(a) and a >= 0,
        op=lambda a, b: a + b,
        identity=0.0,
        extension_points=(math.inf,),
        extended_op=_ext_add,
        natural_distance=_abs_diff,
        vector_fold=_cumsum_fold,
        sampler=_sample_ext_nonneg,
    )


def ext_nonneg_mul() -> MagmaStructure:
    return MagmaStructure(
        name="ext_nonneg_mul",
        contains=lambda a: _is_finite_real(a) and a >= 0,
        op=lambda a, b: a * b,
        identity=1.0,
        extension_points=(math.inf,),
        extended_op=_ext_mul_nonneg,
        natural_distance=_abs_diff,
        vector_fold=_cumprod_fold,
        sampler=lambda rng: math.inf if rng.random() < 0.08 else _sample_pos(rng),
    )


def free_magma(alphabet: Optional[Sequence[Any]] = None, name: Optional[str] = None) -> MagmaStructure:
    """The free unital magma on ``alphabet`` (any atom labels if ``None``)."""
    letters = tuple(alphabet) if alphabet is not None else None

    def contains(t: Any) -> bool:
        if not isinstance(t, FreeTerm):
            return False
        return letters is None or all(lab in letters for lab in t.atoms())

    def sampler(rng: np.random.Generator) -> FreeTerm:
        pool = letters or ("a", "b", "c")

        def build(depth: int) -> FreeTerm:
            u = rng.random()
            if depth == 0 or u < 0.4:
                if u < 0.08:
                    return IDENTITY
                return Atom(pool[int(rng.integers(len(pool)))])
            return node(build(depth - 1), build(depth - 1))

        return build(3)

    return MagmaStructure(
        name=name or ("free:" + "".join(map(str, letters)) if letters else "free"),
        contains=contains,
        op=node,
        identity=IDENTITY,
        commutative=False,
        associative=False,
        sampler=sampler,
        numeric=False,
    )


MAGMAS: dict[str, Callable[[], MagmaStructure]] = {
    "real_add": real_add,
    "pos_mul": pos_mul,
    "ext_real_add": ext_real_add,
    "ext_nonneg_add": ext_nonneg_add,
    "ext_nonneg_mul": ext_nonneg_mul,
}

_cache: dict[str, MagmaStructure] = {}


def get_magma(name: str) -> MagmaStructure:
    """Registry lookup; ``free:<alphabet>`` builds a free magma on those letters."""
    if name in _cache:
        return _cache[name]
    if name.startswith("free:"):
        inst = free_magma(list(name[5:]), name=name)
    elif name == "free":
        inst = free_magma(None)
    elif name in MAGMAS:
        inst = MAGMAS[name]()
    else:
        raise KeyError(f"unknown magma instance {name!r}")
    _cache[name] = inst
    return inst


# ---------------------------------------------------------------------------
# Limits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Converged:
    value: Any
    terms: tuple = field(default=(), repr=False)


@dataclass(frozen=True)
class ConvergedToInfinity:
    point: Any
    terms: tuple = field(default=(), repr=False)

    @property
    def value(self) -> Any:
        return self.point


@dataclass(frozen=True)
class NoLimitAtCap:
    """No limit detected within ``cap`` terms.

    ``trend`` names an extension point the tail is monotonically approaching
    (divergence detected through the chart), or is ``None`` for oscillation.
    """

    trend: Any = None
    terms: tuple = field(default=(), repr=False)
    reason: str = ""


LimitOutcome = Converged | ConvergedToInfinity | NoLimitAtCap


def _trend(s: MagmaStructure, tail: Sequence[Any]) -> Any:
    """Extension point the tail is running off towards, if any.

    Requires the chart distance to the point to shrink by at least 1% at every
    step while the increments do not decay geometrically (which would indicate
    a slowly converging sequence rather than divergence). Monotone round-off
    drift near a finite value moves the chart by far less than that.
    """
    if not s.numeric or not s.extension_points or len(tail) < 3:
        return None
    if any(s.is_extension(t) for t in tail):
        return None
    incs = [s.distance(tail[i], tail[i + 1]) for i in range(len(tail) - 1)]
    if all(incs[i + 1] <= 0.75 * incs[i] for i in range(len(incs) - 1)):
        return None
    for p in s.extension_points:
        d = [abs(s.chart(t) - s.chart(p)) for t in tail]
        if all(d[i + 1] < 0.99 * d[i] for i in range(len(d) - 1)):
            return p
    return None


def limit(
    s: MagmaStructure,
    seq: Iterable[Any],
    tol: float = 1e-6,
    window: int = 4,
    cap: int = 21,
) -> LimitOutcome:
    """Detect convergence of ``seq`` at tolerance ``tol`` within ``cap`` terms.

    Converged once the last ``window`` terms are pairwise within ``tol`` and
    the final one lies in the carrier; ConvergedToInfinity once they all lie
    within ``tol`` (chart distance) of the same extension point.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if window < 2:
        raise ValueError("window must be at least 2")
    if cap < window:
        raise ValueError("cap must be at least window")
    terms: list[Any] = []
    for k, term in enumerate(seq):
        if k >= cap:
            break
        terms.append(term)
        if len(terms) < window:
            continue
        tail = terms[-window:]
        for p in s.extension_points:
            if all(s.is_extension(t) and t == p or abs(s.chart(t) - s.chart(p)) <= tol for t in tail):
                return ConvergedToInfinity(p, tuple(terms))
        if s.contains(tail[-1]) and all(
            s.distance(tail[i], tail[j]) <= tol for i in range(window) for j in range(i + 1, window)
        ):
            return Converged(tail[-1], tuple(terms))
    return NoLimitAtCap(_trend(s, terms[-window:]), tuple(terms))


# ---------------------------------------------------------------------------
# Orientations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrientationMap:
    symbol: str
    map: Callable[[Any], Any] = field(compare=False)

    def __call__(self, m: Any) -> Any:
        return self.map(m)


def _neg(m: Any) -> Any:
    out = -m
    # keep 0.0 rather than -0.0 so the identity is fixed bit-for-bit
    if isinstance(out, float) and out == 0:
        return 0.0
    return out


E = OrientationMap("e", lambda m: m)
NEG = OrientationMap("neg", _neg)


def orient(o: OrientationMap, m: Any) -> Any:
    return o.map(m)


def compose_orientations(outer: OrientationMap, inner: OrientationMap) -> OrientationMap:
    """``outer ∘ inner``, canonicalised inside the two-element group {e, neg}."""
    if inner.symbol == "e":
        return outer
    if outer.symbol == "e":
        return inner
    if outer.symbol == "neg" and inner.symbol == "neg":
        return E
    return OrientationMap(f"{outer.symbol}∘{inner.symbol}", lambda m: outer.map(inner.map(m)))
