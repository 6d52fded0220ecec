"""Derivatives defined by the boundary relation ``∫_c h dμ = ∫_∂c f dπμ``.

``verify_derivative`` audits the relation on probe chains; ``solve_derivative``
inverts it cell by cell on a grid; ``iterate_derivative`` repeats the solve on
re-fitted candidates for higher orders.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .chain import Chain, ChainComplex, Interval1DComplex, integrate_chain, probe_policies
from .disintegrate import get_disintegration
from .expr import FunctionExpr, GridFunction, Interpolant
from .integrate import CalculusChoice, Defined, grid_policy
from .region import BoxSet, IntervalSet, Lebesgue, Measure, Region, num


class InverterUnavailable(KeyError):
    pass


@dataclass(frozen=True, eq=False)
class DerivativeProblem:
    """Find ``h`` with ``∫_c g(h, dμ) = ∫_∂c g(f, dπμ)`` for chains ``c`` inside ``S``."""

    complex: ChainComplex
    ply: int
    S: Region
    f: FunctionExpr
    mu: Measure = field(default_factory=Lebesgue)
    tol: float = 1e-6
    cap: int = 20

    def __post_init__(self):
        if not self.complex.f_monovalued:
            raise ValueError(f"{self.complex.name} is not f-monovalued")
        get_disintegration(self.complex, self.ply + 1)
        object.__setattr__(self, "S", self.S.closure())

    @property
    def calc(self) -> CalculusChoice:
        return self.complex.calc


@dataclass(frozen=True, eq=False)
class DerivativeCandidate:
    h: FunctionExpr
    skipped: tuple = ()  # cells with zero measure: no local inverse, left at the identity


@dataclass(frozen=True)
class ProbeResidual:
    chain: Chain
    lhs: Any
    rhs: Any
    residual: float


@dataclass(frozen=True)
class VerifyReport:
    passed: bool
    residuals: tuple  # ProbeResidual, in probe order
    witness: Optional[ProbeResidual] = None

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.residuals), default=0.0)


def _policies_for(h: FunctionExpr, calc: CalculusChoice) -> list:
    return [grid_policy()] if isinstance(h, GridFunction) else probe_policies(calc)


def _value(rep) -> Any:
    return rep.verdict.value if isinstance(rep.verdict, Defined) else None


def boundary_side(p: DerivativeProblem, c: Chain, f: Optional[FunctionExpr] = None) -> Any:
    """``∫_∂c g(f, dπμ)``, or ``None`` when undefined."""
    d = get_disintegration(p.complex, c.level)
    pm = d(p.complex, c, p.mu)
    rep = integrate_chain(p.complex.boundary(c), f or p.f, pm, p.calc, probe_policies(p.calc), tol=p.tol, cap=p.cap)
    return _value(rep)


def chain_side(p: DerivativeProblem, c: Chain, h: FunctionExpr) -> Any:
    rep = integrate_chain(c, h, p.mu, p.calc, _policies_for(h, p.calc), tol=p.tol, cap=p.cap)
    return _value(rep)


def verify_derivative(p: DerivativeProblem, cand: DerivativeCandidate, chains: Sequence[Chain], tol: float = 1e-3) -> VerifyReport:
    """Compare both sides of the boundary relation on every probe chain (chart distance)."""
    G = p.calc.g_out
    out, witness = [], None
    for c in chains:
        lhs, rhs = chain_side(p, c, cand.h), boundary_side(p, c)
        r = math.inf if lhs is None or rhs is None else G.distance(lhs, rhs)
        pr = ProbeResidual(c, lhs, rhs, r)
        out.append(pr)
        if r > tol and (witness is None or r > witness.residual):
            witness = pr
    return VerifyReport(witness is None, tuple(out), witness)


# local inverses of m ↦ g(h, m): solve g(h, m) = r for h

def _riemann_inverse(m: float, r: float) -> float:
    return r / m


def _product_inverse(m: float, r: float) -> float:
    return r ** (1.0 / m)


def generic_inverse(calc: CalculusChoice, lo: float = -1e6, hi: float = 1e6) -> Callable[[float, float], float]:
    """Root-find ``chart(g(h, m)) = chart(r)`` over ``h`` by bracketing."""
    G = calc.g_out

    def inv(m, r):
        target = G.chart(r)

        def phi(h):
            return G.chart(calc.elem.g(h, m)) - target

        a, b = (1e-12, hi) if calc.y.name == "pos_mul" else (lo, hi)
        return brentq(phi, a, b, xtol=1e-14)

    return inv


_INVERTERS: dict[str, Callable[[float, float], float]] = {
    "riemann": _riemann_inverse,
    "lebesgue": _riemann_inverse,
    "product": _product_inverse,
}


def get_inverter(calc: CalculusChoice) -> Callable[[float, float], float]:
    if calc.name in _INVERTERS:
        return _INVERTERS[calc.name]
    if calc.y.numeric and calc.g_out.numeric:
        return generic_inverse(calc)
    raise InverterUnavailable(f"no local inverse registered for the {calc.name} calculus")


def grid_edges(S: Region, depth: int) -> tuple:
    """Uniform grid with ``2^depth`` cells per interval, or ``2^depth`` per axis on a box."""
    n = 2**depth
    if isinstance(S, IntervalSet):
        h = S.hull()
        return (np.linspace(float(h.lo), float(h.hi), n + 1),)
    b = S.boxes()[0]
    return (np.linspace(float(b.x.lo), float(b.x.hi), n + 1), np.linspace(float(b.y.lo), float(b.y.hi), n + 1))


def _fractions(edges: np.ndarray) -> list:
    return [num(float(v)) for v in edges]


def cell_chains(edges: tuple) -> list:
    """``(index, e·cell)`` for every closed grid cell."""
    if len(edges) == 1:
        e = _fractions(edges[0])
        return [(i, Chain((("e", IntervalSet.closed(e[i], e[i + 1])),), 1)) for i in range(len(e) - 1)]
    ex, ey = _fractions(edges[0]), _fractions(edges[1])
    return [
        ((i, j), Chain((("e", BoxSet.box(ex[i], ex[i + 1], ey[j], ey[j + 1])),), 2))
        for i in range(len(ex) - 1)
        for j in range(len(ey) - 1)
    ]


def union_chains(edges: tuple, count: int = 50, seed: int = 0) -> list:
    """Random unions of grid cells, each as a single-term chain."""
    rng = np.random.default_rng(seed)
    cells = [c.terms[0][1] for _, c in cell_chains(edges)]
    level = 1 if len(edges) == 1 else 2
    out = []
    for _ in range(count):
        k = int(rng.integers(2, min(8, len(cells)) + 1)) if len(cells) > 1 else 1
        pick = rng.choice(len(cells), size=k, replace=False)
        region = cells[pick[0]]
        for i in pick[1:]:
            region = region.union(cells[i])
        out.append(Chain((("e", region),), level))
    return out


@dataclass(frozen=True, eq=False)
class SolveResult:
    candidate: DerivativeCandidate
    report: VerifyReport
    edges: tuple

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.candidate.h.values)


def _cell_rhs_1d(p: DerivativeProblem, e: np.ndarray, f: FunctionExpr) -> Optional[np.ndarray]:
    """Vectorised boundary side for every interval cell at once."""
    calc = p.calc
    if not isinstance(p.complex, Interval1DComplex) or type(p.mu) is not Lebesgue or calc.elem.g_vec is None:
        return None
    fv = np.asarray(f.eval_points(e.reshape(-1, 1)), dtype=float)
    k = p.mu.scale
    up = calc.elem.g_vec(fv[1:], np.full(len(e) - 1, k))
    down = calc.elem.g_vec(fv[:-1], np.full(len(e) - 1, -k))
    if calc.name == "product":
        return up * down
    if calc.name in ("riemann", "lebesgue"):
        return up + down
    return None


def solve_derivative(
    p: DerivativeProblem,
    depth: int = 10,
    inverter: Optional[Callable[[float, float], float]] = None,
    f: Optional[FunctionExpr] = None,
    unions: int = 50,
    seed: int = 0,
    tol: float = 1e-3,
) -> SolveResult:
    """Piecewise-constant ``h`` with ``h_i = inverter(μ(cell_i), RHS(cell_i))``."""
    f = f or p.f
    inv = inverter or get_inverter(p.calc)
    edges = grid_edges(p.S, depth)
    cells = cell_chains(edges)
    shape = tuple(len(e) - 1 for e in edges)
    values = np.zeros(shape)
    skipped = []
    rhs_fast = _cell_rhs_1d(p, edges[0], f) if len(edges) == 1 else None
    ident = p.calc.m.identity
    for k, (idx, c) in enumerate(cells):
        m = p.mu(c.terms[0][1])
        if m == ident:
            skipped.append(idx)
            values[idx] = p.calc.y.identity
            continue
        r = rhs_fast[k] if rhs_fast is not None else boundary_side(p, c, f)
        if r is None:
            raise ArithmeticError(f"boundary side undefined on cell {idx}")
        values[idx] = inv(m, r)
    cand = DerivativeCandidate(GridFunction(edges, values), tuple(skipped))
    probes = [c for _, c in cells] + union_chains(edges, unions, seed)
    sub = p if f is p.f else DerivativeProblem(p.complex, p.ply, p.S, f, p.mu, p.tol, p.cap)
    return SolveResult(cand, verify_derivative(sub, cand, probes, tol), edges)


def solve_cell_values(p: DerivativeProblem, depth: int, f: Optional[FunctionExpr] = None) -> np.ndarray:
    """Cell values only (no verification)."""
    return solve_derivative(p, depth, f=f, unions=0).values


@dataclass(frozen=True)
class Stage:
    order: int
    result: SolveResult
    report: VerifyReport  # stage check on midpoint-offset probes


@dataclass(frozen=True)
class IterateReport:
    stages: tuple
    achieved_order: int

    @property
    def candidate(self) -> DerivativeCandidate:
        return self.stages[-1].result.candidate


def _midpoint_probes(edges: np.ndarray, count: int, seed: int) -> list:
    """Adjacent-midpoint intervals plus random ``[m_i, m_j]``."""
    mids = [num(float(v)) for v in (edges[:-1] + edges[1:]) / 2]
    out = [Chain((("e", IntervalSet.closed(mids[i], mids[i + 1])),), 1) for i in range(len(mids) - 1)]
    rng = np.random.default_rng(seed)
    for _ in range(count):
        i, j = sorted(rng.choice(len(mids), size=2, replace=False))
        out.append(Chain((("e", IntervalSet.closed(mids[i], mids[j])),), 1))
    return out


def iterate_derivative(p: DerivativeProblem, order: int, depth: int = 8, tol: float = 1e-3, seed: int = 0) -> IterateReport:
    """Repeat the solve ``order`` times on grids coarsened by one level per stage.

    Between stages the candidate is re-fitted as the linear interpolant through
    its cell midpoints. Stage ``k ≥ 2`` is checked against that interpolant on
    intervals between previous-stage midpoints, where the interpolant is exact.
    Solving stops at the first failing stage; the achieved order is the last
    passing one.
    """
    if not isinstance(p.complex, Interval1DComplex):
        raise ValueError("higher orders are implemented on the interval complex")
    f: FunctionExpr = p.f
    stages, achieved = [], 0
    prev_edges = None
    for k in range(1, order + 1):
        d = depth - (k - 1)
        if d < 1:
            break
        res = solve_derivative(p, d, f=f, unions=50, seed=seed, tol=tol)
        report = res.report
        if prev_edges is not None:
            sub = DerivativeProblem(p.complex, p.ply, p.S, f, p.mu, p.tol, p.cap)
            report = verify_derivative(sub, res.candidate, _midpoint_probes(prev_edges, 50, seed), tol)
        stages.append(Stage(k, res, report))
        if not (report.passed and res.report.passed):
            break
        achieved = k
        e = res.edges[0]
        f = Interpolant((e[:-1] + e[1:]) / 2, res.values)
        prev_edges = e
    return IterateReport(tuple(stages), achieved)


def sup_error(res: SolveResult, exact: Callable[[np.ndarray], np.ndarray], samples: int = 8) -> float:
    """Sup over sampled points of every cell of ``|h − exact|`` (interval grids)."""
    e = res.edges[0]
    t = np.linspace(0.0, 1.0, samples)
    pts = (e[:-1, None] + (e[1:] - e[:-1])[:, None] * t[None, :]).ravel()
    h = np.repeat(res.values, samples)
    return float(np.max(np.abs(h - exact(pts))))


__all__ = [
    "DerivativeCandidate", "DerivativeProblem", "InverterUnavailable", "IterateReport", "ProbeResidual",
    "SolveResult", "Stage", "VerifyReport", "boundary_side", "cell_chains",
    "chain_side", "generic_inverse", "get_inverter", "grid_edges", "iterate_derivative",
    "solve_cell_values", "solve_derivative", "sup_error", "union_chains", "verify_derivative",
]
