"""Differential forms on chain complexes and their exterior derivatives.

A basic form pairs a function with a measure and integrates over chains; a form
is an ordered sum of basic forms at one level. The exterior derivative of a
form evaluates the form on the chain's boundary.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Sequence

from .chain import (
    _SEVERITY,
    Chain,
    ChainComplex,
    LevelMismatch,
    integrate_chain,
)
from .expr import FunctionExpr, GridFunction, parse_function
from .integrate import CalculusChoice, Defined, IAReport, OutsideDomain, grid_policy
from .magma import fold_ordered
from .region import Measure, Region, parse_measure


class CoverageGap(ValueError):
    """A chain region lies outside a representation's domain."""


class NotExteriorDifferentiable(ValueError):
    def __init__(self, chain: Chain, verdict: Any):
        super().__init__(f"boundary evaluation on {chain!r} is {verdict}")
        self.chain, self.verdict = chain, verdict


class UndefinedEvaluation(ArithmeticError):
    def __init__(self, verdict: Any):
        super().__init__(f"form evaluation is not defined: {verdict}")
        self.verdict = verdict


@dataclass(frozen=True, eq=False)
class BasicForm:
    """``c ↦ ∫_c g(f, dμ)`` from one global representation ``(f, μ)``.

    ``domain=None`` means the representation covers the whole space.
    """

    level: int
    f: FunctionExpr
    mu: Measure
    complex: ChainComplex
    domain: Optional[Region] = None
    name: str = ""

    @property
    def calc(self) -> CalculusChoice:
        return self.complex.calc

    def evaluate(self, c: Chain, tol: float = 1e-6, cap: int = 20, policies=None) -> IAReport:
        if c.level != self.level:
            raise LevelMismatch(f"level-{self.level} form applied to a level-{c.level} chain")
        if self.domain is not None:
            for _, r in c.terms:
                if not r.issubset(self.domain):
                    raise CoverageGap(f"{r!r} is outside the representation domain {self.domain!r}")
        if isinstance(self.f, GridFunction):
            policies = [grid_policy()]
        return integrate_chain(c, self.f, self.mu, self.calc, policies, tol=tol, cap=cap)


@dataclass(frozen=True, eq=False)
class Form:
    """Ordered sum of basic forms at one level; no summands is the zero form."""

    level: int
    complex: ChainComplex
    summands: tuple = ()

    @property
    def calc(self) -> CalculusChoice:
        return self.complex.calc

    def evaluate(self, c: Chain, tol: float = 1e-6, cap: int = 20, policies=None) -> IAReport:
        return eval_form(self, c, tol, cap, policies)

    def __add__(self, other: "Form") -> "Form":
        return form_add(self, other)


def basic(level: int, f: Any, mu: Any, cx: ChainComplex, domain: Optional[Region] = None) -> Form:
    """One-summand form; ``f`` and ``mu`` may be literals."""
    dim = 2 if cx.name.startswith("rect2d") else 1
    fx = parse_function(f, dim, cx.space)
    m = parse_measure(mu, cx.space) if isinstance(mu, str) else mu
    return Form(level, cx, (BasicForm(level, fx, m, cx, domain, f"({f}, {getattr(m, 'name', m)})"),))


def zero_form(level: int, cx: ChainComplex) -> Form:
    return Form(level, cx, ())


def form_add(a: Form, b: Form) -> Form:
    if a.level != b.level:
        raise LevelMismatch(f"cannot add forms of levels {a.level} and {b.level}")
    return Form(a.level, a.complex, a.summands + b.summands)


def _fold_reports(G, reports: Sequence[IAReport]) -> IAReport:
    runs = tuple(r for rep in reports for r in rep.runs)
    worst = None
    for rep in reports:
        v = rep.verdict
        if not isinstance(v, Defined) and (worst is None or _SEVERITY.index(type(v)) < _SEVERITY.index(type(worst))):
            worst = v
    if worst is not None:
        return IAReport(worst, runs)
    return IAReport(Defined(fold_ordered(G, [rep.verdict.value for rep in reports]), "form"), runs)


def eval_form(w: Form, c: Chain, tol: float = 1e-6, cap: int = 20, policies=None) -> IAReport:
    """Fold of the summands' chain integrals, in summand order."""
    if c.level != w.level:
        raise LevelMismatch(f"level-{w.level} form applied to a level-{c.level} chain")
    G = w.calc.g_out
    if not w.summands:
        return IAReport(Defined(G.identity, "zero form"))
    return _fold_reports(G, [s.evaluate(c, tol, cap, policies) for s in w.summands])


@dataclass(frozen=True, eq=False)
class ExteriorDerivative:
    """``dω`` on ``S``: evaluates ``ω`` on the boundary of chains inside ``S``.

    Outside ``S`` the verdict is OutsideDomain. ``S=None`` means the whole space.
    """

    form: Any  # Form or ExteriorDerivative
    S: Optional[Region] = None

    @property
    def level(self) -> int:
        return self.form.level + 1

    @property
    def complex(self) -> ChainComplex:
        return self.form.complex

    @property
    def calc(self) -> CalculusChoice:
        return self.form.calc

    def evaluate(self, c: Chain, tol: float = 1e-6, cap: int = 20, policies=None) -> IAReport:
        if c.level != self.level:
            raise LevelMismatch(f"level-{self.level} derivative applied to a level-{c.level} chain")
        base = c.base_set()
        if self.S is not None and base is not None and not base.issubset(self.S):
            return IAReport(OutsideDomain(f"{base!r} is not inside {self.S!r}"))
        return self.form.evaluate(self.complex.boundary(c), tol, cap, policies)


def exterior_derivative(w: Any, S: Optional[Region] = None, chains: Sequence[Chain] = (), tol: float = 1e-6, cap: int = 20) -> ExteriorDerivative:
    """``dω`` on ``S``; ``chains`` are checked for defined boundary evaluations."""
    d = ExteriorDerivative(w, S)
    for c in chains:
        v = d.evaluate(c, tol, cap).verdict
        if not isinstance(v, (Defined, OutsideDomain)):
            raise NotExteriorDifferentiable(c, v)
    return d


def _defined_value(rep: IAReport) -> Any:
    if not isinstance(rep.verdict, Defined):
        raise UndefinedEvaluation(rep.verdict)
    return rep.verdict.value


def stokes_residual(w: Any, c: Chain, candidate: Any, tol: float = 1e-6, cap: int = 20, policies=None) -> float:
    """Chart distance between ``candidate(c)`` and ``ω(∂c)``."""
    lhs = _defined_value(candidate.evaluate(c, tol, cap, policies))
    rhs = _defined_value(w.evaluate(w.complex.boundary(c), tol, cap, policies))
    return w.calc.g_out.distance(lhs, rhs)


def forms_equal(a: Any, b: Any, chains: Sequence[Chain], tol: float = 1e-9, cap: int = 20) -> bool:
    """Extensional equality on a family of probe chains."""
    G = a.calc.g_out
    for c in chains:
        va, vb = a.evaluate(c, tol, cap).verdict, b.evaluate(c, tol, cap).verdict
        if isinstance(va, Defined) and isinstance(vb, Defined):
            if not (G.equal(va.value, vb.value, tol) or G.distance(va.value, vb.value) <= tol):
                return False
        elif type(va) is not type(vb):
            return False
    return True


def parse_form(obj: dict, cx: ChainComplex) -> Form:
    """``{"level": n, "f": ..., "measure": ...}`` or ``{"level": n, "summands": [...]}``."""
    level = int(obj["level"])
    if "summands" in obj:
        out = zero_form(level, cx)
        for s in obj["summands"]:
            out = form_add(out, basic(level, s["f"], s.get("measure", "lebesgue"), cx))
        return out
    return basic(level, obj["f"], obj.get("measure", "lebesgue"), cx)


__all__ = [
    "BasicForm", "CoverageGap", "ExteriorDerivative", "Form", "NotExteriorDifferentiable",
    "UndefinedEvaluation", "basic", "eval_form", "exterior_derivative", "form_add", "forms_equal",
    "parse_form", "stokes_residual", "zero_form",
]
