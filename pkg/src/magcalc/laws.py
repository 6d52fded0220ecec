"""Property checks for every module, run by ``mc suite``.

Each check returns a :class:`CheckResult`; ``run_suite`` times them and
collects a pass/fail matrix.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import magma as mg
from .chain import (
    Chain,
    Interval1DComplex,
    Rect2DComplex,
    chain_add,
    dyadic_interval_chains,
    empty_chain,
    null_equivalent,
    probe_policies,
    reduce_chain,
    region_additivity_check,
    same_base,
)
from .disintegrate import compose_twice, measured_image
from .expr import SymExpr
from .forms import ExteriorDerivative, basic, exterior_derivative, form_add, forms_equal, zero_form
from .funcalc import DerivativeProblem, solve_derivative, sup_error
from .integrate import (
    CALCULI,
    SimpleFunction,
    check_element,
    expand_structure,
    get_calculus,
    ia_integrate,
    parse_policy,
    simple_integral,
)
from .region import (
    Arclength,
    BoxSet,
    Counting,
    Dirac,
    FreeMeasure,
    Interval,
    IntervalSet,
    Lebesgue,
    ZeroMeasure,
    measure_add,
    oriented_measure,
    subspace_algebra,
)


@dataclass(frozen=True)
class CheckResult:
    module: str
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0


# ---------------------------------------------------------------------------
# random generators
# ---------------------------------------------------------------------------


def random_interval(rng: np.random.Generator, lo: int = 0, hi: int = 4, den: int = 8) -> Interval:
    a, b = sorted(rng.choice(np.arange(lo * den, hi * den + 1), size=2, replace=False))
    lo_c, hi_c = (bool(v) for v in rng.integers(0, 2, size=2))
    return Interval(Fraction(int(a), den), Fraction(int(b), den), lo_c, hi_c)


def random_region(rng: np.random.Generator, pieces: int = 3) -> IntervalSet:
    k = int(rng.integers(0, pieces + 1))
    out = IntervalSet()
    for _ in range(k):
        if rng.random() < 0.15:
            out = out.union(IntervalSet.point(Fraction(int(rng.integers(0, 33)), 8)))
        else:
            out = out.union(IntervalSet.of(random_interval(rng)))
    return out


def random_chain(rng: np.random.Generator, terms: int = 3) -> Chain:
    k = int(rng.integers(0, terms + 1))
    out = []
    for _ in range(k):
        iv = random_interval(rng)
        r = IntervalSet.closed(iv.lo, iv.hi)
        out.append(("e" if rng.random() < 0.5 else "neg", r))
    return Chain(tuple(out), 1)


# ---------------------------------------------------------------------------
# magma
# ---------------------------------------------------------------------------

_INSTANCES = ("real_add", "pos_mul", "ext_real_add", "ext_nonneg_add", "ext_nonneg_mul", "free:ab")


def check_identity_laws(n: int = 1000, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    for name in _INSTANCES:
        s = mg.get_magma(name)
        for _ in range(n):
            a = s.sample(rng)
            for v in (mg.mag_op(s, s.identity, a), mg.mag_op(s, a, s.identity)):
                same = v == a or (s.numeric and (math.isnan(a) and math.isnan(v)))
                if not same:
                    return False, f"{name}: identity law fails at {a!r}"
    return True, f"{len(_INSTANCES)} instances × {n} samples"


def check_fold_laws(n: int = 200, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    for name in _INSTANCES:
        s = mg.get_magma(name)
        for _ in range(n):
            a = s.sample(rng)
            if mg.fold_ordered(s, [a]) != a:
                return False, f"{name}: singleton fold"
            if not s.associative:
                continue
            xs = [s.sample(rng) for _ in range(int(rng.integers(0, 5)))]
            ys = [s.sample(rng) for _ in range(int(rng.integers(0, 5)))]
            try:
                whole = mg.fold_ordered(s, xs + ys)
                split = mg.mag_op(s, mg.fold_ordered(s, xs), mg.fold_ordered(s, ys))
            except mg.UndefinedPair:
                continue
            if not (whole == split or (s.numeric and s.equal(whole, split, 1e-9 * (1 + abs(whole))))):
                return False, f"{name}: fold(xs++ys) = {whole!r} vs {split!r}"
    return True, ""


def check_free_order() -> tuple[bool, str]:
    s = mg.free_magma("abcd")
    atoms = [mg.Atom(c) for c in "abcd"]
    seen = set()
    import itertools

    for perm in itertools.permutations(atoms):
        seen.add(mg.fold_ordered(s, perm))
    ok = len(seen) == 24 and mg.node(atoms[0], atoms[1]) != mg.node(atoms[1], atoms[0])
    return ok, f"{len(seen)} distinct folds of 24 orderings"


def check_limit_prefix() -> tuple[bool, str]:
    s = mg.get_magma("ext_real_add")
    seqs = [[2.0 + (-0.5) ** k for k in range(60)], [float(2**k) for k in range(60)], [(-1.0) ** k for k in range(60)]]
    for seq in seqs:
        base = mg.limit(s, seq, cap=60)
        for k in range(1, 16):
            other = mg.limit(s, seq[k:], cap=60 - k)
            if type(base) is not type(other):
                return False, f"dropping {k} terms changes outcome: {base} vs {other}"
            if isinstance(base, mg.Converged) and abs(base.value - other.value) > 1e-5:
                return False, f"dropping {k} terms changes the limit"
    return True, "prefixes of length 1..15 dropped"


# ---------------------------------------------------------------------------
# region
# ---------------------------------------------------------------------------


def check_boolean_algebra(n: int = 500, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    box = IntervalSet.closed(-1, 5)
    for _ in range(n):
        a, b, c = random_region(rng), random_region(rng), random_region(rng)
        laws = {
            "union assoc": ((a | b) | c, a | (b | c)),
            "meet assoc": ((a & b) & c, a & (b & c)),
            "distributive": (a & (b | c), (a & b) | (a & c)),
            "de morgan": (box - (a | b), (box - a) & (box - b)),
            "de morgan dual": (box - (a & b), (box - a) | (box - b)),
            "absorption": (a | (a & b), a),
        }
        for law, (lhs, rhs) in laws.items():
            if lhs != rhs:
                return False, f"{law}: {a!r}, {b!r}, {c!r}"
    return True, f"{n} random triples"


def check_finite_additivity(n: int = 200, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    for mu in (Lebesgue(), Dirac(Fraction(3, 2)), measure_add(Lebesgue(1, 2), Dirac(Fraction(1, 4)))):
        for _ in range(n):
            whole = random_region(rng)
            cuts = sorted(Fraction(int(v), 16) for v in rng.integers(0, 65, size=int(rng.integers(0, 7))))
            edges = [Fraction(-1)] + cuts + [Fraction(5)]
            parts = [whole & IntervalSet.of(Interval(edges[i], edges[i + 1], True, False)) for i in range(len(edges) - 1)]
            total = mg.fold_ordered(mu.codomain, [mu(p) for p in parts])
            if not mu.codomain.equal(total, mu(whole), 1e-9):
                return False, f"{mu.name}: {whole!r} split {cuts}"
    return True, ""


def check_measure_add_flags(n: int = 100, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    mu, nu = Lebesgue(), Counting()
    for _ in range(n):
        r = random_region(rng)
        if mu.codomain.commutative and not mu.codomain.equal(measure_add(mu, nu)(r), measure_add(nu, mu)(r)):
            return False, f"numeric sum not commutative on {r!r}"
    fa, fb = FreeMeasure("μ"), FreeMeasure("ν")
    r = IntervalSet.closed(0, 1)
    free_commutes = measure_add(fa, fb)(r) == measure_add(fb, fa)(r)
    if free_commutes != fa.codomain.commutative:
        return False, "free measure sum order not observable"
    return True, ""


def check_oriented_identity(n: int = 200, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    calc = get_calculus("riemann")
    for mu in (Lebesgue(), Counting()):
        e_mu = oriented_measure(calc.orientation("e"), mu)
        for _ in range(n):
            r = random_region(rng)
            if e_mu(r) != mu(r):
                return False, f"{mu.name} on {r!r}"
    return True, ""


# ---------------------------------------------------------------------------
# integrate
# ---------------------------------------------------------------------------


def _random_simple(rng, y) -> SimpleFunction:
    terms = tuple((random_region(rng, 2), float(rng.normal())) for _ in range(int(rng.integers(1, 4))))
    return SimpleFunction(terms, y)


def check_bi_distributivity(n: int = 100, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    elem = get_calculus("riemann").elem
    elem.g_out
    U = IntervalSet.closed(-1, 5)
    for _ in range(n):
        f, h = _random_simple(rng, elem.y), _random_simple(rng, elem.y)
        mu = Lebesgue(1, float(rng.uniform(0.1, 2)))
        nu = Dirac(Fraction(int(rng.integers(0, 33)), 8))
        left = simple_integral(f + h, mu, U, elem)
        right = simple_integral(f, mu, U, elem) + simple_integral(h, mu, U, elem)
        if abs(left - right) > 1e-9 * (1 + abs(right)):
            return False, f"function side: {left} vs {right}"
        left = simple_integral(f, measure_add(mu, nu), U, elem)
        right = simple_integral(f, mu, U, elem) + simple_integral(f, nu, U, elem)
        if abs(left - right) > 1e-9 * (1 + abs(right)):
            return False, f"measure side: {left} vs {right}"
    return True, f"{n} random pairs"


def check_free_structure() -> tuple[bool, str]:
    U = IntervalSet.closed(0, 1)
    a, b = mg.Atom("a"), mg.Atom("b")
    for name in ("free", "free:m_outer"):
        elem = get_calculus(name).elem
        mu, nu = FreeMeasure("μ"), FreeMeasure("ν")
        s = SimpleFunction(((U, a),), elem.y) + SimpleFunction(((U, b),), elem.y)
        got = simple_integral(s, measure_add(mu, nu), U, elem)
        want = expand_structure(elem, a, b, mu(U), nu(U))
        if got != want:
            return False, f"{name}: {got!r} != {want!r}"
    return True, ""


def check_free_order_sensitivity() -> tuple[bool, str]:
    elem = get_calculus("free").elem
    A, B = IntervalSet.closed(0, 1), IntervalSet.closed(2, 3)
    a, b = mg.Atom("a"), mg.Atom("b")
    mu = FreeMeasure("μ")
    U = IntervalSet.closed(0, 3)
    one = simple_integral(SimpleFunction(((A, a), (B, b)), elem.y), mu, U, elem)
    two = simple_integral(SimpleFunction(((B, b), (A, a)), elem.y), mu, U, elem)
    return one != two, f"{one!r} vs {two!r}"


def check_policy_order_invariance() -> tuple[bool, str]:
    calc = get_calculus("riemann")
    f = SymExpr("x^2")
    U = IntervalSet.closed(0, 1)
    pols = [parse_policy("uniform-midpoint"), parse_policy("dyadic-left"), parse_policy("uniform-right")]
    a = ia_integrate(f, Lebesgue(), U, calc, pols, tol=1e-3, cap=16).verdict
    b = ia_integrate(f, Lebesgue(), U, calc, pols[::-1] + pols[:1], tol=1e-3, cap=16).verdict
    return a == b, f"{a} / {b}"


def check_registered_elements() -> tuple[bool, str]:
    for name in CALCULI:
        calc = get_calculus(name)
        if not calc.y.numeric:
            continue
        fails = check_element(calc.elem, n=300)
        if fails:
            return False, f"{name}: {fails[0]}"
    return True, ", ".join(CALCULI)


def check_region_additivity() -> tuple[bool, str]:
    out = []
    for name in ("riemann", "product"):
        rep = region_additivity_check(get_calculus(name), samples=3)
        if not rep.passed:
            return False, f"{name} fails region additivity"
    rep = region_additivity_check(get_calculus("free"), samples=3)
    out.append(f"free witnesses: {len(rep.witnesses)}")
    return not rep.passed and bool(rep.witnesses), "; ".join(out)


# ---------------------------------------------------------------------------
# chain
# ---------------------------------------------------------------------------


def check_chain_add_laws(n: int = 200, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    for _ in range(n):
        c1, c2 = random_chain(rng), random_chain(rng)
        e = empty_chain(1)
        if chain_add(c1, e) != c1 or chain_add(e, c1) != c1:
            return False, "empty chain is not an identity"
        if chain_add(c1, c2).level != 1:
            return False, "level changed"
    return True, ""


def check_boundary_homomorphism(n: int = 200, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    cx = Interval1DComplex()
    for _ in range(n):
        c1, c2 = random_chain(rng), random_chain(rng)
        if cx.boundary(chain_add(c1, c2)) != chain_add(cx.boundary(c1), cx.boundary(c2)):
            return False, f"{c1!r} ++ {c2!r}"
    rx = Rect2DComplex(1, 1)
    rects = rx.rectangles()
    for _ in range(n // 4):
        i, j = rng.choice(len(rects), size=2)
        c1, c2 = Chain((("e", rects[i]),), 2), Chain((("neg", rects[j]),), 2)
        if rx.boundary(chain_add(c1, c2)) != chain_add(rx.boundary(c1), rx.boundary(c2)):
            return False, f"{c1!r} ++ {c2!r}"
    return True, ""


def check_boundary_squared_rect() -> tuple[bool, str]:
    rx = Rect2DComplex(1, 1)
    calc = rx.calc
    for r in rx.rectangles():
        for o in ("e", "neg"):
            bb = rx.boundary(rx.boundary(Chain(((o, r),), 2)))
            if not reduce_chain(bb).is_empty():
                return False, f"reduced ∂∂ of {o}·{r!r} is not empty"
            if not null_equivalent(bb, calc):
                return False, f"∂∂ of {o}·{r!r} is not null"
    return True, f"{len(rx.rectangles())} rectangles × 2 orientations"


def check_boundary_squared_interval() -> tuple[bool, str]:
    cx = Interval1DComplex()
    chains = dyadic_interval_chains(8)
    for c in chains:
        bb = cx.boundary(cx.boundary(c))
        if not bb.is_empty() or not reduce_chain(cx.boundary(c)).terms:
            return False, f"{c!r}"
    pairs = 0
    for i, c1 in enumerate(chains[:12]):
        for c2 in chains[:12]:
            split = chain_add(c1, c2)
            bb = cx.boundary(cx.boundary(split))
            pairs += 1
            if not bb.is_empty():
                return False, f"{split!r}"
    return True, f"{len(chains)} dyadic intervals, {pairs} two-term chains"


def check_same_domain_preservation(n: int = 100, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    cx = Interval1DComplex()
    grid = [Fraction(k, 8) for k in range(0, 33)]
    for _ in range(n):
        a, m, b = sorted(rng.choice(len(grid), size=3, replace=False))
        whole = Chain((("e", IntervalSet.closed(grid[a], grid[b])),), 1)
        split = Chain((("e", IntervalSet.closed(grid[a], grid[m])), ("e", IntervalSet.closed(grid[m], grid[b]))), 1)
        if not same_base(whole, split):
            continue
        bw, bs = cx.reduced_boundary(whole), cx.reduced_boundary(split)
        if not same_base(bw, bs):
            return False, f"{whole!r} vs {split!r}"
    return True, "reduced boundaries of same-base pairs share base sets"


def check_boundary_in_closure(n: int = 200, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    cx = Interval1DComplex()
    for _ in range(n):
        c = random_chain(rng)
        b = cx.boundary(c).base_set()
        if b is not None and not b.issubset(c.base_set().closure()):
            return False, f"{c!r}"
    rx = Rect2DComplex(1, 1)
    for r in rx.rectangles():
        c = Chain((("e", r),), 2)
        if not rx.boundary(c).base_set().issubset(r.closure()):
            return False, f"{r!r}"
        for _, seg in rx.boundary(c).terms:
            if not rx.boundary(Chain((("e", seg),), 1)).base_set().issubset(seg.closure()):
                return False, f"{seg!r}"
    return True, ""


# ---------------------------------------------------------------------------
# disintegrate
# ---------------------------------------------------------------------------


def _complex_cases():
    ix, rx = Interval1DComplex(), Rect2DComplex(1, 1)
    return [
        (ix, [Chain((("e", c.terms[0][1]),), 1) for c in dyadic_interval_chains(4)], [Lebesgue(), Lebesgue(1, 2.5), ZeroMeasure(), measure_add(Lebesgue(), Lebesgue(1, 0.5))]),
        (rx, [Chain((("e", r),), 2) for r in rx.rectangles()[::7]], [Lebesgue(2), Lebesgue(2, 3.0), ZeroMeasure()]),
    ]


def check_pi_pi_zero() -> tuple[bool, str]:
    for cx, chains, measures in _complex_cases():
        for c in chains:
            for mu in measures:
                bb, m = compose_twice(cx, c, mu)
                if not bb.is_empty() or not isinstance(m, ZeroMeasure):
                    return False, f"{cx.name}: {c!r} with {mu.name}"
    return True, ""


def check_pi_scaling() -> tuple[bool, str]:
    for cx, chains, _ in _complex_cases():
        k = Fraction(3, 2)
        for c in chains[:8]:
            mu = Lebesgue(c.terms[0][1].dim)
            a = measured_image(cx, c, mu.scaled(k))
            b = measured_image(cx, c, mu)
            for _, face in cx.boundary(c).terms:
                if abs(a(face) - float(k) * b(face)) > 1e-12:
                    return False, f"{cx.name}: {c!r}"
    return True, ""


def check_pi_space() -> tuple[bool, str]:
    for cx, chains, measures in _complex_cases():
        for c in chains:
            m = measured_image(cx, c, measures[0])
            want = subspace_algebra(cx.boundary(c).base_set(), cx.space)
            if m.space != want:
                return False, f"{cx.name}: {c!r}"
    return True, ""


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------


def check_zero_form_identity() -> tuple[bool, str]:
    cx = Interval1DComplex()
    w = basic(1, "x^2", "lebesgue", cx)
    z = zero_form(1, cx)
    chains = dyadic_interval_chains(4)
    ok = forms_equal(form_add(z, w), w, chains, tol=1e-9) and forms_equal(form_add(w, z), w, chains, tol=1e-9)
    return ok, f"{len(chains)} probe chains"


def check_dd_zero() -> tuple[bool, str]:
    rx = Rect2DComplex(1, 1)
    polys = [f"x^{i}*y^{j}" for i in range(4) for j in range(4 - i)]
    rects = [Chain((("e", r),), 2) for r in rx.rectangles()]
    for p in polys:
        dd = ExteriorDerivative(ExteriorDerivative(basic(0, p, "counting", rx)))
        for c in rects:
            v = dd.evaluate(c).verdict
            if getattr(v, "value", None) != 0.0:
                return False, f"d∘d of {p} on {c!r}: {v}"
    return True, f"{len(polys)} polynomials × {len(rects)} rectangles"


def check_d_independent_of_S() -> tuple[bool, str]:
    cx = Interval1DComplex()
    w = basic(0, "x^3 - x", "counting", cx)
    S, T = IntervalSet.closed(0, 1), IntervalSet.closed(-2, 3)
    dS, dT = exterior_derivative(w, S), exterior_derivative(w, T)
    for c in dyadic_interval_chains(8):
        if dS.evaluate(c).verdict != dT.evaluate(c).verdict:
            return False, f"{c!r}"
    outside = Chain((("e", IntervalSet.closed(2, 3)),), 1)
    return type(dS.evaluate(outside).verdict).__name__ == "OutsideDomain", "chains inside S agree exactly"


def check_form_chain_additivity(n: int = 50, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    cx = Interval1DComplex()
    w = form_add(basic(1, "x", "lebesgue", cx), basic(1, "1", "dirac:1/2", cx))
    for _ in range(n):
        c1, c2 = random_chain(rng, 2), random_chain(rng, 2)
        pols = probe_policies(cx.calc)
        both = w.evaluate(chain_add(c1, c2), tol=1e-9, policies=pols).verdict
        parts = [w.evaluate(c, tol=1e-9, policies=pols).verdict for c in (c1, c2)]
        if abs(both.value - (parts[0].value + parts[1].value)) > 1e-9:
            return False, f"{c1!r} ++ {c2!r}"
    return True, ""


# ---------------------------------------------------------------------------
# funcalc
# ---------------------------------------------------------------------------


def check_solve_self_consistency() -> tuple[bool, str]:
    cx = Interval1DComplex()
    p = DerivativeProblem(cx, 0, IntervalSet.closed(0, 1), SymExpr("sin(3*x) + x^2"))
    res = solve_derivative(p, 8)
    return res.report.passed, f"max residual {res.report.max_residual:.2e} on {len(res.report.residuals)} probes"


def check_d0_ratio() -> tuple[bool, str]:
    cx = Interval1DComplex()
    S = IntervalSet.closed(0, 1)
    details = []
    for k in (2, 3, 4):
        p = DerivativeProblem(cx, 0, S, SymExpr(f"x^{k}"))
        errs = [sup_error(solve_derivative(p, d, unions=0), lambda x: k * x ** (k - 1)) for d in (6, 7, 8)]
        ratios = [errs[i] / errs[i + 1] for i in range(2)]
        details.append(f"x^{k}: {ratios[0]:.2f}, {ratios[1]:.2f}")
        if not all(1.5 <= r <= 2.5 for r in ratios):
            return False, "; ".join(details)
    return True, "; ".join(details)


def check_green_d1() -> tuple[bool, str]:
    from .forms import stokes_residual

    rx = Rect2DComplex(1, 1)
    f = "x^2*y"
    p = DerivativeProblem(rx, 1, BoxSet.box(0, 1, 0, 1), SymExpr(f), Lebesgue(2))
    res = solve_derivative(p, 2, unions=5)
    w = basic(1, f, Arclength(), rx)
    cand = basic(2, res.candidate.h, Lebesgue(2), rx)
    worst = 0.0
    for r in rx.rectangles()[::9]:
        c = Chain((("e", r),), 2)
        worst = max(worst, stokes_residual(w, c, cand, tol=1e-7, cap=16, policies=probe_policies(rx.calc)))
    return res.report.passed and worst < 1e-5, f"max Green residual {worst:.2e}"


def check_product_log_conjugation() -> tuple[bool, str]:
    cx = Interval1DComplex()
    S = IntervalSet.closed(0, 1)
    pcx = cx.with_calculus(get_calculus("product"))
    for f in ("exp(x^2)", "1 + x^2", "2 + sin(x)"):
        prod = solve_derivative(DerivativeProblem(pcx, 0, S, SymExpr(f)), 8, unions=0).values
        ries = solve_derivative(DerivativeProblem(cx, 0, S, SymExpr(f"log({f})")), 8, unions=0).values
        if np.max(np.abs(prod - np.exp(ries))) > 1e-9:
            return False, f
    return True, ""


# ---------------------------------------------------------------------------
# cli
# ---------------------------------------------------------------------------


def check_cli_determinism() -> tuple[bool, str]:
    from .cli import render

    doc = {"verb": "integrate", "calculus": "riemann", "function": "x^2", "measure": "lebesgue",
           "region": [[0, 1]], "policies": ["uniform-midpoint", "uniform-random"], "tol": 1e-4, "cap": 10}
    a, b = render(doc, seed=3), render(doc, seed=3)
    return a == b, f"{len(a.text)} bytes"


SUITES: dict[str, list[tuple[str, Callable[[], tuple[bool, str]]]]] = {
    "magma": [
        ("identity laws", check_identity_laws),
        ("fold laws", check_fold_laws),
        ("free fold order observable", check_free_order),
        ("limit prefix invariance", check_limit_prefix),
    ],
    "region": [
        ("boolean algebra", check_boolean_algebra),
        ("finite additivity", check_finite_additivity),
        ("measure sum flags", check_measure_add_flags),
        ("identity orientation", check_oriented_identity),
    ],
    "integrate": [
        ("bi-distributivity", check_bi_distributivity),
        ("free expansion structure", check_free_structure),
        ("free order sensitivity", check_free_order_sensitivity),
        ("policy order invariance", check_policy_order_invariance),
        ("registered element laws", check_registered_elements),
        ("region additivity", check_region_additivity),
    ],
    "chain": [
        ("chain sum laws", check_chain_add_laws),
        ("boundary homomorphism", check_boundary_homomorphism),
        ("boundary squared (rectangles)", check_boundary_squared_rect),
        ("boundary squared (dyadic intervals)", check_boundary_squared_interval),
        ("same-domain preservation", check_same_domain_preservation),
        ("boundary in closure", check_boundary_in_closure),
    ],
    "disintegrate": [
        ("composition is zero", check_pi_pi_zero),
        ("scaling", check_pi_scaling),
        ("subspace algebra", check_pi_space),
    ],
    "forms": [
        ("zero form identity", check_zero_form_identity),
        ("d∘d = 0", check_dd_zero),
        ("independence of S", check_d_independent_of_S),
        ("chain additivity", check_form_chain_additivity),
    ],
    "funcalc": [
        ("self-consistency", check_solve_self_consistency),
        ("first-order convergence", check_d0_ratio),
        ("ply-1 Green agreement", check_green_d1),
        ("product/log conjugation", check_product_log_conjugation),
    ],
    "cli": [
        ("determinism", check_cli_determinism),
    ],
}


def run_suite(selector: str = "all") -> list[CheckResult]:
    if selector != "all" and selector not in SUITES:
        raise KeyError(f"unknown suite {selector!r}; choose from all, {', '.join(SUITES)}")
    names = list(SUITES) if selector == "all" else [selector]
    out = []
    for mod in names:
        for name, fn in SUITES[mod]:
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # a crashing check is a failing check
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            out.append(CheckResult(mod, name, bool(ok), detail, time.perf_counter() - t0))
    return out
