import math

import numpy as np
import pytest

from magcalc.chain import GraphComplex, Interval1DComplex, Rect2DComplex, dyadic_interval_chains
from magcalc.expr import Constant, SymExpr
from magcalc.funcalc import (
    DerivativeCandidate,
    DerivativeProblem,
    InverterUnavailable,
    cell_chains,
    generic_inverse,
    get_inverter,
    grid_edges,
    iterate_derivative,
    solve_derivative,
    sup_error,
    verify_derivative,
)
from magcalc.integrate import get_calculus
from magcalc.region import BoxSet, IntervalSet, Lebesgue

cx = Interval1DComplex()
pcx = cx.with_calculus(get_calculus("product"))
UNIT = IntervalSet.closed(0, 1)


def _problem(f, complex_=cx, **kw):
    return DerivativeProblem(complex_, 0, UNIT, SymExpr(f) if isinstance(f, str) else f, **kw)


def test_verify_known_derivative():
    rep = verify_derivative(_problem("x^2", tol=1e-6, cap=12), DerivativeCandidate(SymExpr("2*x")), dyadic_interval_chains(8))
    assert rep.passed and rep.max_residual < 1e-3


def test_verify_constant():
    rep = verify_derivative(_problem(Constant(3.0)), DerivativeCandidate(Constant(0.0)), dyadic_interval_chains(4))
    assert rep.passed


def test_verify_product_calculus():
    rep = verify_derivative(_problem("exp(x)", pcx, tol=1e-6, cap=12), DerivativeCandidate(Constant(math.e)), dyadic_interval_chains(4))
    assert rep.passed


def test_verify_wrong_candidate_has_witness():
    rep = verify_derivative(_problem("x^2", tol=1e-6, cap=12), DerivativeCandidate(SymExpr("x")), dyadic_interval_chains(4))
    assert not rep.passed
    assert rep.witness.residual > 1e-3


def test_solve_x2():
    res = solve_derivative(_problem("x^2"), 10, unions=20)
    assert sup_error(res, lambda x: 2 * x) <= 4 * 2.0**-9
    assert res.report.passed


def test_solve_product_exp():
    res = solve_derivative(_problem("exp(x)", pcx), 10, unions=0)
    assert np.max(np.abs(res.values - math.e)) < 1e-2


def test_solve_linear_exact():
    res = solve_derivative(_problem("3*x - 1"), 6, unions=0)
    assert np.allclose(res.values, 3.0, atol=1e-9)


def test_first_order_convergence():
    p = _problem("x^3")
    errs = [sup_error(solve_derivative(p, d, unions=0), lambda x: 3 * x**2) for d in (6, 7, 8)]
    for a, b in zip(errs, errs[1:]):
        assert 1.5 <= a / b <= 2.5


def test_second_order_x3():
    it = iterate_derivative(_problem("x^3"), 2, depth=8)
    assert it.achieved_order == 2
    res = it.stages[-1].result
    width = float(res.edges[0][1] - res.edges[0][0])
    assert sup_error(res, lambda x: 6 * x) <= 8 * width


def test_constant_any_order_is_zero():
    it = iterate_derivative(_problem(Constant(2.0)), 3, depth=6)
    assert it.achieved_order == 3
    assert np.allclose(it.stages[-1].result.values, 0.0)


def test_kink_witness_persists():
    for d in (6, 8):
        it = iterate_derivative(_problem("abs(x - 0.5)"), 2, depth=d)
        assert it.achieved_order == 1
        wit = it.stages[-1].report.witness
        assert wit.residual > 0.1
        lo, hi = float(wit.chain.base_set().hull().lo), float(wit.chain.base_set().hull().hi)
        assert lo <= 0.5 <= hi


def test_green_density_on_grid():
    rx = Rect2DComplex(1, 1)
    p = DerivativeProblem(rx, 1, BoxSet.box(0, 1, 0, 1), SymExpr("x^2*y"), Lebesgue(2))
    res = solve_derivative(p, 2, unions=3)
    assert res.values.shape == (4, 4)
    x = (np.arange(4) + 0.5) / 4
    # cell averages of 2xy - x^2
    want = 2 * x[:, None] * x[None, :] - (x[:, None] ** 2 + 1 / 192)
    assert np.allclose(res.values, want, atol=1e-6)
    assert res.report.passed


def test_grid_helpers():
    edges = grid_edges(UNIT, 3)
    assert len(edges[0]) == 9
    assert len(cell_chains(edges)) == 8
    assert len(grid_edges(BoxSet.box(0, 1, 0, 1), 2)) == 2


def test_inverters():
    calc = get_calculus("riemann")
    assert get_inverter(calc)(0.5, 2.0) == 4.0
    assert get_inverter(get_calculus("product"))(2.0, 9.0) == pytest.approx(3.0)
    assert generic_inverse(calc)(0.5, 2.0) == pytest.approx(4.0, abs=1e-6)
    with pytest.raises(InverterUnavailable):
        get_inverter(get_calculus("free"))


def test_problem_requires_registered_disintegration():
    g = GraphComplex.from_dict({"vertices": ["a", "b"], "edges": [["a", "b"]]})
    with pytest.raises(KeyError):
        DerivativeProblem(cx, 1, UNIT, SymExpr("x"))
    DerivativeProblem(g, 0, g.collection(0).generators[0], Constant(1.0))
