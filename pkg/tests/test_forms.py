import pytest

from magcalc.chain import Chain, Interval1DComplex, LevelMismatch, Rect2DComplex, dyadic_interval_chains, probe_policies
from magcalc.forms import (
    CoverageGap,
    ExteriorDerivative,
    NotExteriorDifferentiable,
    basic,
    exterior_derivative,
    forms_equal,
    parse_form,
    stokes_residual,
    zero_form,
)
from magcalc.integrate import Defined, OutsideDomain
from magcalc.region import BoxSet, Counting, IntervalSet, Lebesgue

from oracles import X2_UNIT

cx = Interval1DComplex()
UNIT = Chain.of(1, ("e", IntervalSet.closed(0, 1)))


def test_basic_form_value():
    w = basic(1, "x^2", "lebesgue", cx)
    assert w.evaluate(UNIT, tol=1e-5, cap=16).value == pytest.approx(X2_UNIT, abs=1e-5)


def test_zero_form():
    assert zero_form(1, cx).evaluate(UNIT).value == 0.0
    d = ExteriorDerivative(zero_form(0, cx))
    assert d.evaluate(UNIT).value == 0.0


def test_sum_of_forms_is_sum_of_values():
    a, b = basic(1, "x", "lebesgue", cx), basic(1, 1, "dirac:1/2", cx)
    both = (a + b).evaluate(UNIT, tol=1e-8).value
    assert both == pytest.approx(a.evaluate(UNIT, tol=1e-8).value + b.evaluate(UNIT, tol=1e-8).value)


def test_level_mismatch():
    with pytest.raises(LevelMismatch):
        basic(1, "x", "lebesgue", cx).evaluate(Chain.of(0, ("e", IntervalSet.point(0))))
    with pytest.raises(LevelMismatch):
        basic(1, "x", "lebesgue", cx) + basic(0, "x", "counting", cx)


def test_ftc_for_zero_form():
    w = basic(0, "x^2", Counting(), cx)
    assert ExteriorDerivative(w).evaluate(UNIT).value == pytest.approx(1.0)


def test_dd_vanishes_on_rectangles():
    rx = Rect2DComplex(1, 1)
    w = basic(0, "x^3 + x*y^2 - y", Counting(), rx)
    dd = ExteriorDerivative(ExteriorDerivative(w))
    for r in rx.rectangles()[::7]:
        assert dd.evaluate(Chain.of(2, ("e", r))).value == pytest.approx(0.0, abs=1e-12)


def test_stokes_residual_tautological_and_discriminating():
    w = basic(0, "x^2", Counting(), cx)
    for c in dyadic_interval_chains(4):
        assert stokes_residual(w, c, ExteriorDerivative(w)) == 0.0
    wrong = basic(1, "x", "lebesgue", cx)
    assert stokes_residual(w, UNIT, wrong, tol=1e-8) > 0.1


def test_green_on_unit_square():
    rx = Rect2DComplex(1, 1)
    sq = Chain.of(2, ("e", BoxSet.box(0, 1, 0, 1)))
    w = basic(1, "x^2", "arclength", rx)
    cand = basic(2, "2*x", "area", rx)
    assert stokes_residual(w, sq, cand, tol=1e-6, cap=12, policies=probe_policies(rx.calc)) < 1e-3


def test_derivative_outside_domain():
    w = basic(0, "x", Counting(), cx)
    d = ExteriorDerivative(w, IntervalSet.closed(0, "1/2"))
    assert isinstance(d.evaluate(UNIT).verdict, OutsideDomain)
    inside = Chain.of(1, ("e", IntervalSet.closed(0, "1/4")))
    assert isinstance(d.evaluate(inside).verdict, Defined)


def test_exterior_derivative_reports_undefined_boundary():
    w = basic(0, "1/x", Counting(), cx)
    with pytest.raises(NotExteriorDifferentiable):
        exterior_derivative(w, None, [UNIT])


def test_coverage_gap():
    from magcalc.forms import BasicForm, Form
    from magcalc.expr import SymExpr

    local = BasicForm(1, SymExpr("x"), Lebesgue(), cx, IntervalSet.closed(0, "1/2"))
    with pytest.raises(CoverageGap):
        Form(1, cx, (local,)).evaluate(UNIT)


def test_forms_equal_and_parse():
    a = parse_form({"level": 1, "f": "2*x", "measure": "lebesgue"}, cx)
    b = parse_form({"level": 1, "summands": [{"f": "x"}, {"f": "x"}]}, cx)
    chains = dyadic_interval_chains(4)
    assert forms_equal(a, b, chains, tol=1e-6)
    assert not forms_equal(a, basic(1, "x", "lebesgue", cx), chains, tol=1e-6)
