import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magcalc.expr import Constant, SymExpr, parse_function
from magcalc.integrate import (
    Defined,
    FundamentallyUndefinedAtCap,
    NotIntegrable,
    Scheme,
    SimpleFunction,
    Undefined,
    WrongCodomain,
    check_element,
    exact_policy,
    expand_structure,
    get_calculus,
    grid_policy,
    ia_integrate,
    lebesgue_dominance,
    lebesgue_policy,
    parse_policy,
    partition,
    policy_value,
    product_element,
    restrict_policies,
    riemann_element,
    riemann_policy,
    simple_integral,
    symmetric_about,
)
from magcalc.magma import Atom, Node
from magcalc.region import Counting, Dirac, FreeMeasure, IntervalSet, Lebesgue, parse_region

from oracles import EXP_PRODUCT_UNIT, X2_UNIT

UNIT = IntervalSet.closed(0, 1)
STEP = {"piecewise": [{"region": [[0, "1/2"]], "f": 3}, {"region": [["(1/2", 1]], "f": 1}]}


def test_simple_integral_riemann_step():
    s = SimpleFunction(((IntervalSet.closed(0, "1/2"), 3.0), (parse_region([["(1/2", 1]]), 1.0)), riemann_element().y)
    assert simple_integral(s, Lebesgue(), UNIT, riemann_element()) == 2.0


def test_simple_integral_disjoint_region_is_identity():
    elem = riemann_element()
    s = SimpleFunction(((IntervalSet.closed(2, 3), 5.0),), elem.y)
    assert simple_integral(s, Lebesgue(), UNIT, elem) == 0.0


def test_simple_integral_free_keeps_order():
    elem = get_calculus("free").elem
    a, b = Atom("a"), Atom("b")
    A, B = IntervalSet.closed(0, "1/2"), IntervalSet.closed(2, 3)
    mu = FreeMeasure("μ")
    got = simple_integral(SimpleFunction(((A, a), (B, b)), elem.y), mu, IntervalSet.closed(0, 3), elem)
    assert isinstance(got, Node)
    assert got == Node(elem.g(a, mu(A)), elem.g(b, mu(B)))


def test_simple_integral_geometric():
    elem = product_element()
    s = SimpleFunction(((IntervalSet.closed(0, "1/2"), 4.0),), elem.y)
    assert simple_integral(s, Lebesgue(), UNIT, elem) == pytest.approx(2.0, abs=1e-15)


def test_simple_integral_infinite_measure_raises():
    elem = riemann_element()
    s = SimpleFunction(((UNIT, 1.0),), elem.y)
    with pytest.raises(NotIntegrable):
        simple_integral(s, Counting(), UNIT, elem)


def test_identity_coefficients_dropped():
    elem = riemann_element()
    s = SimpleFunction(((UNIT, 0.0), (UNIT, 2.0)), elem.y)
    assert len(s) == 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=4), st.floats(0.01, 1.0))
def test_pointwise_value_is_fold(coeffs, x):
    elem = riemann_element()
    s = SimpleFunction(tuple((UNIT, c) for c in coeffs), elem.y)
    assert s.value_at(x) == pytest.approx(sum(c for c in coeffs if c != 0.0))


@pytest.mark.parametrize("name", ["riemann", "product", "lebesgue"])
def test_registered_elements_satisfy_laws(name):
    assert check_element(get_calculus(name).elem, n=500) == []


def test_free_expansion_structure():
    for name in ("free", "free:m_outer"):
        elem = get_calculus(name).elem
        a, b = Atom("a"), Atom("b")
        mu, nu = FreeMeasure("μ"), FreeMeasure("ν")
        s = SimpleFunction(((UNIT, a),), elem.y) + SimpleFunction(((UNIT, b),), elem.y)
        from magcalc.region import measure_add

        got = simple_integral(s, measure_add(mu, nu), UNIT, elem)
        assert got == expand_structure(elem, a, b, mu(UNIT), nu(UNIT))


def test_ia_x2_defined():
    rep = ia_integrate(SymExpr("x^2"), Lebesgue(), UNIT, get_calculus("riemann"), tol=1e-4, cap=14)
    assert isinstance(rep.verdict, Defined)
    assert rep.value == pytest.approx(X2_UNIT, abs=1e-4)


def test_ia_zero_function():
    rep = ia_integrate(Constant(0.0), Lebesgue(), UNIT, get_calculus("riemann"))
    assert rep.value == 0.0


def test_ia_reciprocal_symmetric_vs_shifted():
    split = parse_region([[-1, "0)"], ["(0", 1]])
    pols = [parse_policy("uniform-midpoint"), parse_policy("weighted:1:2-midpoint")]
    v = ia_integrate(SymExpr("1/x"), Lebesgue(), split, get_calculus("riemann"), pols, tol=1e-4, cap=14).verdict
    assert isinstance(v, Undefined)
    assert v.gap == pytest.approx(math.log(2), abs=1e-3)


def test_symmetric_restriction_recovers_principal_value():
    split = parse_region([[-1, "0)"], ["(0", 1]])
    pols = [parse_policy("uniform-midpoint"), parse_policy("weighted:1:2-midpoint")]
    kept = restrict_policies(pols, symmetric_about(0.0, split))
    assert [p.id for p in kept] == ["uniform-midpoint"]
    rep = ia_integrate(SymExpr("1/x"), Lebesgue(), split, get_calculus("riemann"), kept, tol=1e-4, cap=14)
    assert rep.value == pytest.approx(0.0, abs=1e-9)


def test_ia_reciprocal_diverges():
    pols = [parse_policy(p) for p in ("uniform-midpoint", "dyadic-midpoint", "uniform-right")]
    v = ia_integrate(SymExpr("1/x"), Lebesgue(), parse_region([["(0", 1]]), get_calculus("riemann"), pols, tol=1e-4, cap=14).verdict
    assert isinstance(v, FundamentallyUndefinedAtCap)
    assert v.diverges_to == math.inf


def test_riemann_depth1_left_tags():
    s = riemann_policy("uniform", "left").generate(SymExpr("x"), UNIT, Lebesgue(), 1, riemann_element())
    assert list(s.coeffs) == [0.0, 0.5]
    assert s.cells.lo[:, 0].tolist() == [0.0, 0.5]
    assert s.cells.hi[:, 0].tolist() == [0.5, 1.0]


def test_constant_function_exact_at_every_depth():
    calc = get_calculus("riemann")
    for d in range(6):
        for p in calc.policies:
            assert policy_value(p, Constant(3.0), Lebesgue(), UNIT, calc, d) == pytest.approx(3.0, abs=1e-12)


def test_dyadic_partitions_nest():
    U = parse_region([[0, "1/3"], ["1/2", 1]])
    for d in range(1, 7):
        coarse = set(np.unique(partition(U, d - 1, Scheme("dyadic")).lo[:, 0]).tolist())
        fine = set(np.unique(partition(U, d, Scheme("dyadic")).lo[:, 0]).tolist())
        assert coarse <= fine


def test_partition_is_exact_cover():
    U = parse_region([[0, "1/3"], ["(1/2", 1]])
    for scheme in (Scheme("uniform"), Scheme("dyadic"), Scheme("randomized", 3), Scheme("weighted", 0, (1, 2))):
        cells = partition(U, 5, scheme)
        assert float(np.sum(cells.hi - cells.lo)) == pytest.approx(1 / 3 + 1 / 2)


def test_geometric_exp():
    rep = ia_integrate(SymExpr("exp(x)"), Lebesgue(), UNIT, get_calculus("product"), tol=1e-4, cap=12)
    assert rep.value == pytest.approx(EXP_PRODUCT_UNIT, abs=1e-4)


def test_lebesgue_step_exact_at_depth_1():
    f = parse_function(STEP)
    assert policy_value(lebesgue_policy(), f, Lebesgue(), UNIT, get_calculus("lebesgue"), 1) == pytest.approx(2.0)


def test_lebesgue_dominance():
    for d in (1, 4, 8):
        out = lebesgue_dominance(SymExpr("x^2"), UNIT, d, n=100, seed=d)
        assert out["below_f"] and out["monotone"]


def test_lebesgue_rejects_product_codomain():
    with pytest.raises(WrongCodomain):
        ia_integrate(SymExpr("exp(x)"), Lebesgue(), UNIT, get_calculus("product"), [lebesgue_policy()])


def test_lebesgue_agrees_with_riemann():
    f = SymExpr("x^2")
    a = ia_integrate(f, Lebesgue(), UNIT, get_calculus("lebesgue"), tol=1e-4, cap=16).value
    b = ia_integrate(f, Lebesgue(), UNIT, get_calculus("riemann"), tol=1e-4, cap=16).value
    assert abs(a - b) < 2e-4


def test_dirac_integral_exact():
    rep = ia_integrate(SymExpr("x^2"), Dirac(0.3), UNIT, get_calculus("riemann"), tol=1e-9, cap=10)
    assert rep.value == pytest.approx(0.09, abs=1e-12)


def test_policy_order_does_not_change_verdict():
    calc = get_calculus("riemann")
    pols = [parse_policy(p) for p in ("uniform-midpoint", "dyadic-left", "uniform-right")]
    a = ia_integrate(SymExpr("x^2"), Lebesgue(), UNIT, calc, pols, tol=1e-3, cap=16).verdict
    b = ia_integrate(SymExpr("x^2"), Lebesgue(), UNIT, calc, pols[::-1], tol=1e-3, cap=16).verdict
    assert a == b


def test_grid_policy_exact_on_grid_functions():
    from magcalc.expr import GridFunction

    g = GridFunction((np.linspace(0, 1, 5),), np.array([1.0, 2.0, 3.0, 4.0]))
    rep = ia_integrate(g, Lebesgue(), IntervalSet.closed("1/10", "3/5"), get_calculus("riemann"), [grid_policy()])
    assert rep.value == pytest.approx(0.95, abs=1e-12)


def test_exact_policy_on_piecewise():
    f = parse_function(STEP)
    rep = ia_integrate(f, Lebesgue(), UNIT, get_calculus("riemann"), [exact_policy()])
    assert rep.value == pytest.approx(2.0)


def test_parse_policy_names():
    assert parse_policy("uniform-midpoint").id == "uniform-midpoint"
    assert parse_policy("geometric:dyadic-left").id.startswith("geometric:")
    for bad in ("nope", "uniform-sideways", "weighted-left"):
        with pytest.raises(KeyError):
            parse_policy(bad)
