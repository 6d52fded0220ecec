from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magcalc.chain import (
    Chain,
    Distinguished,
    Equivalent,
    GraphComplex,
    Interval1DComplex,
    LevelMismatch,
    NotInCollection,
    Rect2DComplex,
    SameDomainRequiredFailure,
    chain_add,
    dyadic_interval_chains,
    empty_chain,
    get_complex,
    integrate_chain,
    integration_equivalent,
    null_equivalent,
    reduce_chain,
    region_additivity_check,
    standard_probes,
)
from magcalc.expr import SymExpr
from magcalc.integrate import get_calculus
from magcalc.region import BoxSet, IntervalSet, Lebesgue

from oracles import X2_UNIT

UNIT = IntervalSet.closed(0, 1)
cx = Interval1DComplex()

dyadic = st.integers(0, 16).map(lambda k: Fraction(k, 8))


@st.composite
def chains(draw, level=1):
    terms = []
    for _ in range(draw(st.integers(0, 3))):
        a, b = sorted([draw(dyadic), draw(dyadic)])
        if level == 1 and a == b:
            b = a + Fraction(1, 8)
        r = IntervalSet.closed(a, b) if level == 1 else IntervalSet.point(a)
        terms.append((draw(st.sampled_from(["e", "neg"])), r))
    return Chain(tuple(terms), level)


def test_integrate_chain_examples():
    calc = get_calculus("riemann")
    f = SymExpr("x^2")
    one = integrate_chain(Chain.of(1, ("e", UNIT)), f, Lebesgue(), calc, tol=1e-6, cap=16)
    assert one.value == pytest.approx(X2_UNIT, abs=1e-6)
    assert integrate_chain(empty_chain(1), f, Lebesgue(), calc).value == 0.0
    both = integrate_chain(Chain.of(1, ("e", UNIT), ("neg", UNIT)), f, Lebesgue(), calc, tol=1e-6, cap=16)
    assert both.value == pytest.approx(0.0, abs=1e-12)


def test_chain_add_identity_and_order():
    c = Chain.of(1, ("e", UNIT), ("neg", IntervalSet.closed(2, 3)))
    assert chain_add(c, empty_chain(1)) == c
    assert chain_add(empty_chain(1), c) == c
    d = Chain.of(1, ("e", IntervalSet.closed(5, 6)))
    assert chain_add(c, d).terms == c.terms + d.terms
    with pytest.raises(LevelMismatch):
        chain_add(c, empty_chain(0))


def test_interval_boundary():
    b = cx.boundary(Chain.of(1, ("e", UNIT)))
    assert b == Chain.of(0, ("e", IntervalSet.point(1)), ("neg", IntervalSet.point(0)))
    assert cx.boundary(Chain.of(0, ("e", IntervalSet.point(0)))).is_empty()


@settings(max_examples=200, deadline=None)
@given(chains(), chains())
def test_boundary_is_homomorphism(c1, c2):
    assert cx.boundary(chain_add(c1, c2)) == chain_add(cx.boundary(c1), cx.boundary(c2))


@settings(max_examples=200, deadline=None)
@given(chains())
def test_boundary_in_closure(c):
    b = cx.boundary(c).base_set()
    if b is not None:
        assert b.issubset(c.base_set().closure())


def test_boundary_squared_rect_grid():
    rx = Rect2DComplex(1, 1)
    rects = rx.rectangles()
    assert len(rects) == 100
    for r in rects:
        bb = rx.boundary(rx.boundary(Chain.of(2, ("e", r))))
        assert len(bb) == 8
        assert reduce_chain(bb).is_empty()


def test_boundary_squared_dyadic_intervals():
    for c in dyadic_interval_chains(8):
        assert cx.boundary(cx.boundary(c)).is_empty()


def test_rect_boundary_is_null_under_probes():
    rx = Rect2DComplex(1, 1)
    sq = Chain.of(2, ("e", BoxSet.box(0, 1, 0, 1)))
    assert null_equivalent(rx.boundary(rx.boundary(sq)), rx.calc)
    edges = rx.boundary(sq)
    assert [o for o, _ in edges.terms] == ["e", "e", "neg", "neg"]
    corners = Chain(tuple(t for o, e in edges.terms for t in rx.boundary(Chain.of(1, (o, e))).terms), 0)
    assert null_equivalent(corners, rx.calc)


def test_integration_equivalence_examples():
    calc = get_calculus("riemann")
    whole = Chain.of(1, ("e", UNIT))
    split = Chain.of(1, ("e", IntervalSet.closed(0, "1/2")), ("e", IntervalSet.closed("1/2", 1)))
    probes = [p for p in standard_probes() if "counting" not in p.name][:10]
    assert isinstance(integration_equivalent(whole, split, calc, probes), Equivalent)
    other = Chain.of(1, ("e", IntervalSet.closed(0, 2)))
    assert isinstance(integration_equivalent(whole, other, calc, probes), SameDomainRequiredFailure)
    free = get_calculus("free")
    parts = Chain.of(1, ("e", IntervalSet.closed(0, "1/4")), ("e", IntervalSet.closed("1/2", 1)))
    union = Chain.of(1, ("e", IntervalSet.closed(0, "1/4").union(IntervalSet.closed("1/2", 1))))
    assert isinstance(integration_equivalent(parts, union, free), Distinguished)


def test_region_additivity():
    assert region_additivity_check(get_calculus("riemann"), samples=3).passed
    free = region_additivity_check(get_calculus("free"), samples=3)
    assert not free.passed and free.witnesses


def test_single_region_is_trivially_equivalent():
    c = Chain.of(1, ("e", UNIT))
    assert isinstance(integration_equivalent(c, c, get_calculus("free")), Equivalent)


def test_validate_rejects_outside_regions():
    with pytest.raises(NotInCollection):
        cx.cell_chain(1, IntervalSet.closed(0, 100))
    with pytest.raises(LevelMismatch):
        cx.validate(Chain.of(2, ("e", UNIT)))


def test_graph_complex(tmp_path):
    g = GraphComplex.from_dict({"vertices": ["a", "b", "c"], "edges": [["a", "b"], ["b", "c"]]})
    c = g.parse_chain([{"o": "e", "r": {"edges": [["a", "b"]]}}, {"o": "e", "r": {"edges": [["b", "c"]]}}], 1)
    b = g.boundary(c)
    assert [(o, r.elements) for o, r in b.terms] == [("e", ("b",)), ("neg", ("a",)), ("e", ("c",)), ("neg", ("b",))]
    assert reduce_chain(b) == Chain.of(0, *[(o, r) for o, r in b.terms if r.elements != ("b",)])
    assert g.boundary(b).is_empty()
    path = tmp_path / "g.json"
    path.write_text('{"vertices": ["a", "b"], "edges": [["a", "b"]]}')
    assert get_complex(f"graph:{path}").graph.vertices == ("a", "b")


def test_complex_registry():
    assert get_complex("interval1d").name == "interval1d"
    assert get_complex("rect2d:2x3").width == 2
    with pytest.raises(KeyError):
        get_complex("sphere")


def test_all_levels_share_codomain():
    rx = Rect2DComplex(1, 1)
    assert rx.calc.g_out is get_calculus("riemann").g_out
