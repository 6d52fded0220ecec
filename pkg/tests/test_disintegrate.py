import pytest

from magcalc.chain import Chain, GraphComplex, Interval1DComplex, Rect2DComplex
from magcalc.disintegrate import (
    NotDecomposable,
    compose_twice,
    decomposable_check,
    get_disintegration,
    measured_image,
)
from magcalc.region import (
    Arclength,
    BoxSet,
    Dirac,
    EdgeWeights,
    IntervalSet,
    Lebesgue,
    ZeroMeasure,
    measure_add,
)

cx = Interval1DComplex()
rx = Rect2DComplex(1, 1)
UNIT = Chain.of(1, ("e", IntervalSet.closed(0, 1)))
SQUARE = Chain.of(2, ("e", BoxSet.box(0, 1, 0, 1)))


def test_interval_endpoints_get_unit_mass():
    m = measured_image(cx, UNIT, Lebesgue())
    assert m(IntervalSet.point(0)) == 1
    assert m(IntervalSet.point(1)) == 1
    assert m(IntervalSet.point("1/2")) == 0


def test_square_edges_get_unit_length():
    m = measured_image(rx, SQUARE, Lebesgue(2))
    for _, edge in rx.boundary(SQUARE).terms:
        assert m(edge) == pytest.approx(1.0)


def test_scaling_is_preserved():
    m = measured_image(cx, UNIT, Lebesgue(1, 2.5))
    assert m(IntervalSet.point(1)) == pytest.approx(2.5)


def test_composition_is_zero():
    for complex_, c, mu in ((cx, UNIT, Lebesgue()), (rx, SQUARE, Lebesgue(2))):
        chain, measure = compose_twice(complex_, c, mu)
        assert chain.is_empty()
        assert isinstance(measure, ZeroMeasure)


def test_decomposability():
    d = get_disintegration(cx, 1)
    assert decomposable_check(d, Lebesgue())
    assert not decomposable_check(d, Dirac(0.5))
    assert decomposable_check(d, ZeroMeasure())
    assert decomposable_check(d, measure_add(Lebesgue(), Lebesgue(1, 2)))
    with pytest.raises(NotDecomposable):
        measured_image(cx, UNIT, Dirac(0.5))


def test_zero_measure_maps_to_zero():
    m = measured_image(cx, UNIT, ZeroMeasure())
    assert m(IntervalSet.point(0)) == 0


def test_image_lives_on_boundary_subspace():
    m = measured_image(cx, UNIT, Lebesgue())
    assert m.space.full() == IntervalSet.points([0, 1])


def test_graph_uniform_weights_only():
    g = GraphComplex.from_dict({"vertices": ["a", "b"], "edges": [["a", "b"]]})
    d = get_disintegration(g, 1)
    e = g.graph.edges[0]
    assert decomposable_check(d, EdgeWeights({e: 2.0}))
    other = GraphComplex.from_dict({"vertices": ["a", "b", "c"], "edges": [["a", "b"], ["b", "c"]]})
    ws = EdgeWeights(dict(zip(other.graph.edges, (1.0, 3.0))))
    assert not decomposable_check(get_disintegration(other, 1), ws)


def test_rect_level_one_maps_arclength_to_corners():
    edge = Chain.of(1, ("e", BoxSet.box(0, 1, 0, 0)))
    m = measured_image(rx, edge, Arclength())
    assert m(BoxSet.point(1, 0)) == 1


def test_unregistered_level():
    with pytest.raises(KeyError):
        get_disintegration(cx, 2)
