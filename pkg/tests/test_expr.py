import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magcalc.expr import Constant, GraphFunction, GridFunction, Interpolant, SymExpr, parse_function
from magcalc.region import IntervalSet


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, 10, allow_nan=False))
def test_symexpr_matches_python(x):
    f = SymExpr("x^3 - 2*x + sin(x)")
    assert f(x) == pytest.approx(x**3 - 2 * x + np.sin(x), abs=1e-9)


def test_symexpr_two_variables():
    assert SymExpr("x*y + y^2", 2)(2, 3) == 15


def test_piecewise_off_piece_is_identity():
    f = parse_function({"piecewise": [{"region": [[0, "1/2"]], "f": 3}, {"region": [["(1/2", 1]], "f": "x"}]})
    assert f(0.25) == 3 and f(0.75) == 0.75 and f(2.0) == 0.0
    with pytest.raises(ValueError):
        parse_function({"piecewise": [{"region": [[0, 1]], "f": 1}, {"region": [["1/2", 2]], "f": 2}]})


def test_constant_pieces():
    assert Constant(2.0).pieces() is not None
    assert Constant(2.0)(7) == 2.0


def test_grid_function_cells():
    g = GridFunction((np.linspace(0, 1, 5),), np.array([1.0, 2.0, 3.0, 4.0]))
    assert [g(v) for v in (0.0, 0.25, 0.6, 1.0, 5.0)] == [1.0, 2.0, 3.0, 4.0, 4.0]
    assert len(g.pieces()) == 4
    assert g.cell_regions()[0][1] == IntervalSet.of(*IntervalSet.closed(0, "1/4").difference(IntervalSet.point("1/4")).intervals)


def test_interpolant_extrapolates_linearly():
    f = Interpolant(np.array([0.0, 1.0]), np.array([1.0, 3.0]))
    assert f(2.0) == 5.0 and f(-1.0) == -1.0 and f(0.5) == 2.0


def test_graph_function():
    g = GraphFunction({"a": 1.0, ("a", "b"): 2.0})
    assert g("a") == 1.0 and g(["a", "b"]) == 2.0 and g("z") == 0.0


def test_parse_function_rejects_bad_literals():
    for bad in (True, [1, 2], {"x": 1}):
        with pytest.raises(ValueError):
            parse_function(bad)
