import math

import sympy as sp
from scipy import integrate, special

from oracles import EXP_PRODUCT_UNIT, GREEN_BOUNDARY, GREEN_DENSITY, WEIGHTED_RECIPROCAL_GAP, X2_UNIT


def test_x2_oracle():
    v, _ = integrate.quad(lambda x: x * x, 0, 1)
    assert math.isclose(v, X2_UNIT, rel_tol=1e-12)


def test_product_oracle():
    v, _ = integrate.quad(lambda x: math.log(math.exp(x)), 0, 1)
    assert math.isclose(math.exp(v), EXP_PRODUCT_UNIT, rel_tol=1e-12)


def test_weighted_gap_oracle():
    n = 2**20
    assert math.isclose(special.digamma(2 * n + 0.5) - special.digamma(n + 0.5), WEIGHTED_RECIPROCAL_GAP, abs_tol=1e-6)


def test_green_oracles():
    x, y = sp.symbols("x y")
    for text, want in GREEN_BOUNDARY.items():
        f = sp.sympify(text.replace("^", "**"))
        fn = sp.lambdify((x, y), f)
        edges = [
            integrate.quad(lambda t: fn(t, 0), 0, 1)[0],
            integrate.quad(lambda t: fn(1, t), 0, 1)[0],
            -integrate.quad(lambda t: fn(t, 1), 0, 1)[0],
            -integrate.quad(lambda t: fn(0, t), 0, 1)[0],
        ]
        assert math.isclose(sum(edges), want, abs_tol=1e-12)
        h = sp.lambdify((x, y), sp.sympify(GREEN_DENSITY[text]), "math")
        area, _ = integrate.dblquad(lambda yy, xx: h(xx, yy), 0, 1, 0, 1)
        assert math.isclose(area, want, abs_tol=1e-10)
        assert sp.simplify(sp.diff(f, x) - sp.diff(f, y) - sp.sympify(GREEN_DENSITY[text])) == 0
