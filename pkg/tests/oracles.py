"""Frozen reference values.

Each constant was computed once with an independent tool (scipy quadrature,
scipy special functions or sympy) and is re-derived by tests/test_oracles.py.
"""
import math

# ∫_0^1 x^2 dx
X2_UNIT = 1 / 3
# exp(∫_0^1 log(e^x) dx)
EXP_PRODUCT_UNIT = math.exp(0.5)
# lim of the 1:2 weighted midpoint sum of 1/x on [-1,0)∪(0,1]: ψ(2n+1/2) − ψ(n+1/2) → log 2
WEIGHTED_RECIPROCAL_GAP = math.log(2)
# signed arclength boundary integral of f over the unit square,
# edges bottom (+), right (+), top (−), left (−)
GREEN_BOUNDARY = {"x*y": 0.0, "x^2": 1.0, "y": -1.0}
# area integral of f_x − f_y over the unit square
GREEN_DENSITY = {"x*y": "y - x", "x^2": "2*x", "y": "-1"}
