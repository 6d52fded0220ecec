"""Recover derivatives from boundary integrals and watch them fail at a kink."""
import math

import numpy as np

from magcalc.chain import Interval1DComplex
from magcalc.expr import SymExpr
from magcalc.funcalc import DerivativeProblem, iterate_derivative, solve_derivative, sup_error
from magcalc.integrate import get_calculus
from magcalc.region import IntervalSet

cx = Interval1DComplex()
unit = IntervalSet.closed(0, 1)

p = DerivativeProblem(cx, 0, unit, SymExpr("x^2"))
for d in (6, 8, 10):
    res = solve_derivative(p, d, unions=20)
    print(f"x^2, {2**d:5d} cells: sup |h - 2x| = {sup_error(res, lambda x: 2 * x):.2e}, verified {res.report.passed}")

pcx = cx.with_calculus(get_calculus("product"))
res = solve_derivative(DerivativeProblem(pcx, 0, unit, SymExpr("exp(x)")), 8, unions=0)
print(f"product calculus, exp(x): h in [{res.values.min():.6f}, {res.values.max():.6f}], e = {math.e:.6f}")

it = iterate_derivative(DerivativeProblem(cx, 0, unit, SymExpr("x^3")), 2, depth=8)
res = it.stages[-1].result
print(f"x^3 twice: order {it.achieved_order}, sup |h - 6x| = {sup_error(res, lambda x: 6 * x):.3f}")

it = iterate_derivative(DerivativeProblem(cx, 0, unit, SymExpr("abs(x - 0.5)")), 2, depth=8)
w = it.stages[-1].report.witness
print(f"|x - 0.5| twice: order {it.achieved_order}, witness {w.chain} residual {w.residual:.2f}")
print("first-stage values near the kink:", np.round(it.stages[0].result.values[126:130], 3))
