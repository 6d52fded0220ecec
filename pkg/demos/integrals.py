"""Integrals under three calculi and the three ways an integral can fail to exist."""
from magcalc.expr import SymExpr
from magcalc.integrate import get_calculus, ia_integrate, parse_policy
from magcalc.region import IntervalSet, Lebesgue, parse_region

unit = IntervalSet.closed(0, 1)

for name, f in (("riemann", "x^2"), ("lebesgue", "x^2"), ("product", "exp(x)")):
    rep = ia_integrate(SymExpr(f), Lebesgue(), unit, get_calculus(name), tol=1e-4, cap=16)
    print(f"{name:9s} {f:7s} -> {rep.verdict}")

# symmetric midpoint sums cancel, a 1:2 split of the two halves does not
split = parse_region([[-1, "0)"], ["(0", 1]])
pols = [parse_policy("uniform-midpoint"), parse_policy("weighted:1:2-midpoint")]
rep = ia_integrate(SymExpr("1/x"), Lebesgue(), split, get_calculus("riemann"), pols, tol=1e-4, cap=14)
print("1/x on [-1,1] minus 0 ->", rep.verdict)

pols = [parse_policy(p) for p in ("uniform-midpoint", "dyadic-midpoint", "uniform-right")]
rep = ia_integrate(SymExpr("1/x"), Lebesgue(), parse_region([["(0", 1]]), get_calculus("riemann"), pols, tol=1e-4, cap=14)
print("1/x on (0,1] ->", rep.verdict)
for run in rep.runs:
    print(f"  {run.policy:18s} last values {[round(v, 3) for v in run.values[-3:]]}")
