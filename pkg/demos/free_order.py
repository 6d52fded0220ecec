"""In the free calculus the order of terms is visible in the result."""
from magcalc.chain import region_additivity_check
from magcalc.integrate import SimpleFunction, get_calculus, simple_integral
from magcalc.magma import Atom
from magcalc.region import FreeMeasure, IntervalSet

elem = get_calculus("free").elem
A, B = IntervalSet.closed(0, 1), IntervalSet.closed(2, 3)
mu = FreeMeasure("μ")
U = IntervalSet.closed(0, 3)
ab = SimpleFunction(((A, Atom("a")), (B, Atom("b"))), elem.y)
ba = SimpleFunction(((B, Atom("b")), (A, Atom("a"))), elem.y)
print("a then b:", simple_integral(ab, mu, U, elem))
print("b then a:", simple_integral(ba, mu, U, elem))

for name in ("riemann", "product", "free"):
    rep = region_additivity_check(get_calculus(name), samples=3)
    print(f"{name:8s} region additive: {rep.passed}  witnesses: {len(rep.witnesses)}")
if rep.witnesses:
    split, whole, verdict = rep.witnesses[0]
    print("  split:", split)
    print("  whole:", whole)
    print("  ", verdict)
