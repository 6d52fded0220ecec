"""Boundary integrals on the unit square against area integrals of f_x - f_y."""
from magcalc.chain import Chain, Rect2DComplex, probe_policies
from magcalc.forms import ExteriorDerivative, basic, stokes_residual
from magcalc.region import BoxSet

rx = Rect2DComplex(1, 1)
square = Chain.of(2, ("e", BoxSet.box(0, 1, 0, 1)))
pols = probe_policies(rx.calc)
print("boundary:", rx.boundary(square))

for f, h in (("x*y", "y - x"), ("x^2", "2*x"), ("y", "-1"), ("x^2*y", "2*x*y - x^2")):
    w = basic(1, f, "arclength", rx)
    dw = ExteriorDerivative(w).evaluate(square, tol=1e-5, cap=16, policies=pols).value
    r = stokes_residual(w, square, basic(2, h, "area", rx), tol=1e-5, cap=16, policies=pols)
    print(f"f = {f:6s} d(w)(square) = {dw: .6f}   residual against {h}: {r:.1e}")
