"""Integration, chains, forms and derivatives over unital magmas."""
from .chain import (
    Chain,
    GraphComplex,
    Interval1DComplex,
    Rect2DComplex,
    get_complex,
    integrate_chain,
    integration_equivalent,
    region_additivity_check,
)
from .disintegrate import NotDecomposable, compose_twice, get_disintegration, measured_image
from .expr import Constant, GridFunction, Interpolant, Piecewise, SymExpr, parse_function
from .forms import basic, eval_form, exterior_derivative, form_add, stokes_residual, zero_form
from .funcalc import DerivativeProblem, iterate_derivative, solve_derivative, verify_derivative
from .integrate import (
    Defined,
    FundamentallyUndefinedAtCap,
    NoNumericLimitAtCap,
    OutsideDomain,
    Undefined,
    get_calculus,
    ia_integrate,
    parse_policy,
    simple_integral,
)
from .magma import fold_ordered, get_magma, limit, mag_op
from .region import BoxSet, IntervalSet, parse_measure, parse_region

__version__ = "0.1.0"
