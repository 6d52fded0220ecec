import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magcalc.magma import (
    E,
    IDENTITY,
    NEG,
    Atom,
    Converged,
    ConvergedToInfinity,
    NoLimitAtCap,
    Node,
    UndefinedPair,
    fold_ordered,
    free_magma,
    get_magma,
    limit,
    mag_op,
    node,
    orient,
)

INSTANCES = ["real_add", "pos_mul", "ext_real_add", "ext_nonneg_add", "ext_nonneg_mul", "free:abc"]


def test_real_add_op():
    assert mag_op(get_magma("real_add"), 2, 3) == 5


def test_extension_absorbs_finite():
    s = get_magma("ext_real_add")
    assert mag_op(s, math.inf, 5) == math.inf
    assert mag_op(s, 5, -math.inf) == -math.inf


def test_opposite_infinities_undefined():
    with pytest.raises(UndefinedPair):
        mag_op(get_magma("ext_real_add"), math.inf, -math.inf)


def test_ext_nonneg_mul_conventions():
    s = get_magma("ext_nonneg_mul")
    assert mag_op(s, math.inf, 2.0) == math.inf
    with pytest.raises(UndefinedPair):
        mag_op(s, math.inf, 0.0)


def test_free_op_is_ordered():
    s = free_magma("ab")
    a, b = Atom("a"), Atom("b")
    assert mag_op(s, a, b) == Node(a, b)
    assert mag_op(s, a, b) != mag_op(s, b, a)


def test_free_identity_absorbed():
    a = Atom("a")
    assert node(IDENTITY, a) == a
    assert node(a, IDENTITY) == a


def test_fold_examples():
    assert fold_ordered(get_magma("real_add"), [1, 2, 3]) == 6
    a, b, c = Atom("a"), Atom("b"), Atom("c")
    assert fold_ordered(free_magma("abc"), [a, b, c]) == Node(Node(a, b), c)
    for name in INSTANCES:
        s = get_magma(name)
        assert fold_ordered(s, []) == s.identity


@pytest.mark.parametrize("name", INSTANCES)
def test_identity_law_sampled(name):
    s = get_magma(name)
    rng = np.random.default_rng(1)
    for _ in range(1000):
        a = s.sample(rng)
        assert mag_op(s, s.identity, a) == a
        assert mag_op(s, a, s.identity) == a


@pytest.mark.parametrize("name", ["ext_real_add", "ext_nonneg_add", "ext_nonneg_mul"])
def test_identity_fixed_against_extension_points(name):
    s = get_magma(name)
    for p in s.extension_points:
        assert mag_op(s, s.identity, p) == p
        assert mag_op(s, p, s.identity) == p


@pytest.mark.parametrize("name", ["real_add", "ext_real_add", "pos_mul"])
def test_distance_zero_iff_equal(name):
    s = get_magma(name)
    rng = np.random.default_rng(2)
    for _ in range(200):
        a, b = s.sample(rng), s.sample(rng)
        assert s.distance(a, a) == 0
        if a != b:
            assert s.distance(a, b) > 0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), max_size=6), st.lists(st.floats(-1e6, 1e6), max_size=6))
def test_fold_concat_associative(xs, ys):
    s = get_magma("real_add")
    whole = fold_ordered(s, xs + ys)
    split = mag_op(s, fold_ordered(s, xs), fold_ordered(s, ys))
    assert math.isclose(whole, split, rel_tol=1e-9, abs_tol=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.permutations(list("abcd")))
def test_free_fold_injective_on_orderings(perm):
    s = free_magma("abcd")
    ref = fold_ordered(s, [Atom(c) for c in "abcd"])
    got = fold_ordered(s, [Atom(c) for c in perm])
    assert (got == ref) == (list(perm) == list("abcd"))


def test_limit_examples():
    assert isinstance(limit(get_magma("real_add"), (1 / k for k in range(1, 10**9)), tol=1e-8, cap=10**5), Converged)
    out = limit(get_magma("ext_real_add"), (float(k) for k in range(10**9)), tol=1e-3, cap=10**5)
    assert isinstance(out, ConvergedToInfinity) and out.value == math.inf
    osc = limit(get_magma("real_add"), ((-1.0) ** k for k in range(200)), cap=100)
    assert isinstance(osc, NoLimitAtCap)


def test_limit_validates_arguments():
    s = get_magma("real_add")
    with pytest.raises(ValueError):
        limit(s, [1.0], tol=0)
    with pytest.raises(ValueError):
        limit(s, [1.0], window=1)
    with pytest.raises(ValueError):
        limit(s, [1.0], window=4, cap=3)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 15), st.sampled_from(["geometric", "harmonic", "growing"]))
def test_limit_invariant_under_dropping_prefix(k, kind):
    s = get_magma("ext_real_add")
    seq = {
        "geometric": [2.0 + (-0.5) ** j for j in range(60)],
        "harmonic": [1.0 / (j + 1) ** 2 for j in range(60)],
        "growing": [float(2**j) for j in range(60)],
    }[kind]
    a = limit(s, seq, tol=1e-6, cap=60)
    b = limit(s, seq[k:], tol=1e-6, cap=60 - k)
    assert type(a) is type(b)
    if isinstance(a, Converged):
        assert abs(a.value - b.value) < 1e-5


def test_orientations():
    get_magma("real_add")
    assert orient(E, 7) == 7
    assert orient(NEG, 7) == -7
    assert orient(NEG, 0) == 0


def test_trend_ignores_roundoff_drift():
    # monotone drift of 1e-8 around a finite value is not divergence
    s = get_magma("ext_real_add")
    seq = [0.0039062239, 0.0039062364, 0.0039062503, 0.0039062523]
    assert limit(s, seq, tol=1e-10, cap=4).trend is None


def test_trend_detects_logarithmic_growth():
    s = get_magma("ext_real_add")
    seq = [k * math.log(2) for k in range(1, 22)]
    assert limit(s, seq, tol=1e-6, cap=21).trend == math.inf
