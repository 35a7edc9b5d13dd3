import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from ratdim.interpolation import (
    InsufficientDensityError,
    NotSemiBoundedError,
    PiecewiseLinear,
    compact_uniform_approx,
    converse_witness,
    interpolate_semibounded,
)
from ratdim.laurent import ClosedSetR, Interval, LaurentPoly, Point, RayAbove, RayBelow, WholeLine, cone_member
from ratdim.ordered import PreconditionError
from ratdim.supernatural import SupernaturalNumber, dn_contains

L = LaurentPoly.from_dict
TWO = SupernaturalNumber.infinite_power(2)
RAY = ClosedSetR.of(RayAbove(0))


def _valid(a, F, ps, qs):
    return all(cone_member(a - p, F) for p in ps) and all(cone_member(q - a, F) for q in qs)


def test_simple_examples():
    zero, one, t = LaurentPoly(), L({0: 1}), L({1: 1})
    a = interpolate_semibounded(RAY, zero, zero, one, t)
    assert _valid(a, RAY, [zero, zero], [one, t])
    ps, qs = [L({0: -1}), L({1: 1, 0: -2})], [t, L({1: 1, 0: 1})]
    assert _valid(interpolate_semibounded(RAY, *ps, *qs), RAY, ps, qs)


def test_degenerate_branch_returns_the_common_element():
    g = L({1: 1, 0: -1})
    assert interpolate_semibounded(RAY, g, L({0: -5}), L({1: 2}), g) == g


def test_errors():
    one = L({0: 1})
    with pytest.raises(NotSemiBoundedError):
        interpolate_semibounded(ClosedSetR.of(WholeLine()), one, one, one, one)
    with pytest.raises(PreconditionError, match="p1 <= q0"):
        interpolate_semibounded(RAY, LaurentPoly(), L({1: 3}), L({1: 1}), L({1: 5}))


def test_bounded_above_is_reflection():
    F = ClosedSetR.of(RayBelow(3))
    ps = [L({0: -1}), L({-1: -1})]
    qs = [L({0: 1}), L({1: 1, -2: 1})]
    a = interpolate_semibounded(F, *ps, *qs)
    b = interpolate_semibounded(F.reflect(), *[f.reflect() for f in ps + qs]).reflect()
    assert a == b
    assert _valid(a, F, ps, qs)


@settings(max_examples=25)
@given(st.dictionaries(st.integers(-2, 2), st.integers(-8, 8).map(lambda n: Fraction(n, 4)), max_size=3),
       st.lists(st.integers(1, 16).map(lambda n: Fraction(n, 8)), min_size=4, max_size=4),
       st.sampled_from([RAY, ClosedSetR.of(RayBelow(1)), ClosedSetR.of(Interval(-1, 0), Point(1))]))
def test_soundness_and_modulus(center, gaps, F):
    a0 = L(center, TWO)
    ps = [a0 - L({0: gaps[0]}, TWO), a0 - L({1: gaps[1]}, TWO)]
    qs = [a0 + L({0: gaps[2]}, TWO), a0 + L({-1: gaps[3]}, TWO)]
    a = interpolate_semibounded(F, *ps, *qs)
    assert _valid(a, F, ps, qs)
    assert all(dn_contains(c, TWO) for _, c in a.coeffs)


def test_compact_uniform_approx_examples():
    K = ClosedSetR.of(Interval(0, 1))
    a = compact_uniform_approx(PiecewiseLinear.constant(Fraction(1, 2)), K, Fraction(1, 100), TWO)
    assert a == L({0: Fraction(1, 2)}, TWO)
    hat = PiecewiseLinear.hat(0, 1)
    a = compact_uniform_approx(hat, K, Fraction(1, 4), TWO)
    mpmath.mp.prec = 300  # the Chebyshev coefficients cancel heavily
    coeffs = [(n, mpmath.mpf(c.numerator) / c.denominator) for n, c in a.coeffs]
    for i in range(1001):
        x = Fraction(i, 1000)
        val = mpmath.fsum(c * mpmath.exp(n * mpmath.mpf(x.numerator) / x.denominator) for n, c in coeffs)
        assert abs(val - float(hat(x))) < 0.25
    wide = compact_uniform_approx(hat, K, 2, TWO)
    assert wide.support in ((), (0,))


def test_compact_uniform_approx_finite_modulus():
    K = ClosedSetR.of(Interval(0, 1))
    with pytest.raises(InsufficientDensityError):
        compact_uniform_approx(PiecewiseLinear.constant(Fraction(1, 3)), K, Fraction(1, 100), SupernaturalNumber.of({2: 1}))


@pytest.mark.parametrize("N", [2, 5, 10])
def test_converse_witness(N):
    r = converse_witness(N)
    assert r.infeasible
    assert r.lower_bound == Fraction(N * N, 4)
    assert r.argmax_t == Fraction(3 * N, 2)
    assert r.upper_bound == 0
    assert all(r.checks.values())


def test_converse_rejects_small_N():
    with pytest.raises(ValueError):
        converse_witness(1)


def test_random_quadruples_on_compact_set():
    rng = random.Random(5)
    F = ClosedSetR.of(Interval(-2, -1), Point(0), Interval(1, 2))
    for _ in range(10):
        a0 = L({rng.randint(-2, 2): Fraction(rng.randint(-8, 8), 4)}, TWO)
        eps = [L({0: Fraction(rng.randint(1, 8), 16)}, TWO) for _ in range(4)]
        ps, qs = [a0 - eps[0], a0 - eps[1]], [a0 + eps[2], a0 + eps[3]]
        assert _valid(interpolate_semibounded(F, *ps, *qs), F, ps, qs)
