from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ratdim.piecewise import PiecewiseLinear as PL

F = Fraction

nodes = st.lists(st.tuples(st.integers(-12, 12).map(lambda n: F(n, 4)), st.integers(-6, 6).map(F)),
                 min_size=1, max_size=6, unique_by=lambda p: p[0])
pls = nodes.map(lambda ns: PL(tuple(ns)))
points = st.integers(-60, 60).map(lambda n: F(n, 16))


def test_constant_is_canonical():
    assert PL(((5, 2),)) == PL.constant(2)
    assert PL(((0, 1), (1, 1), (2, 1))) == PL.constant(1)
    assert PL.constant(0).is_zero()


def test_collinear_nodes_dropped():
    f = PL(((0, 0), (1, 1), (2, 2), (3, 2)))
    assert f.nodes == ((0, 0), (2, 2))


def test_hat_and_evaluation():
    h = PL.hat(0, 2, 3)
    assert [h(x) for x in (-1, 0, F(1, 2), 1, 2, 5)] == [0, 0, F(3, 2), 3, 0, 0]
    assert h.vanishes_near(-1) and not h.vanishes_near(0) and h.vanishes_near(3)
    assert h.zero_on(None, 0) and h.zero_on(2, None) and not h.zero_on(0, 2)
    assert h.range_on(0, 2) == (0, 3)


def test_errors():
    with pytest.raises(ValueError):
        PL(())
    with pytest.raises(ValueError):
        PL(((0, 1), (0, 2)))


@given(pls, pls, points)
def test_arithmetic_is_pointwise(f, g, x):
    assert (f + g)(x) == f(x) + g(x)
    assert (f - g)(x) == f(x) - g(x)
    assert (-f)(x) == -f(x)
    assert f.scale(F(3, 2))(x) == F(3, 2) * f(x)


@given(pls, pls)
def test_equal_functions_have_equal_nodes(f, g):
    assert (f + g) - g == f


@given(pls)
def test_json_round_trip(f):
    assert PL.from_json(f.to_json()) == f


@given(pls, points)
def test_float_eval_close(f, x):
    assert abs(f.float_eval()(float(x)) - float(f(x))) < 1e-9
