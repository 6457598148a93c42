"""Exact arithmetic layer, checked against brute oracles and stdlib math."""

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from simdioph.errors import NegativeArgument, OutOfRange, ZeroVector
from simdioph.exact import (
    DecreasingFn,
    IntVec3,
    RatInterval,
    as_rational,
    det3,
    dist_sq_point_line,
    iroot,
    nearest_int,
    sin_sq_between_lines,
    sin_sq_line_plane,
    sqrt_lower,
    sqrt_upper,
    xgcd,
)

ints = st.integers(min_value=-10**6, max_value=10**6)
small = st.integers(min_value=-50, max_value=50)


def vec(a, b, c):
    return IntVec3(a, b, c)


# ------------------------------------------------------------- integer tools

@given(ints, ints)
def test_xgcd_bezout(a, b):
    g, x, y = xgcd(a, b)
    assert g == math.gcd(a, b)
    assert a * x + b * y == g
    assert g >= 0


@given(st.integers(min_value=0, max_value=10**30), st.integers(min_value=1, max_value=7))
def test_iroot_floor(n, k):
    r = iroot(n, k)
    assert r**k <= n < (r + 1) ** k


def test_iroot_exact_cube():
    assert iroot(7**9, 3) == 7**3


def test_iroot_rejects():
    with pytest.raises(NegativeArgument):
        iroot(-1, 2)
    with pytest.raises(OutOfRange):
        iroot(4, 0)


@given(st.fractions(min_value=-100, max_value=100, max_denominator=10**6))
def test_nearest_int_distance(x):
    n = nearest_int(x)
    assert abs(x - n) <= Fraction(1, 2)


def test_nearest_int_ties_up():
    # ties round toward +infinity
    assert nearest_int(Fraction(1, 2)) == 1
    assert nearest_int(Fraction(-1, 2)) == 0
    assert nearest_int(Fraction(3, 2)) == 2
    assert nearest_int(Fraction(-3, 2)) == -1
    assert nearest_int(5) == 5


@given(st.fractions(min_value=0, max_value=10**12, max_denominator=10**9),
       st.integers(min_value=1, max_value=128))
def test_sqrt_bounds_bracket(x, bits):
    lo, hi = sqrt_lower(x, bits), sqrt_upper(x, bits)
    assert lo * lo <= x <= hi * hi
    assert hi - lo <= Fraction(2, 2**bits)


def test_sqrt_bounds_perfect_square():
    assert sqrt_lower(Fraction(49, 4)) == Fraction(7, 2)
    assert sqrt_upper(Fraction(49, 4)) == Fraction(7, 2)


def test_sqrt_rejects_negative():
    with pytest.raises(NegativeArgument):
        sqrt_lower(-1)
    with pytest.raises(NegativeArgument):
        sqrt_upper(Fraction(-1, 3))


def test_as_rational_forms():
    assert as_rational(3) == 3
    assert as_rational((2, 4)) == Fraction(1, 2)
    with pytest.raises(TypeError):
        as_rational("1/2")


# ------------------------------------------------------------------- vectors

def test_intvec_rejects_floats():
    with pytest.raises(TypeError):
        IntVec3(1, 2.0, 3)


@given(small, small, small, small, small, small)
def test_cross_lagrange_identity(a, b, c, d, e, f):
    u, v = vec(a, b, c), vec(d, e, f)
    assert u.cross(v).norm_sq() == u.norm_sq() * v.norm_sq() - u.dot(v) ** 2
    assert u.cross(v) == -(v.cross(u))


def _det_cofactor(a, b, c):
    # independent expansion along the first row
    m = [a.as_tuple(), b.as_tuple(), c.as_tuple()]
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


@given(*(small for _ in range(9)))
def test_det3_against_cofactor(a, b, c, d, e, f, g, h, i):
    u, v, w = vec(a, b, c), vec(d, e, f), vec(g, h, i)
    assert det3(u, v, w) == _det_cofactor(u, v, w)


def test_primitive_and_canonical():
    assert vec(2, 4, 6).content() == 2
    assert vec(2, 4, 6).primitive() == vec(1, 2, 3)
    assert vec(0, -3, 5).canonical() == vec(0, 3, -5)
    assert vec(1, -3, 5).canonical() == vec(1, -3, 5)
    with pytest.raises(ZeroVector):
        vec(0, 0, 0).primitive()


def test_sin_sq_between_lines_examples():
    # perpendicular axes, identical lines, and a 45 degree pair
    assert sin_sq_between_lines(vec(1, 0, 0), vec(0, 1, 0)) == 1
    assert sin_sq_between_lines(vec(1, 2, 3), vec(-2, -4, -6)) == 0
    assert sin_sq_between_lines(vec(1, 0, 0), vec(1, 1, 0)) == Fraction(1, 2)


@given(*(small for _ in range(6)))
def test_sin_sq_scale_invariant(a, b, c, d, e, f):
    u, v = vec(a, b, c), vec(d, e, f)
    if u.is_zero() or v.is_zero():
        return
    assert sin_sq_between_lines(3 * u, v) == sin_sq_between_lines(u, -2 * v)


def test_sin_sq_line_plane_extremes():
    n = vec(0, 0, 1)
    assert sin_sq_line_plane(n, n) == 1          # line along the normal
    assert sin_sq_line_plane(vec(3, 4, 0), n) == 0  # line inside the plane


def test_dist_sq_point_line():
    assert dist_sq_point_line(vec(0, 3, 4), vec(1, 0, 0)) == 25
    assert dist_sq_point_line(vec(7, 0, 0), vec(1, 0, 0)) == 0
    with pytest.raises(ZeroVector):
        dist_sq_point_line(vec(1, 1, 1), vec(0, 0, 0))


# ----------------------------------------------------------------- intervals

def test_interval_validation():
    with pytest.raises(OutOfRange):
        RatInterval(1, 0)
    iv = RatInterval(Fraction(1, 3), Fraction(1, 2))
    assert iv.width == Fraction(1, 6)
    assert iv.midpoint == Fraction(5, 12)
    assert iv.contains(Fraction(2, 5))
    assert not iv.contains(1)


def test_interval_intersect():
    a = RatInterval(0, 2)
    b = RatInterval(1, 3)
    assert a.intersect(b) == RatInterval(1, 2)
    assert a.intersect(RatInterval(5, 6)) is None
    assert a.contains_interval(RatInterval(1, 2))
    assert not a.contains_interval(b)


# -------------------------------------------------------------------- gauges

def test_power_gauge_values():
    f = DecreasingFn.power(Fraction(3, 2), 2)
    assert f(0) == Fraction(3, 2)
    assert f(1) == Fraction(3, 8)
    assert f(Fraction(1, 2)) == Fraction(2, 3)
    with pytest.raises(NegativeArgument):
        f(-1)


def test_power_gauge_constructor_rejects():
    with pytest.raises(NegativeArgument):
        DecreasingFn.power(0)
    with pytest.raises(OutOfRange):
        DecreasingFn.power(1, 0)


@given(st.fractions(min_value=Fraction(1, 10**6), max_value=10**6,
                    max_denominator=10**6),
       st.integers(min_value=1, max_value=4))
def test_power_inverse_upper_minimal(y, k):
    f = DecreasingFn.power(Fraction(5, 3), k)
    t = f.inverse_upper(y)
    assert f(t) <= y
    assert t == 0 or f(t - 1) > y


def test_inverse_upper_rejects_nonpositive():
    f = DecreasingFn.power(1)
    with pytest.raises(OutOfRange):
        f.inverse_upper(0)


def _table():
    return DecreasingFn.table([(0, 16), (2, 8), (5, Fraction(1, 2))],
                              tail_scale=3, tail_k=1)


def test_table_gauge_interpolates():
    f = _table()
    assert f(0) == 16
    assert f(1) == 12
    assert f(2) == 8
    assert f(Fraction(7, 2)) == Fraction(17, 4)
    assert f(5) == Fraction(1, 2)
    # tail region
    assert f(6) == Fraction(3, 7)
    assert f(11) == Fraction(1, 4)


def test_table_gauge_monotone_across_seam():
    f = _table()
    values = [f(Fraction(t, 4)) for t in range(0, 60)]
    assert all(a >= b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("y", [Fraction(20), Fraction(9), Fraction(5),
                               Fraction(1, 2), Fraction(2, 7), Fraction(1, 100)])
def test_table_inverse_upper_minimal(y):
    f = _table()
    t = f.inverse_upper(y)
    assert f(t) <= y
    assert t == 0 or f(t - 1) > y


def test_table_constructor_rejects():
    with pytest.raises(OutOfRange):
        DecreasingFn.table([(1, 5)])          # first knot must be at 0
    with pytest.raises(OutOfRange):
        DecreasingFn.table([(0, 5), (1, 5)])  # values must drop
    with pytest.raises(OutOfRange):
        DecreasingFn.table([(0, 5), (1, 4)], tail_scale=100)  # upward seam jump
    with pytest.raises(NegativeArgument):
        DecreasingFn.table([(0, 5), (1, -1)])
