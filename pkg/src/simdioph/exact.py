"""Exact arithmetic primitives: integer vectors, rational intervals,
certified square-root bounds, and decreasing gauge functions.

Everything here is exact.  Quantities that are irrational in general
(lengths, sines of angles) are carried as squares, which are rational,
or bracketed between certified rational bounds from ``sqrt_lower`` /
``sqrt_upper``.  No floats anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import NegativeArgument, OutOfRange, ZeroVector

Rational = Fraction

# Squared sine of an angle; always a rational in [0, 1].
SinSq = Fraction


def as_rational(x) -> Rational:
    """Coerce an int, Fraction, or (num, den) pair to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, tuple) and len(x) == 2:
        return Fraction(x[0], x[1])
    raise TypeError(f"cannot interpret {x!r} as a rational")


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Extended gcd: (g, x, y) with a*x + b*y == g == gcd(a, b) >= 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def iroot(n: int, k: int) -> int:
    """Floor of the k-th root of a nonnegative integer."""
    if n < 0:
        raise NegativeArgument("iroot of a negative integer")
    if k < 1:
        raise OutOfRange("root index must be a positive integer")
    if k == 1 or n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    # Newton iteration from an over-estimate converges downward.
    r = 1 << -(-n.bit_length() // k)
    while True:
        nr = ((k - 1) * r + n // r ** (k - 1)) // k
        if nr >= r:
            break
        r = nr
    while r ** k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def nearest_int(x) -> int:
    """Nearest integer to x; ties round toward +infinity."""
    x = as_rational(x)
    return (2 * x.numerator + x.denominator) // (2 * x.denominator)


def sqrt_lower(x, bits: int = 64) -> Rational:
    """Rational r <= sqrt(x), within 1 / (x.denominator * 2**bits) of it."""
    x = as_rational(x)
    if x < 0:
        raise NegativeArgument("square root of a negative rational")
    if bits < 1:
        raise OutOfRange("bits must be a positive integer")
    p, q = x.numerator, x.denominator
    s = math.isqrt((p * q) << (2 * bits))
    return Fraction(s, q << bits)


def sqrt_upper(x, bits: int = 64) -> Rational:
    """Rational r >= sqrt(x), within 1 / (x.denominator * 2**bits) of it."""
    x = as_rational(x)
    if x < 0:
        raise NegativeArgument("square root of a negative rational")
    if bits < 1:
        raise OutOfRange("bits must be a positive integer")
    p, q = x.numerator, x.denominator
    t = (p * q) << (2 * bits)
    s = math.isqrt(t)
    if s * s < t:
        s += 1
    return Fraction(s, q << bits)


@dataclass(frozen=True)
class IntVec3:
    """Vector in Z^3 with exact integer operations."""

    x0: int
    x1: int
    x2: int

    def __post_init__(self):
        for c in (self.x0, self.x1, self.x2):
            if not isinstance(c, int):
                raise TypeError(f"integer coordinate required, got {type(c).__name__}")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.x0, self.x1, self.x2)

    def is_zero(self) -> bool:
        return self.x0 == 0 and self.x1 == 0 and self.x2 == 0

    def dot(self, other: "IntVec3") -> int:
        return self.x0 * other.x0 + self.x1 * other.x1 + self.x2 * other.x2

    def cross(self, other: "IntVec3") -> "IntVec3":
        return IntVec3(
            self.x1 * other.x2 - self.x2 * other.x1,
            self.x2 * other.x0 - self.x0 * other.x2,
            self.x0 * other.x1 - self.x1 * other.x0,
        )

    def norm_sq(self) -> int:
        return self.x0 * self.x0 + self.x1 * self.x1 + self.x2 * self.x2

    def content(self) -> int:
        """gcd of the coordinates; 0 only for the zero vector."""
        return math.gcd(self.x0, math.gcd(self.x1, self.x2))

    def is_primitive(self) -> bool:
        return self.content() == 1

    def primitive(self) -> "IntVec3":
        g = self.content()
        if g == 0:
            raise ZeroVector("the zero vector has no primitive form")
        return IntVec3(self.x0 // g, self.x1 // g, self.x2 // g)

    def canonical(self) -> "IntVec3":
        """Sign-normalized direction: first nonzero coordinate positive."""
        for c in (self.x0, self.x1, self.x2):
            if c != 0:
                return self if c > 0 else -self
        return self

    def __add__(self, other: "IntVec3") -> "IntVec3":
        return IntVec3(self.x0 + other.x0, self.x1 + other.x1, self.x2 + other.x2)

    def __sub__(self, other: "IntVec3") -> "IntVec3":
        return IntVec3(self.x0 - other.x0, self.x1 - other.x1, self.x2 - other.x2)

    def __neg__(self) -> "IntVec3":
        return IntVec3(-self.x0, -self.x1, -self.x2)

    def __mul__(self, k: int) -> "IntVec3":
        return IntVec3(self.x0 * k, self.x1 * k, self.x2 * k)

    __rmul__ = __mul__


def det3(a: IntVec3, b: IntVec3, c: IntVec3) -> int:
    """Determinant of the 3x3 integer matrix with rows a, b, c."""
    return a.dot(b.cross(c))


def sin_sq_between_lines(u: IntVec3, v: IntVec3) -> Rational:
    """sin^2 of the angle between the lines spanned by u and v."""
    if u.is_zero() or v.is_zero():
        raise ZeroVector("angle with the zero vector is undefined")
    c = u.cross(v)
    return Fraction(c.norm_sq(), u.norm_sq() * v.norm_sq())


def sin_sq_line_plane(u: IntVec3, n: IntVec3) -> Rational:
    """sin^2 of the angle between the line spanned by u and the plane
    with normal vector n."""
    if n.is_zero() or u.is_zero():
        raise ZeroVector("angle with the zero vector is undefined")
    d = n.dot(u)
    return Fraction(d * d, n.norm_sq() * u.norm_sq())


def dist_sq_point_line(x: IntVec3, z: IntVec3) -> Rational:
    """Squared distance from the point x to the line R*z."""
    if z.is_zero():
        raise ZeroVector("span of the zero vector is not a line")
    c = x.cross(z)
    return Fraction(c.norm_sq(), z.norm_sq())


@dataclass(frozen=True)
class RatInterval:
    """Closed interval [lo, hi] with rational endpoints."""

    lo: Rational
    hi: Rational

    def __post_init__(self):
        object.__setattr__(self, "lo", as_rational(self.lo))
        object.__setattr__(self, "hi", as_rational(self.hi))
        if self.lo > self.hi:
            raise OutOfRange(f"inverted interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Rational:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Rational:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= as_rational(x) <= self.hi

    def contains_interval(self, other: "RatInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersect(self, other: "RatInterval") -> "RatInterval | None":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return None
        return RatInterval(lo, hi)


@dataclass(frozen=True)
class DecreasingFn:
    """Positive nonincreasing gauge on t >= 0, exactly evaluable at rationals.

    Two kinds.  ``power`` is scale / (1 + t)**k.  ``table`` interpolates
    linearly through knots (t_0 = 0, values positive and strictly
    decreasing) and continues past the last knot with a power-law tail
    whose value there does not exceed the last knot's value, so the whole
    function stays nonincreasing across the seam.
    """

    kind: str
    scale: Rational = Fraction(1)
    k: int = 1
    rows: tuple[tuple[Rational, Rational], ...] = ()

    @staticmethod
    def power(scale, k: int = 1) -> "DecreasingFn":
        scale = as_rational(scale)
        if scale <= 0:
            raise NegativeArgument("scale must be positive")
        if k < 1:
            raise OutOfRange("exponent must be a positive integer")
        return DecreasingFn(kind="power", scale=scale, k=k)

    @staticmethod
    def table(rows, tail_scale=None, tail_k: int = 1) -> "DecreasingFn":
        knots = tuple((as_rational(t), as_rational(v)) for t, v in rows)
        if not knots:
            raise OutOfRange("a table needs at least one row")
        if knots[0][0] != 0:
            raise OutOfRange("the first knot must sit at t = 0")
        for (t0, v0), (t1, v1) in zip(knots, knots[1:]):
            if t1 <= t0:
                raise OutOfRange("knot abscissas must increase strictly")
            if v1 >= v0:
                raise OutOfRange("knot values must decrease strictly")
        if any(v <= 0 for _, v in knots):
            raise NegativeArgument("knot values must be positive")
        if tail_k < 1:
            raise OutOfRange("tail exponent must be a positive integer")
        t_last, v_last = knots[-1]
        if tail_scale is None:
            tail_scale = v_last * (1 + t_last) ** tail_k
        else:
            tail_scale = as_rational(tail_scale)
            if tail_scale <= 0:
                raise NegativeArgument("tail scale must be positive")
            if tail_scale / (1 + t_last) ** tail_k > v_last:
                raise OutOfRange("tail may not jump upward at the seam")
        return DecreasingFn(kind="table", scale=tail_scale, k=tail_k, rows=knots)

    def __call__(self, t) -> Rational:
        t = as_rational(t)
        if t < 0:
            raise NegativeArgument("gauge argument must be nonnegative")
        if self.kind == "table":
            t_last = self.rows[-1][0]
            if t <= t_last:
                for (t0, v0), (t1, v1) in zip(self.rows, self.rows[1:]):
                    if t <= t1:
                        return v0 + (v1 - v0) * (t - t0) / (t1 - t0)
                return self.rows[-1][1]
        return self.scale / (1 + t) ** self.k

    def inverse_upper(self, y) -> int:
        """Least integer t >= 0 with f(t) <= y.  OutOfRange for y <= 0."""
        y = as_rational(y)
        if y <= 0:
            raise OutOfRange("the gauge is positive everywhere")
        if self(0) <= y:
            return 0
        if self.kind == "table":
            t_ceil = math.ceil(self.rows[-1][0])
            if self(t_ceil) <= y:
                lo, hi = 0, t_ceil
                while hi - lo > 1:
                    mid = (lo + hi) // 2
                    if self(mid) <= y:
                        hi = mid
                    else:
                        lo = mid
                return hi
        # Power-law region: solve (1 + t)**k >= scale / y exactly.
        c = self.scale / y
        m = iroot(c.numerator // c.denominator, self.k)
        while m ** self.k * c.denominator < c.numerator:
            m += 1
        t = max(m - 1, 0)
        if self.kind == "table":
            t = max(t, math.ceil(self.rows[-1][0]) + 1)
        while self(t) > y:
            t += 1
        while t > 0 and self(t - 1) <= y:
            t -= 1
        return t
