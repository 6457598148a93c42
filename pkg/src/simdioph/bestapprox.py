"""Best simultaneous approximations of a target vector (1, xi1, xi2).

The scan is a certified linear walk over denominators: every rounding and
every comparison is decided from rational interval enclosures, and any
undecidable comparison raises AmbiguousRounding with the offending
denominator so the caller can retry at higher precision.  For one
coordinate the classical continued-fraction expansion doubles as an
independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import (
    AmbiguousRounding,
    CertificateFailure,
    NonPositiveQ,
    OutOfRange,
)
from .exact import IntVec3, RatInterval, Rational, as_rational, det3, nearest_int

_PROVENANCES = ("exact-rational", "decimal-literal", "construction-trace")


@dataclass(frozen=True)
class TargetVector:
    """Enclosure of the target (1, xi1, xi2); xi2 is None for the n=1 view."""

    xi1: RatInterval
    xi2: Optional[RatInterval]
    provenance: str

    def __post_init__(self) -> None:
        if self.provenance not in _PROVENANCES:
            raise OutOfRange(f"unknown provenance {self.provenance!r}")
        if self.provenance == "exact-rational":
            if self.xi1.width != 0 or (self.xi2 is not None and self.xi2.width != 0):
                raise OutOfRange("exact-rational targets must have width-0 enclosures")

    @property
    def n(self) -> int:
        return 1 if self.xi2 is None else 2

    @classmethod
    def exact(cls, x1, x2=None) -> "TargetVector":
        x1 = as_rational(x1)
        i1 = RatInterval(x1, x1)
        i2 = None
        if x2 is not None:
            x2 = as_rational(x2)
            i2 = RatInterval(x2, x2)
        return cls(i1, i2, "exact-rational")

    @classmethod
    def from_intervals(cls, xi1: RatInterval, xi2: Optional[RatInterval],
                       provenance: str = "decimal-literal") -> "TargetVector":
        return cls(xi1, xi2, provenance)


@dataclass(frozen=True)
class BestApproxSeq:
    """The denominators where the approximation minimum strictly drops."""

    entries: tuple[tuple[IntVec3, RatInterval], ...]
    horizon: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        prev_q = 0
        prev_hi = None
        for vec, res in self.entries:
            if vec.x0 <= prev_q:
                raise CertificateFailure("best-approximation denominators must increase")
            if prev_hi is not None and not res.hi < prev_hi:
                raise CertificateFailure("residual upper bounds must strictly decrease")
            prev_q, prev_hi = vec.x0, res.hi

    def q_values(self) -> list[int]:
        return [vec.x0 for vec, _ in self.entries]

    @property
    def hit_zero(self) -> bool:
        """Whether the scan ended on an exact zero residual (dependent target)."""
        return bool(self.entries) and self.entries[-1][1].hi == 0


@dataclass(frozen=True)
class UnimodMatrix:
    """Three integer columns with determinant +-1."""

    columns: tuple[IntVec3, IntVec3, IntVec3]

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        if abs(self.det()) != 1:
            raise CertificateFailure("matrix determinant must be +-1")

    def det(self) -> int:
        c1, c2, c3 = self.columns
        return det3(c1, c2, c3)


def _abs_interval(lo: Rational, hi: Rational) -> RatInterval:
    if lo >= 0:
        return RatInterval(lo, hi)
    if hi <= 0:
        return RatInterval(-hi, -lo)
    return RatInterval(Fraction(0), max(-lo, hi))


def _coord_residual(interval: RatInterval, q: int) -> tuple[int, RatInterval]:
    lo, hi = q * interval.lo, q * interval.hi
    a_lo, a_hi = nearest_int(lo), nearest_int(hi)
    if a_lo != a_hi:
        raise AmbiguousRounding(
            f"enclosure straddles a rounding boundary at q={q}", q=q)
    return a_lo, _abs_interval(lo - a_lo, hi - a_lo)


def residual(xi: TargetVector, q: int) -> tuple[int, Optional[int], RatInterval]:
    """Nearest integers to q*xi and an enclosure of the sup-norm residual."""
    if q < 1:
        raise NonPositiveQ("denominator must be at least 1")
    a1, r1 = _coord_residual(xi.xi1, q)
    if xi.xi2 is None:
        return a1, None, r1
    a2, r2 = _coord_residual(xi.xi2, q)
    return a1, a2, RatInterval(max(r1.lo, r2.lo), max(r1.hi, r2.hi))


def psi(xi: TargetVector, t: int) -> RatInterval:
    """Enclosure of min over 1 <= q <= t of the sup-norm residual."""
    if t < 1:
        raise OutOfRange("psi is defined for t >= 1")
    best_lo: Optional[Rational] = None
    best_hi: Optional[Rational] = None
    for q in range(1, t + 1):
        _, _, r = residual(xi, q)
        best_lo = r.lo if best_lo is None else min(best_lo, r.lo)
        best_hi = r.hi if best_hi is None else min(best_hi, r.hi)
    return RatInterval(best_lo, best_hi)


def _scaled_endpoints(interval: RatInterval, den: int) -> tuple[int, int]:
    lo, hi = interval.lo, interval.hi
    return lo.numerator * (den // lo.denominator), hi.numerator * (den // hi.denominator)


def best_sequence(xi: TargetVector, Q: int) -> BestApproxSeq:
    """Scan q = 1..Q and keep the q where the residual provably drops.

    q = 1 is always the first entry.  The scan stops early once a residual
    is exactly zero, which only happens for rationally dependent targets.
    """
    if Q < 1:
        raise OutOfRange("horizon must be at least 1")
    # One common denominator turns the whole scan into integer arithmetic.
    dens = [xi.xi1.lo.denominator, xi.xi1.hi.denominator]
    if xi.xi2 is not None:
        dens += [xi.xi2.lo.denominator, xi.xi2.hi.denominator]
    den = math.lcm(*dens)
    den2 = 2 * den
    l1, h1 = _scaled_endpoints(xi.xi1, den)
    if xi.xi2 is not None:
        l2, h2 = _scaled_endpoints(xi.xi2, den)
    x1lo = x1hi = x2lo = x2hi = 0
    entries: list[tuple[IntVec3, RatInterval]] = []
    min_lo = min_hi = None
    for q in range(1, Q + 1):
        x1lo += l1
        x1hi += h1
        a1 = (x1lo + x1lo + den) // den2
        if (x1hi + x1hi + den) // den2 != a1:
            raise AmbiguousRounding(
                f"enclosure straddles a rounding boundary at q={q}", q=q)
        d_lo, d_hi = x1lo - a1 * den, x1hi - a1 * den
        if d_lo >= 0:
            r_lo, r_hi = d_lo, d_hi
        elif d_hi <= 0:
            r_lo, r_hi = -d_hi, -d_lo
        else:
            r_lo, r_hi = 0, max(-d_lo, d_hi)
        a2 = 0
        if xi.xi2 is not None:
            x2lo += l2
            x2hi += h2
            a2 = (x2lo + x2lo + den) // den2
            if (x2hi + x2hi + den) // den2 != a2:
                raise AmbiguousRounding(
                    f"enclosure straddles a rounding boundary at q={q}", q=q)
            d_lo, d_hi = x2lo - a2 * den, x2hi - a2 * den
            if d_lo >= 0:
                s_lo, s_hi = d_lo, d_hi
            elif d_hi <= 0:
                s_lo, s_hi = -d_hi, -d_lo
            else:
                s_lo, s_hi = 0, max(-d_lo, d_hi)
            r_lo, r_hi = max(r_lo, s_lo), max(r_hi, s_hi)
        if min_lo is None or r_hi < min_lo:
            entries.append((IntVec3(q, a1, a2),
                            RatInterval(Fraction(r_lo, den), Fraction(r_hi, den))))
            min_lo, min_hi = r_lo, r_hi
            if min_hi == 0:
                break
        elif r_lo >= min_hi:
            continue
        else:
            raise AmbiguousRounding(
                f"cannot order residuals at q={q}", q=q)
    return BestApproxSeq(tuple(entries), Q)


def cf_convergents(xi1: RatInterval, Q: int) -> list[tuple[int, int]]:
    """Continued-fraction convergents (p, q) with q <= Q, zeroth included.

    For an exact rational the expansion terminates and the last convergent
    is the reduced fraction itself.  An enclosure too coarse to pin a
    partial quotient raises AmbiguousRounding.
    """
    if Q < 1:
        raise OutOfRange("horizon must be at least 1")
    lo, hi = xi1.lo, xi1.hi
    a = math.floor(lo)
    if math.floor(hi) != a:
        raise AmbiguousRounding("enclosure spans an integer boundary")
    convs = [(a, 1)]
    p_prev, q_prev = 1, 0
    p_cur, q_cur = a, 1
    while True:
        lo, hi = lo - a, hi - a
        if hi == 0:
            break  # exact rational fully expanded
        if lo <= 0:
            raise AmbiguousRounding("enclosure cannot certify the next partial quotient")
        lo, hi = 1 / hi, 1 / lo
        a = math.floor(lo)
        if math.floor(hi) != a:
            raise AmbiguousRounding("enclosure cannot certify the next partial quotient")
        p_new, q_new = a * p_cur + p_prev, a * q_cur + q_prev
        if q_new > Q:
            break
        convs.append((p_new, q_new))
        p_prev, q_prev, p_cur, q_cur = p_cur, q_cur, p_new, q_new
    return convs


@dataclass(frozen=True)
class ConvergentPairCheck:
    """Certified facts about one consecutive convergent pair."""

    index: int
    det: int
    prop1_ok: bool
    two_sided_ok: Optional[bool]  # None when the enclosure cannot certify it


def convergent_pair_checks(xi1: RatInterval, convs: list[tuple[int, int]]) -> list[ConvergentPairCheck]:
    """For consecutive convergents, the determinant and the q*|q*xi - p| <= 1 bound.

    The two-sided jump bound (2*q_next)^-1 < |q*xi - p| < q_next^-1 is
    certified when the enclosure decides it and left None otherwise (it
    fails by design on the final convergent of an exact rational).
    """
    out = []
    for i in range(len(convs) - 1):
        p1, q1 = convs[i]
        p2, q2 = convs[i + 1]
        det = p1 * q2 - p2 * q1
        ok = True
        for p, q in ((p1, q1), (p2, q2)):
            r = _abs_interval(q * xi1.lo - p, q * xi1.hi - p)
            if not q * r.hi <= 1:
                ok = False
        r1 = _abs_interval(q1 * xi1.lo - p1, q1 * xi1.hi - p1)
        lower = Fraction(1, 2 * q2)
        upper = Fraction(1, q2)
        if r1.lo > lower and r1.hi < upper:
            two_sided: Optional[bool] = True
        elif r1.hi <= lower or r1.lo >= upper:
            two_sided = False
        else:
            two_sided = None
        out.append(ConvergentPairCheck(i, det, ok, two_sided))
    return out


@dataclass(frozen=True)
class MinkowskiRow:
    """One consecutive-pair check of the transference bound."""

    nu: int
    q: int
    q_next: int
    ok: bool


def check_minkowski(seq: BestApproxSeq, n: int) -> list[MinkowskiRow]:
    """Certify residual_nu <= q_{nu+1}^(-1/n) for each consecutive pair.

    Compared in squared form for n = 2 so no roots are taken.
    """
    if n not in (1, 2):
        raise OutOfRange("only one or two approximated coordinates")
    rows = []
    for i in range(len(seq.entries) - 1):
        vec, res = seq.entries[i]
        q_next = seq.entries[i + 1][0].x0
        if n == 1:
            ok = res.hi * q_next <= 1
        else:
            ok = res.hi * res.hi * q_next <= 1
        rows.append(MinkowskiRow(i, vec.x0, q_next, ok))
    return rows


def jarnik_triples(seq: BestApproxSeq) -> list[tuple[int, int]]:
    """Indices nu where three consecutive vectors are independent, with det."""
    out = []
    vecs = [vec for vec, _ in seq.entries]
    for i in range(len(vecs) - 2):
        d = det3(vecs[i], vecs[i + 1], vecs[i + 2])
        if d != 0:
            out.append((i, d))
    return out


def matrix_R(xi: TargetVector, m: UnimodMatrix) -> RatInterval:
    """Enclosure of the worst residual of the matrix columns against xi."""
    worst_lo = worst_hi = Fraction(0)
    intervals = [xi.xi1] + ([xi.xi2] if xi.xi2 is not None else [])
    for col in m.columns:
        coords = (col.x1, col.x2)
        for j, iv in enumerate(intervals):
            a = coords[j]
            r = _abs_interval(col.x0 * iv.lo - a, col.x0 * iv.hi - a)
            worst_lo = max(worst_lo, r.lo)
            worst_hi = max(worst_hi, r.hi)
    return RatInterval(worst_lo, worst_hi)
