"""Unimodular matrices whose three columns all approximate a target well.

A consecutive pair of best approximations spans a plane; translating its
fundamental parallelogram by the dual vector e = n/|n|^2 captures exactly
one integer point z*, and (z1, z2, z*) is then unimodular with all three
columns within a certified residual bound.  Driving this over the whole
best-approximation sequence exhibits the witness matrices whose worst
residual tends to zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .bestapprox import TargetVector, UnimodMatrix, best_sequence, matrix_R
from .errors import CertificateFailure, NonPositiveQ, NotExtendable, OutOfRange
from .exact import IntVec3, RatInterval, Rational
from .lattice import complete_basis, is_extendable_pair

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WitnessRecord:
    """One witness matrix plus the certified facts about it."""

    pair_index: int
    matrix: UnimodMatrix
    e_norm_sq: Rational
    R: RatInterval
    certified_bound: Rational

    def __post_init__(self) -> None:
        z1, z2, _ = self.matrix.columns
        if self.e_norm_sq * z1.cross(z2).norm_sq() != 1:
            raise CertificateFailure("e_norm_sq must be the reciprocal squared covolume")


def _fvec(v: IntVec3) -> tuple[Fraction, Fraction, Fraction]:
    return Fraction(v.x0), Fraction(v.x1), Fraction(v.x2)


def _fcross(u, v):
    return (u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0])


def _fdot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _witness_with_flag(z1: IntVec3, z2: IntVec3) -> tuple[UnimodMatrix, bool]:
    if not is_extendable_pair(z1, z2):
        raise NotExtendable("pair does not span a saturated plane")
    n = z1.cross(z2)
    n2 = n.norm_sq()
    y = complete_basis(z1, z2)
    # e = n/|n|^2 is the point where the dual direction pierces level 1;
    # y - e lies in the pair's plane, so it has exact plane coordinates.
    u = tuple(Fraction(yc) - Fraction(nc, n2)
              for yc, nc in zip(y.as_tuple(), n.as_tuple()))
    nf = _fvec(n)
    sigma = _fdot(_fcross(u, _fvec(z2)), nf) / n2
    tau = _fdot(_fcross(_fvec(z1), u), nf) / n2
    z_star = y - math.floor(sigma) * z1 - math.floor(tau) * z2
    if n.dot(z_star) != 1:
        raise CertificateFailure("translated parallelogram point off the unit layer")
    repaired = False
    if z_star.x0 < 1:
        z_star = z_star + z1
        repaired = True
    if z_star.x0 < 1:
        raise NonPositiveQ("witness column has nonpositive first coordinate")
    return UnimodMatrix((z1, z2, z_star)), repaired


def unimodular_witness(z1: IntVec3, z2: IntVec3) -> UnimodMatrix:
    """The unimodular matrix (z1, z2, z*) from the translated parallelogram.

    z* is the unique integer point of the fundamental parallelogram of
    (z1, z2) translated by e = n/|n|^2; it satisfies n.z* = 1.  If its
    first coordinate is below 1 it is repaired once by adding z1.
    """
    return _witness_with_flag(z1, z2)[0]


def _e_residual_hi(xi: TargetVector, n: IntVec3) -> Rational:
    n2 = n.norm_sq()
    e0 = Fraction(n.x0, n2)
    worst = Fraction(0)
    intervals = (xi.xi1, xi.xi2)
    for j, iv in enumerate(intervals):
        ej = Fraction((n.x1, n.x2)[j], n2)
        lo, hi = e0 * iv.lo - ej, e0 * iv.hi - ej
        if lo > hi:
            lo, hi = hi, lo
        worst = max(worst, abs(lo), abs(hi))
    return worst


def witness_sequence(xi: TargetVector, Q: int) -> list[WitnessRecord]:
    """Witness matrices for every consecutive extendable pair up to Q.

    Pairs that fail to span a saturated plane are skipped with a logged
    warning rather than silently dropped; the construction asserts they
    do not occur for honestly independent targets.
    """
    if xi.n != 2:
        raise OutOfRange("witness matrices need a two-coordinate target")
    seq = best_sequence(xi, Q)
    records: list[WitnessRecord] = []
    for i in range(len(seq.entries) - 1):
        (v1, r1), (v2, r2) = seq.entries[i], seq.entries[i + 1]
        if not is_extendable_pair(v1, v2):
            log.warning("pair %d (q=%d, q=%d) does not span a saturated plane; skipped",
                        i, v1.x0, v2.x0)
            continue
        matrix, repaired = _witness_with_flag(v1, v2)
        n = v1.cross(v2)
        e_norm_sq = Fraction(1, n.norm_sq())
        big_r = matrix_R(xi, matrix)
        # z* = e + {sigma} z1 + {tau} z2 gives the subadditive bound below;
        # the repair, when taken, adds one more z1.
        bound = _e_residual_hi(xi, n) + r1.hi + r2.hi + (r1.hi if repaired else 0)
        if big_r.hi > bound:
            raise CertificateFailure("witness residual exceeds its decomposition bound")
        records.append(WitnessRecord(i, matrix, e_norm_sq, big_r, bound))
    return records
