"""Witness matrices from consecutive best-approximation pairs."""

import random
from fractions import Fraction

import pytest

from simdioph.bestapprox import TargetVector
from simdioph.errors import CertificateFailure, NotExtendable, NonPositiveQ, OutOfRange
from simdioph.exact import IntVec3, RatInterval, det3, sqrt_lower, sqrt_upper
from simdioph.lattice import is_extendable_pair
from simdioph.witness import WitnessRecord, unimodular_witness, witness_sequence


def _random_extendable_pair(rng):
    while True:
        z1 = IntVec3(rng.randint(1, 9), rng.randint(-9, 9), rng.randint(-9, 9))
        z2 = IntVec3(rng.randint(1, 9), rng.randint(-9, 9), rng.randint(-9, 9))
        if z1.cross(z2).norm_sq() and is_extendable_pair(z1, z2):
            return z1, z2


def test_unimodular_witness_seeded_pairs():
    rng = random.Random(5)
    for _ in range(60):
        z1, z2 = _random_extendable_pair(rng)
        m = unimodular_witness(z1, z2)
        a, b, c = m.columns
        assert (a, b) == (z1, z2)
        assert abs(det3(a, b, c)) == 1
        # z* sits on the unit layer of the pair's plane
        assert z1.cross(z2).dot(c) == 1
        assert c.x0 >= 1


def test_witness_axis_pair_repaired():
    m = unimodular_witness(IntVec3(1, 0, 0), IntVec3(0, 1, 0))
    assert m.columns[2] == IntVec3(1, 0, 1)


def test_witness_rejects_nonsaturated_pair():
    with pytest.raises(NotExtendable):
        unimodular_witness(IntVec3(1, 1, 0), IntVec3(-1, 1, 0))


def test_record_requires_reciprocal_covolume():
    m = unimodular_witness(IntVec3(1, 0, 0), IntVec3(0, 1, 0))
    WitnessRecord(0, m, Fraction(1), RatInterval(Fraction(0), Fraction(1)),
                  Fraction(1))
    with pytest.raises(CertificateFailure):
        WitnessRecord(0, m, Fraction(1, 2),
                      RatInterval(Fraction(0), Fraction(1)), Fraction(1))


def test_witness_sequence_needs_two_coordinates():
    iv = RatInterval(Fraction(1, 3), Fraction(1, 3))
    xi = TargetVector(iv, None, "exact-rational")
    with pytest.raises(OutOfRange):
        witness_sequence(xi, 100)


def test_witness_sequence_sqrt_pair(sqrt23, seq23):
    records = witness_sequence(sqrt23, 10**4)
    assert len(records) == 9

    vectors = [v for v, _ in seq23.entries]
    for rec in records:
        z1, z2, z_star = rec.matrix.columns
        assert z1 == vectors[rec.pair_index]
        assert z2 == vectors[rec.pair_index + 1]
        assert abs(det3(z1, z2, z_star)) == 1
        assert rec.R.hi <= rec.certified_bound
        assert rec.e_norm_sq * z1.cross(z2).norm_sq() == 1

    indices = [rec.pair_index for rec in records]
    assert indices == sorted(indices) and len(set(indices)) == len(indices)

    # worst residual decays: the tail is an order of magnitude below the head
    first = records[0].R.hi
    tail = max(rec.R.hi for rec in records[-3:])
    assert tail < first / 10
