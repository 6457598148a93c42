"""Inductive construction: frozen first steps and state-wide invariants.

The 8-step run is expensive, so it lives in a session fixture; everything
here re-derives values from that one state and compares against constants
that were produced by an independent scratch run and hand-checked.
"""

import math
import random
from fractions import Fraction

import pytest

from simdioph.construction import (
    _sine_sum_leq,
    compute_H,
    enumerate_C,
    enumerate_E,
    init,
    interval_I,
    run,
    step,
    xi_boxes,
    xi_enclosure,
)
from simdioph.errors import OutOfRange, TooFewSteps
from simdioph.exact import IntVec3

CONDITION_KEYS = {"i", "ii", "iii", "iv", "v", "daba", "delta1", "delta2",
                  "ce", "rho_halving", "norm_growth"}

# (C_size, E_size) per accepted step, in order
SIZES = [(0, 26), (1, 66), (1, 82), (1, 76), (1, 50), (1, 66), (1, 58), (1, 88)]


def test_init_state(phi):
    s = init(phi)
    assert s.step == 2
    assert s.z == (IntVec3(1, 0, 0), IntVec3(0, 1, 0))
    assert s.delta == (Fraction(1, 100), Fraction(1, 100))
    assert s.T == (Fraction(1), Fraction(1))
    assert s.rho_sq == (Fraction(1),)
    assert s.H == () and s.certificates == ()
    assert s.lattice_at(2).contains(IntVec3(1, 0, 0))


def test_first_step_frozen(phi):
    s = step(init(phi))
    assert s.step == 3
    assert s.z_at(3) == IntVec3(1, 127, 3)
    assert s.H == (Fraction(7),)
    assert s.delta == (Fraction(1, 100), Fraction(1, 400))
    assert s.T == (Fraction(1), Fraction(1))
    cert = s.certificates[0]
    assert cert.nu == 2 and cert.all_true()
    assert (cert.C_size, cert.E_size) == (0, 26)


def test_state8_shape(state8):
    assert state8.step == 10
    assert len(state8.z) == 10
    assert len(state8.lattices) == 9
    assert len(state8.delta) == len(state8.T) == 9
    assert len(state8.rho_sq) == 9
    assert len(state8.H) == 8
    assert [c.nu for c in state8.certificates] == list(range(2, 10))
    for cert in state8.certificates:
        assert cert.all_true()
        assert set(cert.conditions) == CONDITION_KEYS
        assert cert.search_stats["k_accepted"] >= 1
        assert cert.search_stats["k_tested"] >= 1


def test_state8_frozen_vectors(state8):
    assert state8.z_at(3) == IntVec3(1, 127, 3)
    assert state8.z_at(4) == IntVec3(210478, 26739664, 631703)
    assert state8.z_at(5).x0 == 161773739745236


def test_state8_frozen_tables(state8):
    assert list(state8.delta[:4]) == [Fraction(1, 100), Fraction(1, 400),
                                      Fraction(9, 64556), Fraction(9, 258224)]
    assert list(state8.T[:4]) == [1, 1, 85, 85]
    assert list(state8.rho_sq[:4]) == [
        Fraction(1),
        Fraction(10, 16139),
        Fraction(133447646, 715452980501589),
        Fraction(1181519342268351781,
                 84530556223845568821996361386834),
    ]
    assert [(c.C_size, c.E_size) for c in state8.certificates] == SIZES


def test_rho_quarter_halving(state8):
    for nu in range(2, 10):
        assert state8.rho_sq_at(nu) <= state8.rho_sq_at(nu - 1) / 4


def test_norm_growth_and_anchor_chain(state8):
    norms = [v.norm_sq() for v in state8.z]
    assert all(a < b for a, b in zip(norms[1:], norms[2:]))
    for nu in range(2, 11):
        lat = state8.lattice_at(nu)
        assert lat.contains(state8.z_at(nu))
        assert lat.contains(state8.z_at(nu - 1))


def test_compute_H_matches_stored(state8):
    for nu in range(2, 10):
        assert compute_H(state8, nu) == state8.H_at(nu)
    with pytest.raises(OutOfRange):
        compute_H(state8, 1)
    with pytest.raises(OutOfRange):
        compute_H(state8, 11)


def test_enumerate_reproduces_certificates(state8):
    # C and E only read anchors the final state still holds, so the sets
    # recorded at step time must come back unchanged
    for cert in state8.certificates:
        pairs = enumerate_C(state8, cert.nu)
        singles = enumerate_E(state8, cert.nu)
        assert len(pairs) == cert.C_size
        assert len(singles) == cert.E_size
        z_nu = state8.z_at(cert.nu)
        for zp, zpp in pairs:
            assert zp.cross(zpp).dot(z_nu) != 0
        for zp in singles:
            assert not zp.cross(z_nu).is_zero()


def test_xi_boxes_nested_and_shrinking(state8, xi8):
    boxes = xi_boxes(state8)
    assert [nu for nu, _, _ in boxes] == list(range(3, 10))
    for (_, a1, a2), (_, b1, b2) in zip(boxes, boxes[1:]):
        for outer, inner in ((a1, b1), (a2, b2)):
            assert outer.contains_interval(inner)
            assert inner.width * 2 <= outer.width
    assert xi8.provenance == "construction-trace"
    assert xi8.n == 2
    assert xi8.xi1.width < Fraction(1, 10**240)
    assert xi8.xi2.width < Fraction(1, 10**240)
    last = boxes[-1]
    assert last[1].contains_interval(xi8.xi1)
    assert last[2].contains_interval(xi8.xi2)


def test_xi_enclosure_needs_boxes(phi):
    with pytest.raises(TooFewSteps):
        xi_enclosure(init(phi))


def test_run_rejects_nonpositive_steps(phi):
    with pytest.raises(TooFewSteps):
        run(phi, 0)


def test_interval_windows_cover_adjacent_ranges(state8):
    ends = {}
    for nu in range(3, 10):
        left, right = interval_I(state8, nu)
        assert 0 <= left < right
        ends[nu] = (left, right)
    assert math.floor(ends[3][1]) == 1453
    for nu in range(3, 9):
        # next window opens before the previous one has closed
        assert math.ceil(ends[nu + 1][0]) <= math.floor(ends[nu][1]) + 1
    with pytest.raises(OutOfRange):
        interval_I(state8, 2)
    with pytest.raises(OutOfRange):
        interval_I(state8, 10)


def test_sine_sum_matches_float_oracle():
    rng = random.Random(11)
    checked = 0
    while checked < 200:
        a = Fraction(rng.randint(0, 999), 1000)
        d = Fraction(rng.randint(0, 999), 1000)
        bound = Fraction(rng.randint(1, 1000), 1000)
        alpha = math.asin(math.sqrt(a))
        beta = math.asin(math.sqrt(d))
        if alpha + beta > math.pi / 2:
            continue
        lhs = math.sin(alpha + beta)
        rhs = math.sqrt(bound)
        if abs(lhs - rhs) < 1e-9:
            continue  # too close for the float oracle to adjudicate
        assert _sine_sum_leq(a, d, bound) == (lhs <= rhs)
        checked += 1
