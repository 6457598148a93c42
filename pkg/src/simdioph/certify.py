"""Desk-scale certification of a construction trace.

Three independent checks. The window scan verifies that inside each
certified denominator window every independent q approximates badly
(residual at least the gauge). The counterexample search collects every
integer point that approximates well, then proves no three of them form
a unimodular matrix at the reported quality level. The invariant suite
re-derives every stored quantity and re-runs every certified predicate
from the serialized data alone, so a corrupted trace cannot pass by
carrying its own stale flags.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

from .bestapprox import TargetVector, _abs_interval, best_sequence, residual
from .construction import (
    ConstructionState,
    compute_H,
    enumerate_C,
    enumerate_E,
    interval_I,
    xi_boxes,
    _dedupe_layers,
    _sine_sum_leq,
)
from .errors import CertificateFailure, OutOfRange, SimdiophError, TooFewSteps
from .exact import (
    IntVec3,
    RatInterval,
    Rational,
    det3,
    sin_sq_between_lines,
    sqrt_lower,
    sqrt_upper,
)
from .lattice import (
    PlanarLattice,
    effective_delta_T,
    enumerate_points,
    layer_has_point_on_plane,
    span_lattice,
)

_EPS_GRID_BITS = 40  # candidate quality levels 1/2^k, k = 0..40


@dataclass(frozen=True)
class Lemma5Row:
    """One scanned denominator inside a window."""

    q: int
    dependent: bool
    res: RatInterval
    phi_q: Rational
    ok: bool


def lemma5_scan(xi: TargetVector, state: ConstructionState, nu: int,
                Q: int) -> list[Lemma5Row]:
    """Scan the integer denominators of window nu against the gauge.

    For each q the nearest integer point is formed from the enclosure;
    points lying on the plane of (z_{nu-1}, z_nu) are exempt (they are
    the construction's own good approximations), every other point must
    have residual lower bound at least phi(q).
    """
    left, right = interval_I(state, nu)
    qlo = max(1, math.ceil(left))
    qhi = min(Q, math.floor(right))
    z_prev, z_nu = state.z_at(nu - 1), state.z_at(nu)
    rows: list[Lemma5Row] = []
    for q in range(qlo, qhi + 1):
        a1, a2, res = residual(xi, q)
        x = IntVec3(q, a1, a2)
        dep = det3(x, z_prev, z_nu) == 0
        ok = dep or res.lo >= state.phi(q)
        rows.append(Lemma5Row(q=q, dependent=dep, res=res,
                              phi_q=state.phi(q), ok=ok))
    return rows


@dataclass(frozen=True)
class CertificationReport:
    horizon: int
    epsilon: Rational
    good_points: tuple[tuple[IntVec3, RatInterval], ...]
    triples_checked: int
    violations: tuple
    lemma5_windows: tuple[tuple[int, int, bool], ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations


def _good_columns(xi: TargetVector, phi, qlo: int,
                  qhi: int) -> list[tuple[IntVec3, RatInterval]]:
    """Good columns in one denominator range; module level so pools can use it."""
    out: list[tuple[IntVec3, RatInterval]] = []
    for q in range(qlo, qhi + 1):
        a1, a2, res = residual(xi, q)
        if a2 is None:
            raise OutOfRange("counterexample certification needs a two-component target")
        if res.hi < phi(q):
            out.append((IntVec3(q, a1, a2), res))
    return out


def _good_columns_star(args: tuple) -> list[tuple[IntVec3, RatInterval]]:
    return _good_columns(*args)


def certify_counterexample(xi: TargetVector, state: Optional[ConstructionState],
                           Q: int, jobs: int = 1) -> CertificationReport:
    """Search all well-approximating columns for unimodular triples.

    A column (q, a1, a2) is good at level eps when its residual upper
    bound is below eps * phi(q).  The report's epsilon is the largest
    grid value 1/2^k at which no unimodular triple is fully good; 1
    means no unimodular triple exists among the level-1 columns at all.

    With a construction state the run also records determinants of all
    best-approximation triples, which must avoid +-1 on a constructed
    target; pass state=None for a plain target where that claim does
    not apply.  jobs > 1 splits the denominator scan over processes;
    chunks are merged in order, so the report does not depend on jobs.
    """
    if state is not None and state.step < 5:
        raise TooFewSteps("certification needs at least three completed steps")
    phi = state.phi if state is not None else None
    if phi is None:
        from .exact import DecreasingFn
        phi = DecreasingFn.power(1)
    if jobs > 1 and Q >= 4 * jobs:
        from concurrent.futures import ProcessPoolExecutor

        span = -(-Q // jobs)
        chunks = [(xi, phi, lo, min(Q, lo + span - 1))
                  for lo in range(1, Q + 1, span)]
        good = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_good_columns_star, chunks):
                good.extend(part)
    else:
        good = _good_columns(xi, phi, 1, Q)

    # Threshold of a triple: the level above which all three columns are
    # good.  Any level at or below the smallest threshold blocks every
    # unimodular triple at once, which makes the grid search monotone.
    triples_checked = 0
    thresholds: list[Rational] = []
    unimodular: list[tuple[IntVec3, IntVec3, IntVec3]] = []
    for (x1, r1), (x2, r2), (x3, r3) in combinations(good, 3):
        triples_checked += 1
        if det3(x1, x2, x3) in (1, -1):
            unimodular.append((x1, x2, x3))
            thresholds.append(max(r1.hi / phi(x1.x0),
                                  r2.hi / phi(x2.x0),
                                  r3.hi / phi(x3.x0)))

    violations: list = []
    if not thresholds:
        epsilon = Fraction(1)
    else:
        tau = min(thresholds)
        epsilon = Fraction(0)
        for k in range(_EPS_GRID_BITS + 1):
            if Fraction(1, 2 ** k) <= tau:
                epsilon = Fraction(1, 2 ** k)
                break
        if epsilon == 0:
            violations.append(("unimodular-triple-below-grid", unimodular[0]))

    if state is not None:
        seq = best_sequence(xi, Q)
        vecs = [e[0] for e in seq.entries]
        for i, j, k in combinations(range(len(vecs)), 3):
            d = det3(vecs[i], vecs[j], vecs[k])
            if d in (1, -1):
                violations.append(("bestapprox-triple-unimodular",
                                   (vecs[i], vecs[j], vecs[k]), d))

    return CertificationReport(
        horizon=Q,
        epsilon=epsilon,
        good_points=tuple(good),
        triples_checked=triples_checked,
        violations=tuple(violations),
    )


@dataclass(frozen=True)
class InvariantReport:
    steps: tuple[tuple[int, dict[str, bool]], ...]
    global_checks: dict[str, bool]
    passed: bool


def _point_residual(xi: TargetVector, x: IntVec3) -> RatInterval:
    """Residual interval of a specific integer point against the target."""
    r1 = _abs_interval(x.x0 * xi.xi1.lo - x.x1, x.x0 * xi.xi1.hi - x.x1)
    r2 = _abs_interval(x.x0 * xi.xi2.lo - x.x2, x.x0 * xi.xi2.hi - x.x2)
    return RatInterval(max(r1.lo, r2.lo), max(r1.hi, r2.hi))


def _sample_off_span(lat: PlanarLattice, z_nu: IntVec3,
                     want: int) -> list[IntVec3]:
    """Deterministic sample of lattice points off span(z_nu) with q >= 1."""
    b1, b2 = lat.basis
    out: list[IntVec3] = []
    for shell in range(1, 64):
        for s in range(-shell, shell + 1):
            for t in range(-shell, shell + 1):
                if max(abs(s), abs(t)) != shell:
                    continue
                x = s * b1 + t * b2
                if x.x0 < 1:
                    continue
                if x.cross(z_nu).is_zero():
                    continue
                out.append(x)
                if len(out) >= want:
                    return out
    return out


def invariant_suite(state: ConstructionState, *, samples_per_step: int = 20,
                    xi: Optional[TargetVector] = None) -> InvariantReport:
    """Re-run every certified predicate from the state's raw data.

    Stored flags are ignored except to cross-check them against the
    recomputation, so a mutation anywhere in the serialized trace either
    breaks a recomputed identity here or fails deserialization earlier.
    An empty trace (no completed steps) passes vacuously.
    """
    from .construction import xi_enclosure

    steps: list[tuple[int, dict[str, bool]]] = []
    if xi is None and state.step >= 4:
        try:
            xi = xi_enclosure(state)
        except SimdiophError:
            xi = None

    for idx, cert in enumerate(state.certificates):
        try:
            checks = _recheck_step(state, idx, cert, samples_per_step, xi)
        except SimdiophError:
            # A state too broken to evaluate a predicate is a detected
            # failure, not a crash; the report must always come back.
            checks = {"evaluable": False}
        steps.append((cert.nu, checks))

    global_checks: dict[str, bool] = {}
    z1, z2 = state.z_at(1), state.z_at(2)
    global_checks["init_vectors"] = z1 == IntVec3(1, 0, 0) and z2 == IntVec3(0, 1, 0)
    global_checks["init_lattice"] = state.lattices[0] == span_lattice(z1, z2)
    if state.step >= 5:
        try:
            boxes = xi_boxes(state)
            nested = all(
                boxes[i][1].contains_interval(boxes[i + 1][1])
                and boxes[i][2].contains_interval(boxes[i + 1][2])
                for i in range(len(boxes) - 1))
        except SimdiophError:
            nested = False
        global_checks["boxes_nested"] = nested

    passed = all(global_checks.values()) and all(
        all(c.values()) for _, c in steps)
    return InvariantReport(steps=tuple(steps), global_checks=global_checks,
                           passed=passed)


def _recheck_step(state: ConstructionState, idx: int, cert,
                  samples_per_step: int,
                  xi: Optional[TargetVector]) -> dict[str, bool]:
    nu = cert.nu
    z_prev, z_nu, z_next = state.z_at(nu - 1), state.z_at(nu), state.z_at(nu + 1)
    lat, lat_next = state.lattice_at(nu), state.lattice_at(nu + 1)
    checks: dict[str, bool] = {}
    checks["step_index"] = nu == idx + 2

    h_nu = compute_H(state, nu)
    checks["H"] = h_nu == cert.H_used == state.H_at(nu)
    pairs = enumerate_C(state, nu)
    singles = enumerate_E(state, nu)
    checks["C_size"] = len(pairs) == cert.C_size
    checks["E_size"] = len(singles) == cert.E_size

    eff_delta, eff_t = effective_delta_T(z_nu, pairs, state.phi)
    delta_nu, t_nu = state.delta_at(nu), state.T_at(nu)
    checks["delta"] = delta_nu == min(eff_delta, state.delta_at(nu - 1) / 4) \
        and cert.delta_T[0] == delta_nu
    checks["T"] = t_nu == eff_t and cert.delta_T[1] == t_nu

    checks["basis_canonical"] = lat_next.basis == \
        PlanarLattice.from_normal(lat_next.normal).basis

    n2 = lat_next.normal.norm_sq()
    checks["i"] = lat_next.contains(z_nu)
    checks["ii"] = lat_next.normal.is_primitive() and lat_next.contains(z_next)
    checks["iii"] = sin_sq_between_lines(lat_next.normal, lat.normal) \
        >= Fraction(7, 8)
    off_span = [p for p in enumerate_points(lat_next, t_nu * t_nu)
                if not p.cross(z_nu).is_zero()]
    checks["iv"] = n2 > t_nu * t_nu * z_nu.norm_sq() and not off_span
    layers = _dedupe_layers(z_nu, singles)
    checks["v"] = not any(layer_has_point_on_plane(lat_next.normal, layer)
                          for layer in layers)

    delta_prev = state.delta_at(nu - 1)
    a_sq = sin_sq_between_lines(z_nu, z_prev)
    checks["daba"] = nu == 2 or a_sq < delta_prev / 4
    checks["delta1"] = sin_sq_between_lines(z_next, z_nu) < delta_nu / 4
    checks["delta2"] = nu == 2 or _sine_sum_leq(a_sq, delta_nu, delta_prev)

    rho_sq = state.rho_sq_at(nu)
    rho_prev_sq = state.rho_sq_at(nu - 1)
    checks["rho_identity"] = rho_sq == Fraction(n2, z_next.norm_sq())
    checks["rho_halving"] = rho_sq <= rho_prev_sq / 4
    q_next = z_next.x0
    checks["ratio_identity"] = rho_sq * q_next * q_next == \
        Fraction(n2 * q_next * q_next, z_next.norm_sq())
    rho_ub = sqrt_upper(rho_sq)
    rho_prev_ub = sqrt_upper(rho_prev_sq)
    checks["ce"] = state.phi(1 / (64 * rho_prev_ub * rho_ub)) \
        * 16 * q_next * rho_ub <= 1
    checks["norm_growth"] = z_next.norm_sq() > z_nu.norm_sq()

    checks["cert_flags"] = cert.all_true() and all(
        cert.conditions.get(k, True) == checks[k]
        for k in ("i", "ii", "iii", "iv", "v", "daba", "delta1",
                  "delta2", "ce", "rho_halving", "norm_growth"))

    if xi is not None:
        # Every point of the step's plane lattice off span(z_nu) sits at
        # distance >= rho_{nu-1} from that line, hence at residual
        # >= rho_{nu-1}/2 against the enclosed target.  The certifiable
        # per-point floor is therefore phi evaluated no earlier than the
        # denominator where phi crosses rho_{nu-1}/8; below that scale
        # phi(q) alone overshoots what any approximation argument gives.
        h_row = state.phi.inverse_upper(sqrt_lower(rho_prev_sq) / 8)
        sample = _sample_off_span(lat, z_nu, samples_per_step)
        checks["ha_sample_size"] = len(sample) >= samples_per_step
        checks["ha"] = all(
            _point_residual(xi, x).lo >= state.phi(max(x.x0, h_row))
            for x in sample)
    return checks


def full_certification(xi: TargetVector, state: ConstructionState,
                       Q: int, jobs: int = 1) -> CertificationReport:
    """Counterexample search plus all window scans, merged in one report."""
    base = certify_counterexample(xi, state, Q, jobs=jobs)
    windows: list[tuple[int, int, bool]] = []
    violations = list(base.violations)
    for nu in range(3, state.step - 1):
        try:
            rows = lemma5_scan(xi, state, nu, Q)
        except OutOfRange:
            continue
        if not rows:
            continue
        ok = all(r.ok for r in rows)
        windows.append((nu, len(rows), ok))
        if not ok:
            bad = [r.q for r in rows if not r.ok]
            violations.append(("lemma5-window", nu, bad[:10]))
    return CertificationReport(
        horizon=base.horizon,
        epsilon=base.epsilon,
        good_points=base.good_points,
        triples_checked=base.triples_checked,
        violations=tuple(violations),
        lemma5_windows=tuple(windows),
    )
