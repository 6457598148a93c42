"""Inductive construction of a badly-behaved simultaneous approximation target.

Starting from z1 = (1,0,0) and z2 = (0,1,0), each step picks a new plane
through the current vector z_nu (tilted hard against the previous plane,
with a large normal, and avoiding a family of forbidden unit layers) and
then walks the unit layer of the new plane for the next vector z_{nu+1}.
Acceptance is by certified predicate, never by estimate: opening angles
are compared through exact squared sines, the gauge inequality through
certified rational square-root bounds, and distances through their exact
rational squares.

The limit direction of the z_nu is enclosed in explicit rational boxes.
The derivation chain is: each step certifies sin^2(angle(z_{nu+1}, z_nu))
< delta_nu/4 with sin^2(delta_nu) <= 1/100, rho halving, and norm growth,
so the angles from z_nu to every later vector sum to at most
2.003 * rho_nu / |z_nu| in radians; the enclosure radius uses 3 * rho_nu,
leaving a wide certified margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .bestapprox import TargetVector
from .errors import CertificateFailure, OutOfRange, SearchExhausted, TooFewSteps
from .exact import (
    DecreasingFn,
    IntVec3,
    RatInterval,
    Rational,
    SinSq,
    nearest_int,
    sin_sq_between_lines,
    sqrt_lower,
    sqrt_upper,
    xgcd,
)
from .lattice import (
    ANGLE_CAP_SIN_SQ,
    AffineLayer,
    PlanarLattice,
    PlaneSearchConstraints,
    affine_layers,
    effective_delta_T,
    enumerate_points,
    eta_sq,
    is_extendable_pair,
    layer_has_point_on_plane,
    plane_search,
    span_lattice,
)

_PLANE_TILT_MIN = Fraction(7, 8)  # sin^2 floor against the previous plane
_K_BUDGET = 10**6


@dataclass(frozen=True)
class StepCertificate:
    """Everything an accepted step promised, for post-hoc re-checking."""

    nu: int
    H_used: Rational
    C_size: int
    E_size: int
    delta_T: tuple[SinSq, Rational]
    conditions: dict[str, bool]
    search_stats: dict[str, int]

    def all_true(self) -> bool:
        return all(self.conditions.values())


@dataclass(frozen=True)
class ConstructionState:
    """Immutable snapshot of the construction after step - 2 steps.

    Lists are aligned by one-based index nu: z[nu-1] is z_nu, delta[nu-1]
    is sin^2(delta_nu), T[nu-1] is T_nu, rho_sq[nu-1] is rho_nu^2 (defined
    once z_{nu+1} exists), lattices[nu-2] is the plane of (z_{nu-1}, z_nu),
    and H[nu-2] is the norm bound computed at step nu.
    """

    phi: DecreasingFn
    step: int
    z: tuple[IntVec3, ...]
    lattices: tuple[PlanarLattice, ...]
    delta: tuple[SinSq, ...]
    T: tuple[Rational, ...]
    rho_sq: tuple[Rational, ...]
    H: tuple[Rational, ...]
    certificates: tuple[StepCertificate, ...]

    def z_at(self, nu: int) -> IntVec3:
        return self.z[nu - 1]

    def lattice_at(self, nu: int) -> PlanarLattice:
        return self.lattices[nu - 2]

    def delta_at(self, nu: int) -> SinSq:
        return self.delta[nu - 1]

    def T_at(self, nu: int) -> Rational:
        return self.T[nu - 1]

    def rho_sq_at(self, nu: int) -> Rational:
        return self.rho_sq[nu - 1]

    def H_at(self, nu: int) -> Rational:
        return self.H[nu - 2]


def init(phi: DecreasingFn) -> ConstructionState:
    """State at nu = 2: the two axis vectors and the horizontal plane."""
    z1, z2 = IntVec3(1, 0, 0), IntVec3(0, 1, 0)
    lat2 = span_lattice(z1, z2)
    return ConstructionState(
        phi=phi,
        step=2,
        z=(z1, z2),
        lattices=(lat2,),
        delta=(ANGLE_CAP_SIN_SQ, ANGLE_CAP_SIN_SQ),
        T=(Fraction(1), Fraction(1)),
        rho_sq=(Fraction(1),),  # dist(z1, span z2) = 1
        H=(),
        certificates=(),
    )


def compute_H(state: ConstructionState, nu: int) -> Rational:
    """Norm bound below which old lattice points can still matter.

    The spacing eta of the rows of the nu-th plane parallel to z_{nu-1}
    is bounded below by a certified rational, and H is the least integer
    where the gauge drops under an eighth of it; rounding the spacing
    down only enlarges H, which is the safe direction.
    """
    if nu < 2 or nu > state.step:
        raise OutOfRange("H is defined for 2 <= nu <= current step")
    e_sq = eta_sq(state.z_at(nu - 1), state.z_at(nu))
    eta_lb = sqrt_lower(e_sq)
    return Fraction(state.phi.inverse_upper(eta_lb / 8))


def _ball(state: ConstructionState, lam: int) -> list[IntVec3]:
    h = compute_H(state, lam)
    return enumerate_points(state.lattice_at(lam), h * h)


def enumerate_C(state: ConstructionState, nu: int) -> list[tuple[IntVec3, IntVec3]]:
    """Pairs of short old-lattice points spanning planes that miss z_nu.

    One representative pair is kept per plane; the first pair in the
    deterministic enumeration order wins.  Every quantity later derived
    from a pair depends on it only through its plane, so deduplication
    loses nothing.
    """
    z_nu = state.z_at(nu)
    balls = {lam: _ball(state, lam) for lam in range(2, nu + 1)}
    seen: set[tuple[int, int, int]] = set()
    pairs: list[tuple[IntVec3, IntVec3]] = []
    for lam in range(2, nu + 1):
        for mu in range(2, nu):
            for zp in balls[lam]:
                if zp.is_zero():
                    continue
                for zpp in balls[mu]:
                    if zpp.is_zero():
                        continue
                    cr = zp.cross(zpp)
                    if cr.is_zero() or not cr.is_primitive():
                        continue
                    if cr.dot(z_nu) == 0:
                        continue
                    key = cr.canonical().as_tuple()
                    if key in seen:
                        continue
                    seen.add(key)
                    pairs.append((zp, zpp))
    return pairs


def enumerate_E(state: ConstructionState, nu: int) -> list[IntVec3]:
    """Short old-lattice points that pair with z_nu into a saturated plane."""
    z_nu = state.z_at(nu)
    seen: set[tuple[int, int, int]] = set()
    out: list[IntVec3] = []
    for mu in range(2, nu + 1):
        for zp in _ball(state, mu):
            if zp.is_zero() or zp.as_tuple() in seen:
                continue
            seen.add(zp.as_tuple())
            if is_extendable_pair(z_nu, zp):
                out.append(zp)
    return out


def _dedupe_layers(z_nu: IntVec3, points: list[IntVec3]) -> tuple[AffineLayer, ...]:
    # L(n, +1) and L(-n, -1) are the same point set; canonicalize before
    # deduplication so each geometric layer appears once.
    seen: set[tuple[tuple[int, int, int], int]] = set()
    layers: list[AffineLayer] = []
    for zp in points:
        for layer in affine_layers(z_nu, zp):
            n, lvl = layer.normal, layer.level
            if n.canonical() != n:
                n, lvl = -n, -lvl
            key = (n.as_tuple(), lvl)
            if key in seen:
                continue
            seen.add(key)
            layers.append(AffineLayer(n, lvl))
    return tuple(layers)


def _sine_sum_leq(a_sq: SinSq, d_sq: SinSq, bound_sq: SinSq) -> bool:
    """Exact test of sin(a + d) <= sin(bound) for angles in [0, pi/2].

    Expands sin(a+d) = sin a cos d + cos a sin d and squares twice, so the
    comparison stays rational no matter how thin the margin is.
    """
    w = bound_sq - a_sq - d_sq + 2 * a_sq * d_sq
    if w < 0:
        return False
    return 4 * a_sq * (1 - d_sq) * d_sq * (1 - a_sq) <= w * w


def _first_k(z2: int, b: int, y: int, bound: Rational, strict: bool) -> int:
    """Least k >= 1 with y + 2*b*k + z2*k^2 (>|>=) bound; the form is
    increasing for k >= 1 since |b| <= z2/2."""
    quad = lambda k: y + 2 * b * k + z2 * k * k
    # estimate from the dominant term, then walk; the walk is O(1) because
    # the estimate is off by at most a couple of steps
    rem = bound - y
    k = 1 if rem < 0 else max(1, math.isqrt(math.floor(rem / z2)) - 2)
    if strict:
        while quad(k) <= bound:
            k += 1
        while k > 1 and quad(k - 1) > bound:
            k -= 1
    else:
        while quad(k) < bound:
            k += 1
        while k > 1 and quad(k - 1) >= bound:
            k -= 1
    return k


def _layer_scan(
    phi: DecreasingFn,
    lat_next: PlanarLattice,
    z_nu: IntVec3,
    delta_nu: SinSq,
    rho_prev_sq: Rational,
) -> tuple[IntVec3, int, int]:
    """Pick z_{nu+1} = y0 + k*z_nu on a unit layer of the new plane.

    The accepted k satisfies, in certified form: first coordinate >= 1,
    sin^2(angle to z_nu) < delta_nu/4, rho halving, and the gauge
    inequality (the running condition linking consecutive windows).
    Returns (point, k, number of k values tested).
    """
    al, be = lat_next.coords(z_nu)
    g, sx, tx = xgcd(al, be)
    if g != 1:
        raise CertificateFailure("anchor is imprimitive in the accepted plane")
    b1, b2 = lat_next.basis
    c = (-tx) * b1 + sx * b2  # unit layer index +1 relative to z_nu
    z2 = z_nu.norm_sq()
    q_nu = z_nu.x0
    y0 = None
    for sgn in (1, -1):
        w = sgn * c
        r = nearest_int(Fraction(w.dot(z_nu), z2))
        cand = w - r * z_nu
        if q_nu >= 1 or cand.x0 >= 1:
            y0 = cand
            break
    if y0 is None:
        raise SearchExhausted("no unit layer representative can reach a positive first coordinate")
    n = lat_next.normal
    n2 = n.norm_sq()
    w0 = y0.cross(z_nu)
    if w0 != n and w0 != -n:
        raise CertificateFailure("layer representative is not one row off the anchor line")

    y_sq, b_dot = y0.norm_sq(), y0.dot(z_nu)
    quad = lambda k: y_sq + 2 * b_dot * k + z2 * k * k
    k_a = 1 if q_nu == 0 else max(1, -((y0.x0 - 1) // q_nu))
    k_b = _first_k(z2, b_dot, y_sq, Fraction(4 * n2, 1) / (delta_nu * z2), strict=True)
    k_c = _first_k(z2, b_dot, y_sq, 4 * n2 / rho_prev_sq, strict=False)
    k_start = max(k_a, k_b, k_c)

    rho_prev_ub = sqrt_upper(rho_prev_sq)

    def gauge_ok(k: int) -> bool:
        q_next = y0.x0 + k * q_nu
        rho_ub = sqrt_upper(Fraction(n2, quad(k)))
        lhs = phi(1 / (64 * rho_prev_ub * rho_ub))
        return lhs * 16 * q_next * rho_ub <= 1

    tested = 0
    for k in range(k_start, k_start + 32):
        tested += 1
        if gauge_ok(k):
            return y0 + k * z_nu, k, tested
    # The gauge side decays to zero while the other side stabilizes, so a
    # geometric gallop finds an admissible k; bisect back to a crossing.
    # The crossing offset can be astronomically large (it scales with the
    # previous denominator), so the cap is on doublings, not on k itself.
    lo, hi = 31, 64
    doublings = 0
    while not gauge_ok(k_start + hi):
        tested += 1
        doublings += 1
        lo, hi = hi, hi * 2
        if tested > _K_BUDGET or doublings > 20000:
            raise SearchExhausted(
                f"layer scan budget of {_K_BUDGET} exhausted", tested=tested)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        tested += 1
        if gauge_ok(k_start + mid):
            hi = mid
        else:
            lo = mid
    k = k_start + hi
    return y0 + k * z_nu, k, tested


def step(state: ConstructionState) -> ConstructionState:
    """One certified induction step; returns the extended state."""
    nu = state.step
    phi = state.phi
    z_nu, z_prev = state.z_at(nu), state.z_at(nu - 1)
    h_nu = compute_H(state, nu)
    pairs = enumerate_C(state, nu)
    singles = enumerate_E(state, nu)
    eff_delta, t_nu = effective_delta_T(z_nu, pairs, phi)
    delta_prev = state.delta_at(nu - 1)
    delta_nu = min(eff_delta, delta_prev / 4)
    layers = _dedupe_layers(z_nu, singles)

    lat_next = plane_search(PlaneSearchConstraints(
        anchor=z_nu,
        reference_plane=state.lattice_at(nu),
        min_plane_angle=_PLANE_TILT_MIN,
        max_family_angle=Fraction(1),
        min_normal_norm_sq=t_nu * t_nu * z_nu.norm_sq(),
        forbidden_layers=layers,
    ))
    rho_prev_sq = state.rho_sq_at(nu - 1)
    z_next, k_acc, k_tested = _layer_scan(phi, lat_next, z_nu, delta_nu, rho_prev_sq)

    n2 = lat_next.normal.norm_sq()
    rho_nu_sq = Fraction(n2, z_next.norm_sq())
    rho_ub = sqrt_upper(rho_nu_sq)
    rho_prev_ub = sqrt_upper(rho_prev_sq)

    off_span = [p for p in enumerate_points(lat_next, t_nu * t_nu)
                if not p.cross(z_nu).is_zero()]
    conditions = {
        "i": lat_next.contains(z_nu),
        "ii": lat_next.normal.is_primitive() and lat_next.contains(z_next),
        "iii": sin_sq_between_lines(lat_next.normal, state.lattice_at(nu).normal)
               >= _PLANE_TILT_MIN,
        "iv": lat_next.normal.norm_sq() > t_nu * t_nu * z_nu.norm_sq()
              and not off_span,
        "v": not any(layer_has_point_on_plane(lat_next.normal, layer)
                     for layer in layers),
        "daba": True if nu == 2
                else sin_sq_between_lines(z_nu, z_prev) < delta_prev / 4,
        "delta1": sin_sq_between_lines(z_next, z_nu) < delta_nu / 4,
        "delta2": True if nu == 2
                  else _sine_sum_leq(sin_sq_between_lines(z_nu, z_prev),
                                     delta_nu, delta_prev),
        "ce": phi(1 / (64 * rho_prev_ub * rho_ub)) * 16 * z_next.x0 * rho_ub <= 1,
        "rho_halving": rho_nu_sq <= rho_prev_sq / 4,
        "norm_growth": z_next.norm_sq() > z_nu.norm_sq(),
    }
    cert = StepCertificate(
        nu=nu,
        H_used=h_nu,
        C_size=len(pairs),
        E_size=len(singles),
        delta_T=(delta_nu, t_nu),
        conditions=conditions,
        search_stats={"k_accepted": k_acc, "k_tested": k_tested,
                      "layers": len(layers)},
    )
    if not cert.all_true():
        bad = sorted(k for k, v in conditions.items() if not v)
        raise CertificateFailure(f"step {nu} failed re-verification: {bad}")
    return ConstructionState(
        phi=phi,
        step=nu + 1,
        z=state.z + (z_next,),
        lattices=state.lattices + (lat_next,),
        delta=state.delta[:nu - 1] + (delta_nu,),
        T=state.T[:nu - 1] + (t_nu,),
        rho_sq=state.rho_sq + (rho_nu_sq,),
        H=state.H + (h_nu,),
        certificates=state.certificates + (cert,),
    )


def run(phi: DecreasingFn, steps: int) -> ConstructionState:
    """init followed by the requested number of certified steps."""
    if steps < 1:
        raise TooFewSteps("at least one step is required")
    state = init(phi)
    for _ in range(steps):
        state = step(state)
    return state


def _xi_box(state: ConstructionState, nu: int) -> tuple[RatInterval, RatInterval]:
    z_nu = state.z_at(nu)
    q = z_nu.x0
    r = 3 * sqrt_upper(state.rho_sq_at(nu), bits=128)
    if q <= r:
        raise CertificateFailure("enclosure requires the first coordinate to dominate the radius")
    boxes = []
    for a in (z_nu.x1, z_nu.x2):
        lo = min((a - r) / (q - r), (a - r) / (q + r))
        hi = max((a + r) / (q - r), (a + r) / (q + r))
        boxes.append(RatInterval(lo, hi))
    return boxes[0], boxes[1]


def xi_boxes(state: ConstructionState) -> list[tuple[int, RatInterval, RatInterval]]:
    """Per-step enclosures of the limit direction, one per usable nu.

    Emission starts at the first nu with a positive first coordinate
    (nu = 3; z2 has q = 0) and ends where rho_nu is already known.
    """
    out = []
    for nu in range(3, state.step):
        if state.z_at(nu).x0 < 1:
            continue
        b1, b2 = _xi_box(state, nu)
        out.append((nu, b1, b2))
    return out


def xi_enclosure(state: ConstructionState) -> TargetVector:
    """Intersection of all per-step boxes, as a construction-trace target.

    The boxes must be consistent; an empty intersection would falsify the
    derivation chain and raises CertificateFailure.
    """
    boxes = xi_boxes(state)
    if not boxes:
        raise TooFewSteps("no enclosure is available before the first step with q >= 1")
    cur1, cur2 = boxes[0][1], boxes[0][2]
    for _, b1, b2 in boxes[1:]:
        nxt1, nxt2 = cur1.intersect(b1), cur2.intersect(b2)
        if nxt1 is None or nxt2 is None:
            raise CertificateFailure("per-step enclosures have empty intersection")
        cur1, cur2 = nxt1, nxt2
    return TargetVector.from_intervals(cur1, cur2, provenance="construction-trace")


def interval_I_from(q: int, rho_prev_sq: Rational, rho_sq: Rational,
                    phi: DecreasingFn) -> tuple[Rational, Rational]:
    """The certified window [phi^{-1}(1/(16 q rho')), 1/(64 rho' rho)].

    Both endpoints are rounded inward (left up, right down), so the
    returned pair is contained in the true window.  A left endpoint
    exceeding the right one means the window is empty at this step;
    that is reported by the caller, not raised.
    """
    rho_prev_ub = sqrt_upper(rho_prev_sq)
    left = Fraction(phi.inverse_upper(1 / (16 * q * rho_prev_ub)))
    right = 1 / (64 * sqrt_upper(rho_prev_sq * rho_sq))
    return left, right


def interval_I(state: ConstructionState, nu: int) -> tuple[Rational, Rational]:
    """The window of denominators governed by step nu of this trace."""
    if nu < 3 or nu >= state.step:
        raise OutOfRange("the window needs q_nu >= 1 and a known rho_nu")
    q = state.z_at(nu).x0
    if q < 1:
        raise OutOfRange("the window needs q_nu >= 1")
    return interval_I_from(q, state.rho_sq_at(nu - 1), state.rho_sq_at(nu), state.phi)
