"""Rank-2 sublattices of Z^3 and the geometry built on them.

A plane through the origin is carried by a primitive integer normal; the
lattice of its integer points gets a Gauss-reduced basis (b1, b2) oriented
so that cross(b1, b2) equals the normal exactly.  Orientation being pinned
makes serialized lattices canonical: re-deriving the basis from the normal
must reproduce it bit for bit.

On top of that sit the affine unit layers {n.x = +-1}, the row spacing
eta, the layer decomposition along an anchor vector, and the constrained
search for a new plane through a given anchor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .errors import (
    AnchorNotPrimitive,
    CertificateFailure,
    CollinearInput,
    NotExtendable,
    NotInLattice,
    OutOfRange,
    PairContainsZ,
    SearchExhausted,
    ZeroVector,
)
from .exact import (
    DecreasingFn,
    IntVec3,
    Rational,
    SinSq,
    as_rational,
    nearest_int,
    sin_sq_between_lines,
    xgcd,
)

# Half-angle cap applied to every opening angle delta; keeps the cones
# narrow from the start so the nesting argument never needs wide-angle
# trigonometry.
ANGLE_CAP_SIN_SQ = Fraction(1, 100)

_SEARCH_BUDGET = 10**6


def _floor_sqrt(x) -> int:
    """Largest integer t >= 0 with t*t <= x, for rational x >= 0."""
    r = math.isqrt(x.numerator // x.denominator) if isinstance(x, Fraction) else math.isqrt(x)
    while (r + 1) * (r + 1) <= x:
        r += 1
    while r > 0 and r * r > x:
        r -= 1
    return r


def _ceil_sqrt(x) -> int:
    """Smallest integer t >= 0 with t*t >= x."""
    if x <= 0:
        return 0
    r = _floor_sqrt(x)
    return r if r * r == x else r + 1


@dataclass(frozen=True)
class AffineLayer:
    """The integer points of {x : normal.x = level} with level +1 or -1."""

    normal: IntVec3
    level: int

    def __post_init__(self) -> None:
        if self.normal.is_zero():
            raise ZeroVector("layer normal must be nonzero")
        if not self.normal.is_primitive():
            raise OutOfRange("layer normal must be primitive")
        if self.level not in (1, -1):
            raise OutOfRange("layer level must be +1 or -1")

    def contains(self, x: IntVec3) -> bool:
        return self.normal.dot(x) == self.level


def _gauss_reduce(b1: IntVec3, b2: IntVec3) -> tuple[IntVec3, IntVec3]:
    # Lagrange reduction; every operation used keeps cross(b1, b2) fixed.
    if b2.norm_sq() < b1.norm_sq():
        b1, b2 = b2, -b1
    while True:
        t = nearest_int(Fraction(b1.dot(b2), b1.norm_sq()))
        if t != 0:
            b2 = b2 - t * b1
        if b2.norm_sq() < b1.norm_sq():
            b1, b2 = b2, -b1
        else:
            return b1, b2


@dataclass(frozen=True)
class PlanarLattice:
    """All integer points of the plane {x : normal.x = 0}.

    ``normal`` is primitive and ``basis`` is Gauss reduced with
    cross(b1, b2) == normal, which already forces both basis vectors onto
    the plane and makes the covolume equal |normal|.  Build instances with
    :meth:`from_normal` or :func:`span_lattice`; the constructor only
    validates.
    """

    normal: IntVec3
    basis: tuple[IntVec3, IntVec3]

    def __post_init__(self) -> None:
        if self.normal.is_zero():
            raise ZeroVector("lattice normal must be nonzero")
        if not self.normal.is_primitive():
            raise OutOfRange("lattice normal must be primitive")
        b1, b2 = self.basis
        if b1.cross(b2) != self.normal:
            raise CertificateFailure("basis is not an oriented basis for the normal's plane")

    @classmethod
    def from_normal(cls, normal: IntVec3) -> "PlanarLattice":
        """Deterministic basis for the integer points orthogonal to ``normal``."""
        if normal.is_zero():
            raise ZeroVector("lattice normal must be nonzero")
        if not normal.is_primitive():
            raise OutOfRange("lattice normal must be primitive")
        n0, n1, n2 = normal.as_tuple()
        if n0 == 0 and n1 == 0:
            # normal = (0, 0, +-1); pick the axis square with matching sign
            if n2 == 1:
                b1, b2 = IntVec3(1, 0, 0), IntVec3(0, 1, 0)
            else:
                b1, b2 = IntVec3(0, 1, 0), IntVec3(1, 0, 0)
        else:
            g, x, y = xgcd(n0, n1)
            b1 = IntVec3(n1 // g, -n0 // g, 0)
            b2 = IntVec3(x * n2, y * n2, -g)
        b1, b2 = _gauss_reduce(b1, b2)
        return cls(normal, (b1, b2))

    @property
    def covolume_sq(self) -> int:
        return self.normal.norm_sq()

    def coords(self, x: IntVec3) -> tuple[int, int]:
        """Integer coordinates of x in the stored basis; NotInLattice otherwise."""
        b1, b2 = self.basis
        n = self.normal
        d = n.norm_sq()
        num_s = x.cross(b2).dot(n)
        num_t = b1.cross(x).dot(n)
        if num_s % d or num_t % d:
            raise NotInLattice(f"{x.as_tuple()} is not in the lattice")
        s, t = num_s // d, num_t // d
        if s * b1 + t * b2 != x:
            raise NotInLattice(f"{x.as_tuple()} is not in the lattice")
        return s, t

    def contains(self, x: IntVec3) -> bool:
        try:
            self.coords(x)
        except NotInLattice:
            return False
        return True


def span_lattice(z1: IntVec3, z2: IntVec3) -> PlanarLattice:
    """Saturated lattice of the plane spanned by two independent vectors."""
    c = z1.cross(z2)
    if c.is_zero():
        raise CollinearInput("spanning vectors are collinear")
    return PlanarLattice.from_normal(c.primitive())


def is_extendable_pair(z1: IntVec3, z2: IntVec3) -> bool:
    """True iff (z1, z2) generate every integer point of their plane.

    Equivalent to cross(z1, z2) being primitive; false for collinear input.
    """
    c = z1.cross(z2)
    return (not c.is_zero()) and c.is_primitive()


def complete_basis(z1: IntVec3, z2: IntVec3) -> IntVec3:
    """A third vector y making (z1, z2, y) a determinant +1 basis of Z^3."""
    if not is_extendable_pair(z1, z2):
        raise NotExtendable("pair does not extend to a basis of Z^3")
    n = z1.cross(z2)
    g12, s, t = xgcd(n.x0, n.x1)
    g, p, r = xgcd(g12, n.x2)
    # n is primitive, so g == 1 and n.y == 1 below
    y = IntVec3(p * s, p * t, r)
    if n.dot(y) != 1:
        raise CertificateFailure("basis completion failed the determinant check")
    return y


def affine_layers(z1: IntVec3, z2: IntVec3) -> tuple[AffineLayer, AffineLayer]:
    """The two unit translates of the pair's plane, levels +1 and -1."""
    if not is_extendable_pair(z1, z2):
        raise NotExtendable("pair does not extend to a basis of Z^3")
    n = z1.cross(z2)
    return AffineLayer(n, 1), AffineLayer(n, -1)


def eta_sq(z1: IntVec3, z2: IntVec3) -> Rational:
    """Squared spacing of the lattice rows parallel to z1.

    Off-span points of the pair's lattice sit on lines parallel to span(z1)
    at integer multiples of covolume/|z1|, so the minimum distance is that
    spacing itself.
    """
    if not is_extendable_pair(z1, z2):
        raise NotExtendable("pair does not extend to a basis of Z^3")
    return Fraction(z1.cross(z2).norm_sq(), z1.norm_sq())


def layer_index(lat: PlanarLattice, anchor: IntVec3, x: IntVec3) -> int:
    """Index of the row of ``lat`` parallel to ``anchor`` that contains x.

    Row 0 is span(anchor); the sign convention is fixed by the stored basis.
    """
    if not anchor.is_primitive():
        raise AnchorNotPrimitive("anchor must be primitive")
    al, be = lat.coords(anchor)
    ga, de = lat.coords(x)
    # anchor primitive in Z^3 and the lattice saturated make (al, be) coprime
    return al * de - be * ga


def enumerate_points(lat: PlanarLattice, radius_sq) -> list[IntVec3]:
    """All lattice points with |x|^2 <= radius_sq, in lexicographic order."""
    R = as_rational(radius_sq)
    if R < 0:
        return []
    b1, b2 = lat.basis
    a, b = b1.norm_sq(), b1.dot(b2)
    n2 = lat.normal.norm_sq()
    rn, rd = R.numerator, R.denominator
    # |s*b1 + t*b2|^2 <= R  <=>  (a*s + b*t)^2 + n2*t^2 <= a*R
    tmax = _floor_sqrt(Fraction(a * rn, n2 * rd))
    pts: list[IntVec3] = []
    for t in range(-tmax, tmax + 1):
        cap = a * rn - n2 * t * t * rd
        if cap < 0:
            continue
        u = math.isqrt(cap // rd)
        lo = math.ceil(Fraction(-u - b * t, a))
        hi = math.floor(Fraction(u - b * t, a))
        for s in range(lo, hi + 1):
            pts.append(s * b1 + t * b2)
    pts.sort(key=IntVec3.as_tuple)
    return pts


def layer_plane_witness(n_plane: IntVec3, layer: AffineLayer) -> Optional[IntVec3]:
    """An integer point on both the plane {n_plane.x = 0} and the layer, or None."""
    if n_plane.is_zero():
        raise ZeroVector("plane normal must be nonzero")
    kernel = PlanarLattice.from_normal(n_plane.primitive())
    k1, k2 = kernel.basis
    d1, d2 = layer.normal.dot(k1), layer.normal.dot(k2)
    g, u, v = xgcd(d1, d2)
    if g == 0 or layer.level % g:
        return None
    q = layer.level // g
    w = (q * u) * k1 + (q * v) * k2
    if n_plane.dot(w) != 0 or layer.normal.dot(w) != layer.level:
        raise CertificateFailure("layer witness failed verification")
    return w


def layer_has_point_on_plane(n_plane: IntVec3, layer: AffineLayer) -> bool:
    """Whether the plane {n_plane.x = 0} meets the layer in an integer point."""
    return layer_plane_witness(n_plane, layer) is not None


def effective_delta_T(
    z: IntVec3,
    pairs: Iterable[tuple[IntVec3, IntVec3]],
    phi: DecreasingFn,
) -> tuple[SinSq, Rational]:
    """Opening angle and norm threshold shielding z from a family of layers.

    For each pair, gamma is the angle between span(z) and the pair's plane.
    The returned delta (as sin^2) is at most half of every gamma and capped
    at ANGLE_CAP_SIN_SQ; the returned T satisfies T >= 2*max|w| over the
    points w where span(z) pierces the unit layers, and
    (T / (2*sqrt(2))) * sin(gamma_min / 2) >= phi(T), both certified in
    squared form.  Any direction within delta of z then stays at distance
    >= phi(q) from every layer point (q, a1, a2) with q >= 1 and |x| >= T.
    """
    if z.is_zero():
        raise ZeroVector("cannot shield the zero vector")
    pair_list = list(pairs)
    if not pair_list:
        return ANGLE_CAP_SIN_SQ, Fraction(1)
    z2 = z.norm_sq()
    half_gamma_sin_sq: list[Fraction] = []
    w_sq_max = Fraction(0)
    for z1, z2v in pair_list:
        if not is_extendable_pair(z1, z2v):
            raise NotExtendable("layer pair does not span a saturated plane")
        n = z1.cross(z2v)
        d = n.dot(z)
        if d == 0:
            raise PairContainsZ("z lies in the plane of one of the pairs")
        # sin^2(gamma) / 4 is a certified lower bound for sin^2(gamma/2)
        half_gamma_sin_sq.append(Fraction(d * d, 4 * n.norm_sq() * z2))
        w_sq_max = max(w_sq_max, Fraction(z2, d * d))
    s2 = min(half_gamma_sin_sq)
    delta = min(ANGLE_CAP_SIN_SQ, s2)

    def ok(t: int) -> bool:
        return t * t * s2 >= 8 * phi(t) ** 2

    t0 = max(1, _ceil_sqrt(4 * w_sq_max))
    t = t0
    doublings = 0
    while not ok(t):
        t *= 2
        doublings += 1
        if doublings > 512:
            raise SearchExhausted("no norm threshold satisfies the gauge inequality")
    if t > t0:
        lo, hi = t // 2 + 1, t
        lo = max(lo, t0)
        while lo < hi:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid + 1
        t = lo
    return delta, Fraction(t)


@dataclass(frozen=True)
class PlaneSearchConstraints:
    """What an acceptable new plane through ``anchor`` must satisfy.

    Angles are squared sines.  ``min_plane_angle`` bounds the tilt against
    the reference plane from below, ``max_family_angle`` from above (1
    disables it).  ``min_normal_norm_sq`` is a strict lower bound on the
    squared norm of the primitive normal, and no forbidden layer may meet
    the plane in an integer point.
    """

    anchor: IntVec3
    reference_plane: PlanarLattice
    min_plane_angle: SinSq
    max_family_angle: SinSq
    min_normal_norm_sq: Rational
    forbidden_layers: tuple[AffineLayer, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "min_plane_angle", as_rational(self.min_plane_angle))
        object.__setattr__(self, "max_family_angle", as_rational(self.max_family_angle))
        object.__setattr__(self, "min_normal_norm_sq", as_rational(self.min_normal_norm_sq))
        object.__setattr__(self, "forbidden_layers", tuple(self.forbidden_layers))
        if not (0 <= self.min_plane_angle <= 1):
            raise OutOfRange("min_plane_angle is a squared sine, must be in [0, 1]")
        if not (0 <= self.max_family_angle <= 1):
            raise OutOfRange("max_family_angle is a squared sine, must be in [0, 1]")
        if self.min_normal_norm_sq < 0:
            raise OutOfRange("min_normal_norm_sq must be nonnegative")


def plane_search(c: PlaneSearchConstraints, budget: int = _SEARCH_BUDGET) -> PlanarLattice:
    """First plane through ``c.anchor`` meeting every constraint.

    Candidate normals live in the rank-2 lattice {n : n.anchor = 0} with
    basis (n0, m), n0 the reference normal.  With a positive tilt floor the
    tilt condition reads B^2*|anchor|^2 >= theta*|n0|^2*|n|^2 for
    n = A*n0 + B*m, so rows with small B are empty and the scan starts at
    the first B where the norm floor no longer carves a hole out of the
    row; each row then yields a closed A-interval.  With tilt floor 0 the
    scan walks diagonal shells |A| + |B| = s instead, skipping shells that
    cannot clear the norm floor.  Either order is deterministic; ties
    within a row or shell go to ascending coordinates.

    Raises SearchExhausted once ``budget`` candidates (plus empty rows)
    have been rejected.
    """
    anchor = c.anchor
    if anchor.is_zero():
        raise ZeroVector("anchor must be nonzero")
    if not anchor.is_primitive():
        raise AnchorNotPrimitive("anchor must be primitive")
    n0 = c.reference_plane.normal
    if n0.dot(anchor) != 0:
        raise OutOfRange("anchor must lie in the reference plane")
    kernel = PlanarLattice.from_normal(anchor)
    al, be = kernel.coords(n0)
    g, s, t = xgcd(al, be)
    if g != 1:
        raise CertificateFailure("reference normal is imprimitive in the kernel lattice")
    k1, k2 = kernel.basis
    m = (-t) * k1 + s * k2
    # (n0, m) has coordinate determinant 1, hence is a basis of the kernel
    a = n0.norm_sq()
    b = n0.dot(m)
    anc2 = anchor.norm_sq()
    theta = c.min_plane_angle
    seen: set[tuple[int, int, int]] = set()
    tested = 0

    def admit(raw: IntVec3) -> Optional[PlanarLattice]:
        if raw.is_zero():
            return None
        n = raw.primitive().canonical()
        key = n.as_tuple()
        if key in seen:
            return None
        seen.add(key)
        if not (n.norm_sq() > c.min_normal_norm_sq):
            return None
        tilt = sin_sq_between_lines(n, n0)
        if tilt < theta or tilt > c.max_family_angle:
            return None
        if any(layer_has_point_on_plane(n, layer) for layer in c.forbidden_layers):
            return None
        lat = PlanarLattice.from_normal(n)
        _certify_plane(lat, c)
        return lat

    if theta > 0:
        # Smallest B whose row cannot intersect the norm-floor hole:
        # B^2 * anc2 > min_normal_norm_sq * a.
        B = max(1, _ceil_sqrt(c.min_normal_norm_sq * a / anc2))
        while B * B * anc2 <= c.min_normal_norm_sq * a:
            B += 1
        while tested < budget:
            # (a*A + b*B)^2 <= a*U(B) - anc2*B^2 with U(B) = B^2*anc2/(theta*a)
            room = Fraction(B * B * anc2 * (1 - theta), theta)
            u = _floor_sqrt(room)
            lo = math.ceil(Fraction(-u - b * B, a))
            hi = math.floor(Fraction(u - b * B, a))
            if lo > hi:
                tested += 1  # empty row still consumes budget
            for A in range(lo, hi + 1):
                tested += 1
                found = admit(A * n0 + B * m)
                if found is not None:
                    return found
                if tested >= budget:
                    break
            B += 1
    else:
        m2 = max(a, m.norm_sq())
        shell = max(1, _ceil_sqrt(c.min_normal_norm_sq / m2))
        while shell * shell * m2 <= c.min_normal_norm_sq:
            shell += 1
        while tested < budget:
            for A in range(-shell, shell + 1):
                r = shell - abs(A)
                for B in ((0,) if r == 0 else (-r, r)):
                    tested += 1
                    found = admit(A * n0 + B * m)
                    if found is not None:
                        return found
                    if tested >= budget:
                        break
                if tested >= budget:
                    break
            shell += 1
    raise SearchExhausted(f"plane search stopped after {tested} candidates", tested=tested)


def _certify_plane(lat: PlanarLattice, c: PlaneSearchConstraints) -> None:
    # Postconditions re-checked on the finished lattice, not on the raw
    # search coordinates.
    if not lat.contains(c.anchor):
        raise CertificateFailure("search result does not contain the anchor")
    if not (lat.normal.norm_sq() > c.min_normal_norm_sq):
        raise CertificateFailure("search result is below the norm floor")
    tilt = sin_sq_between_lines(lat.normal, c.reference_plane.normal)
    if tilt < c.min_plane_angle or tilt > c.max_family_angle:
        raise CertificateFailure("search result violates a tilt bound")
    for layer in c.forbidden_layers:
        if layer_has_point_on_plane(lat.normal, layer):
            raise CertificateFailure("search result meets a forbidden layer")
