"""Exception types shared across the package.

Every error raised on purpose derives from SimdiophError so callers can
catch the package's failures without also swallowing bugs.
"""


class SimdiophError(Exception):
    """Base class for all deliberate failures in this package."""


class ZeroVector(SimdiophError):
    """An operation received the zero vector where a nonzero one is required."""


class NegativeArgument(SimdiophError):
    """A quantity that must be positive (or nonnegative) was not."""


class OutOfRange(SimdiophError):
    """A value falls outside the domain where the operation is defined."""


class CollinearInput(SimdiophError):
    """Two vectors that must span a plane are parallel."""


class NotExtendable(SimdiophError):
    """A vector pair cannot be extended to a unimodular integer basis."""


class NotInLattice(SimdiophError):
    """A point was expected to lie in a given lattice but does not."""


class AnchorNotPrimitive(SimdiophError):
    """A lattice vector that must be primitive (gcd of coordinates 1) is not."""


class SearchExhausted(SimdiophError):
    """An enumeration hit its candidate budget without finding a match."""

    def __init__(self, message: str, tested: int = 0):
        super().__init__(message)
        self.tested = tested


class CertificateFailure(SimdiophError):
    """A self-check that the construction must satisfy did not hold."""


class AmbiguousRounding(SimdiophError):
    """Interval endpoints disagree on a rounding decision; more precision needed."""

    def __init__(self, message: str, q: int | None = None):
        super().__init__(message)
        self.q = q


class PairContainsZ(SimdiophError):
    """A constraint pair includes the anchor direction itself."""


class NonPositiveQ(SimdiophError):
    """A first coordinate that must be a positive integer is not."""


class TooFewSteps(SimdiophError):
    """The construction has not run long enough for the requested output."""


class TraceCorrupt(SimdiophError):
    """A serialized trace fails structural validation and cannot be loaded."""
