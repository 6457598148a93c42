"""Certified simultaneous Diophantine approximation toolkit.

Exact-arithmetic primitives, best-approximation scans, unimodular witness
matrices, an inductive construction of targets whose good approximations
never assemble into a unimodular matrix, and a certifier that re-checks
finished construction traces from their serialized form.
"""

from .bestapprox import (
    BestApproxSeq,
    MinkowskiRow,
    TargetVector,
    UnimodMatrix,
    best_sequence,
    cf_convergents,
    check_minkowski,
    jarnik_triples,
    matrix_R,
    psi,
    residual,
)
from .certify import (
    CertificationReport,
    InvariantReport,
    Lemma5Row,
    certify_counterexample,
    full_certification,
    invariant_suite,
    lemma5_scan,
)
from .construction import (
    ConstructionState,
    StepCertificate,
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
from .errors import (
    AmbiguousRounding,
    AnchorNotPrimitive,
    CertificateFailure,
    CollinearInput,
    NegativeArgument,
    NonPositiveQ,
    NotExtendable,
    NotInLattice,
    OutOfRange,
    PairContainsZ,
    SearchExhausted,
    SimdiophError,
    TooFewSteps,
    TraceCorrupt,
    ZeroVector,
)
from .exact import (
    DecreasingFn,
    IntVec3,
    RatInterval,
    det3,
    nearest_int,
    sin_sq_between_lines,
    sqrt_lower,
    sqrt_upper,
)
from .lattice import (
    AffineLayer,
    PlanarLattice,
    affine_layers,
    complete_basis,
    enumerate_points,
    eta_sq,
    is_extendable_pair,
    span_lattice,
)
from .trace_io import load_trace, loads_trace, dumps_trace, save_trace
from .witness import WitnessRecord, unimodular_witness, witness_sequence

__version__ = "0.1.0"

__all__ = [
    "AffineLayer",
    "AmbiguousRounding",
    "AnchorNotPrimitive",
    "BestApproxSeq",
    "CertificateFailure",
    "CertificationReport",
    "CollinearInput",
    "ConstructionState",
    "DecreasingFn",
    "IntVec3",
    "InvariantReport",
    "Lemma5Row",
    "MinkowskiRow",
    "NegativeArgument",
    "NonPositiveQ",
    "NotExtendable",
    "NotInLattice",
    "OutOfRange",
    "PairContainsZ",
    "PlanarLattice",
    "RatInterval",
    "SearchExhausted",
    "SimdiophError",
    "StepCertificate",
    "TargetVector",
    "TooFewSteps",
    "TraceCorrupt",
    "UnimodMatrix",
    "WitnessRecord",
    "ZeroVector",
    "affine_layers",
    "best_sequence",
    "certify_counterexample",
    "cf_convergents",
    "check_minkowski",
    "complete_basis",
    "compute_H",
    "det3",
    "dumps_trace",
    "enumerate_C",
    "enumerate_E",
    "enumerate_points",
    "eta_sq",
    "full_certification",
    "init",
    "interval_I",
    "invariant_suite",
    "is_extendable_pair",
    "jarnik_triples",
    "lemma5_scan",
    "load_trace",
    "loads_trace",
    "matrix_R",
    "nearest_int",
    "psi",
    "residual",
    "run",
    "save_trace",
    "sin_sq_between_lines",
    "span_lattice",
    "sqrt_lower",
    "sqrt_upper",
    "step",
    "unimodular_witness",
    "witness_sequence",
    "xi_boxes",
    "xi_enclosure",
]
