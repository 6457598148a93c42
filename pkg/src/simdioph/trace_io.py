"""Serialization of construction traces to a single JSON document.

Layout (version 1): {"version", "kind", "phi", "steps", "reports"}.
Every payload integer is a decimal string so arbitrary precision survives
any JSON reader; rationals are [numerator, denominator] string pairs in
lowest terms with a positive denominator; vectors are 3-arrays.  A trace
stores only what a step added (the initial two vectors and the first
plane are implied by the scheme), so loading replays the appends of
``construction.step`` without re-running any search.

Loading is strict: unknown keys, malformed numbers, non-canonical
rationals, or out-of-order steps raise TraceCorrupt.  Structural checks
only; whether the stored quantities satisfy the construction's
inequalities is the certifier's job, not the parser's.

Writing is deterministic, so identical states produce byte-identical
files; there is no timestamp inside a trace.
"""

from __future__ import annotations

import json
import math
import sys
from fractions import Fraction
from typing import Any, Optional

from .construction import ConstructionState, StepCertificate, init
from .errors import SimdiophError, TraceCorrupt
from .exact import DecreasingFn, IntVec3, Rational
from .lattice import PlanarLattice

_VERSION = 1
_KIND = "construction-trace"

# Deep traces carry coordinates with thousands of digits; the interpreter's
# default str <-> int guard is sized for accident protection, not for this.
if sys.get_int_max_str_digits() < 2_000_000:
    sys.set_int_max_str_digits(2_000_000)


def _int_str(x: int) -> str:
    return str(int(x))


def _parse_int(s: Any, where: str) -> int:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise TraceCorrupt(f"{where}: expected a decimal-string integer")
    try:
        return int(s)
    except ValueError:
        raise TraceCorrupt(f"{where}: {s!r} is not a decimal integer") from None


def _frac_pair(x) -> list[str]:
    f = Fraction(x)
    return [_int_str(f.numerator), _int_str(f.denominator)]


def _parse_frac(pair: Any, where: str) -> Rational:
    if not isinstance(pair, list) or len(pair) != 2:
        raise TraceCorrupt(f"{where}: expected a [num, den] pair")
    num = _parse_int(pair[0], where)
    den = _parse_int(pair[1], where)
    if den <= 0:
        raise TraceCorrupt(f"{where}: denominator must be positive")
    if math.gcd(num, den) != 1:
        raise TraceCorrupt(f"{where}: rational not in lowest terms")
    return Fraction(num, den)


def _vec3(v: IntVec3) -> list[str]:
    return [_int_str(v.x0), _int_str(v.x1), _int_str(v.x2)]


def _parse_vec3(arr: Any, where: str) -> IntVec3:
    if not isinstance(arr, list) or len(arr) != 3:
        raise TraceCorrupt(f"{where}: expected a 3-array")
    return IntVec3(*(_parse_int(c, where) for c in arr))


def phi_to_doc(phi: DecreasingFn) -> dict:
    doc: dict[str, Any] = {"kind": phi.kind, "scale": _frac_pair(phi.scale),
                           "k": _int_str(phi.k)}
    if phi.kind == "table":
        doc["rows"] = [[_frac_pair(t), _frac_pair(v)] for t, v in phi.rows]
    return doc


def phi_from_doc(doc: Any) -> DecreasingFn:
    if not isinstance(doc, dict):
        raise TraceCorrupt("phi: expected an object")
    kind = doc.get("kind")
    allowed = {"power": {"kind", "scale", "k"},
               "table": {"kind", "scale", "k", "rows"}}
    if kind not in allowed:
        raise TraceCorrupt(f"phi: unknown kind {kind!r}")
    if set(doc) != allowed[kind]:
        raise TraceCorrupt("phi: unexpected or missing fields")
    scale = _parse_frac(doc["scale"], "phi.scale")
    k = _parse_int(doc["k"], "phi.k")
    try:
        if kind == "power":
            return DecreasingFn.power(scale, k)
        rows_doc = doc["rows"]
        if not isinstance(rows_doc, list):
            raise TraceCorrupt("phi.rows: expected a list")
        rows = [(_parse_frac(r[0], "phi.rows"), _parse_frac(r[1], "phi.rows"))
                for r in rows_doc
                if isinstance(r, list) and len(r) == 2]
        if len(rows) != len(rows_doc):
            raise TraceCorrupt("phi.rows: expected [t, value] pairs")
        return DecreasingFn.table(rows, tail_scale=scale, tail_k=k)
    except SimdiophError as exc:
        raise TraceCorrupt(f"phi: {exc}") from exc


def _step_to_doc(state: ConstructionState, cert: StepCertificate) -> dict:
    nu = cert.nu
    return {
        "nu": _int_str(nu),
        "z_next": _vec3(state.z_at(nu + 1)),
        "normal": _vec3(state.lattice_at(nu + 1).normal),
        "H": _frac_pair(state.H_at(nu)),
        "C_size": _int_str(cert.C_size),
        "E_size": _int_str(cert.E_size),
        "delta": _frac_pair(state.delta_at(nu)),
        "T": _frac_pair(state.T_at(nu)),
        "rho_sq": _frac_pair(state.rho_sq_at(nu)),
        "conditions": dict(cert.conditions),
        "search_stats": {k: _int_str(v) for k, v in cert.search_stats.items()},
    }


_STEP_FIELDS = {"nu", "z_next", "normal", "H", "C_size", "E_size",
                "delta", "T", "rho_sq", "conditions", "search_stats"}


def state_to_doc(state: ConstructionState,
                 reports: Optional[list] = None) -> dict:
    return {
        "version": _VERSION,
        "kind": _KIND,
        "phi": phi_to_doc(state.phi),
        "steps": [_step_to_doc(state, cert) for cert in state.certificates],
        "reports": list(reports) if reports is not None else [],
    }


def doc_to_state(doc: Any) -> tuple[ConstructionState, list]:
    """Rebuild a state by replaying the per-step appends; cheap and strict."""
    if not isinstance(doc, dict):
        raise TraceCorrupt("trace: expected a JSON object")
    if set(doc) != {"version", "kind", "phi", "steps", "reports"}:
        raise TraceCorrupt("trace: unexpected or missing top-level fields")
    if doc["version"] != _VERSION:
        raise TraceCorrupt(f"trace: unsupported version {doc['version']!r}")
    if doc["kind"] != _KIND:
        raise TraceCorrupt(f"trace: unsupported kind {doc['kind']!r}")
    if not isinstance(doc["steps"], list):
        raise TraceCorrupt("trace: steps must be a list")
    if not isinstance(doc["reports"], list):
        raise TraceCorrupt("trace: reports must be a list")

    state = init(phi_from_doc(doc["phi"]))
    for i, rec in enumerate(doc["steps"]):
        where = f"steps[{i}]"
        if not isinstance(rec, dict) or set(rec) != _STEP_FIELDS:
            raise TraceCorrupt(f"{where}: unexpected or missing fields")
        nu = _parse_int(rec["nu"], f"{where}.nu")
        if nu != state.step:
            raise TraceCorrupt(f"{where}: step {nu} does not follow {state.step - 1}")
        conditions = rec["conditions"]
        if not isinstance(conditions, dict) or not all(
                isinstance(k, str) and isinstance(v, bool)
                for k, v in conditions.items()):
            raise TraceCorrupt(f"{where}.conditions: expected str-to-bool map")
        stats_doc = rec["search_stats"]
        if not isinstance(stats_doc, dict) or not all(
                isinstance(k, str) for k in stats_doc):
            raise TraceCorrupt(f"{where}.search_stats: expected str-keyed map")
        stats = {k: _parse_int(v, f"{where}.search_stats.{k}")
                 for k, v in stats_doc.items()}
        z_next = _parse_vec3(rec["z_next"], f"{where}.z_next")
        try:
            lat = PlanarLattice.from_normal(_parse_vec3(rec["normal"],
                                                        f"{where}.normal"))
        except SimdiophError as exc:
            raise TraceCorrupt(f"{where}.normal: {exc}") from exc
        cert = StepCertificate(
            nu=nu,
            H_used=_parse_frac(rec["H"], f"{where}.H"),
            C_size=_parse_int(rec["C_size"], f"{where}.C_size"),
            E_size=_parse_int(rec["E_size"], f"{where}.E_size"),
            delta_T=(_parse_frac(rec["delta"], f"{where}.delta"),
                     _parse_frac(rec["T"], f"{where}.T")),
            conditions=dict(conditions),
            search_stats=stats,
        )
        state = ConstructionState(
            phi=state.phi,
            step=nu + 1,
            z=state.z + (z_next,),
            lattices=state.lattices + (lat,),
            delta=state.delta[:nu - 1] + (cert.delta_T[0],),
            T=state.T[:nu - 1] + (cert.delta_T[1],),
            rho_sq=state.rho_sq + (_parse_frac(rec["rho_sq"], f"{where}.rho_sq"),),
            H=state.H + (cert.H_used,),
            certificates=state.certificates + (cert,),
        )
    return state, list(doc["reports"])


def dumps_trace(state: ConstructionState, reports: Optional[list] = None) -> str:
    return json.dumps(state_to_doc(state, reports), indent=2, sort_keys=True) + "\n"


def save_trace(state: ConstructionState, path: str,
               reports: Optional[list] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_trace(state, reports))


def loads_trace(text: str) -> tuple[ConstructionState, list]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TraceCorrupt(f"trace: invalid JSON ({exc})") from exc
    return doc_to_state(doc)


def load_trace(path: str) -> tuple[ConstructionState, list]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise TraceCorrupt(f"trace: cannot read {path} ({exc})") from exc
    return loads_trace(text)
