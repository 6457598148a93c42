"""Command line front end.

Five commands: ``bestapprox`` and ``witness`` scan a target, ``construct``
runs or resumes the inductive builder against a trace file, ``certify``
re-checks a finished trace, and ``trace`` exports, imports, or inspects
one.  Every command that writes delimited output also renders a figure
next to it unless ``--no-plot`` is given.

Exit codes: 0 success, 1 usage, 2 rounding still ambiguous at the
precision ceiling, 3 search budget exhausted, 4 corrupt trace, 5
certification found violations.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Optional

from .bestapprox import TargetVector, best_sequence
from .certify import full_certification, invariant_suite, lemma5_scan
from .construction import step as construction_step
from .construction import init, xi_boxes, xi_enclosure
from .errors import (
    AmbiguousRounding,
    CertificateFailure,
    SearchExhausted,
    SimdiophError,
    TooFewSteps,
    TraceCorrupt,
)
from .exact import DecreasingFn, RatInterval
from .plots import log10_big
from .trace_io import _frac_pair, _int_str, load_trace, phi_to_doc, save_trace
from .witness import witness_sequence

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_AMBIGUOUS = 2
EXIT_SEARCH = 3
EXIT_CORRUPT = 4
EXIT_VIOLATIONS = 5

_MIN_BITS = 64


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise _UsageError(message)


def _parse_rational(text: str, what: str) -> Fraction:
    """Accept p/q, an integer literal, or a decimal literal."""
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return Fraction(int(num), int(den))
        if text.lstrip("+-").isdigit():
            return Fraction(int(text))
        return Fraction(Decimal(text))
    except (ValueError, ZeroDivisionError, InvalidOperation):
        raise _UsageError(f"cannot parse {what} value {text!r}") from None


def _is_decimal_literal(text: str) -> bool:
    return "/" not in text and not text.strip().lstrip("+-").isdigit()


def _interval(value: Fraction, is_dec: bool, bits: int) -> RatInterval:
    if not is_dec:
        return RatInterval(value, value)
    r = Fraction(1, 2**bits)
    return RatInterval(value - r, value + r)


def _build_target(args, bits: int) -> TargetVector:
    v1 = _parse_rational(args.xi1, "--xi1")
    d1 = _is_decimal_literal(args.xi1)
    i1 = _interval(v1, d1, bits)
    i2 = None
    any_dec = d1
    if args.xi2 is not None:
        v2 = _parse_rational(args.xi2, "--xi2")
        d2 = _is_decimal_literal(args.xi2)
        any_dec = any_dec or d2
        i2 = _interval(v2, d2, bits)
    provenance = "decimal-literal" if any_dec else "exact-rational"
    return TargetVector.from_intervals(i1, i2, provenance)


def _resolve_target(args) -> tuple[Optional[TargetVector], bool]:
    """Target plus whether precision escalation applies to it."""
    if getattr(args, "from_trace", None):
        state, _ = load_trace(args.from_trace)
        return xi_enclosure(state), False
    if args.xi1 is None:
        raise _UsageError("a target is required: --xi1 [--xi2] or --from-trace")
    any_dec = _is_decimal_literal(args.xi1) or (
        args.xi2 is not None and _is_decimal_literal(args.xi2))
    if any_dec and args.bits < _MIN_BITS:
        raise _UsageError(f"decimal-literal targets need --bits >= {_MIN_BITS}")
    return None, any_dec


def _run_with_escalation(args, body) -> int:
    """Run body(xi); on ambiguous rounding retry with doubled precision."""
    target, escalatable = _resolve_target(args)
    bits = args.bits
    while True:
        xi = target if target is not None else _build_target(args, bits)
        try:
            return body(xi)
        except AmbiguousRounding as exc:
            if not escalatable or bits >= args.max_bits:
                q = f" at q = {exc.q}" if exc.q else ""
                print(f"rounding still ambiguous{q} after escalating to "
                      f"{bits} bits: {exc}", file=sys.stderr)
                return EXIT_AMBIGUOUS
            bits = min(2 * bits, args.max_bits)
            print(f"ambiguous rounding, retrying at {bits} bits", file=sys.stderr)


def _out(args, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


def _res_pair(res: RatInterval) -> list:
    return [_frac_pair(res.lo), _frac_pair(res.hi)]


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _log10_or_none(x) -> Optional[float]:
    return None if x <= 0 else round(log10_big(x), 6)


# ---------------------------------------------------------------- bestapprox

def cmd_bestapprox(args) -> int:
    def body(xi: TargetVector) -> int:
        seq = best_sequence(xi, args.Q)
        doc = {
            "version": 1,
            "kind": "bestapprox-report",
            "horizon": _int_str(args.Q),
            "n": xi.n,
            "entries": [
                {"q": _int_str(vec.x0),
                 "a": [_int_str(vec.x1)] + ([_int_str(vec.x2)] if xi.n == 2 else []),
                 "res": _res_pair(res)}
                for vec, res in seq.entries
            ],
        }
        _write_json(_out(args, "bestapprox.json"), doc)
        with open(_out(args, "bestapprox.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["q", "a1", "a2", "res_lo", "res_hi", "res_hi_log10"])
            for vec, res in seq.entries:
                w.writerow([vec.x0, vec.x1, vec.x2 if xi.n == 2 else "",
                            res.lo, res.hi, _log10_or_none(res.hi)])
        if not args.no_plot:
            plotted = _plot_guarded(
                lambda: _psi_plot(seq, args))
            if plotted:
                print(f"figure: {plotted}")
        print(f"{len(seq.entries)} jumps up to Q = {args.Q}")
        for vec, res in seq.entries:
            print(f"  q = {vec.x0}: residual <= {float(res.hi):.6g}"
                  if res.hi < 1e300 else f"  q = {vec.x0}")
        return EXIT_OK

    return _run_with_escalation(args, body)


def _psi_plot(seq, args) -> str:
    from .plots import plot_psi_staircase

    return plot_psi_staircase(seq.entries, args.Q, _out(args, "bestapprox.png"))


def _plot_guarded(render) -> Optional[str]:
    try:
        return render()
    except ImportError:
        print("matplotlib unavailable, skipping figure", file=sys.stderr)
        return None


# ------------------------------------------------------------------ witness

def cmd_witness(args) -> int:
    def body(xi: TargetVector) -> int:
        if xi.n != 2:
            raise _UsageError("witness matrices need --xi2 (a two-coordinate target)")
        records = witness_sequence(xi, args.Q)
        doc = {
            "version": 1,
            "kind": "witness-report",
            "horizon": _int_str(args.Q),
            "records": [
                {"pair_index": rec.pair_index,
                 "columns": [[_int_str(c) for c in col.as_tuple()]
                             for col in rec.matrix.columns],
                 "R": _res_pair(rec.R),
                 "certified_bound": _frac_pair(rec.certified_bound)}
                for rec in records
            ],
        }
        _write_json(_out(args, "witness.json"), doc)
        with open(_out(args, "witness.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["pair_index", "R_hi", "R_hi_log10", "certified_bound"])
            for rec in records:
                w.writerow([rec.pair_index, rec.R.hi,
                            _log10_or_none(rec.R.hi), rec.certified_bound])
        if not args.no_plot and records:
            plotted = _plot_guarded(lambda: _witness_plot(records, args))
            if plotted:
                print(f"figure: {plotted}")
        print(f"{len(records)} witness matrices up to Q = {args.Q}")
        if records:
            print(f"  last R upper bound ~ 1e{log10_big(records[-1].R.hi):.1f}")
        return EXIT_OK

    return _run_with_escalation(args, body)


def _witness_plot(records, args) -> str:
    from .plots import plot_witness_decay

    return plot_witness_decay(records, _out(args, "witness.png"))


# ---------------------------------------------------------------- construct

def _phi_from_args(args) -> Optional[DecreasingFn]:
    if args.phi is None and args.phi_scale is None and args.phi_k is None \
            and args.phi_table is None:
        return None
    kind = args.phi or "power"
    k = 1 if args.phi_k is None else args.phi_k
    if kind == "power":
        scale = _parse_rational(args.phi_scale or "1", "--phi-scale")
        return DecreasingFn.power(scale, k)
    if args.phi_table is None:
        raise _UsageError("--phi table needs --phi-table t:v,t:v,...")
    rows = []
    for part in args.phi_table.split(","):
        if ":" not in part:
            raise _UsageError(f"bad --phi-table row {part!r}")
        t, v = part.split(":", 1)
        rows.append((_parse_rational(t, "--phi-table"),
                     _parse_rational(v, "--phi-table")))
    return DecreasingFn.table(rows, tail_k=k)


def _step_line(state) -> str:
    cert = state.certificates[-1]
    nu = cert.nu
    z_next = state.z_at(nu + 1)
    norm_log = log10_big(z_next.norm_sq()) / 2
    rho_log2 = log10_big(state.rho_sq_at(nu)) / (2 * 0.30102999566398)
    return (f"step nu={nu}: |z_{nu + 1}| ~ 1e{norm_log:.1f}, "
            f"rho ~ 2^{rho_log2:.0f}, C={cert.C_size} E={cert.E_size}, "
            f"layer k={cert.search_stats.get('k_accepted', 0)} "
            f"(tested {cert.search_stats.get('k_tested', 0)}), "
            f"conditions {'all pass' if cert.all_true() else 'FAIL'}")


def cmd_construct(args) -> int:
    requested_phi = _phi_from_args(args)
    trace_path = args.trace
    reports: list = []
    if os.path.exists(trace_path):
        state, reports = load_trace(trace_path)
        if requested_phi is not None and requested_phi != state.phi:
            raise _UsageError(
                f"trace {trace_path} was built with a different gauge; "
                "drop the --phi flags to resume it")
        done = state.step - 2
        print(f"resuming {trace_path} at {done} completed steps")
    else:
        state = init(requested_phi or DecreasingFn.power(1))
        done = 0
    if args.steps <= done:
        print(f"trace already has {done} steps (asked for {args.steps}); nothing to do")
        save_trace(state, trace_path, reports)
        return EXIT_OK
    for _ in range(args.steps - done):
        try:
            state = construction_step(state)
        except SearchExhausted as exc:
            print(f"search budget exhausted after {exc.tested} candidates: {exc}",
                  file=sys.stderr)
            save_trace(state, trace_path, reports)
            return EXIT_SEARCH
        print(_step_line(state))
        save_trace(state, trace_path, reports)
    boxes = xi_boxes(state)
    if boxes:
        nu, b1, b2 = boxes[-1]
        print(f"enclosure at nu={nu}: xi1 width ~ 1e{log10_big(b1.width):.0f}, "
              f"xi2 width ~ 1e{log10_big(b2.width):.0f}")
    print(f"trace written to {trace_path}")
    return EXIT_OK


# ------------------------------------------------------------------ certify

def _violation_lines(violations) -> list[str]:
    lines = []
    for v in violations:
        kind = v[0]
        if kind == "bestapprox-triple-unimodular":
            _, vecs, d = v
            cols = " ".join(str(x.as_tuple()) for x in vecs)
            lines.append(f"{kind}: det={d:+d} {cols}")
        elif kind == "lemma5-window":
            _, nu, qs = v
            lines.append(f"{kind}: nu={nu} failing q {qs}")
        else:
            lines.append(f"{kind}: {v[1:]}")
    return lines


def cmd_certify(args) -> int:
    state, reports = load_trace(args.trace)
    try:
        xi = xi_enclosure(state)
    except TooFewSteps as exc:
        raise _UsageError(str(exc)) from exc
    inv = invariant_suite(state)
    rep = full_certification(xi, state, args.Q, jobs=args.jobs)

    window_rows = {}
    for nu, _, _ in rep.lemma5_windows:
        window_rows[nu] = lemma5_scan(xi, state, nu, args.Q)

    scan_path = _out(args, "certify_scan.csv")
    with open(scan_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["nu", "q", "dependent", "res_lo", "phi_q", "ok"])
        for nu in sorted(window_rows):
            for row in window_rows[nu]:
                w.writerow([nu, row.q, int(row.dependent), row.res.lo,
                            row.phi_q, int(row.ok)])

    failed_steps = [nu for nu, checks in inv.steps
                    if not all(checks.values())]
    lines = [
        "certification report",
        f"trace: {args.trace} ({state.step - 2} completed steps)",
        f"horizon Q = {args.Q}",
        "",
        f"invariant suite: {'PASS' if inv.passed else 'FAIL'} "
        f"({len(inv.steps)} steps"
        + (f"; failing: {failed_steps}" if failed_steps else "")
        + f"; global: {', '.join(k for k, v in inv.global_checks.items() if v)})",
    ]
    for nu, count, ok in rep.lemma5_windows:
        dep = sum(1 for r in window_rows[nu] if r.dependent)
        lines.append(f"window nu={nu}: {count} q scanned, {dep} dependent, "
                     f"{'PASS' if ok else 'FAIL'}")
    lines.append(f"epsilon = {rep.epsilon} over {len(rep.good_points)} good "
                 f"columns ({rep.triples_checked} triples checked)")
    if rep.violations:
        lines.append(f"violations ({len(rep.violations)}):")
        lines.extend("  " + s for s in _violation_lines(rep.violations))
    overall = inv.passed and rep.passed
    lines.append(f"overall: {'PASS' if overall else 'FAIL'}")
    report_txt = "\n".join(lines) + "\n"
    with open(_out(args, "certify_report.txt"), "w", encoding="utf-8") as fh:
        fh.write(report_txt)
    print(report_txt, end="")

    doc = {
        "version": 1,
        "kind": "certification-report",
        "horizon": _int_str(rep.horizon),
        "epsilon": _frac_pair(rep.epsilon),
        "good_points": [
            {"column": [_int_str(c) for c in vec.as_tuple()],
             "res": _res_pair(res)} for vec, res in rep.good_points],
        "triples_checked": _int_str(rep.triples_checked),
        "lemma5_windows": [
            {"nu": _int_str(nu), "scanned": _int_str(count), "pass": ok}
            for nu, count, ok in rep.lemma5_windows],
        "violations": _violation_lines(rep.violations),
        "invariants": {
            "passed": inv.passed,
            "steps": [{"nu": _int_str(nu), "checks": checks}
                      for nu, checks in inv.steps],
            "global": inv.global_checks,
        },
        "overall": overall,
    }
    _write_json(_out(args, "certify_report.json"), doc)

    if not args.no_plot:
        plotted = _plot_guarded(lambda: _certify_plot(window_rows, rep, state, args))
        if plotted:
            print(f"figure: {plotted}")
    return EXIT_OK if overall else EXIT_VIOLATIONS


def _certify_plot(window_rows, rep, state, args) -> str:
    from .plots import plot_certify_scatter

    return plot_certify_scatter(window_rows, rep.good_points, state.phi,
                                rep.horizon, _out(args, "certify.png"))


# -------------------------------------------------------------------- trace

def cmd_trace(args) -> int:
    if args.action == "import":
        if not args.out:
            raise _UsageError("trace import needs --out for the rewritten copy")
        state, reports = load_trace(args.path)
        save_trace(state, args.out, reports)
        print(f"validated {state.step - 2} steps; canonical copy at {args.out}")
        return EXIT_OK

    state, reports = load_trace(args.path)
    if args.action == "inspect":
        print(f"trace: {args.path}")
        print(f"gauge: {json.dumps(phi_to_doc(state.phi), sort_keys=True)}")
        print(f"completed steps: {state.step - 2}, stored reports: {len(reports)}")
        for cert in state.certificates:
            nu = cert.nu
            q = state.z_at(nu + 1).x0
            print(f"  nu={nu}: q_{nu + 1} has {len(str(abs(q)))} digits, "
                  f"C={cert.C_size} E={cert.E_size}, "
                  f"conditions {'all pass' if cert.all_true() else 'FAIL'}")
        return EXIT_OK

    # export
    csv_path = _out(args, "trace_steps.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["nu", "q_next_digits", "z_next_norm_log10", "rho_sq",
                    "rho_log10", "delta", "T", "C_size", "E_size",
                    "k_accepted", "k_tested"])
        for cert in state.certificates:
            nu = cert.nu
            z_next = state.z_at(nu + 1)
            rho_sq = state.rho_sq_at(nu)
            w.writerow([
                nu, len(str(abs(z_next.x0))),
                round(log10_big(z_next.norm_sq()) / 2, 3), rho_sq,
                round(log10_big(rho_sq) / 2, 3), state.delta_at(nu),
                state.T_at(nu), cert.C_size, cert.E_size,
                cert.search_stats.get("k_accepted", 0),
                cert.search_stats.get("k_tested", 0),
            ])
    print(f"steps table: {csv_path}")
    if not args.no_plot:
        plotted = _plot_guarded(lambda: _growth_plot(state, args))
        if plotted:
            print(f"figure: {plotted}")
    return EXIT_OK


def _growth_plot(state, args) -> str:
    from .plots import plot_construction_growth

    return plot_construction_growth(state, _out(args, "trace_growth.png"))


# --------------------------------------------------------------------- main

def _add_target_args(p, with_trace: bool = True) -> None:
    p.add_argument("--xi1", help="first coordinate: p/q, integer, or decimal literal")
    p.add_argument("--xi2", help="second coordinate (omit for the n=1 view)")
    if with_trace:
        p.add_argument("--from-trace", dest="from_trace",
                       help="use the enclosure of a finished construction trace")
    p.add_argument("--bits", type=int, default=256,
                   help="enclosure radius 2^-bits for decimal literals (>= 64)")
    p.add_argument("--max-bits", type=int, default=1 << 16,
                   help="precision ceiling for ambiguity escalation")


def _add_common(p) -> None:
    p.add_argument("--out-dir", default=".", help="directory for output files")
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")


def build_parser() -> _Parser:
    parser = _Parser(prog="simdioph",
                     description="certified simultaneous approximation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bestapprox", help="best-approximation jumps of a target")
    _add_target_args(p)
    p.add_argument("--Q", type=int, default=1000, help="denominator horizon")
    _add_common(p)
    p.set_defaults(func=cmd_bestapprox)

    p = sub.add_parser("witness", help="unimodular witness matrices along a target")
    _add_target_args(p)
    p.add_argument("--Q", type=int, default=1000, help="denominator horizon")
    _add_common(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("construct", help="run or resume the inductive builder")
    p.add_argument("--trace", required=True, help="trace file to create or resume")
    p.add_argument("--steps", type=int, required=True,
                   help="total completed steps to reach")
    p.add_argument("--phi", choices=["power", "table"], default=None,
                   help="gauge kind (default: power)")
    p.add_argument("--phi-scale", default=None, help="power gauge scale (rational)")
    p.add_argument("--phi-k", type=int, default=None, help="gauge exponent")
    p.add_argument("--phi-table", default=None,
                   help="table gauge knots as t:v,t:v,... (rationals)")
    _add_common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("certify", help="re-check a finished trace")
    p.add_argument("--trace", required=True, help="trace file to certify")
    p.add_argument("--Q", type=int, default=10000, help="denominator horizon")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for the denominator scan")
    _add_common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("trace", help="export, import, or inspect a trace")
    p.add_argument("action", choices=["export", "import", "inspect"])
    p.add_argument("path", help="trace file to read")
    p.add_argument("--out", default=None, help="target file for import")
    _add_common(p)
    p.set_defaults(func=cmd_trace)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "Q", 1) < 1:
            raise _UsageError("--Q must be at least 1")
        if getattr(args, "steps", 1) < 1:
            raise _UsageError("--steps must be at least 1")
        if getattr(args, "jobs", 1) < 1:
            raise _UsageError("--jobs must be at least 1")
        if getattr(args, "bits", _MIN_BITS) < 1:
            raise _UsageError("--bits must be positive")
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TraceCorrupt as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except CertificateFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATIONS
    except SimdiophError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
