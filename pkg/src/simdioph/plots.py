"""Figure rendering for the CLI report paths.

Each renderer takes already-computed report data and a target path and
writes one PNG next to the delimited output.  matplotlib is imported
lazily with the Agg backend so headless runs work and the library stays
optional for users who only want the numbers.

Magnitudes from deep traces exceed float range, so log scales are
computed from numerator and denominator bit lengths, never by converting
the rationals themselves.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Sequence

from .errors import NegativeArgument
from .exact import RatInterval, Rational


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def log10_big(x) -> float:
    """log10 of a positive int or Fraction of any size."""
    f = Fraction(x)
    if f <= 0:
        raise NegativeArgument("log10 needs a positive value")
    return math.log10(f.numerator) - math.log10(f.denominator)


def plot_psi_staircase(entries: Sequence[tuple], horizon: int,
                       path: str) -> str:
    """Best-approximation staircase: residual drops at each jump q."""
    plt = _pyplot()
    qs = [vec.x0 for vec, _ in entries]
    highs = [log10_big(res.hi) if res.hi > 0 else None for _, res in entries]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    step_q: list[float] = []
    step_r: list[float] = []
    dot_q: list[float] = []
    dot_r: list[float] = []
    for i, (q, r) in enumerate(zip(qs, highs)):
        if r is None:  # an exact hit has no finite log residual
            continue
        dot_q.append(q)
        dot_r.append(r)
        step_q.append(q)
        step_r.append(r)
        nxt = qs[i + 1] if i + 1 < len(qs) else horizon
        step_q.append(nxt)
        step_r.append(r)
    ax.plot(step_q, step_r, drawstyle="steps-post", color="tab:blue")
    ax.plot(dot_q, dot_r, "o", color="tab:blue", markersize=4)
    ax.set_xscale("log")
    ax.set_xlabel("q")
    ax.set_ylabel("log10 residual")
    ax.set_title(f"approximation staircase up to Q = {horizon}")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def plot_witness_decay(records: Sequence, path: str) -> str:
    """Quality R of the witness matrices against the pair index."""
    plt = _pyplot()
    idx = [rec.pair_index for rec in records]
    r_hi = [log10_big(rec.R.hi) for rec in records]
    bounds = [log10_big(rec.certified_bound) for rec in records]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(idx, r_hi, "o-", label="R upper bound", color="tab:blue")
    ax.plot(idx, bounds, "s--", label="certified bound", color="tab:orange",
            alpha=0.7)
    ax.set_xlabel("pair index")
    ax.set_ylabel("log10 R")
    ax.set_title("witness matrix quality")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def plot_construction_growth(state, path: str) -> str:
    """Norm growth and rho decay per step, with enclosure widths."""
    from .construction import xi_boxes

    plt = _pyplot()
    nus = list(range(2, state.step + 1))
    z_log = [log10_big(state.z_at(nu).norm_sq()) / 2 for nu in nus]
    rho_nus = list(range(1, state.step))
    rho_log = [log10_big(state.rho_sq_at(nu)) / 2 for nu in rho_nus]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))
    ax1.plot(nus, z_log, "o-", color="tab:blue", label="log10 |z|")
    ax1.plot(rho_nus, rho_log, "s-", color="tab:red", label="log10 rho")
    ax1.set_xlabel("step")
    ax1.set_title("norm growth and gauge-radius decay")
    ax1.legend()
    ax1.grid(True, alpha=0.3)

    boxes = xi_boxes(state)
    if boxes:
        bn = [nu for nu, _, _ in boxes]
        w1 = [log10_big(b1.width) for _, b1, _ in boxes]
        w2 = [log10_big(b2.width) for _, _, b2 in boxes]
        ax2.plot(bn, w1, "o-", label="width xi1", color="tab:green")
        ax2.plot(bn, w2, "s-", label="width xi2", color="tab:purple")
        ax2.legend()
    ax2.set_xlabel("step")
    ax2.set_ylabel("log10 width")
    ax2.set_title("enclosure shrink")
    ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def plot_certify_scatter(window_rows: dict[int, Sequence],
                         good_points: Sequence[tuple],
                         phi, horizon: int, path: str) -> str:
    """Residual-to-gauge ratio for scanned q, split by window and status."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7.5, 4.8))
    for nu, rows in sorted(window_rows.items()):
        dep_q = [r.q for r in rows if r.dependent]
        ind = [r for r in rows if not r.dependent]
        ind_q = [r.q for r in ind]
        ratio = [log10_big(r.res.lo / r.phi_q) if r.res.lo > 0 else 0.0
                 for r in ind]
        ax.plot(ind_q, ratio, ".", markersize=3,
                label=f"window {nu} independent")
        if dep_q:
            ax.plot(dep_q, [0.0] * len(dep_q), "x", markersize=4, alpha=0.5,
                    label=f"window {nu} dependent")
    if good_points:
        gq = [vec.x0 for vec, _ in good_points]
        gr = [log10_big(res.hi / phi(vec.x0)) if res.hi > 0 else -8.0
              for vec, res in good_points]
        ax.plot(gq, gr, "d", color="tab:red", markersize=6,
                label="good columns")
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xscale("log")
    ax.set_xlabel("q")
    ax.set_ylabel("log10 (residual / gauge)")
    ax.set_title(f"certification scan up to Q = {horizon}")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
