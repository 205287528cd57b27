"""Figure rendering for the CLI: one PNG next to each output CSV.

matplotlib is imported lazily with the Agg backend so headless runs work and
library users who never plot pay no import cost.  Figures are a convenience
view of the CSV contents; the CSVs remain the canonical artifacts (PNG bytes
are not covered by the byte-determinism guarantee).
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

__all__ = [
    "save_sweep_plot",
    "save_bound_plot",
    "save_landscape_plot",
    "save_highfreq_plot",
    "save_points_plot",
]

_FIGSIZE = (7.0, 5.0)
_DPI = 110


def _plt():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def save_sweep_plot(rows: Sequence, path: str) -> None:
    """Scatter of -log eps against log |H|, one marker style per a."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    by_a: dict[int, list[tuple[float, float]]] = {}
    for r in rows:
        if r.neg_log_eps is None:
            continue
        by_a.setdefault(r.a, []).append((r.log_H, r.neg_log_eps))
    for a in sorted(by_a):
        pts = by_a[a]
        ax.scatter([p[0] for p in pts], [p[1] for p in pts], s=18, label=f"a = {a}")
    ax.set_xlabel("log |H|")
    ax.set_ylabel("-log eps")
    ax.set_title("deficit decay against class size")
    if by_a:
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_bound_plot(records: Sequence[Mapping], path: str) -> None:
    """Variance against bound on log-log axes with the y = x guide."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    xs = [max(float(r["variance"]), 1e-300) for r in records]
    ys = [max(float(r["bound"]), 1e-300) for r in records]
    ax.loglog(xs, ys, "o", ms=4, alpha=0.7)
    lo = min(xs + ys)
    hi = max(xs + ys)
    ax.loglog([lo, hi], [lo, hi], "k--", lw=1, label="variance = bound")
    ax.set_xlabel("exact gradient variance")
    ax.set_ylabel("certified bound")
    ax.set_title("soundness scatter")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_landscape_plot(omegas, values, path: str, w_freq: float) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    ax.plot(omegas, values, lw=0.8)
    ax.set_xlabel("omega")
    ax.set_ylabel("C_h(omega)")
    ax.set_title(f"smoothed landscape, carrier frequency w = {w_freq:g}")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_highfreq_plot(Rs: Sequence[float], bounds: Sequence[float], path: str) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    ax.loglog(Rs, bounds, "o-", ms=4)
    ax.set_xlabel("R")
    ax.set_ylabel("deficit bound")
    ax.set_title("bracket-based deficit bound against spread R")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_points_plot(points, d_star: float, path: str) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.5, 5.5), dpi=_DPI)
    ax.scatter([p[0] for p in points], [p[1] for p in points], s=6, alpha=0.6)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
    ax.set_title(f"N = {len(points)}, D* = {d_star:.5f}")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
