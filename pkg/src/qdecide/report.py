"""Figures for search, gadget and sweep runs (written to files, never shown)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .core.scalars import endpoints  # noqa: E402


def _mid(x) -> float:
    lo, hi = endpoints(x)
    return float((lo + hi) / 2)


def _save(fig, path):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_identity_checks(checks, path):
    """Certified width of LHS - RHS for every verified word."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    widths = [max(float(c.width), 1e-300) for c in checks]
    lengths = [len(c.word) for c in checks]
    ax.scatter(range(len(checks)), widths, c=lengths, cmap="viridis", s=12)
    ax.axhline(1e-20, color="C3", lw=1, ls="--", label="tolerance")
    ax.set_yscale("log")
    ax.set_xlabel("word index (length-lex)")
    ax.set_ylabel("width of LHS - RHS")
    ax.legend(loc="upper left", frameon=False)
    return _save(fig, path)


def plot_overlaps(listing, lam, path):
    """Overlap ``tr(phi T_w(rho)) - lambda`` per word, grouped by length."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    lam = float(lam)
    xs, ys, cs = [], [], []
    for i, (word, val) in enumerate(listing):
        xs.append(i)
        ys.append(_mid(val) - lam if hasattr(val, "_mpi_") else float(val) - lam)
        cs.append(len(word))
    ax.scatter(xs, ys, c=cs, cmap="viridis", s=12)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_yscale("symlog", linthresh=1e-30)
    ax.set_xlabel("word index (length-lex)")
    ax.set_ylabel("overlap - lambda")
    return _save(fig, path)


def plot_sweep(rows, path):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ns = [r.n for r in rows]
    res = [max(r.residual, 1e-300) if r.residual is not None else float("nan") for r in rows]
    ax.semilogy(ns, res, "o-")
    for r, y in zip(rows, res):
        ax.annotate(r.status, (r.n, y), textcoords="offset points", xytext=(4, 4), fontsize=8)
    ax.set_xlabel("n")
    ax.set_ylabel("best residual")
    ax.set_xticks(ns)
    return _save(fig, path)


def plot_search_stats(outcome, path):
    fig, ax = plt.subplots(figsize=(4.5, 3))
    keys = [k for k, v in outcome.stats.items() if isinstance(v, (int, float)) and not isinstance(v, bool)]
    ax.bar(keys, [outcome.stats[k] for k in keys], color="C0")
    ax.set_title(f"{outcome.verdict} (depth {outcome.depth})", fontsize=9)
    ax.tick_params(axis="x", rotation=30, labelsize=8)
    return _save(fig, path)
