"""Matplotlib renderings of the reports, written next to the delimited output.

All figures use the Agg backend and scrubbed metadata so repeated runs with
the same inputs produce identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_SAVE_KW = dict(dpi=120, metadata={"Software": None})


def save_multiplier_figure(phi, path, flats=None, bands=None):
    """Multiplier profile with detected flats shaded and band edges marked."""
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    space = phi.space
    if space.geometry == "grid":
        nx, ny = space.grid_shape
        img = phi.values.reshape(ny, nx)
        im = ax.imshow(img, origin="lower", extent=(0, 1, 0, 1), aspect="auto")
        fig.colorbar(im, ax=ax, label="multiplier value")
    else:
        t = space.centers if space.centers is not None else np.arange(space.size)
        ax.plot(t, phi.values, lw=1.0, color="C0")
        if flats is not None:
            for flat in flats.flats:
                idx = flat.set.indices
                ax.axvspan(t[idx[0]], t[idx[-1]], color="C1", alpha=0.3)
                ax.axhline(flat.value, color="C1", lw=0.6, ls=":")
        if bands:
            for band in bands:
                ax.axhline(band.alpha, color="C2", lw=0.6, ls="--")
        ax.set_xlabel("atom center")
        ax.set_ylabel("multiplier value")
    ax.set_title("multiplier profile")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_witness_figure(trace, path):
    """Per-step norms of the recursion on a log scale, against the ideal decay."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    steps = trace.steps[1:]
    if steps:
        ks = [s.k for s in steps]
        ax.semilogy(ks, [s.kept_source_norm for s in steps], "o-", label="kept source")
        ax.semilogy(ks, [s.dropped_source_norm for s in steps], "s-", label="dropped source")
        ax.semilogy(ks, [s.kept_image_norm for s in steps], "^-", label="kept image")
        x_norm = trace.source0.norm()
        ax.semilogy(ks, [trace.half_ratio ** k * x_norm for k in ks],
                    "k--", lw=0.8, label="ideal half-split decay")
        ax.legend(fontsize=8)
        ax.set_xlabel("step")
        ax.set_ylabel("norm")
    title = "witness recursion"
    if trace.halted:
        title += f" (halted: {trace.halted})"
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_decay_figure(report, path):
    """Image norms of the disjoint family with the head/tail quarter levels."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    n = np.arange(1, len(report.norms) + 1)
    ax.semilogy(n, report.norms, "o-", ms=3, label="image norm")
    ax.axhline(report.head_max, color="C2", lw=0.8, ls="--", label="head-quarter max")
    ax.axhline(report.decay_factor * report.head_max, color="C3", lw=0.8, ls="--",
               label="decay threshold")
    ax.axhline(report.tail_max, color="C1", lw=0.8, ls=":", label="tail-quarter max")
    ax.legend(fontsize=8)
    ax.set_xlabel("term")
    ax.set_ylabel("norm")
    ax.set_title(f"disjoint-sequence decay (verdict: {'pass' if report.verdict else 'fail'})")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_invariance_figure(alphas, violations, band_violation, path):
    """Level-band violations (should vanish) next to the off-level band violation."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    shown = [max(v, 1e-18) for v in violations]
    ax.semilogy(alphas, shown, "o", ms=4, label="level bands")
    ax.axhline(max(band_violation, 1e-18), color="C3", lw=1.0,
               label="off-level band")
    ax.set_xlabel("level")
    ax.set_ylabel("invariance violation")
    ax.legend(fontsize=8)
    ax.set_title("commutant invariance check")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
