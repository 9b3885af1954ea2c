"""Delimited output and figure rendering for the batch front-end.

Every delimited file starts with a '#' header line carrying the artifact
version and the full parameter set, then a column-name line.  Numbers are
written with 17 significant digits so a read-back round-trips exactly.
"""

from __future__ import annotations

import os

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import __version__  # noqa: E402


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def header_line(items) -> str:
    body = " ".join(f"{k}={_fmt(v)}" for k, v in items)
    return f"# fracdamp {__version__} | {body}"


def write_csv(path, header_items, columns, rows) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header_line(header_items) + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def save_spectrum_figures(records, out_dir) -> list:
    """Eigenvalue map and prediction-gap plot; returns the written paths."""
    paths = []
    ks = [r.k for r in records]
    re = [r.lam.real for r in records]
    im = [r.lam.imag for r in records]
    gaps = [r.rel_gap for r in records]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    sc = ax.scatter(re, im, c=ks, s=14, cmap="viridis")
    fig.colorbar(sc, ax=ax, label="mode index k")
    ax.set_xlabel(r"Re $\lambda$")
    ax.set_ylabel(r"Im $\lambda$")
    ax.set_title("computed eigenvalues")
    ax.grid(True, alpha=0.3)
    path = os.path.join(out_dir, "spectrum.png")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(ks, gaps, "o-", ms=3)
    ax.set_xlabel("mode index k")
    ax.set_ylabel("relative gap to the closed-form law")
    ax.grid(True, which="both", alpha=0.3)
    path = os.path.join(out_dir, "asym_gap.png")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)
    return paths


def save_trace_figure(trace, fit, out_dir) -> list:
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0))
    axes[0].semilogy(trace.t, trace.energy, lw=1.2)
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("E(t)")
    axes[0].grid(True, alpha=0.3)
    mask = trace.t > 0
    axes[1].loglog(trace.t[mask], trace.energy[mask], lw=1.2)
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("E(t)")
    axes[1].grid(True, which="both", alpha=0.3)
    if fit is not None:
        lo, hi = fit.window
        tt = np.linspace(max(lo, trace.t[trace.t > 0].min()), hi, 50)
        e0_idx = np.searchsorted(trace.t, lo)
        e0 = trace.energy[min(e0_idx, len(trace.t) - 1)]
        if fit.model == "polynomial":
            ref = e0 * (tt / tt[0]) ** fit.rate
            axes[1].loglog(tt, ref, "k--", lw=1.0,
                           label=f"slope {fit.rate:.3f}")
            axes[1].legend()
        else:
            ref = e0 * np.exp(fit.rate * (tt - tt[0]))
            axes[0].semilogy(tt, ref, "k--", lw=1.0,
                             label=f"rate {fit.rate:.3f}")
            axes[0].legend()
    path = os.path.join(out_dir, "trace.png")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]


def save_scan_figure(samples, slope, out_dir) -> list:
    betas = np.array([s.beta for s in samples])
    norms = np.array([s.norm for s in samples])
    ispk = np.array([s.is_peak for s in samples])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(betas, norms, ".-", lw=0.8, ms=3, alpha=0.6, label="scan")
    ax.loglog(betas[ispk], norms[ispk], "ro", ms=4, label="peaks")
    if ispk.any():
        bp, np_ = betas[ispk], norms[ispk]
        ref = np_[0] * (bp / bp[0]) ** slope
        ax.loglog(bp, ref, "k--", lw=1.0, label=f"envelope slope {slope:.3f}")
    ax.set_xlabel(r"$\beta$")
    ax.set_ylabel("resolvent norm")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    path = os.path.join(out_dir, "scan.png")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return [path]
