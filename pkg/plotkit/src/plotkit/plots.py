"""The three figure kinds: energy channels, log-scale growth, phase diagram."""
from __future__ import annotations

import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schema import load_thresholds, validate_sweep, validate_trajectory

TERMINATION_COLORS = {"blowup": "tab:red", "t_end": "tab:blue",
                      "newton_diverged": "tab:orange", "failed": "gray"}


def plot_energy(csv_path, out_path) -> None:
    """E, H and L over time; single-sample files plot as markers."""
    rows = validate_trajectory(csv_path)
    t = np.array([r["t"] for r in rows])
    style = {"marker": "o"} if len(rows) == 1 else {}
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for channel, color in (("E", "tab:blue"), ("H", "tab:green"), ("L", "tab:red")):
        y = np.array([r[channel] for r in rows])
        if np.all(np.isnan(y)):
            continue
        ax.plot(t, y, color=color, label=channel, **style)
    ax.set_xlabel("t")
    ax.set_ylabel("energy channels")
    ax.legend(loc="best")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def _fit_rate(t, y, window=(0.2, 0.9)):
    """Least-squares exponential rate of the positive samples in the window."""
    lo = t[0] + window[0] * (t[-1] - t[0])
    hi = t[0] + window[1] * (t[-1] - t[0])
    mask = (t >= lo) & (t <= hi) & (y > 0.0) & np.isfinite(y)
    if np.count_nonzero(mask) < 2:
        return None
    mu, intercept = np.polyfit(t[mask], np.log(y[mask]), 1)
    return float(mu), float(intercept), (lo, hi)


def plot_growth(csv_path, out_path) -> None:
    """log-scale L (or ||u||_p^p fallback) with the fitted rate overlaid."""
    rows = validate_trajectory(csv_path)
    t = np.array([r["t"] for r in rows])
    y = np.array([r["L"] for r in rows])
    label = "L"
    if np.all(np.isnan(y)):
        y = np.array([r["lp_u_p"] for r in rows])
        label = "lp_u_p"
    fig, ax = plt.subplots(figsize=(7, 4.5))
    pos = y > 0.0
    style = {"marker": "o"} if len(rows) == 1 else {}
    ax.semilogy(t[pos], y[pos], color="tab:red", label=label, **style)
    fit = _fit_rate(t, y)
    if fit is not None:
        mu, intercept, (lo, hi) = fit
        tf = np.linspace(lo, hi, 50)
        ax.semilogy(tf, np.exp(intercept + mu * tf), "k--",
                    label=f"fit rate {mu:.3g}")
    ax.set_xlabel("t")
    ax.set_ylabel(label)
    ax.legend(loc="best")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def plot_phase(sweep_path, thresholds_path, out_path) -> None:
    """Sweep cells in the (||grad u0||, E(0)) plane with alpha1/d reference lines."""
    rows = validate_sweep(sweep_path)
    constants = load_thresholds(thresholds_path)
    fig, ax = plt.subplots(figsize=(6.5, 5))
    seen = set()
    for row in rows:
        try:
            x = float(row["h1semi0"])
            e0 = float(row["E0"])
        except (TypeError, ValueError):
            continue   # failed cells carry empty summary fields
        term = row.get("termination", "t_end")
        color = TERMINATION_COLORS.get(term, "black")
        ax.scatter([x], [e0], color=color,
                   label=term if term not in seen else None)
        seen.add(term)
    ax.axvline(float(constants["alpha1"]), color="k", linestyle="--",
               label="alpha1")
    ax.axhline(float(constants["d"]), color="k", linestyle=":", label="d")
    ax.set_xlabel("initial gradient norm")
    ax.set_ylabel("initial energy")
    if seen or True:
        ax.legend(loc="best")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
