"""SVG emitters for experiment artifacts.

Output is deterministic: fixed hash salt for element ids, no embedded
timestamps, Agg backend.  Same data, same bytes.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg", force=True)
matplotlib.rcParams["svg.hashsalt"] = "treesep"

import matplotlib.pyplot as plt
import numpy as np

# keep the fan readable and the file small
_MAX_FAN_PATHS = 200


def _save(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def trajectory_fan(times, series, path: str) -> None:
    """Horodistance paths of the first replicas, with the across-replica mean."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    shown = series[:_MAX_FAN_PATHS]
    for horos in shown:
        ax.plot(times, horos, color="steelblue", alpha=0.15, linewidth=0.8)
    mean = np.asarray(series, dtype=float).mean(axis=0)
    ax.plot(times, mean, color="crimson", linewidth=1.8, label=f"mean of {len(series)}")
    ax.set_xlabel("t")
    ax.set_ylabel("horodistance")
    ax.set_title(f"tagged-particle trajectories ({len(shown)} shown)")
    ax.legend(loc="upper left")
    _save(fig, path)


def mean_drift_plot(times, means, ses, reference_speed: float, path: str) -> None:
    """Mean horodistance with 1-SE bars against the reference line v*t."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.errorbar(times, means, yerr=ses, fmt="o-", color="steelblue", capsize=3, label="measured mean")
    ref = [reference_speed * t for t in times]
    ax.plot(times, ref, "--", color="gray", label=f"reference {reference_speed:.4g}*t")
    ax.set_xlabel("t")
    ax.set_ylabel("mean horodistance")
    ax.set_title("mean displacement vs reference drift")
    ax.legend(loc="upper left")
    _save(fig, path)


def clt_histogram(zscores, path: str) -> None:
    """Density histogram of studentized samples with the standard normal curve."""
    z = np.asarray(zscores, dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.hist(z, bins="auto", density=True, color="steelblue", alpha=0.6, label=f"n={z.size}")
    grid = np.linspace(-4.0, 4.0, 161)
    ax.plot(grid, np.exp(-grid * grid / 2.0) / math.sqrt(2.0 * math.pi), color="crimson", label="N(0,1)")
    ax.set_xlabel("studentized horodistance")
    ax.set_ylabel("density")
    ax.set_title("CLT diagnostic")
    ax.legend(loc="upper right")
    _save(fig, path)
