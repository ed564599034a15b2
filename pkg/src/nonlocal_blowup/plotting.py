"""Static figures written next to the CSV/JSON outputs (``--plots``)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STATUS_COLORS = {"Global": "tab:blue", "BlowUp": "tab:red", "Inconclusive": "tab:gray", "error": "black"}
LABEL_MARKERS = {"GlobalAllData": "o", "BlowUpLargeData": "^", "TheoryGap": "s"}


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_trajectory(result, path):
    t = result.times
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6, 5))
    ax1.semilogy(t, result.sups, "-", label="sup u")
    ax1.semilogy(t, np.maximum([r.min_u for r in result.records], 1e-300), "--", label="min u")
    ax1.set_ylabel("u")
    ax1.legend(loc="best")
    ax2.plot(t, [r.V for r in result.records])
    ax2.set_ylabel(r"$V(t)=\int u\,dx$")
    ax2.set_xlabel("t")
    if result.blowup_time_estimate is not None:
        for ax in (ax1, ax2):
            ax.axvline(result.blowup_time_estimate, color="k", lw=0.8, ls=":")
    ax1.set_title(f"status: {result.status}")
    return _finish(fig, path)


def plot_field(grid, u, path, title=""):
    fig, ax = plt.subplots(figsize=(6, 4))
    if grid.dim == 1:
        ax.plot(grid.axes[0], u)
        ax.set_xlabel("x")
        ax.set_ylabel("u")
    else:
        im = ax.imshow(np.asarray(u).T, origin="lower", aspect="auto",
                       extent=(0, grid.lengths[0], 0, grid.lengths[1]))
        fig.colorbar(im, ax=ax)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    return _finish(fig, path)


def plot_phase_diagram(rows, path, x="p", y="l"):
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for row in rows:
        ax.scatter(
            float(row[x]), float(row[y]),
            c=STATUS_COLORS.get(row["numeric_status"], "black"),
            marker=LABEL_MARKERS.get(row["theory_label"], "D"),
            edgecolors="k" if row["agreement"] == "no" else "none",
            s=90,
        )
    for label, marker in LABEL_MARKERS.items():
        ax.scatter([], [], marker=marker, c="w", edgecolors="k", label=label)
    for status, color in STATUS_COLORS.items():
        ax.scatter([], [], marker="o", c=color, label=status)
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    ax.legend(fontsize=7, loc="upper left", bbox_to_anchor=(1.02, 1.0))
    return _finish(fig, path)


def plot_epsilon_family(runs, epsilons, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    for run, eps in zip(runs, epsilons):
        ax.plot(run.times, run.sups, label=f"eps={eps:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("sup u")
    ax.legend(loc="best")
    return _finish(fig, path)
