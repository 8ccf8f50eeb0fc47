"""Figure rendering for the report commands.

Every report writes its delimited output first; these helpers render the
companion PNGs. Uses the Agg backend so headless runs work.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_curves(trajectories: dict, out_path):
    """Per-class accuracy against sparsity, one panel per trajectory.

    trajectories maps a label to {class: [point dicts]}, each point carrying
    sparsity, accuracy, and the class's unpruned accuracy (accuracy0), which
    sets the line color.
    """
    n = max(len(trajectories), 1)
    ncols = min(n, 3)
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(4.4 * ncols, 3.5 * nrows),
                             squeeze=False, sharex=True, sharey=True,
                             constrained_layout=True)
    acc0s = [p["accuracy0"] for per_class in trajectories.values()
             for pts in per_class.values() for p in pts
             if p["accuracy0"] is not None and np.isfinite(p["accuracy0"])]
    lo, hi = (min(acc0s), max(acc0s)) if acc0s else (0.0, 1.0)
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5, hi + 0.5
    norm = matplotlib.colors.Normalize(lo, hi)
    cmap = plt.colormaps["viridis"]
    for ax, label in zip(axes.flat, sorted(trajectories)):
        for cls in sorted(trajectories[label]):
            pts = trajectories[label][cls]
            s = [p["sparsity"] for p in pts]
            a = [np.nan if p["accuracy"] is None else p["accuracy"] for p in pts]
            a0 = pts[0]["accuracy0"] if pts else None
            color = (cmap(norm(a0)) if a0 is not None and np.isfinite(a0)
                     else "gray")
            ax.plot(s, a, marker=".", markersize=3, linewidth=0.9, color=color)
        ax.set_title(label, fontsize=8)
        ax.set_xlabel("sparsity")
    for ax in axes.flat[len(trajectories):]:
        ax.axis("off")
    axes[0][0].set_ylabel("per-class accuracy")
    fig.colorbar(plt.cm.ScalarMappable(norm=norm, cmap=cmap), ax=axes,
                 label="unpruned class accuracy", fraction=0.04)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def save_frontier(candidates: list[dict], frontier_flags: list[bool], chosen_index: int,
                  out_path, metric: str = "max_min"):
    """Unfairness vs sparsity scatter; frontier points marked, chosen point circled."""
    s = np.array([c["sparsity"] for c in candidates])
    u = np.array([c["unfairness"].get(metric, np.nan) if c["unfairness"] else np.nan
                  for c in candidates], dtype=float)
    on = np.array(frontier_flags, dtype=bool)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.scatter(s[~on], u[~on], s=18, c="lightgray", label="dominated or infeasible")
    ax.scatter(s[on], u[on], s=34, c="tab:blue", marker="x", label="frontier")
    if 0 <= chosen_index < len(candidates):
        ax.scatter([s[chosen_index]], [u[chosen_index]], s=160, facecolors="none",
                   edgecolors="tab:red", label="selected")
    ax.set_xlabel("sparsity")
    ax.set_ylabel(f"unfairness ({metric})")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def save_fit_diagnostics(diag: dict, out_path):
    """Residual histogram plus per-target-bin normalized predicted-vs-target map."""
    fig, (ax_res, ax_map) = plt.subplots(1, 2, figsize=(11, 4.2))
    edges = np.array(diag["residual_histogram"]["bin_edges"])
    counts = np.array(diag["residual_histogram"]["counts"])
    ax_res.bar(edges[:-1], counts, width=np.diff(edges), align="edge")
    ax_res.set_xlabel("residual")
    ax_res.set_ylabel("count")
    pv = diag["predicted_vs_target"]
    grid = np.array(pv["normalized_counts"])
    ax_map.imshow(grid.T, origin="lower", aspect="auto",
                  extent=[pv["target_edges"][0], pv["target_edges"][-1],
                          pv["predicted_edges"][0], pv["predicted_edges"][-1]])
    ax_map.plot([0, 1], [0, 1], color="white", linewidth=0.8)
    ax_map.set_xlabel("target accuracy")
    ax_map.set_ylabel("predicted accuracy")
    fig.suptitle(f"adj R^2 = {diag['adj_r_squared']:.4f}", fontsize=9)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def save_cohort(records: list, fits_by_target: dict, out_path):
    """Per-writer accuracy against mean absolute tilt, before and after pruning."""
    groups = sorted({r.group for r in records})
    colors = plt.cm.tab10(np.linspace(0, 1, max(len(groups), 1)))
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.5), sharex=True, sharey=True)
    for ax, target in zip(axes, ("accuracy_before", "accuracy_after")):
        for g, color in zip(groups, colors):
            xs = np.array([r.mean_abs_tilt for r in records if r.group == g])
            ys = np.array([getattr(r, target) for r in records if r.group == g])
            ax.scatter(xs, ys, s=14, color=color, label=g)
        fits = fits_by_target.get(target, {})
        full = fits.get("full")
        if full is not None:
            xs = np.array([r.mean_abs_tilt for r in records])
            xs = xs[np.isfinite(xs)]
            if xs.size:
                xr = np.linspace(xs.min(), xs.max(), 50)
                ax.plot(xr, full.intercept + full.slope * xr, color="black",
                        linewidth=1.0, label=f"fit slope={full.slope:.3f}")
        ax.set_xlabel("mean |tilt|")
        ax.set_title(target.replace("_", " "))
        ax.legend(fontsize=7)
    axes[0].set_ylabel("per-writer accuracy")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
