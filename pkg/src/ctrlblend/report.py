"""Figure rendering for experiment outputs.

Renders the three comparison rows (reward, cost, correct-pick rate per batch
of episodes) and the regret/loss curves with their bound overlays to PNG
files next to the delimited output.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .harness import AggregateSummary

_COLORS = {
    "blender": "tab:blue",
    "always_safe": "tab:green",
    "always_performant": "tab:red",
    "uniform_random": "tab:gray",
}


def render_comparison(summaries: list[AggregateSummary], outdir) -> Path:
    """Reward / cost / correct-pick rate per batch, one panel per metric."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    fig, axes = plt.subplots(3, 1, figsize=(7, 9), sharex=True)
    titles = [("reward", "episode reward"), ("cost", "episode cost"),
              ("correct", "correct-pick rate")]
    for ax, (which, label) in zip(axes, titles):
        for s in summaries:
            mean, std = s.batch_stats(which)
            x = np.arange(len(mean))
            color = _COLORS.get(s.policy)
            ax.plot(x, mean, label=s.policy, color=color)
            ax.fill_between(x, mean - std, mean + std, alpha=0.2, color=color)
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    axes[0].legend(loc="best", fontsize=8)
    axes[-1].set_xlabel("batch of 30 episodes")
    fig.tight_layout()
    path = outdir / "fig_comparison.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_regret(summary: AggregateSummary, outdir) -> Path:
    """Empirical regret/loss curves with the theoretical overlays."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t = np.arange(1, summary.pr_cum.shape[1] + 1)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))

    pr_mean = summary.pr_cum.mean(axis=0)
    pr_std = summary.pr_cum.std(axis=0)
    ax1.plot(t, pr_mean, color="tab:blue", label="Pareto regret (empirical)")
    ax1.fill_between(t, pr_mean - pr_std, pr_mean + pr_std, alpha=0.2, color="tab:blue")
    ax1.plot(t, summary.pr_theory, color="tab:orange", ls="--", label="regret bound")
    ax1.set_yscale("log")
    ax1.set_xlabel("t")
    ax1.legend(fontsize=8)
    ax1.grid(alpha=0.3)

    cml_mean = summary.cml_cum.mean(axis=0)
    bound_mean = summary.cml_bound.mean(axis=0)
    ax2.plot(t, cml_mean, color="tab:blue", label="cumulative maximal loss")
    ax2.plot(t, bound_mean, color="tab:orange", ls="--", label="on-the-fly loss bound")
    ax2.set_xlabel("t")
    ax2.legend(fontsize=8)
    ax2.grid(alpha=0.3)

    fig.tight_layout()
    path = outdir / "fig_regret.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
