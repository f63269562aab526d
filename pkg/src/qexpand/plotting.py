"""Figure output for benchmark sweeps."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_XLABEL = {
    "iterations": "Clustering iterations",
    "wordcount": "Suggestions retrieved",
}


def plot_bench(rows, path, title=None):
    """Mean expansion runtime with one-stddev error bars, saved to ``path``."""
    if not rows:
        raise ValueError("nothing to plot")
    mode = rows[0].mode
    xs = [r.value for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.errorbar(xs, [r.mean_ms for r in rows], yerr=[r.stddev_ms for r in rows],
                marker="o", capsize=3, color="k", lw=1.2)
    ax.set_xlabel(_XLABEL.get(mode, mode))
    ax.set_ylabel("Mean expansion runtime (ms)")
    ax.set_ylim(bottom=0)
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
