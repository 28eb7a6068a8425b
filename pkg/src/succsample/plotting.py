"""Figures written next to the CSV/JSON outputs."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def figsize(width=6.0, ratio=None):
    if ratio is None:
        ratio = (np.sqrt(5.0) - 1.0) / 2.0
    return (width, width * ratio)


def plot_sweep(results, path):
    """Final cost (or oracle ratio) and wall time per seed."""
    seeds = [r.seed for r in results]
    ratios = [r.ratio for r in results]
    have_ratio = all(x is not None for x in ratios)
    with plt.rc_context(STYLE):
        fig, (ax0, ax1) = plt.subplots(1, 2, figsize=figsize(8.0, 0.4))
        if have_ratio:
            ax0.plot(seeds, ratios, "o", ms=3)
            ax0.axhline(1.0, color="0.6", lw=0.8)
            ax0.set_ylabel("cost / oracle")
        else:
            ax0.plot(seeds, [r.final_cost for r in results], "o", ms=3)
            ax0.set_ylabel("final cost")
        ax0.set_xlabel("seed")
        ax1.plot(seeds, [r.time_ms for r in results], "s", ms=3, color="C1")
        ax1.set_xlabel("seed")
        ax1.set_ylabel("time [ms]")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_clustering(inst, centers, path, centroids=None):
    """Scatter of the first two coordinates, colored by nearest center."""
    from .metric import assign_nearest

    X = inst.metric.coordinates
    if X.shape[1] == 1:
        X = np.column_stack([X[:, 0], np.zeros(X.shape[0])])
    labels, _ = assign_nearest(inst, centers)
    c = np.asarray(list(centers))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize(5.0, 1.0))
        ax.scatter(X[:, 0], X[:, 1], c=np.searchsorted(c, labels), s=6, cmap="tab20")
        ax.scatter(X[c, 0], X[c, 1], marker="x", s=60, color="k", label="centers")
        if centroids is not None:
            C = np.asarray(centroids)
            ax.scatter(C[:, 0], C[:, 1] if C.shape[1] > 1 else np.zeros(len(C)),
                       marker="+", s=60, color="C3", label="Lloyd centroids")
        ax.legend(loc="best")
        ax.set_aspect("equal", adjustable="datalim")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
