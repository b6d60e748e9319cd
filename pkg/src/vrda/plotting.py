"""Matplotlib renderings of the CSV curves and benchmark tables.

Figures are written next to the delimited output they are drawn from.
"""

from __future__ import annotations

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 120,
}


def _figure(nrows=1, ncols=1, width=6.0, height=None):
    height = height or width * 0.618 * nrows / ncols
    with plt.rc_context(STYLE):
        return plt.subplots(nrows, ncols, figsize=(width, height), squeeze=False)


def plot_curves(rows, path, title: str | None = None) -> None:
    """Cumulative mistakes and NNZ against samples processed.

    ``rows`` are ``(samples_processed, cumulative_mistakes, nnz)`` tuples.
    """
    xs = [r[0] for r in rows]
    with plt.rc_context(STYLE):
        fig, axes = _figure(2, 1, width=6.0, height=5.0)
        top, bottom = axes[0][0], axes[1][0]
        top.plot(xs, [r[1] for r in rows], color="C0", lw=1.2)
        top.set_ylabel("mistakes")
        bottom.plot(xs, [r[2] for r in rows], color="C1", lw=1.2)
        bottom.set_ylabel("NNZ")
        bottom.set_xlabel("samples processed")
        if title:
            top.set_title(title)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_bench(rows, path) -> None:
    """F-score against NNZ, one series per (algo, loss)."""
    series = defaultdict(list)
    for r in rows:
        series[(r["algo"], r["loss"])].append((int(r["nnz"]), float(r["fscore"])))
    with plt.rc_context(STYLE):
        fig, axes = _figure()
        ax = axes[0][0]
        for (algo, loss), pts in sorted(series.items()):
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", ms=3, label=f"{algo} ({loss})")
        ax.set_xlabel("NNZ")
        ax.set_ylabel("F-score")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
