"""PNG renderings of the CLI tables (optional; used by ``--plot``)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def plot_curve(xs, ys, path, xlabel: str, ylabel: str, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(xs, ys, "o-", ms=3, lw=1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    _save(fig, path)


def plot_negative_part(re_axis, im_axis, values, path, title: str = "") -> None:
    """|min(W, 0)| over the (Re beta1, Im beta1) plane of a slice."""
    neg = np.abs(np.minimum(np.asarray(values), 0.0))
    fig, ax = plt.subplots(figsize=(5, 4))
    mesh = ax.pcolormesh(im_axis, re_axis, neg, shading="nearest", cmap="magma")
    fig.colorbar(mesh, ax=ax, label="|negative part of W|")
    ax.set_xlabel("Im beta1")
    ax.set_ylabel("Re beta1")
    if title:
        ax.set_title(title)
    _save(fig, path)
