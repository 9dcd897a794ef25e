"""Figure rendering for training metrics and match results."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .training import EpochMetrics


def save_training_curves(metrics: Sequence[EpochMetrics], path: str | Path) -> Path:
    """Loss and accuracy curves across epochs, one PNG."""
    path = Path(path)
    epochs = [m.epoch for m in metrics]
    fig, (ax_loss, ax_acc) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_loss.plot(epochs, [m.mean_loss for m in metrics], marker="o", color="tab:red")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("mean loss per token")
    ax_loss.set_title("Training loss")
    ax_loss.grid(True, alpha=0.3)
    ax_acc.plot(
        epochs, [m.accuracy_word for m in metrics],
        marker="o", label="Accuracy-Word", color="tab:blue",
    )
    ax_acc.plot(
        epochs, [m.accuracy_vagueness for m in metrics],
        marker="s", label="Accuracy-Vagueness", color="tab:green",
    )
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("accuracy")
    ax_acc.set_ylim(0.0, 1.05)
    ax_acc.set_title("Training accuracy")
    ax_acc.legend(loc="lower right")
    ax_acc.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_length_histogram(histogram: dict[int, int], path: str | Path) -> Path:
    """Bar chart of matched-region lengths, one PNG."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if histogram:
        lengths = sorted(histogram)
        ax.bar(lengths, [histogram[n] for n in lengths], color="tab:purple", width=0.8)
        ax.set_xticks(lengths)
    ax.set_xlabel("region length (tokens)")
    ax.set_ylabel("matches")
    ax.set_title("Match length distribution")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
