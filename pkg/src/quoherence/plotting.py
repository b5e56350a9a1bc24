"""Figure rendering for the CLI output paths.

Every figure goes straight to a file (Agg backend, no display) next to the
delimited output it illustrates. PNG metadata is stripped so repeated runs
of the same scenario produce byte-identical files.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_OPTS = {"dpi": 150, "metadata": {"Software": None}}


def _finish(fig, path: str) -> None:
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def plot_pattern(xs: np.ndarray, columns: dict[str, np.ndarray], title: str, path: str) -> None:
    """Intensity curves versus screen position, one line per expression."""
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    styles = {"exact": "-", "farfield": "--", "incoherent": ":"}
    for name, values in columns.items():
        ax.plot(xs * 1e3, values, styles.get(name, "-"), linewidth=1.2, label=name)
    ax.set_xlabel("screen position x (mm)")
    ax.set_ylabel("intensity (1/m)")
    ax.set_title(title)
    ax.legend(frameon=False)
    ax.margins(x=0)
    fig.tight_layout()
    _finish(fig, path)


def plot_sweep(values: np.ndarray, table: dict[str, list[float]], parameter: str, title: str, path: str) -> None:
    """Recorded quantities versus the swept parameter."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    markers = ("o", "s", "^", "v", "d")
    for i, (name, column) in enumerate(table.items()):
        ax.plot(values, column, marker=markers[i % len(markers)], markersize=3.5, linewidth=1.0, label=name)
    ax.set_xlabel(parameter)
    ax.set_ylabel("value")
    ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    _finish(fig, path)


def plot_measure(report: dict, title: str, path: str) -> None:
    """Bar summary of a measurement report: theory, measured, budget."""
    labels = ["C theory", "C measured", "C input", "D_Q", "C + D_Q"]
    c_measured = report["coherence_measured"]["value"]
    heights = [
        report["coherence_theory"],
        c_measured,
        report["input_coherence"]["value"],
        report["distinguishability"],
        c_measured + report["distinguishability"],
    ]
    errors = [0.0, report["coherence_measured"]["std_error"], report["input_coherence"]["std_error"], 0.0, 0.0]
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.bar(range(len(labels)), heights, yerr=errors, capsize=3, color="#4878a8")
    ax.axhline(1.0, color="0.3", linewidth=0.8, linestyle="--")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylabel("value")
    ax.set_title(title)
    fig.tight_layout()
    _finish(fig, path)
