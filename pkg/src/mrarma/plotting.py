"""Matplotlib rendering for the command-line report paths.

Each helper writes one figure to a file next to the delimited output and
closes it; nothing is ever shown interactively.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = [
    "save_series_plot",
    "save_pmf_plot",
    "save_bar_plot",
    "save_study_plot",
]


def save_series_plot(path, series, title: str = "") -> None:
    """Step plot of an integer time series."""
    fig, ax = plt.subplots(figsize=(8.0, 3.0))
    ax.step(np.arange(1, len(series) + 1), series, where="mid", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("x")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_pmf_plot(path, support, pmf, title: str = "") -> None:
    """Stem plot of a pmf over integer support."""
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    markerline, stemlines, _ = ax.stem(support, pmf)
    plt.setp(markerline, markersize=3)
    plt.setp(stemlines, lw=1.0)
    ax.set_xlabel("x")
    ax.set_ylabel("P(X = x)")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_bar_plot(path, values, band: float | None = None, title: str = "",
                  ylabel: str = "acf") -> None:
    """Bar plot over lags 1..len(values), with optional significance band."""
    lags = np.arange(1, len(values) + 1)
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.bar(lags, values, width=0.3, color="0.3")
    ax.axhline(0.0, color="black", lw=0.8)
    if band is not None:
        ax.axhline(band, color="grey", ls="--", lw=0.8)
        ax.axhline(-band, color="grey", ls="--", lw=0.8)
    ax.set_xlabel("lag")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_study_plot(path, result) -> None:
    """Per-parameter mean estimate with +/- one Monte Carlo s.d. against n."""
    parameters = sorted({row["parameter"] for row in result.rows})
    methods = sorted({row["method"] for row in result.rows})
    fig, axes = plt.subplots(1, len(parameters),
                             figsize=(3.0 * len(parameters), 3.0),
                             squeeze=False)
    truth = result.config.true_values()
    for ax, parameter in zip(axes[0], parameters):
        for method in methods:
            rows = [row for row in result.rows
                    if row["parameter"] == parameter and row["method"] == method]
            rows.sort(key=lambda row: row["n"])
            ns = [row["n"] for row in rows]
            means = [row["mean_est"] for row in rows]
            sds = [row["mc_sd"] for row in rows]
            ax.errorbar(ns, means, yerr=sds, marker="o", ms=3, capsize=3,
                        label=method)
        ax.axhline(truth[parameter], color="grey", ls="--", lw=0.8)
        ax.set_xscale("log")
        ax.set_xlabel("n")
        ax.set_title(parameter)
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
