"""Render the analyzer's statistics as figures.

One PNG per statistic, written next to the CSV exports: ranked PUT
counts on log-log axes with the fitted power law, the inter-PUT gap
histogram on its log10 grid, and (given several experiments) the
distinct-client histogram and duration-vs-clients scatter.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import BIN_WIDTH, ExperimentStats


def _save(fig, path: str) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def fig_ranked_puts(stats: ExperimentStats, path: str) -> str:
    """Per-client PUT counts by rank, log-log, with the fitted slope."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    counts = [c for _, c in stats.ranked_put_counts]
    if counts:
        ranks = np.arange(1, len(counts) + 1)
        ax.loglog(ranks, counts, "o", color="#1f77b4", label="clients")
        if stats.power_law_slope is not None:
            head = np.array([c for c in counts if c > 1], dtype=float)
            hr = np.arange(1, len(head) + 1)
            level = np.mean(np.log10(head)) - stats.power_law_slope * np.mean(np.log10(hr))
            ax.loglog(
                hr,
                10 ** (level + stats.power_law_slope * np.log10(hr)),
                "-",
                color="#d62728",
                label=f"fit slope {stats.power_law_slope:.2f}",
            )
        ax.legend()
    ax.set_xlabel("client rank")
    ax.set_ylabel("PUT count")
    ax.set_title("Contribution by client, ranked")
    return _save(fig, path)


def fig_interval_histogram(stats: ExperimentStats, path: str) -> str:
    """Histogram of gaps between consecutive PUTs, log10-second bins."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    if stats.interval_histogram:
        edges = [e for e, _ in stats.interval_histogram]
        counts = [c for _, c in stats.interval_histogram]
        ax.bar(edges, counts, width=BIN_WIDTH * 0.92, align="edge", color="#2ca02c")
    ax.set_xlabel("log10(seconds between PUTs)")
    ax.set_ylabel("gaps")
    ax.set_title("Time between consecutive PUTs")
    return _save(fig, path)


def fig_distinct_clients(counts: list[int], path: str) -> str:
    """Histogram of distinct clients per experiment."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    if counts:
        lo, hi = min(counts), max(counts)
        ax.hist(counts, bins=np.arange(lo - 0.5, hi + 1.5), color="#9467bd", rwidth=0.9)
    ax.set_xlabel("distinct clients")
    ax.set_ylabel("experiments")
    ax.set_title("Distinct clients per experiment")
    return _save(fig, path)


def fig_duration_vs_clients(points: list[tuple[int, float]], path: str) -> str:
    """Experiment duration against the number of participating clients."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    if points:
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        ax.plot(xs, ys, "o", color="#ff7f0e")
    ax.set_xlabel("distinct clients")
    ax.set_ylabel("duration (s), last PUT - first PUT")
    ax.set_title("Experiment duration vs participants")
    return _save(fig, path)


def render_single(stats: ExperimentStats, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    return [
        fig_ranked_puts(stats, os.path.join(out_dir, "ranked_puts.png")),
        fig_interval_histogram(stats, os.path.join(out_dir, "intervals.png")),
    ]


def render_batch(per_log_stats: list[ExperimentStats], out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    counts = [s.distinct_clients for s in per_log_stats]
    durations = [(s.distinct_clients, s.duration_seconds) for s in per_log_stats]
    return [
        fig_distinct_clients(counts, os.path.join(out_dir, "distinct_clients.png")),
        fig_duration_vs_clients(durations, os.path.join(out_dir, "duration_vs_clients.png")),
    ]
