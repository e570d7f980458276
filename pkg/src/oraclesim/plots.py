"""Figure rendering for the report path.

Figures are written as PNG files next to the delimited output. Saves strip
the Software metadata tag so identical runs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import RunReport

__all__ = [
    "save_figure",
    "reputation_figure",
    "convergence_figure",
    "selection_figure",
    "comparison_figure",
    "sweep_figure",
    "attack_figure",
    "window_table_figure",
]

ROLLING_WINDOW = 100


def save_figure(fig, path: str | Path) -> Path:
    """Write the figure reproducibly and release it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def reputation_figure(report: RunReport, threshold: float | None = None):
    """Per-oracle reputation across windows."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    windows = np.arange(1, report.reputation_trace.shape[0] + 1)
    for col, oid in enumerate(report.oracle_ids):
        ax.plot(windows, report.reputation_trace[:, col], label=oid, linewidth=1.2)
    if threshold is not None:
        ax.axhline(threshold, color="black", linestyle="--", linewidth=1,
                   label="trust threshold")
    ax.set_xlabel("window")
    ax.set_ylabel("reputation")
    ax.set_title(f"Reputation per oracle ({report.agent})")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    return fig


def _rolling_mean(series: np.ndarray, width: int) -> np.ndarray:
    if len(series) == 0:
        return series.astype(float)
    width = max(1, min(width, len(series)))
    kernel = np.ones(width) / width
    return np.convolve(series, kernel, mode="valid")


def convergence_figure(report: RunReport):
    """Rolling mean of the per-step reward."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    rewards = np.asarray(report.step_rewards, dtype=float)
    rolled = _rolling_mean(rewards, ROLLING_WINDOW)
    start = len(rewards) - len(rolled) + 1
    ax.plot(np.arange(start, start + len(rolled)), rolled, linewidth=1.2)
    ax.set_xlabel("request")
    ax.set_ylabel(f"reward (rolling mean, {ROLLING_WINDOW})")
    ax.set_title(f"Reward convergence ({report.agent})")
    fig.tight_layout()
    return fig


def selection_figure(report: RunReport):
    """Per-window selection counts per oracle."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    windows = np.arange(1, report.selection_counts.shape[0] + 1)
    for col, oid in enumerate(report.oracle_ids):
        ax.plot(windows, report.selection_counts[:, col], label=oid, linewidth=1.2)
    ax.set_xlabel("window")
    ax.set_ylabel("requests assigned")
    ax.set_title(f"Assignments per oracle ({report.agent})")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    return fig


def comparison_figure(rows: Sequence[Mapping[str, object]]):
    """Grouped bars of the headline metrics for several agents.

    Each row needs: agent, match_rate, success_rate, average_cost,
    malicious_fraction.
    """
    agents = [str(r["agent"]) for r in rows]
    metrics = [
        ("match_rate", "match rate"),
        ("success_rate", "success rate"),
        ("malicious_fraction", "malicious share"),
        ("average_cost", "average cost"),
    ]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4.5))
    x = np.arange(len(agents))
    width = 0.27
    for i, (key, label) in enumerate(metrics[:3]):
        axes[0].bar(x + (i - 1) * width, [float(r[key]) for r in rows], width, label=label)
    axes[0].set_xticks(x, agents, rotation=15)
    axes[0].set_ylabel("fraction")
    axes[0].set_title("Quality metrics")
    axes[0].legend(fontsize=8)
    axes[1].bar(x, [float(r["average_cost"]) for r in rows], 0.5, color="tab:blue")
    axes[1].set_xticks(x, agents, rotation=15)
    axes[1].set_ylabel("average cost")
    axes[1].set_title("Cost")
    fig.tight_layout()
    return fig


def sweep_figure(points: Sequence[float], series: Mapping[str, Mapping[str, Sequence[float]]],
                 xlabel: str):
    """Success rate and malicious share across sweep points, per agent.

    ``series`` maps agent name to {"success_rate": [...], "malicious_fraction": [...]}.
    """
    fig, axes = plt.subplots(1, 2, figsize=(10, 4.5))
    for agent, metrics in series.items():
        axes[0].plot(points, metrics["success_rate"], marker="o", label=agent)
        axes[1].plot(points, metrics["malicious_fraction"], marker="o", label=agent)
    axes[0].set_xlabel(xlabel)
    axes[0].set_ylabel("success rate")
    axes[0].set_title("Service success")
    axes[1].set_xlabel(xlabel)
    axes[1].set_ylabel("malicious share")
    axes[1].set_title("Assignments to hostile oracles")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    return fig


def attack_figure(attacker_oid: str, burst_window: int, threshold: float,
                  composite: RunReport, independent: RunReport):
    """The attacker's reputation under both window modes."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    col_c = composite.oracle_ids.index(attacker_oid)
    col_i = independent.oracle_ids.index(attacker_oid)
    w_c = np.arange(1, composite.reputation_trace.shape[0] + 1)
    w_i = np.arange(1, independent.reputation_trace.shape[0] + 1)
    ax.plot(w_c, composite.reputation_trace[:, col_c], label="history-carrying window")
    ax.plot(w_i, independent.reputation_trace[:, col_i], label="memoryless window")
    ax.axhline(threshold, color="black", linestyle="--", linewidth=1, label="trust threshold")
    ax.axvline(burst_window, color="red", linestyle=":", linewidth=1, label="attack burst")
    ax.set_xlabel("window")
    ax.set_ylabel(f"reputation of {attacker_oid}")
    ax.set_title("Attacker reputation by window mode")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def window_table_figure(lengths: Sequence[int], oracle_ids: Sequence[str],
                        final_reputations: np.ndarray, unit_base: Sequence[float]):
    """Final reputation magnitude versus window length, log scale."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for col, oid in enumerate(oracle_ids):
        ax.plot(lengths, np.abs(final_reputations[:, col]), marker="o", label=oid)
    ax.plot(lengths, np.abs(np.asarray(unit_base)), marker="s", linestyle="--",
            color="black", label="constant unit base")
    ax.set_yscale("log")
    ax.set_xlabel("window length")
    ax.set_ylabel("|final reputation| (log)")
    ax.set_title("Window length versus reputation magnitude")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    return fig
