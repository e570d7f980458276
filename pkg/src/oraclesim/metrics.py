"""Run aggregation and report files.

A finished run condenses into a RunReport: headline scalars, the per-window
reputation matrix, per-window selection counts, and the step-reward series.
Reports export to a directory as summary.json plus delimited files, and the
export is byte-stable: the same report always produces identical bytes.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .domain import BehaviorClass, BehaviorLevel, ScenarioConfig, ServiceRecord
from .trust import TraceRow

__all__ = [
    "RunReport",
    "aggregate",
    "assignment_fractions",
    "export_report",
    "import_report",
]

SUMMARY_FILE = "summary.json"
REPUTATION_FILE = "reputation_trace.csv"
SELECTION_FILE = "selection_counts.csv"
CONVERGENCE_FILE = "convergence.csv"


@dataclass
class RunReport:
    """Everything the report path needs about one finished run."""

    agent: str
    request_count: int
    windows: int
    oracle_ids: list[str]
    match_count: int
    match_rate: float
    success_count: int
    success_rate: float
    average_cost: float
    average_response_time: float
    behavior_counts: dict[str, int]
    behavior_fractions: dict[str, float]
    redirect_count: int
    total_reward: float
    reputation_trace: np.ndarray    # windows x oracles
    selection_counts: np.ndarray    # full windows x oracles, ints
    step_rewards: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, RunReport):
            return NotImplemented
        scalars = (
            "agent", "request_count", "windows", "oracle_ids", "match_count",
            "match_rate", "success_count", "success_rate", "average_cost",
            "average_response_time", "behavior_counts", "behavior_fractions",
            "redirect_count", "total_reward",
        )
        return all(getattr(self, f) == getattr(other, f) for f in scalars) and (
            np.array_equal(self.reputation_trace, other.reputation_trace)
            and np.array_equal(self.selection_counts, other.selection_counts)
            and np.array_equal(self.step_rewards, other.step_rewards)
        )


def assignment_fractions(
    cfg: ScenarioConfig, records: Sequence[ServiceRecord]
) -> dict[BehaviorClass, float]:
    """Fraction of requests executed by oracles of each disposition."""
    cls_of = {p.oid: p.behavior_class for p in cfg.oracles}
    counts = {cls: 0 for cls in BehaviorClass}
    for rec in records:
        counts[cls_of[rec.oid]] += 1
    total = max(1, len(records))
    return {cls: counts[cls] / total for cls in BehaviorClass}


def aggregate(
    agent: str,
    cfg: ScenarioConfig,
    records: Sequence[ServiceRecord],
    successes: Sequence[bool],
    step_rewards: Sequence[float],
    trace: Sequence[TraceRow],
) -> RunReport:
    """Condense one run into a report. ``trace`` is the reputation engine's
    per-window score log; selection counts come from the chronological
    record order cut into full windows."""
    if len(records) != len(successes) or len(records) != len(step_rewards):
        raise ValueError("records, successes, and step_rewards must align")

    n = len(records)
    oracle_ids = cfg.oracle_ids
    index_of = {oid: i for i, oid in enumerate(oracle_ids)}

    match_count = sum(1 for r in records if r.service_matched)
    success_count = sum(1 for s in successes if s)
    behavior_counts = {lvl.name: 0 for lvl in BehaviorLevel}
    for r in records:
        behavior_counts[r.behavior.name] += 1
    redirect_count = sum(1 for r in records if r.redirected)

    windows = max((row.window for row in trace), default=0)
    reputation = np.zeros((windows, len(oracle_ids)))
    for row in trace:
        reputation[row.window - 1, index_of[row.oid]] = row.reputation

    full = n // cfg.requests_per_window
    selection = np.zeros((full, len(oracle_ids)), dtype=int)
    for i, rec in enumerate(records[: full * cfg.requests_per_window]):
        selection[i // cfg.requests_per_window, index_of[rec.oid]] += 1

    return RunReport(
        agent=agent,
        request_count=n,
        windows=windows,
        oracle_ids=list(oracle_ids),
        match_count=match_count,
        match_rate=match_count / n if n else 0.0,
        success_count=success_count,
        success_rate=success_count / n if n else 0.0,
        average_cost=float(np.mean([r.cost for r in records])) if n else 0.0,
        average_response_time=(
            float(np.mean([r.response_time for r in records])) if n else 0.0
        ),
        behavior_counts=behavior_counts,
        behavior_fractions={
            name: (count / n if n else 0.0) for name, count in behavior_counts.items()
        },
        redirect_count=redirect_count,
        total_reward=float(np.sum(step_rewards)) if n else 0.0,
        reputation_trace=reputation,
        selection_counts=selection,
        step_rewards=np.asarray(step_rewards, dtype=float),
    )


def _write_matrix_csv(path: Path, header: list[str], matrix: np.ndarray, fmt) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for w, row in enumerate(matrix, start=1):
            writer.writerow([w, *[fmt(v) for v in row]])


def export_report(report: RunReport, out_dir: str | Path) -> Path:
    """Write summary.json, reputation_trace.csv, selection_counts.csv, and
    convergence.csv into ``out_dir``; floats are repr-formatted so identical
    reports export byte for byte."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    summary = {
        "agent": report.agent,
        "request_count": report.request_count,
        "windows": report.windows,
        "oracle_ids": report.oracle_ids,
        "match_count": report.match_count,
        "match_rate": report.match_rate,
        "success_count": report.success_count,
        "success_rate": report.success_rate,
        "average_cost": report.average_cost,
        "average_response_time": report.average_response_time,
        "behavior_counts": report.behavior_counts,
        "behavior_fractions": report.behavior_fractions,
        "redirect_count": report.redirect_count,
        "total_reward": report.total_reward,
    }
    (out / SUMMARY_FILE).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")

    header = ["window", *report.oracle_ids]
    _write_matrix_csv(out / REPUTATION_FILE, header, report.reputation_trace,
                      lambda v: repr(float(v)))
    _write_matrix_csv(out / SELECTION_FILE, header, report.selection_counts,
                      lambda v: int(v))

    with open(out / CONVERGENCE_FILE, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "reward", "cumulative_reward"])
        running = 0.0
        for step, reward in enumerate(report.step_rewards, start=1):
            running += float(reward)
            writer.writerow([step, repr(float(reward)), repr(running)])
    return out


def _read_matrix_csv(path: Path, cast):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    ids = header[1:]
    matrix = [[cast(v) for v in row[1:]] for row in rows[1:]]
    return ids, matrix


def import_report(out_dir: str | Path) -> RunReport:
    """Read a report directory back into a RunReport; export(import(d))
    reproduces the files byte for byte."""
    out = Path(out_dir)
    summary = json.loads((out / SUMMARY_FILE).read_text())

    ids_rep, reputation = _read_matrix_csv(out / REPUTATION_FILE, float)
    ids_sel, selection = _read_matrix_csv(out / SELECTION_FILE, int)
    if ids_rep != summary["oracle_ids"] or ids_sel != summary["oracle_ids"]:
        raise ValueError("report files disagree about the oracle roster")

    with open(out / CONVERGENCE_FILE, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    step_rewards = [float(r[1]) for r in rows]

    m = len(summary["oracle_ids"])
    return RunReport(
        agent=summary["agent"],
        request_count=summary["request_count"],
        windows=summary["windows"],
        oracle_ids=list(summary["oracle_ids"]),
        match_count=summary["match_count"],
        match_rate=summary["match_rate"],
        success_count=summary["success_count"],
        success_rate=summary["success_rate"],
        average_cost=summary["average_cost"],
        average_response_time=summary["average_response_time"],
        behavior_counts=dict(summary["behavior_counts"]),
        behavior_fractions=dict(summary["behavior_fractions"]),
        redirect_count=summary["redirect_count"],
        total_reward=summary["total_reward"],
        reputation_trace=np.array(reputation, dtype=float).reshape(-1, m),
        selection_counts=np.array(selection, dtype=int).reshape(-1, m),
        step_rewards=np.array(step_rewards, dtype=float),
    )
