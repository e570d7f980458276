"""Multi-dimensional reputation scoring over sliding service windows.

Scores are recomputed when a window of requests closes. Three sub-scores
(reliability, misbehavior, token stake) combine into a base score, and each
oracle's published reputation applies time-decayed weights over window
history. Two window modes exist: "composite" feeds previously published
reputations back into the sum, so one bad window echoes far beyond the
window length; "independent" sums only the last W base scores, so the echo
vanishes once the bad window leaves the lookback.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .domain import BehaviorLevel, ScenarioError, ServiceRecord, TrustWeights, WindowConfig

__all__ = [
    "OracleWindowStats",
    "WindowStats",
    "ReputationWindow",
    "TraceRow",
    "ReputationEngine",
    "relative_response_frequency",
    "request_success",
    "success_rate",
    "average_response_time",
    "reliability_score",
    "behavior_score",
    "token_score",
    "base_reputation",
    "time_factor",
    "close_window",
    "close_window_independent",
    "is_trusted",
    "write_trace_csv",
    "TrustWeights",
    "WindowConfig",
    "ScenarioError",
]


@dataclass
class OracleWindowStats:
    """Raw tallies for one oracle inside the current window."""

    responses: int = 0
    successes: int = 0
    total_response_time: float = 0.0
    behavior_counts: list[int] = field(default_factory=lambda: [0, 0, 0, 0])


class WindowStats:
    """Per-oracle tallies for the window in progress, all oracles together."""

    def __init__(self, oracle_ids: Iterable[str]):
        self.rows: dict[str, OracleWindowStats] = {oid: OracleWindowStats() for oid in oracle_ids}

    def record(self, oid: str, response_time: float, success: bool, behavior: BehaviorLevel) -> None:
        row = self._row(oid)
        row.responses += 1
        row.successes += int(success)
        row.total_response_time += response_time
        row.behavior_counts[behavior.value] += 1

    def _row(self, oid: str) -> OracleWindowStats:
        try:
            return self.rows[oid]
        except KeyError:
            raise ValueError(f"unknown oracle id {oid!r}") from None

    @property
    def total_responses(self) -> int:
        return sum(row.responses for row in self.rows.values())


def relative_response_frequency(stats: WindowStats, oid: str, oracle_count: int) -> float:
    """Share of the window's traffic this oracle served, scaled by community
    size so an even split scores 1.0. Zero when the window saw no traffic."""
    row = stats._row(oid)
    total = stats.total_responses
    if total == 0:
        return 0.0
    return row.responses * oracle_count / total


def request_success(response_time: float, ddl: float, verified: bool) -> bool:
    """A request succeeds only when answered within its deadline and the
    answer passes verification."""
    return bool(verified) and response_time <= ddl


def success_rate(stats: WindowStats, oid: str) -> float:
    row = stats._row(oid)
    if row.responses == 0:
        return 0.0
    return row.successes / row.responses


def average_response_time(stats: WindowStats, oid: str, ddl: float) -> float:
    """Mean response time in the window; an idle oracle is scored at the
    deadline, making its timeliness term exactly neutral."""
    row = stats._row(oid)
    if row.responses == 0:
        return ddl
    return row.total_response_time / row.responses


def reliability_score(orf: float, osr: float, ort: float, ddl: float, w: TrustWeights) -> float:
    """Weighted mix of traffic share, success rate, and deadline headroom."""
    if ort <= 0:
        raise ValueError("average response time must be positive")
    if ddl <= 0:
        raise ValueError("deadline must be positive")
    return w.omega * orf + w.phi * osr + w.psi * (ddl / ort)


def behavior_score(counts: Sequence[int], w: TrustWeights) -> float:
    """Harm-weighted count of this window's behaviors, ordered least to most
    severe. Higher means worse conduct."""
    if len(counts) != len(w.harm_scores):
        raise ValueError(f"expected {len(w.harm_scores)} behavior counts, got {len(counts)}")
    if any(c < 0 for c in counts):
        raise ValueError("behavior counts must be >= 0")
    return float(sum(h * c for h, c in zip(w.harm_scores, counts)))


def token_score(stakes: dict[str, float], oid: str) -> float:
    """Oracle's stake relative to the community average; an even distribution
    scores 1.0, and zero total stake scores everyone 0."""
    if oid not in stakes:
        raise ValueError(f"unknown oracle id {oid!r}")
    total = sum(stakes.values())
    if total == 0:
        return 0.0
    return stakes[oid] * len(stakes) / total


def base_reputation(reliability: float, behavior: float, token: float, w: TrustWeights) -> float:
    """Single-window score: reliability earns, misbehavior costs, stake earns."""
    return w.xi * reliability - w.zeta * behavior + w.delta * token


def time_factor(age: float, chi: float) -> float:
    """Decay weight for a window ``age`` windows old; the newest window has
    age 1. Monotonically shrinks with age."""
    if age < 1:
        raise ValueError("window age must be >= 1")
    return math.tanh(chi / age)


@dataclass
class ReputationWindow:
    """Sliding history for one oracle. Holds the last ``length - 1`` closed
    values (published reputations in composite mode, base scores in
    independent mode); the oldest entry falls out when a new one lands."""

    length: int
    closed: int = 0
    history: deque = field(init=False)

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("window length must be >= 1")
        self.history = deque(maxlen=self.length - 1)


def close_window(rw: ReputationWindow, base: float, w: TrustWeights) -> float:
    """Close a window in composite mode: the fresh base score gets full
    weight and each previously published reputation in the lookback gets the
    decay weight for its age. The published value itself enters the history,
    so past windows keep echoing into the future."""
    value = time_factor(1, w.chi) * base
    for age, past in enumerate(reversed(rw.history), start=2):
        value += time_factor(age, w.chi) * past
    rw.history.append(value)
    rw.closed += 1
    return value


def close_window_independent(rw: ReputationWindow, base: float, w: TrustWeights) -> float:
    """Close a window in independent mode: the decayed sum runs over the raw
    base scores of the last W windows only, so any single window stops
    mattering once it leaves the lookback."""
    value = time_factor(1, w.chi) * base
    for age, past in enumerate(reversed(rw.history), start=2):
        value += time_factor(age, w.chi) * past
    rw.history.append(base)
    rw.closed += 1
    return value


def is_trusted(reputation: float, threshold: float) -> bool:
    """Reputation at or above the threshold keeps an oracle eligible."""
    return reputation >= threshold


@dataclass
class TraceRow:
    """One oracle's published scores for one closed window."""

    window: int
    oid: str
    responses: int
    successes: int
    frequency: float
    success_rate: float
    avg_response_time: float
    reliability: float
    behavior: float
    token: float
    base: float
    reputation: float


class ReputationEngine:
    """Accumulates service records and publishes reputations window by window."""

    def __init__(
        self,
        oracle_ids: Sequence[str],
        stakes: dict[str, float],
        trust: TrustWeights,
        window: WindowConfig,
        deadline: float,
    ):
        if deadline <= 0:
            raise ValueError("deadline must be positive")
        missing = [oid for oid in oracle_ids if oid not in stakes]
        if missing:
            raise ValueError(f"missing stake for oracle {missing[0]!r}")
        self.oracle_ids = list(oracle_ids)
        self.stakes = dict(stakes)
        self.trust = trust
        self.window = window
        self.deadline = deadline
        self.stats = WindowStats(self.oracle_ids)
        self.windows = {oid: ReputationWindow(window.length) for oid in self.oracle_ids}
        self.reputations = {oid: trust.initial_reputation for oid in self.oracle_ids}
        self.window_index = 0
        self.trace: list[TraceRow] = []
        self._closer = close_window if window.mode == "composite" else close_window_independent

    def record_service(self, rec: ServiceRecord) -> bool:
        """Tally one completed request; returns whether it counts as a success."""
        success = request_success(rec.response_time, self.deadline, rec.verified)
        self.stats.record(rec.oid, rec.response_time, success, rec.behavior)
        return success

    def close_current_window(self) -> dict[str, float]:
        """Score every oracle on the window just ended, publish the new
        reputations, and start a fresh window."""
        k = self.window_index + 1
        m = len(self.oracle_ids)
        for oid in self.oracle_ids:
            row = self.stats.rows[oid]
            orf = relative_response_frequency(self.stats, oid, m)
            osr = success_rate(self.stats, oid)
            ort = average_response_time(self.stats, oid, self.deadline)
            rel = reliability_score(orf, osr, ort, self.deadline, self.trust)
            beh = behavior_score(row.behavior_counts, self.trust)
            tok = token_score(self.stakes, oid)
            base = base_reputation(rel, beh, tok, self.trust)
            rep = self._closer(self.windows[oid], base, self.trust)
            self.reputations[oid] = rep
            self.trace.append(
                TraceRow(
                    window=k,
                    oid=oid,
                    responses=row.responses,
                    successes=row.successes,
                    frequency=orf,
                    success_rate=osr,
                    avg_response_time=ort,
                    reliability=rel,
                    behavior=beh,
                    token=tok,
                    base=base,
                    reputation=rep,
                )
            )
        self.stats = WindowStats(self.oracle_ids)
        self.window_index = k
        return dict(self.reputations)

    def is_trusted(self, oid: str) -> bool:
        if oid not in self.reputations:
            raise ValueError(f"unknown oracle id {oid!r}")
        return is_trusted(self.reputations[oid], self.trust.threshold)

    def trusted_ids(self) -> list[str]:
        return [oid for oid in self.oracle_ids if self.is_trusted(oid)]


TRACE_COLUMNS = [
    "window", "oid", "responses", "successes", "frequency", "success_rate",
    "avg_response_time", "reliability", "behavior", "token", "base", "reputation",
]


def write_trace_csv(trace: Sequence[TraceRow], path: str | Path) -> None:
    """Write the per-window score trace; floats use repr so reads round-trip."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for row in trace:
            writer.writerow(
                [
                    row.window,
                    row.oid,
                    row.responses,
                    row.successes,
                    repr(row.frequency),
                    repr(row.success_rate),
                    repr(row.avg_response_time),
                    repr(row.reliability),
                    repr(row.behavior),
                    repr(row.token),
                    repr(row.base),
                    repr(row.reputation),
                ]
            )
