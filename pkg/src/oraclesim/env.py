"""Discrete-event request/oracle simulation.

Requests arrive on a Poisson clock and are dispatched to the oracle the
selection agent picks. Each oracle serves FIFO at its own speed; the drawn
behavior decides verification, the reputation engine tallies the outcome,
and every ``requests_per_window`` steps the window closes and reputations
are republished. With threshold enforcement on, picks of barred oracles are
redirected to the best trusted stand-in and the step reward is docked the
mismatch penalty, so the learning signal still blames the bad pick.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .attacks import effective_distribution
from .domain import (
    BehaviorLevel,
    BehaviorModel,
    DataRequest,
    OracleProfile,
    RewardWeights,
    ScenarioConfig,
    ServiceRecord,
)
from .trust import ReputationEngine, request_success

__all__ = [
    "generate_requests",
    "sample_behavior",
    "dispatch",
    "compute_reward",
    "EnvState",
    "StepOutcome",
    "OracleEnv",
    "write_records_csv",
    "RECORD_COLUMNS",
]

REPUTATION_CLIP = 5.0   # reputations are clipped to +-5 in the observation vector


def generate_requests(cfg: ScenarioConfig, rng: np.random.Generator) -> tuple[DataRequest, ...]:
    """Draw the full request stream: exponential interarrivals, normal
    complexity floored at one work unit, uniformly mixed service classes."""
    if cfg.arrival_rate <= 0:
        raise ValueError("arrival rate must be positive")
    requests = []
    clock = 0.0
    for rid in range(cfg.request_count):
        clock += float(rng.exponential(1.0 / cfg.arrival_rate))
        complexity = max(1.0, float(rng.normal(cfg.complexity_mean, cfg.complexity_std)))
        service_class = int(rng.integers(0, cfg.service_classes))
        requests.append(
            DataRequest(
                rid=rid,
                arrival_ts=clock,
                ddl=cfg.deadline,
                complexity=complexity,
                service_class=service_class,
            )
        )
    return tuple(requests)


def sample_behavior(
    profile: OracleProfile,
    window: int,
    reputation: float,
    noise: float,
    rng: np.random.Generator,
    model: BehaviorModel,
    threshold: float,
) -> BehaviorLevel:
    """Draw the behavior the oracle exhibits on one request. With probability
    ``noise`` the draw is uniform over all levels instead of following the
    oracle's (possibly attack-overridden) distribution."""
    if noise > 0 and rng.random() < noise:
        return BehaviorLevel(int(rng.integers(0, len(BehaviorLevel))))
    dist = effective_distribution(profile, window, reputation, model, threshold)
    return BehaviorLevel(int(rng.choice(len(dist), p=dist)))


def dispatch(
    req: DataRequest,
    profile: OracleProfile,
    behavior: BehaviorLevel,
    queue_free: dict[str, float],
    model: BehaviorModel,
    rng: np.random.Generator,
    redirected: bool = False,
) -> ServiceRecord:
    """Serve one request FIFO on the oracle's queue. Minor harm inflates the
    execution time; moderate harm fails verification with the configured
    probability; severe harm always fails verification."""
    start = max(req.arrival_ts, queue_free.get(profile.oid, 0.0))
    exe = req.complexity / profile.performance
    if behavior is BehaviorLevel.MINOR_HARM:
        exe *= model.minor_exe_inflation
    finish = start + exe
    queue_free[profile.oid] = finish
    if behavior is BehaviorLevel.SAFE or behavior is BehaviorLevel.MINOR_HARM:
        verified = True
    elif behavior is BehaviorLevel.MODERATE_HARM:
        verified = not (rng.random() < model.moderate_unverified_prob)
    else:
        verified = False
    return ServiceRecord(
        rid=req.rid,
        oid=profile.oid,
        arrival_ts=req.arrival_ts,
        start_ts=start,
        finish_ts=finish,
        exe_time=exe,
        response_time=finish - req.arrival_ts,
        behavior=behavior,
        verified=verified,
        cost=profile.cost,
        service_matched=profile.service_class == req.service_class,
        redirected=redirected,
    )


def compute_reward(rec: ServiceRecord, reputation: float, w: RewardWeights) -> float:
    """Step reward: cheap oracles scale up the timeliness ratio, reputation
    adds on top, and a service-class mismatch pays a flat penalty."""
    gain = (1.0 + w.theta * math.exp(w.lam - rec.cost)) * (rec.exe_time / rec.response_time)
    penalty = 0.0 if rec.service_matched else 1.0
    return gain + reputation - w.mu * penalty


@dataclass
class EnvState:
    """Snapshot the agent sees before picking an oracle. Raw per-oracle
    arrays are ordered like the scenario roster; ``vector`` is the
    normalized flat encoding fed to the value network."""

    rid: int
    complexity: float
    ddl: float
    service_class: int
    clock: float
    reputations: np.ndarray
    costs: np.ndarray
    waits: np.ndarray
    performances: np.ndarray
    service_classes: np.ndarray
    trusted: np.ndarray
    matches: np.ndarray
    vector: np.ndarray


@dataclass
class StepOutcome:
    reward: float
    state: EnvState | None     # observation for the next request; None when done
    record: ServiceRecord
    done: bool
    success: bool
    redirected: bool
    window_closed: bool


class OracleEnv:
    """Simulation environment; actions index the scenario roster."""

    def __init__(self, cfg: ScenarioConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng
        self.profiles = list(cfg.oracles)
        self.oracle_ids = [p.oid for p in self.profiles]
        self.engine = ReputationEngine(
            self.oracle_ids,
            {p.oid: p.stake for p in self.profiles},
            cfg.trust,
            cfg.window,
            cfg.deadline,
        )
        self.requests = generate_requests(cfg, rng)
        self.queue_free = {oid: 0.0 for oid in self.oracle_ids}
        self.t = 0
        self.records: list[ServiceRecord] = []
        self.successes: list[bool] = []
        self._costs = np.array([p.cost for p in self.profiles])
        self._performances = np.array([p.performance for p in self.profiles])
        self._classes = np.array([p.service_class for p in self.profiles])
        cost_min, cost_max = float(self._costs.min()), float(self._costs.max())
        self._cost_span = cost_max - cost_min
        self._cost_min = cost_min
        perf_min, perf_max = float(self._performances.min()), float(self._performances.max())
        self._perf_span = perf_max - perf_min
        self._perf_min = perf_min

    @property
    def action_count(self) -> int:
        return len(self.profiles)

    @property
    def state_size(self) -> int:
        return 2 + self.cfg.service_classes + 6 * len(self.profiles)

    @property
    def current_window(self) -> int:
        """1-based index of the window in progress."""
        return self.engine.window_index + 1

    def reset(self) -> EnvState:
        if self.t != 0:
            raise RuntimeError("environment cannot be reset mid-episode; build a fresh one")
        return self._observe(self.requests[0])

    def _observe(self, req: DataRequest) -> EnvState:
        m = len(self.profiles)
        reps = np.array([self.engine.reputations[oid] for oid in self.oracle_ids])
        waits = np.array(
            [max(0.0, self.queue_free[oid] - req.arrival_ts) for oid in self.oracle_ids]
        )
        trusted = np.array([self.engine.is_trusted(oid) for oid in self.oracle_ids])
        matches = self._classes == req.service_class

        vec = np.empty(self.state_size)
        vec[0] = req.complexity / self.cfg.complexity_mean
        vec[1] = req.ddl / self.cfg.deadline
        one_hot = np.zeros(self.cfg.service_classes)
        one_hot[req.service_class] = 1.0
        vec[2 : 2 + self.cfg.service_classes] = one_hot
        per = vec[2 + self.cfg.service_classes :].reshape(m, 6)
        per[:, 0] = np.clip(reps, -REPUTATION_CLIP, REPUTATION_CLIP) / REPUTATION_CLIP
        if self._cost_span > 0:
            per[:, 1] = (self._costs - self._cost_min) / self._cost_span
        else:
            per[:, 1] = 0.0
        per[:, 2] = np.minimum(waits / req.ddl, 1.0)
        if self._perf_span > 0:
            per[:, 3] = (self._performances - self._perf_min) / self._perf_span
        else:
            per[:, 3] = 0.0
        per[:, 4] = matches
        per[:, 5] = trusted

        return EnvState(
            rid=req.rid,
            complexity=req.complexity,
            ddl=req.ddl,
            service_class=req.service_class,
            clock=req.arrival_ts,
            reputations=reps,
            costs=self._costs.copy(),
            waits=waits,
            performances=self._performances.copy(),
            service_classes=self._classes.copy(),
            trusted=trusted,
            matches=matches,
            vector=vec,
        )

    def _redirect(self, chosen: OracleProfile, service_class: int) -> OracleProfile:
        """Stand-in for a barred pick: the most reputable trusted oracle of
        the request's class, else the most reputable trusted oracle of any
        class, else the original pick."""
        trusted = [p for p in self.profiles if self.engine.is_trusted(p.oid)]
        same_class = [p for p in trusted if p.service_class == service_class]
        for pool in (same_class, trusted):
            if pool:
                return max(pool, key=lambda p: (self.engine.reputations[p.oid], -self.profiles.index(p)))
        return chosen

    def step(self, action: int) -> StepOutcome:
        if self.t >= len(self.requests):
            raise RuntimeError("episode is over")
        if not 0 <= action < len(self.profiles):
            raise ValueError(f"action {action} outside roster of {len(self.profiles)}")
        req = self.requests[self.t]
        chosen = self.profiles[action]
        executing = chosen
        redirected = False
        if self.cfg.enforce_threshold and not self.engine.is_trusted(chosen.oid):
            executing = self._redirect(chosen, req.service_class)
            redirected = executing.oid != chosen.oid

        behavior = sample_behavior(
            executing,
            self.current_window,
            self.engine.reputations[executing.oid],
            self.cfg.noise,
            self.rng,
            self.cfg.behavior,
            self.cfg.trust.threshold,
        )
        rec = dispatch(
            req, executing, behavior, self.queue_free, self.cfg.behavior, self.rng,
            redirected=redirected,
        )
        success = self.engine.record_service(rec)
        reward = compute_reward(rec, self.engine.reputations[executing.oid], self.cfg.reward)
        if redirected and rec.service_matched:
            # the redirect saved the request, but the agent's pick was bad
            reward -= self.cfg.reward.mu

        self.records.append(rec)
        self.successes.append(success)
        self.t += 1

        window_closed = self.t % self.cfg.requests_per_window == 0
        if window_closed:
            self.engine.close_current_window()

        done = self.t == len(self.requests)
        state = None if done else self._observe(self.requests[self.t])
        return StepOutcome(
            reward=reward,
            state=state,
            record=rec,
            done=done,
            success=success,
            redirected=redirected,
            window_closed=window_closed,
        )


RECORD_COLUMNS = [
    "rid", "oid", "arrival_ts", "start_ts", "finish_ts", "exe_time", "response_time",
    "behavior", "verified", "cost", "service_matched", "redirected", "success",
]


def write_records_csv(records: Sequence[ServiceRecord], deadline: float, path: str | Path) -> None:
    """Write the per-request service log; floats use repr so reads round-trip."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_COLUMNS)
        for rec in records:
            writer.writerow(
                [
                    rec.rid,
                    rec.oid,
                    repr(rec.arrival_ts),
                    repr(rec.start_ts),
                    repr(rec.finish_ts),
                    repr(rec.exe_time),
                    repr(rec.response_time),
                    rec.behavior.name,
                    int(rec.verified),
                    repr(rec.cost),
                    int(rec.service_matched),
                    int(rec.redirected),
                    int(request_success(rec.response_time, deadline, rec.verified)),
                ]
            )
