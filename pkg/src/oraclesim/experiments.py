"""Experiment drivers: single runs, comparisons, sweeps, attacks, window table.

Every driver is deterministic in (scenario, seed): the seed spawns separate
child streams for the environment and the agent, so the same pair always
replays the same episode. Sweeps never modify the scenario they were given;
each point gets a derived in-memory copy.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .agents import Feedback, OracleSelector, make_agent
from .domain import (
    AttackKind,
    BehaviorClass,
    OracleProfile,
    ScenarioConfig,
    TrustWeights,
    WindowConfig,
)
from .env import OracleEnv
from .metrics import RunReport, aggregate
from .nn import Mlp
from .trust import ReputationWindow, close_window

__all__ = [
    "EpisodeResult",
    "AttackResult",
    "WindowTableResult",
    "run_episode",
    "comparative",
    "sweep_noise",
    "sweep_malicious",
    "run_attack",
    "window_table",
    "unit_base_reputation",
    "train_agent",
    "evaluate_checkpoint",
    "DEFAULT_NOISE_LEVELS",
    "DEFAULT_MALICIOUS_COUNTS",
]

DEFAULT_NOISE_LEVELS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
DEFAULT_MALICIOUS_COUNTS = (0, 1, 2, 3)


@dataclass
class EpisodeResult:
    """One finished episode plus everything needed to report on it."""

    agent_name: str
    cfg: ScenarioConfig
    seed: int
    report: RunReport
    env: OracleEnv
    agent: OracleSelector
    step_rewards: list[float]


def _spawn_rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    env_stream, agent_stream = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(env_stream), np.random.default_rng(agent_stream)


def run_episode(
    cfg: ScenarioConfig,
    agent_name: str,
    seed: int | None = None,
    agent: OracleSelector | None = None,
    learn: bool = True,
) -> EpisodeResult:
    """Play one full episode. ``seed`` defaults to the scenario seed; pass
    ``agent`` to reuse a pre-built policy (e.g. a loaded checkpoint) and
    ``learn=False`` to skip feedback entirely (frozen evaluation)."""
    seed = cfg.seed if seed is None else seed
    env_rng, agent_rng = _spawn_rngs(seed)
    env = OracleEnv(cfg, env_rng)
    if agent is None:
        agent = make_agent(agent_name, env.state_size, env.action_count, cfg, agent_rng)
    index_of = {oid: i for i, oid in enumerate(env.oracle_ids)}

    state = env.reset()
    step_rewards: list[float] = []
    for _ in range(cfg.request_count):
        action = agent.select(state)
        out = env.step(action)
        step_rewards.append(out.reward)
        if learn:
            agent.observe(
                state,
                action,
                Feedback(
                    reward=out.reward,
                    next_vector=None if out.state is None else out.state.vector,
                    done=out.done,
                    executed=index_of[out.record.oid],
                    success=out.success,
                    cost=out.record.cost,
                ),
            )
        state = out.state

    report = aggregate(agent_name, cfg, env.records, env.successes, step_rewards,
                       env.engine.trace)
    return EpisodeResult(
        agent_name=agent_name,
        cfg=cfg,
        seed=seed,
        report=report,
        env=env,
        agent=agent,
        step_rewards=step_rewards,
    )


def comparative(
    cfg: ScenarioConfig, agent_names: tuple[str, ...], seed: int | None = None
) -> dict[str, EpisodeResult]:
    """Run each agent on the same scenario and seed (identical request
    streams; draws diverge only through the agents' choices)."""
    return {name: run_episode(cfg, name, seed) for name in agent_names}


def sweep_noise(
    cfg: ScenarioConfig,
    agent_names: tuple[str, ...],
    levels: tuple[float, ...] = DEFAULT_NOISE_LEVELS,
    seed: int | None = None,
) -> dict[float, dict[str, EpisodeResult]]:
    """Re-run the comparison at increasing behavior-noise levels."""
    out: dict[float, dict[str, EpisodeResult]] = {}
    for level in levels:
        point_cfg = replace(cfg, noise=level)
        out[level] = comparative(point_cfg, agent_names, seed)
    return out


def _with_malicious_count(cfg: ScenarioConfig, count: int) -> ScenarioConfig:
    """Derived scenario whose roster has ``count`` hostile oracles per
    service class. Costs, speeds, and stakes stay put; only dispositions are
    reassigned, keeping one flaky oracle per class and the rest dependable."""
    by_class: dict[int, list[OracleProfile]] = {}
    for p in cfg.oracles:
        by_class.setdefault(p.service_class, []).append(p)
    roster = []
    for sc in sorted(by_class):
        group = by_class[sc]
        if count >= len(group):
            raise ValueError(f"cannot make {count} of {len(group)} oracles hostile")
        for i, p in enumerate(group):
            if i < count:
                cls = BehaviorClass.MALICIOUS
            elif i == count:
                cls = BehaviorClass.BENIGN
            else:
                cls = BehaviorClass.TRUSTED
            roster.append(replace(p, behavior_class=cls, attack=None))
    return replace(cfg, oracles=tuple(roster))


def sweep_malicious(
    cfg: ScenarioConfig,
    agent_names: tuple[str, ...],
    counts: tuple[int, ...] = DEFAULT_MALICIOUS_COUNTS,
    seed: int | None = None,
) -> dict[int, dict[str, EpisodeResult]]:
    """Re-run the comparison with a growing number of hostile oracles per
    service class."""
    out: dict[int, dict[str, EpisodeResult]] = {}
    for count in counts:
        out[count] = comparative(_with_malicious_count(cfg, count), agent_names, seed)
    return out


# -- attacks ------------------------------------------------------------------


@dataclass
class AttackResult:
    attacker_oid: str
    attack_kind: AttackKind
    burst_window: int
    composite: EpisodeResult
    independent: EpisodeResult
    recovery_composite: int | None    # windows after the burst to re-cross the threshold
    recovery_independent: int | None
    recovery_ratio: float | None


def _find_attacker(cfg: ScenarioConfig) -> OracleProfile:
    attackers = [p for p in cfg.oracles if p.attack is not None]
    if len(attackers) != 1:
        raise ValueError(f"attack scenarios need exactly one attacker, found {len(attackers)}")
    return attackers[0]


def _first_hostile_window(profile: OracleProfile) -> int:
    policy = profile.attack
    if policy.kind is AttackKind.OOA:
        return policy.start_window + policy.on_windows
    return policy.start_window


def _recovery_windows(result: EpisodeResult, oid: str, burst: int, threshold: float) -> int | None:
    """Windows after the burst until the oracle's published reputation is
    back at or above the threshold; None if it never recovers in the run."""
    trace = result.report.reputation_trace
    col = result.report.oracle_ids.index(oid)
    for w in range(burst + 1, trace.shape[0] + 1):
        if trace[w - 1, col] >= threshold:
            return w - burst
    return None


def run_attack(cfg: ScenarioConfig, agent_name: str, seed: int | None = None) -> AttackResult:
    """Run the attack scenario twice with the same seed: once with the
    history-carrying window and once with the memoryless window of equal
    length, then measure how long the attacker stays barred in each."""
    attacker = _find_attacker(cfg)
    burst = _first_hostile_window(attacker)
    composite_cfg = replace(cfg, window=WindowConfig(cfg.window.length, "composite"))
    independent_cfg = replace(cfg, window=WindowConfig(cfg.window.length, "independent"))
    composite = run_episode(composite_cfg, agent_name, seed)
    independent = run_episode(independent_cfg, agent_name, seed)
    rec_c = _recovery_windows(composite, attacker.oid, burst, cfg.trust.threshold)
    rec_i = _recovery_windows(independent, attacker.oid, burst, cfg.trust.threshold)
    ratio = None
    if rec_c is not None and rec_i is not None and rec_i > 0:
        ratio = rec_c / rec_i
    return AttackResult(
        attacker_oid=attacker.oid,
        attack_kind=attacker.attack.kind,
        burst_window=burst,
        composite=composite,
        independent=independent,
        recovery_composite=rec_c,
        recovery_independent=rec_i,
        recovery_ratio=ratio,
    )


# -- window-length table --------------------------------------------------------


def unit_base_reputation(length: int, windows: int, chi: float) -> float:
    """Published reputation after ``windows`` closes with a constant base of
    1, isolating the window recurrence from the simulation."""
    rw = ReputationWindow(length)
    w = TrustWeights(chi=chi)
    value = 0.0
    for _ in range(windows):
        value = close_window(rw, 1.0, w)
    return value


@dataclass
class WindowTableResult:
    lengths: list[int]
    windows: int
    oracle_ids: list[str]
    unit_base: list[float]            # per length
    final_reputations: np.ndarray     # lengths x oracles
    episodes: dict[int, EpisodeResult]


def window_table(
    cfg: ScenarioConfig,
    agent_name: str = "round-robin",
    lengths: tuple[int, ...] = tuple(range(1, 11)),
    seed: int | None = None,
) -> WindowTableResult:
    """Replay the same episode under different window lengths and tabulate
    each oracle's final published reputation, alongside the constant-unit-base
    reference value for the same number of closed windows."""
    windows = cfg.request_count // cfg.requests_per_window
    finals = np.zeros((len(lengths), len(cfg.oracles)))
    unit = []
    episodes = {}
    for i, length in enumerate(lengths):
        point_cfg = replace(cfg, window=WindowConfig(length, cfg.window.mode))
        result = run_episode(point_cfg, agent_name, seed)
        episodes[length] = result
        finals[i] = result.report.reputation_trace[-1]
        unit.append(unit_base_reputation(length, windows, cfg.trust.chi))
    return WindowTableResult(
        lengths=list(lengths),
        windows=windows,
        oracle_ids=list(cfg.oracle_ids),
        unit_base=unit,
        final_reputations=finals,
        episodes=episodes,
    )


# -- training workflow ----------------------------------------------------------


def train_agent(cfg: ScenarioConfig, seed: int | None = None) -> EpisodeResult:
    """Train the value-learning agent for one episode."""
    return run_episode(cfg, "tco-drl", seed)


def evaluate_checkpoint(
    cfg: ScenarioConfig, network: Mlp, seed: int | None = None
) -> EpisodeResult:
    """Run a frozen, fully greedy policy from a trained network."""
    seed = cfg.seed if seed is None else seed
    _, agent_rng = _spawn_rngs(seed)
    probe = OracleEnv(cfg, np.random.default_rng(0))
    expected = [probe.state_size, *cfg.dqn.hidden_sizes, probe.action_count]
    if list(network.layer_sizes) != expected:
        raise ValueError(
            f"checkpoint architecture {list(network.layer_sizes)} does not fit "
            f"this scenario (expected {expected})"
        )
    agent = make_agent("tco-drl", probe.state_size, probe.action_count, cfg, agent_rng)
    agent.online.copy_from(network)
    agent.target.copy_from(network)
    agent.epsilon = 0.0
    return run_episode(cfg, "tco-drl", seed, agent=agent, learn=False)
