"""Oracle-selection policies: value-learning agent and three baselines.

Agents see the observation the environment built, pick a roster index, and
receive feedback after the step. The value-learning agent trains a small
network against a slow-moving copy of itself on replayed transitions; the
baselines are round-robin rotation, Thompson sampling over success odds per
unit cost, and a one-step reward predictor with a cheapest-positive shortlist.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass

import numpy as np

from .domain import DqnConfig, PsgConfig, RewardWeights, ScenarioConfig
from .nn import Mlp

__all__ = [
    "Feedback",
    "Transition",
    "ReplayMemory",
    "OracleSelector",
    "DqnAgent",
    "RoundRobinAgent",
    "BlorAgent",
    "PsgAgent",
    "psg_predict_rewards",
    "make_agent",
    "AGENT_NAMES",
]

log = logging.getLogger(__name__)

AGENT_NAMES = ("tco-drl", "round-robin", "blor", "psg")


@dataclass
class Feedback:
    """What an agent learns after one step."""

    reward: float
    next_vector: np.ndarray | None   # None on the final step
    done: bool
    executed: int                    # roster index that actually served
    success: bool
    cost: float


@dataclass
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


class ReplayMemory:
    """Bounded FIFO of transitions with uniform sampling, no replacement."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.buffer: deque[Transition] = deque(maxlen=capacity)

    def push(self, transition: Transition) -> None:
        self.buffer.append(transition)

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        if batch_size > len(self.buffer):
            raise ValueError(f"cannot sample {batch_size} from {len(self.buffer)} transitions")
        idx = rng.choice(len(self.buffer), size=batch_size, replace=False)
        return [self.buffer[i] for i in idx]

    def __len__(self) -> int:
        return len(self.buffer)


class OracleSelector:
    """Base policy interface; ``state`` is the environment observation."""

    name = "base"

    def select(self, state) -> int:
        raise NotImplementedError

    def observe(self, state, action: int, feedback: Feedback) -> None:
        """Feedback hook; policies that do not learn ignore it."""


class RoundRobinAgent(OracleSelector):
    """Cycles through the roster regardless of state."""

    name = "round-robin"

    def __init__(self, action_count: int):
        if action_count < 1:
            raise ValueError("need at least one oracle")
        self.action_count = action_count
        self._next = 0

    def select(self, state) -> int:
        action = self._next
        self._next = (self._next + 1) % self.action_count
        return action


class DqnAgent(OracleSelector):
    """Epsilon-greedy value learner with replay and a target network."""

    name = "tco-drl"

    def __init__(self, state_size: int, action_count: int, cfg: DqnConfig,
                 rng: np.random.Generator):
        self.cfg = cfg
        self.action_count = action_count
        self.rng = rng
        sizes = [state_size, *cfg.hidden_sizes, action_count]
        self.online = Mlp(sizes, rng)
        self.target = self.online.clone()
        self.memory = ReplayMemory(cfg.replay_capacity)
        self.epsilon = cfg.epsilon_start
        self.steps = 0        # observe() calls
        self.learn_steps = 0
        self.last_loss: float | None = None

    def greedy_action(self, vector: np.ndarray) -> int:
        return int(np.argmax(self.online.forward(vector)))

    def select(self, state) -> int:
        if self.rng.random() < self.epsilon:
            return int(self.rng.integers(0, self.action_count))
        return self.greedy_action(state.vector)

    def observe(self, state, action: int, feedback: Feedback) -> None:
        next_vec = (
            np.zeros(self.online.input_size)
            if feedback.next_vector is None
            else np.asarray(feedback.next_vector, dtype=float)
        )
        self.memory.push(
            Transition(
                state=np.asarray(state.vector, dtype=float).copy(),
                action=int(action),
                reward=float(feedback.reward),
                next_state=next_vec.copy(),
                done=feedback.done,
            )
        )
        self.steps += 1
        if self.steps % self.cfg.learn_every == 0 and len(self.memory) >= self.cfg.batch_size:
            self._learn()

    def _learn(self) -> None:
        batch = self.memory.sample(self.cfg.batch_size, self.rng)
        states = np.stack([t.state for t in batch])
        actions = np.array([t.action for t in batch])
        rewards = np.array([t.reward for t in batch])
        next_states = np.stack([t.next_state for t in batch])
        not_done = np.array([0.0 if t.done else 1.0 for t in batch])

        next_best = self.target.forward_batch(next_states).max(axis=1)
        targets = rewards + self.cfg.discount * not_done * next_best
        predicted = self.online.forward_batch(states)[np.arange(len(batch)), actions]
        td_errors = targets - predicted
        loss = float(0.5 * np.mean(td_errors**2))
        if not np.isfinite(loss):
            raise RuntimeError(
                "training diverged: non-finite loss "
                f"(learn step {self.learn_steps + 1}, epsilon {self.epsilon:.4f}, "
                f"max |td| {np.max(np.abs(td_errors))!r})"
            )
        self.last_loss = loss
        grads = self.online.backward_batch(states, actions, td_errors)
        self.online.apply_update(grads, self.cfg.learning_rate)

        self.learn_steps += 1
        self.epsilon = max(self.cfg.epsilon_floor, self.epsilon * self.cfg.epsilon_decay)
        if self.learn_steps % self.cfg.target_sync_every == 0:
            self.target.copy_from(self.online)


class BlorAgent(OracleSelector):
    """Thompson sampling over per-oracle success odds scaled by mean cost.

    One round-robin pass warms every arm up, then each pick draws a Beta
    sample from the observed success/failure counts and takes the best
    sample-per-expected-cost. Feedback credits the oracle that actually
    served, which may differ from the pick when the simulator redirects."""

    name = "blor"

    def __init__(self, action_count: int, rng: np.random.Generator):
        if action_count < 1:
            raise ValueError("need at least one oracle")
        self.action_count = action_count
        self.rng = rng
        self.successes = np.zeros(action_count, dtype=int)
        self.failures = np.zeros(action_count, dtype=int)
        self.cost_total = np.zeros(action_count)
        self.cost_count = np.zeros(action_count, dtype=int)
        self._warmup = 0

    def select(self, state) -> int:
        if self._warmup < self.action_count:
            action = self._warmup
            self._warmup += 1
            return action
        samples = self.rng.beta(self.successes + 1, self.failures + 1)
        mean_cost = np.where(
            self.cost_count > 0, self.cost_total / np.maximum(self.cost_count, 1), 1.0
        )
        return int(np.argmax(samples / mean_cost))

    def observe(self, state, action: int, feedback: Feedback) -> None:
        i = feedback.executed
        if feedback.success:
            self.successes[i] += 1
        else:
            self.failures[i] += 1
        self.cost_total[i] += feedback.cost
        self.cost_count[i] += 1


def psg_predict_rewards(state, w: RewardWeights) -> np.ndarray:
    """One-step reward forecast per oracle from the current observation:
    execution time from complexity and speed, response time adds the queue
    wait, mismatches pay the flat penalty."""
    est_exe = state.complexity / state.performances
    ratio = est_exe / (state.waits + est_exe)
    gain = (1.0 + w.theta * np.exp(w.lam - state.costs)) * ratio
    penalty = np.where(state.matches, 0.0, 1.0)
    return gain + state.reputations - w.mu * penalty


class PsgAgent(OracleSelector):
    """Shortlists oracles forecast to pay a positive reward and picks
    uniformly among the cheapest few; falls back to the globally cheapest
    oracle when nothing is forecast positive."""

    name = "psg"

    def __init__(self, psg: PsgConfig, reward: RewardWeights, rng: np.random.Generator):
        self.psg = psg
        self.reward = reward
        self.rng = rng
        self.fallbacks = 0

    def select(self, state) -> int:
        forecast = psg_predict_rewards(state, self.reward)
        positive = np.flatnonzero(forecast > 0)
        if positive.size == 0:
            self.fallbacks += 1
            log.debug("no oracle forecast positive; falling back to cheapest")
            return int(np.argmin(state.costs))
        ranked = sorted(positive, key=lambda i: (state.costs[i], i))
        shortlist = ranked[: self.psg.top_q]
        return int(shortlist[self.rng.integers(0, len(shortlist))])


def make_agent(name: str, state_size: int, action_count: int, cfg: ScenarioConfig,
               rng: np.random.Generator) -> OracleSelector:
    if name == "tco-drl":
        return DqnAgent(state_size, action_count, cfg.dqn, rng)
    if name == "round-robin":
        return RoundRobinAgent(action_count)
    if name == "blor":
        return BlorAgent(action_count, rng)
    if name == "psg":
        return PsgAgent(cfg.psg, cfg.reward, rng)
    raise ValueError(f"unknown agent {name!r}; expected one of {', '.join(AGENT_NAMES)}")
