"""Core value types, scenario configuration, and scenario-file validation.

Every other module consumes these types. A scenario is a single JSON document;
``validate_scenario`` fills defaults, checks invariants, and reports violations
with the offending field path. The documented schema lives in the README.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

WEIGHT_SUM_TOL = 1e-9

# Stream labels for SeedSequence spawn keys, so the roster draw and the run
# draws never share a stream even when the integer seeds collide.
ROSTER_STREAM = 101


class BehaviorLevel(Enum):
    """Severity of one exhibited behavior, ordered least to most harmful."""

    SAFE = 0
    MINOR_HARM = 1
    MODERATE_HARM = 2
    SEVERE_HARM = 3


class BehaviorClass(Enum):
    """An oracle's long-run disposition; selects its behavior distribution."""

    TRUSTED = "trusted"
    BENIGN = "benign"
    MALICIOUS = "malicious"


class AttackKind(Enum):
    ME = "me"    # hostile to every requester
    OOA = "ooa"  # alternates honest and hostile phases
    OSA = "osa"  # hostile only while its reputation is comfortable


class ScenarioError(ValueError):
    """Scenario validation failure; ``path`` points at the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class AttackPolicy:
    """Behavior-policy override for one oracle; fields depend on ``kind``.

    ME uses start_window/duration (duration None = active forever).
    OOA cycles on_windows honest then off_windows hostile, starting at
    window 1 with the honest phase; after ``cycles`` full cycles (None =
    unlimited) the node stays honest.
    OSA activates at start_window: honest whenever reputation has sunk to
    threshold + trigger_margin or below, stealth-hostile otherwise.
    """

    kind: AttackKind
    start_window: int = 1
    duration: int | None = None
    on_windows: int = 2
    off_windows: int = 1
    cycles: int | None = None
    trigger_margin: float = 0.5
    stealth_severe: float = 0.02

    def __post_init__(self):
        if self.start_window < 1:
            raise ValueError("attack start_window must be >= 1")
        if self.duration is not None and self.duration < 1:
            raise ValueError("attack duration must be >= 1")
        if self.kind is AttackKind.OOA and (self.on_windows < 1 or self.off_windows < 1):
            raise ValueError("OOA on/off window counts must be >= 1")
        if self.cycles is not None and self.cycles < 1:
            raise ValueError("OOA cycles must be >= 1")
        if self.trigger_margin < 0:
            raise ValueError("OSA trigger_margin must be >= 0")
        if not 0.0 <= self.stealth_severe <= 1.0:
            raise ValueError("OSA stealth_severe must lie in [0, 1]")


@dataclass(frozen=True)
class OracleProfile:
    """Static description of one oracle node; reputation lives in the engine."""

    oid: str
    service_class: int
    cost: float
    performance: float
    stake: float
    behavior_class: BehaviorClass
    attack: AttackPolicy | None = None

    def __post_init__(self):
        if self.cost <= 0:
            raise ValueError(f"oracle {self.oid}: cost must be positive")
        if self.performance <= 0:
            raise ValueError(f"oracle {self.oid}: performance must be positive")
        if self.stake < 0:
            raise ValueError(f"oracle {self.oid}: stake must be >= 0")


@dataclass(frozen=True)
class DataRequest:
    rid: int
    arrival_ts: float
    ddl: float            # relative deadline, seconds
    complexity: float     # work units
    service_class: int

    def __post_init__(self):
        if self.ddl <= 0:
            raise ValueError(f"request {self.rid}: ddl must be positive")
        if self.complexity <= 0:
            raise ValueError(f"request {self.rid}: complexity must be positive")


@dataclass(frozen=True)
class ServiceRecord:
    """Outcome of one request/oracle interaction."""

    rid: int
    oid: str
    arrival_ts: float
    start_ts: float
    finish_ts: float
    exe_time: float        # finish - start
    response_time: float   # finish - arrival
    behavior: BehaviorLevel
    verified: bool
    cost: float
    service_matched: bool
    redirected: bool = False

    def __post_init__(self):
        if not (self.finish_ts >= self.start_ts >= self.arrival_ts):
            raise ValueError(f"record {self.rid}: timestamps out of order")
        if self.response_time < self.exe_time - 1e-12:
            raise ValueError(f"record {self.rid}: response time below execution time")


@dataclass(frozen=True)
class TrustWeights:
    """Weights, harm scores, and thresholds for the reputation engine."""

    omega: float = 0.2    # relative response frequency
    phi: float = 0.4      # success rate
    psi: float = 0.4      # deadline efficiency
    xi: float = 0.4       # reliability
    zeta: float = 0.4     # behavior penalty
    delta: float = 0.2    # token stake
    chi: float = 0.6      # time-factor weight
    harm_scores: tuple[float, float, float, float] = (0.0, 1.0, 5.0, 100.0)
    threshold: float = -1.5
    initial_reputation: float = 0.5

    def __post_init__(self):
        if abs(self.omega + self.phi + self.psi - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError("reliability weights must sum to 1")
        if abs(self.xi + self.zeta + self.delta - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError("base reputation weights must sum to 1")
        if self.chi <= 0:
            raise ValueError("time-factor weight chi must be positive")
        hs = self.harm_scores
        if not (hs[0] <= hs[1] <= hs[2] <= hs[3]):
            raise ValueError("harm scores must be non-decreasing by severity")

    def harm_score(self, level: BehaviorLevel) -> float:
        return self.harm_scores[level.value]


@dataclass(frozen=True)
class RewardWeights:
    theta: float = 2.5   # cost-sensitivity gain
    lam: float = 1.5     # cost offset inside the exponential
    mu: float = 4.0      # service mismatch penalty

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("mismatch penalty mu must be >= 0")


@dataclass(frozen=True)
class WindowConfig:
    length: int = 5
    mode: str = "composite"   # "composite" carries history forward; "independent" is memoryless

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("window length must be >= 1")
        if self.mode not in ("composite", "independent"):
            raise ValueError("window mode must be 'composite' or 'independent'")


@dataclass(frozen=True)
class DqnConfig:
    replay_capacity: int = 800
    batch_size: int = 30
    learning_rate: float = 0.01
    discount: float = 0.9
    epsilon_start: float = 1.0
    epsilon_decay: float = 0.995
    epsilon_floor: float = 0.01
    learn_every: int = 4
    target_sync_every: int = 100
    hidden_sizes: tuple[int, ...] = (64, 64)

    def __post_init__(self):
        if not 0 < self.batch_size <= self.replay_capacity:
            raise ValueError("batch_size must lie in (0, replay_capacity]")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError("discount must lie in [0, 1]")
        if not 0.0 <= self.epsilon_floor <= self.epsilon_start <= 1.0:
            raise ValueError("epsilon schedule must satisfy 0 <= floor <= start <= 1")
        if self.learn_every < 1 or self.target_sync_every < 1:
            raise ValueError("learn_every and target_sync_every must be >= 1")


@dataclass(frozen=True)
class PsgConfig:
    top_q: int = 3

    def __post_init__(self):
        if self.top_q < 1:
            raise ValueError("top_q must be >= 1")


# Default per-class behavior distributions, ordered (Safe, Minor, Moderate, Severe).
DEFAULT_DISTRIBUTIONS: dict[BehaviorClass, tuple[float, float, float, float]] = {
    BehaviorClass.TRUSTED: (0.95, 0.05, 0.00, 0.00),
    BehaviorClass.BENIGN: (0.85, 0.12, 0.03, 0.00),
    BehaviorClass.MALICIOUS: (0.55, 0.20, 0.15, 0.10),
}

DEFAULT_ME_DISTRIBUTION = (0.10, 0.20, 0.30, 0.40)


def _check_distribution(dist: tuple[float, ...], path: str) -> tuple[float, float, float, float]:
    if len(dist) != 4:
        raise ScenarioError(path, "behavior distribution needs exactly 4 entries")
    if any(p < 0 for p in dist):
        raise ScenarioError(path, "behavior probabilities must be >= 0")
    if abs(sum(dist) - 1.0) > WEIGHT_SUM_TOL:
        raise ScenarioError(path, "behavior distribution must sum to 1")
    return tuple(float(p) for p in dist)


@dataclass(frozen=True)
class BehaviorModel:
    """Per-class behavior distributions plus the verification side effects."""

    distributions: dict[BehaviorClass, tuple[float, float, float, float]] = field(
        default_factory=lambda: dict(DEFAULT_DISTRIBUTIONS)
    )
    me_distribution: tuple[float, float, float, float] = DEFAULT_ME_DISTRIBUTION
    moderate_unverified_prob: float = 0.7
    minor_exe_inflation: float = 1.5

    def __post_init__(self):
        for cls in BehaviorClass:
            if cls not in self.distributions:
                raise ValueError(f"missing behavior distribution for {cls.value}")
        if not 0.0 <= self.moderate_unverified_prob <= 1.0:
            raise ValueError("moderate_unverified_prob must lie in [0, 1]")
        if self.minor_exe_inflation < 1.0:
            raise ValueError("minor_exe_inflation must be >= 1")

    def distribution(self, cls: BehaviorClass) -> tuple[float, float, float, float]:
        return self.distributions[cls]


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully validated simulation scenario; immutable after validation."""

    seed: int = 1
    request_count: int = 6000
    arrival_rate: float = 2.0      # requests per second
    deadline: float = 10.0         # relative deadline for every request, seconds
    complexity_mean: float = 6000.0
    complexity_std: float = 500.0
    service_classes: int = 3
    requests_per_window: int = 120
    noise: float = 0.0
    enforce_threshold: bool = False
    window: WindowConfig = field(default_factory=WindowConfig)
    trust: TrustWeights = field(default_factory=TrustWeights)
    reward: RewardWeights = field(default_factory=RewardWeights)
    dqn: DqnConfig = field(default_factory=DqnConfig)
    psg: PsgConfig = field(default_factory=PsgConfig)
    behavior: BehaviorModel = field(default_factory=BehaviorModel)
    oracles: tuple[OracleProfile, ...] = ()

    def __post_init__(self):
        if self.request_count < 1:
            raise ValueError("request_count must be >= 1")
        if self.arrival_rate <= 0:
            raise ValueError("arrival rate must be positive")
        if self.deadline <= 0:
            raise ValueError("deadline must be positive")
        if self.complexity_mean <= 0 or self.complexity_std < 0:
            raise ValueError("complexity distribution parameters out of range")
        if self.service_classes < 1:
            raise ValueError("service_classes must be >= 1")
        if self.requests_per_window < 1:
            raise ValueError("requests_per_window must be >= 1")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise fraction must lie in [0, 1]")
        if not self.oracles:
            object.__setattr__(
                self, "oracles", default_roster(self.seed, self.service_classes)
            )
        oids = [o.oid for o in self.oracles]
        if len(set(oids)) != len(oids):
            raise ValueError("oracle ids must be unique")
        for o in self.oracles:
            if not 0 <= o.service_class < self.service_classes:
                raise ValueError(f"oracle {o.oid}: unknown service class {o.service_class}")

    @property
    def oracle_ids(self) -> list[str]:
        return [o.oid for o in self.oracles]

    def oracle(self, oid: str) -> OracleProfile:
        for o in self.oracles:
            if o.oid == oid:
                return o
        raise KeyError(f"unknown oracle id {oid!r}")


def default_roster(seed: int, service_classes: int, per_class: int = 5) -> tuple[OracleProfile, ...]:
    """Synthesize the default community: per service class, 3 dependable
    nodes, 1 flaky node, 1 hostile node. Performance ~ Normal(1000, 150)
    clipped at 200 work units/s; cost ~ Uniform(0.1, 1.0) with dependable
    nodes drawn from the upper half (reliability prices at a premium);
    stake fixed at 100 tokens. Deterministic in the scenario seed."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(ROSTER_STREAM,)))
    class_mix = (
        [BehaviorClass.TRUSTED] * 3 + [BehaviorClass.BENIGN] + [BehaviorClass.MALICIOUS]
    )
    if per_class != len(class_mix):
        raise ValueError("default roster supports exactly 5 oracles per class")
    profiles = []
    idx = 0
    for sc in range(service_classes):
        for cls in class_mix:
            performance = float(max(200.0, rng.normal(1000.0, 150.0)))
            if cls is BehaviorClass.TRUSTED:
                cost = float(rng.uniform(0.55, 1.0))
            else:
                cost = float(rng.uniform(0.1, 1.0))
            profiles.append(
                OracleProfile(
                    oid=f"o{idx:02d}",
                    service_class=sc,
                    cost=round(cost, 4),
                    performance=round(performance, 2),
                    stake=100.0,
                    behavior_class=cls,
                )
            )
            idx += 1
    return tuple(profiles)


# ---------------------------------------------------------------------------
# Scenario document parsing


def _expect_mapping(raw: Any, path: str) -> dict:
    if not isinstance(raw, dict):
        raise ScenarioError(path, f"expected an object, got {type(raw).__name__}")
    return raw


def _get_number(raw: dict, key: str, default: float, path: str) -> float:
    value = raw.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}.{key}", "expected a number")
    return float(value)


def _get_int(raw: dict, key: str, default: int, path: str) -> int:
    value = raw.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{path}.{key}", "expected an integer")
    return value


def _get_opt_int(raw: dict, key: str, default: int | None, path: str) -> int | None:
    value = raw.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{path}.{key}", "expected an integer or null")
    return value


def _known_keys(raw: dict, allowed: set[str], path: str) -> None:
    unknown = set(raw) - allowed
    if unknown:
        raise ScenarioError(f"{path}.{sorted(unknown)[0]}", "unknown field")


def _parse_attack(raw: Any, path: str) -> AttackPolicy | None:
    if raw is None:
        return None
    raw = _expect_mapping(raw, path)
    kind_name = raw.get("kind")
    try:
        kind = AttackKind(kind_name)
    except ValueError:
        raise ScenarioError(f"{path}.kind", f"unknown attack policy name {kind_name!r}") from None
    _known_keys(
        raw,
        {"kind", "start_window", "duration", "on_windows", "off_windows", "cycles",
         "trigger_margin", "stealth_severe"},
        path,
    )
    try:
        return AttackPolicy(
            kind=kind,
            start_window=_get_int(raw, "start_window", 1, path),
            duration=_get_opt_int(raw, "duration", None, path),
            on_windows=_get_int(raw, "on_windows", 2, path),
            off_windows=_get_int(raw, "off_windows", 1, path),
            cycles=_get_opt_int(raw, "cycles", None, path),
            trigger_margin=_get_number(raw, "trigger_margin", 0.5, path),
            stealth_severe=_get_number(raw, "stealth_severe", 0.02, path),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from None


def _parse_oracle(raw: Any, path: str) -> OracleProfile:
    raw = _expect_mapping(raw, path)
    _known_keys(
        raw,
        {"oid", "service_class", "cost", "performance", "stake", "behavior_class", "attack"},
        path,
    )
    oid = raw.get("oid")
    if not isinstance(oid, str) or not oid:
        raise ScenarioError(f"{path}.oid", "expected a non-empty string")
    cls_name = raw.get("behavior_class", "trusted")
    try:
        cls = BehaviorClass(cls_name)
    except ValueError:
        raise ScenarioError(
            f"{path}.behavior_class", f"unknown behavior class {cls_name!r}"
        ) from None
    try:
        return OracleProfile(
            oid=oid,
            service_class=_get_int(raw, "service_class", 0, path),
            cost=_get_number(raw, "cost", 0.5, path),
            performance=_get_number(raw, "performance", 1000.0, path),
            stake=_get_number(raw, "stake", 100.0, path),
            behavior_class=cls,
            attack=_parse_attack(raw.get("attack"), f"{path}.attack"),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from None


def validate_scenario(raw: Any) -> ScenarioConfig:
    """Validate a parsed scenario document, filling documented defaults.

    Raises ScenarioError with the offending field path on any violation.
    An empty document yields the default scenario.
    """
    raw = _expect_mapping(raw, "scenario")
    _known_keys(
        raw,
        {"seed", "request_count", "arrival_rate", "deadline", "complexity_mean",
         "complexity_std", "service_classes", "requests_per_window", "noise",
         "enforce_threshold", "window", "trust", "reward", "dqn", "psg", "behavior",
         "oracles"},
        "scenario",
    )

    t = _expect_mapping(raw.get("trust", {}), "trust")
    _known_keys(
        t,
        {"omega", "phi", "psi", "xi", "zeta", "delta", "chi", "harm_scores",
         "threshold", "initial_reputation"},
        "trust",
    )
    harm_raw = t.get("harm_scores", [0.0, 1.0, 5.0, 100.0])
    if not isinstance(harm_raw, (list, tuple)) or len(harm_raw) != 4:
        raise ScenarioError("trust.harm_scores", "expected a list of 4 numbers")
    try:
        trust = TrustWeights(
            omega=_get_number(t, "omega", 0.2, "trust"),
            phi=_get_number(t, "phi", 0.4, "trust"),
            psi=_get_number(t, "psi", 0.4, "trust"),
            xi=_get_number(t, "xi", 0.4, "trust"),
            zeta=_get_number(t, "zeta", 0.4, "trust"),
            delta=_get_number(t, "delta", 0.2, "trust"),
            chi=_get_number(t, "chi", 0.6, "trust"),
            harm_scores=tuple(float(h) for h in harm_raw),
            threshold=_get_number(t, "threshold", -1.5, "trust"),
            initial_reputation=_get_number(t, "initial_reputation", 0.5, "trust"),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError("trust", str(exc)) from None

    r = _expect_mapping(raw.get("reward", {}), "reward")
    _known_keys(r, {"theta", "lambda", "mu"}, "reward")
    try:
        reward = RewardWeights(
            theta=_get_number(r, "theta", 2.5, "reward"),
            lam=_get_number(r, "lambda", 1.5, "reward"),
            mu=_get_number(r, "mu", 4.0, "reward"),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError("reward", str(exc)) from None

    w = _expect_mapping(raw.get("window", {}), "window")
    _known_keys(w, {"length", "mode"}, "window")
    mode = w.get("mode", "composite")
    if not isinstance(mode, str):
        raise ScenarioError("window.mode", "expected a string")
    try:
        window = WindowConfig(length=_get_int(w, "length", 5, "window"), mode=mode)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError("window", str(exc)) from None

    d = _expect_mapping(raw.get("dqn", {}), "dqn")
    _known_keys(
        d,
        {"replay_capacity", "batch_size", "learning_rate", "discount", "epsilon_start",
         "epsilon_decay", "epsilon_floor", "learn_every", "target_sync_every",
         "hidden_sizes"},
        "dqn",
    )
    hidden_raw = d.get("hidden_sizes", [64, 64])
    if not isinstance(hidden_raw, (list, tuple)) or not all(
        isinstance(h, int) and not isinstance(h, bool) and h > 0 for h in hidden_raw
    ):
        raise ScenarioError("dqn.hidden_sizes", "expected a list of positive integers")
    try:
        dqn = DqnConfig(
            replay_capacity=_get_int(d, "replay_capacity", 800, "dqn"),
            batch_size=_get_int(d, "batch_size", 30, "dqn"),
            learning_rate=_get_number(d, "learning_rate", 0.01, "dqn"),
            discount=_get_number(d, "discount", 0.9, "dqn"),
            epsilon_start=_get_number(d, "epsilon_start", 1.0, "dqn"),
            epsilon_decay=_get_number(d, "epsilon_decay", 0.995, "dqn"),
            epsilon_floor=_get_number(d, "epsilon_floor", 0.01, "dqn"),
            learn_every=_get_int(d, "learn_every", 4, "dqn"),
            target_sync_every=_get_int(d, "target_sync_every", 100, "dqn"),
            hidden_sizes=tuple(hidden_raw),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError("dqn", str(exc)) from None

    p = _expect_mapping(raw.get("psg", {}), "psg")
    _known_keys(p, {"top_q"}, "psg")
    try:
        psg = PsgConfig(top_q=_get_int(p, "top_q", 3, "psg"))
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError("psg", str(exc)) from None

    b = _expect_mapping(raw.get("behavior", {}), "behavior")
    _known_keys(
        b,
        {"distributions", "me_distribution", "moderate_unverified_prob",
         "minor_exe_inflation"},
        "behavior",
    )
    dists_raw = _expect_mapping(b.get("distributions", {}), "behavior.distributions")
    _known_keys(dists_raw, {c.value for c in BehaviorClass}, "behavior.distributions")
    distributions = dict(DEFAULT_DISTRIBUTIONS)
    for cls in BehaviorClass:
        if cls.value in dists_raw:
            entry = dists_raw[cls.value]
            if not isinstance(entry, (list, tuple)):
                raise ScenarioError(
                    f"behavior.distributions.{cls.value}", "expected a list of 4 numbers"
                )
            distributions[cls] = _check_distribution(
                tuple(entry), f"behavior.distributions.{cls.value}"
            )
    me_raw = b.get("me_distribution", DEFAULT_ME_DISTRIBUTION)
    if not isinstance(me_raw, (list, tuple)):
        raise ScenarioError("behavior.me_distribution", "expected a list of 4 numbers")
    try:
        behavior = BehaviorModel(
            distributions=distributions,
            me_distribution=_check_distribution(tuple(me_raw), "behavior.me_distribution"),
            moderate_unverified_prob=_get_number(b, "moderate_unverified_prob", 0.7, "behavior"),
            minor_exe_inflation=_get_number(b, "minor_exe_inflation", 1.5, "behavior"),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError("behavior", str(exc)) from None

    oracles_raw = raw.get("oracles")
    oracles: tuple[OracleProfile, ...] = ()
    if oracles_raw is not None:
        if not isinstance(oracles_raw, list):
            raise ScenarioError("oracles", "expected a list")
        oracles = tuple(
            _parse_oracle(o, f"oracles[{i}]") for i, o in enumerate(oracles_raw)
        )

    try:
        return ScenarioConfig(
            seed=_get_int(raw, "seed", 1, "scenario"),
            request_count=_get_int(raw, "request_count", 6000, "scenario"),
            arrival_rate=_get_number(raw, "arrival_rate", 2.0, "scenario"),
            deadline=_get_number(raw, "deadline", 10.0, "scenario"),
            complexity_mean=_get_number(raw, "complexity_mean", 6000.0, "scenario"),
            complexity_std=_get_number(raw, "complexity_std", 500.0, "scenario"),
            service_classes=_get_int(raw, "service_classes", 3, "scenario"),
            requests_per_window=_get_int(raw, "requests_per_window", 120, "scenario"),
            noise=_get_number(raw, "noise", 0.0, "scenario"),
            enforce_threshold=bool(raw.get("enforce_threshold", False)),
            window=window,
            trust=trust,
            reward=reward,
            dqn=dqn,
            psg=psg,
            behavior=behavior,
            oracles=oracles,
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError("scenario", str(exc)) from None


def _attack_to_dict(a: AttackPolicy) -> dict:
    out: dict[str, Any] = {"kind": a.kind.value}
    if a.kind is AttackKind.ME:
        out["start_window"] = a.start_window
        out["duration"] = a.duration
    elif a.kind is AttackKind.OOA:
        out["on_windows"] = a.on_windows
        out["off_windows"] = a.off_windows
        out["cycles"] = a.cycles
    else:
        out["start_window"] = a.start_window
        out["trigger_margin"] = a.trigger_margin
        out["stealth_severe"] = a.stealth_severe
    return out


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    """Serialize to the JSON schema; validate(scenario_to_dict(cfg)) == cfg."""
    return {
        "seed": cfg.seed,
        "request_count": cfg.request_count,
        "arrival_rate": cfg.arrival_rate,
        "deadline": cfg.deadline,
        "complexity_mean": cfg.complexity_mean,
        "complexity_std": cfg.complexity_std,
        "service_classes": cfg.service_classes,
        "requests_per_window": cfg.requests_per_window,
        "noise": cfg.noise,
        "enforce_threshold": cfg.enforce_threshold,
        "window": {"length": cfg.window.length, "mode": cfg.window.mode},
        "trust": {
            "omega": cfg.trust.omega,
            "phi": cfg.trust.phi,
            "psi": cfg.trust.psi,
            "xi": cfg.trust.xi,
            "zeta": cfg.trust.zeta,
            "delta": cfg.trust.delta,
            "chi": cfg.trust.chi,
            "harm_scores": list(cfg.trust.harm_scores),
            "threshold": cfg.trust.threshold,
            "initial_reputation": cfg.trust.initial_reputation,
        },
        "reward": {"theta": cfg.reward.theta, "lambda": cfg.reward.lam, "mu": cfg.reward.mu},
        "dqn": {
            "replay_capacity": cfg.dqn.replay_capacity,
            "batch_size": cfg.dqn.batch_size,
            "learning_rate": cfg.dqn.learning_rate,
            "discount": cfg.dqn.discount,
            "epsilon_start": cfg.dqn.epsilon_start,
            "epsilon_decay": cfg.dqn.epsilon_decay,
            "epsilon_floor": cfg.dqn.epsilon_floor,
            "learn_every": cfg.dqn.learn_every,
            "target_sync_every": cfg.dqn.target_sync_every,
            "hidden_sizes": list(cfg.dqn.hidden_sizes),
        },
        "psg": {"top_q": cfg.psg.top_q},
        "behavior": {
            "distributions": {
                cls.value: list(cfg.behavior.distributions[cls]) for cls in BehaviorClass
            },
            "me_distribution": list(cfg.behavior.me_distribution),
            "moderate_unverified_prob": cfg.behavior.moderate_unverified_prob,
            "minor_exe_inflation": cfg.behavior.minor_exe_inflation,
        },
        "oracles": [
            {
                "oid": o.oid,
                "service_class": o.service_class,
                "cost": o.cost,
                "performance": o.performance,
                "stake": o.stake,
                "behavior_class": o.behavior_class.value,
                "attack": None if o.attack is None else _attack_to_dict(o.attack),
            }
            for o in cfg.oracles
        ],
    }


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Load and validate a scenario JSON file."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("scenario", f"invalid JSON: {exc}") from None
    return validate_scenario(raw)


def save_scenario(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(cfg), indent=2, sort_keys=True) + "\n")


def with_overrides(cfg: ScenarioConfig, **kwargs) -> ScenarioConfig:
    """Functional update helper used by sweeps; same validation as construction."""
    return replace(cfg, **kwargs)
