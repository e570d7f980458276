"""Discrete-event simulator for reputation-aware blockchain-oracle selection."""

__version__ = "0.1.0"

from .agents import (
    AGENT_NAMES,
    BlorAgent,
    DqnAgent,
    Feedback,
    PsgAgent,
    ReplayMemory,
    RoundRobinAgent,
    Transition,
    make_agent,
)
from .domain import (
    AttackKind,
    AttackPolicy,
    BehaviorClass,
    BehaviorLevel,
    BehaviorModel,
    DataRequest,
    DqnConfig,
    OracleProfile,
    PsgConfig,
    RewardWeights,
    ScenarioConfig,
    ScenarioError,
    ServiceRecord,
    TrustWeights,
    WindowConfig,
    default_roster,
    load_scenario,
    save_scenario,
    scenario_to_dict,
    validate_scenario,
    with_overrides,
)
from .env import OracleEnv, StepOutcome, write_records_csv
from .experiments import (
    AttackResult,
    EpisodeResult,
    WindowTableResult,
    comparative,
    evaluate_checkpoint,
    run_attack,
    run_episode,
    sweep_malicious,
    sweep_noise,
    train_agent,
    unit_base_reputation,
    window_table,
)
from .metrics import RunReport, aggregate, assignment_fractions, export_report, import_report
from .nn import Mlp, load_network, save_network
from .trust import ReputationEngine

__all__ = [
    "AGENT_NAMES",
    "AttackKind",
    "AttackPolicy",
    "AttackResult",
    "BehaviorClass",
    "BehaviorLevel",
    "BehaviorModel",
    "BlorAgent",
    "DataRequest",
    "DqnAgent",
    "DqnConfig",
    "EpisodeResult",
    "Feedback",
    "Mlp",
    "OracleEnv",
    "OracleProfile",
    "PsgAgent",
    "PsgConfig",
    "ReplayMemory",
    "ReputationEngine",
    "RewardWeights",
    "RoundRobinAgent",
    "RunReport",
    "ScenarioConfig",
    "ScenarioError",
    "ServiceRecord",
    "StepOutcome",
    "Transition",
    "TrustWeights",
    "WindowConfig",
    "WindowTableResult",
    "aggregate",
    "assignment_fractions",
    "comparative",
    "default_roster",
    "evaluate_checkpoint",
    "export_report",
    "import_report",
    "load_network",
    "load_scenario",
    "make_agent",
    "run_attack",
    "run_episode",
    "save_network",
    "save_scenario",
    "scenario_to_dict",
    "sweep_malicious",
    "sweep_noise",
    "train_agent",
    "unit_base_reputation",
    "validate_scenario",
    "window_table",
    "with_overrides",
    "__version__",
]
