"""Behavior-distribution overrides for hostile oracles.

Attack policies never roll dice themselves; given the window index and the
oracle's current reputation they decide which behavior distribution the
simulator should sample from. Three policies exist: permanent hostility,
periodic on-off hostility, and reputation-watching stealth hostility.
"""

from __future__ import annotations

from .domain import (
    AttackKind,
    AttackPolicy,
    BehaviorClass,
    BehaviorModel,
    OracleProfile,
)

__all__ = [
    "me_distribution",
    "ooa_phase",
    "ooa_distribution",
    "osa_distribution",
    "effective_distribution",
    "AttackKind",
    "AttackPolicy",
]

Distribution = tuple[float, float, float, float]


def me_distribution(model: BehaviorModel) -> Distribution:
    """Distribution used while an oracle is openly hostile."""
    return model.me_distribution


def _me_active(policy: AttackPolicy, window: int) -> bool:
    if window < policy.start_window:
        return False
    if policy.duration is None:
        return True
    return window < policy.start_window + policy.duration


def ooa_phase(policy: AttackPolicy, window: int) -> str:
    """Phase of the on-off cycle at ``window``: 'honest' or 'hostile'.

    Cycles anchor at start_window and open with the honest run, so with
    on_windows=2, off_windows=1 the pattern is honest, honest, hostile, ...
    After ``cycles`` full cycles the oracle stays honest for good."""
    if window < 1:
        raise ValueError("window index must be >= 1")
    if window < policy.start_window:
        return "honest"
    offset = window - policy.start_window
    period = policy.on_windows + policy.off_windows
    if policy.cycles is not None and offset // period >= policy.cycles:
        return "honest"
    return "honest" if offset % period < policy.on_windows else "hostile"


def ooa_distribution(
    policy: AttackPolicy, model: BehaviorModel, window: int, honest: Distribution
) -> Distribution:
    if ooa_phase(policy, window) == "hostile":
        return me_distribution(model)
    return honest


def osa_distribution(
    policy: AttackPolicy,
    model: BehaviorModel,
    reputation: float,
    threshold: float,
) -> Distribution:
    """Stealth policy: lie low and rebuild whenever reputation has sunk near
    the eligibility threshold, otherwise misbehave with the severe share
    clamped to ``stealth_severe`` (the rest of the hostile distribution is
    rescaled to keep the total at 1)."""
    if reputation <= threshold + policy.trigger_margin:
        return model.distribution(BehaviorClass.TRUSTED)
    hostile = model.distribution(BehaviorClass.MALICIOUS)
    rest = hostile[0] + hostile[1] + hostile[2]
    if rest <= 0:
        return (1.0 - policy.stealth_severe, 0.0, 0.0, policy.stealth_severe)
    scale = (1.0 - policy.stealth_severe) / rest
    return (
        hostile[0] * scale,
        hostile[1] * scale,
        hostile[2] * scale,
        policy.stealth_severe,
    )


def effective_distribution(
    profile: OracleProfile,
    window: int,
    reputation: float,
    model: BehaviorModel,
    threshold: float,
) -> Distribution:
    """Behavior distribution the oracle follows during ``window``; the
    single entry point the simulator samples from."""
    honest = model.distribution(profile.behavior_class)
    policy = profile.attack
    if policy is None:
        return honest
    if policy.kind is AttackKind.ME:
        return me_distribution(model) if _me_active(policy, window) else honest
    if policy.kind is AttackKind.OOA:
        return ooa_distribution(policy, model, window, honest)
    if window < policy.start_window:
        return honest
    return osa_distribution(policy, model, reputation, threshold)
