"""Reputation math: sub-scores, window recurrence, engine integration.

Window-recurrence expectations were frozen from an inline reference
implementation of the published-value recursion before this module existed.
"""

import csv
import math

import numpy as np
import pytest

from oraclesim.domain import (
    BehaviorLevel,
    ServiceRecord,
    TrustWeights,
    WindowConfig,
)
from oraclesim.trust import (
    ReputationEngine,
    ReputationWindow,
    WindowStats,
    average_response_time,
    base_reputation,
    behavior_score,
    close_window,
    close_window_independent,
    is_trusted,
    relative_response_frequency,
    reliability_score,
    request_success,
    success_rate,
    time_factor,
    token_score,
    write_trace_csv,
)

W = TrustWeights()

# Frozen constants from the reference recursion (chi = 0.6).
TANH_CHI = 0.5370495669980353        # tanh(0.6)
TANH_CHI_2 = 0.2913126124515909      # tanh(0.3)
FIRST_WINDOW_HALF_BASE = 0.26852478349901765
COMPOSITE_W5_STEADY = 2.210082931269159      # unit base, k = 200
COMPOSITE_W10_K100 = 169.24233624337646      # unit base
INDEPENDENT_W5_STEADY = 1.294049831832234    # sum of tanh(0.6/a), a = 1..5


def make_stats(rows):
    """rows: oid -> list of (response_time, success, behavior)."""
    stats = WindowStats(rows.keys())
    for oid, entries in rows.items():
        for rt, ok, beh in entries:
            stats.record(oid, rt, ok, beh)
    return stats


def test_request_success_requires_deadline_and_verification():
    assert request_success(3.0, 10.0, True)
    assert request_success(10.0, 10.0, True)         # deadline is inclusive
    assert not request_success(10.000001, 10.0, True)
    assert not request_success(3.0, 10.0, False)


def test_relative_response_frequency_scales_even_split_to_one():
    stats = make_stats({
        "a": [(1.0, True, BehaviorLevel.SAFE)] * 4,
        "b": [(1.0, True, BehaviorLevel.SAFE)] * 4,
    })
    assert relative_response_frequency(stats, "a", 2) == pytest.approx(1.0)
    stats2 = make_stats({
        "a": [(1.0, True, BehaviorLevel.SAFE)] * 2,
        "b": [(1.0, True, BehaviorLevel.SAFE)] * 1,
        "c": [],
    })
    assert relative_response_frequency(stats2, "a", 3) == pytest.approx(2.0)
    assert relative_response_frequency(stats2, "c", 3) == 0.0


def test_relative_response_frequency_idle_window_and_unknown_id():
    stats = make_stats({"a": [], "b": []})
    assert relative_response_frequency(stats, "a", 2) == 0.0
    with pytest.raises(ValueError):
        relative_response_frequency(stats, "nope", 2)


def test_success_rate():
    stats = make_stats({
        "a": [(1.0, True, BehaviorLevel.SAFE)] * 3 + [(1.0, False, BehaviorLevel.SAFE)],
    })
    assert success_rate(stats, "a") == pytest.approx(0.75)
    assert success_rate(make_stats({"a": []}), "a") == 0.0


def test_average_response_time_defaults_to_deadline_when_idle():
    stats = make_stats({"a": [(4.0, True, BehaviorLevel.SAFE), (8.0, True, BehaviorLevel.SAFE)]})
    assert average_response_time(stats, "a", 10.0) == pytest.approx(6.0)
    assert average_response_time(make_stats({"a": []}), "a", 10.0) == 10.0


def test_reliability_score_idle_oracle_scores_timeliness_neutral():
    assert reliability_score(0.0, 0.0, 10.0, 10.0, W) == pytest.approx(0.4)
    assert reliability_score(1.0, 1.0, 5.0, 10.0, W) == pytest.approx(0.2 + 0.4 + 0.8)
    with pytest.raises(ValueError):
        reliability_score(1.0, 1.0, 0.0, 10.0, W)
    with pytest.raises(ValueError):
        reliability_score(1.0, 1.0, 5.0, 0.0, W)


def test_behavior_score_weights_counts_by_harm():
    assert behavior_score((1, 2, 1, 0), W) == pytest.approx(7.0)
    assert behavior_score((0, 0, 0, 1), W) == pytest.approx(100.0)
    assert behavior_score((5, 0, 0, 0), W) == 0.0
    with pytest.raises(ValueError):
        behavior_score((1, 2, 3), W)
    with pytest.raises(ValueError):
        behavior_score((1, -1, 0, 0), W)


def test_token_score_even_stake_scores_one():
    stakes = {"a": 100.0, "b": 100.0, "c": 100.0}
    assert token_score(stakes, "a") == pytest.approx(1.0)
    assert token_score({"a": 100.0, "b": 300.0}, "b") == pytest.approx(1.5)
    assert token_score({"a": 0.0, "b": 0.0}, "a") == 0.0
    with pytest.raises(ValueError):
        token_score(stakes, "nope")


def test_base_reputation_combination():
    assert base_reputation(1.0, 0.5, 1.0, W) == pytest.approx(0.4)
    assert base_reputation(0.4, 0.0, 1.0, W) == pytest.approx(0.36)


def test_time_factor_frozen_values_and_domain():
    assert time_factor(1, 0.6) == pytest.approx(TANH_CHI, abs=1e-15)
    assert time_factor(2, 0.6) == pytest.approx(TANH_CHI_2, abs=1e-15)
    ages = [time_factor(a, 0.6) for a in range(1, 11)]
    assert all(b < a for a, b in zip(ages, ages[1:]))
    with pytest.raises(ValueError):
        time_factor(0, 0.6)


def run_composite(length, bases):
    rw = ReputationWindow(length)
    return [close_window(rw, b, W) for b in bases]


def run_independent(length, bases):
    rw = ReputationWindow(length)
    return [close_window_independent(rw, b, W) for b in bases]


def test_first_window_value():
    assert run_composite(5, [0.5])[0] == pytest.approx(FIRST_WINDOW_HALF_BASE, abs=1e-15)


def test_composite_w5_converges_to_frozen_fixed_point():
    out = run_composite(5, [1.0] * 200)
    assert out[-1] == pytest.approx(COMPOSITE_W5_STEADY, abs=1e-9)
    assert abs(out[-1] - out[-2]) < 1e-9


def test_composite_growth_by_window_length_is_monotone():
    finals = [run_composite(length, [1.0] * 100)[-1] for length in range(1, 11)]
    assert all(b > a for a, b in zip(finals, finals[1:]))
    assert finals[0] == pytest.approx(TANH_CHI, abs=1e-12)
    assert finals[4] < 50.0
    assert finals[9] == pytest.approx(COMPOSITE_W10_K100, rel=1e-9)
    assert finals[9] < 1000.0


def test_composite_stability_boundary_between_w7_and_w8():
    w7 = run_composite(7, [1.0] * 400)
    assert w7[399] / w7[99] < 1.2           # bounded
    w8 = run_composite(8, [1.0] * 200)
    assert w8[199] / w8[99] > 2.0           # divergent


def test_independent_steady_state_matches_decay_weight_sum():
    out = run_independent(5, [1.0] * 50)
    assert out[-1] == pytest.approx(INDEPENDENT_W5_STEADY, abs=1e-12)
    assert out[-1] == pytest.approx(sum(math.tanh(0.6 / a) for a in range(1, 6)), abs=1e-12)


def test_misbehavior_echo_outlives_window_only_in_composite_mode():
    bases = [0.5] * 12
    bases[2] = -35.0
    comp = run_composite(5, bases)
    ind = run_independent(5, bases)
    steady = 0.5 * INDEPENDENT_W5_STEADY
    # once the spike leaves the 5-window lookback the independent score snaps back
    for k in range(7, 12):
        assert ind[k] == pytest.approx(steady, abs=1e-9)
    # the composite score is still paying for it well past the lookback
    assert all(comp[k] < -1.5 for k in range(7, 12))
    clean = run_composite(5, [0.5] * 12)
    assert all(comp[k] < clean[k] for k in range(2, 12))


def test_window_scaling_is_linear_in_bases():
    rng = np.random.default_rng(5)
    bases = list(rng.normal(0.0, 2.0, size=20))
    for scale in (2.0, -0.5):
        scaled = run_composite(5, [scale * b for b in bases])
        ref = run_composite(5, bases)
        for got, want in zip(scaled, ref):
            assert got == pytest.approx(scale * want, rel=1e-12, abs=1e-12)


def test_window_history_eviction():
    rw = ReputationWindow(5)
    for _ in range(10):
        close_window(rw, 1.0, W)
    assert len(rw.history) == 4
    assert rw.closed == 10
    rw1 = ReputationWindow(1)
    for _ in range(3):
        close_window(rw1, 2.0, W)
    assert len(rw1.history) == 0
    assert close_window(rw1, 2.0, W) == pytest.approx(2.0 * TANH_CHI, abs=1e-15)


def test_is_trusted_threshold_is_inclusive():
    assert is_trusted(-1.5, -1.5)
    assert is_trusted(0.0, -1.5)
    assert not is_trusted(-1.5000001, -1.5)


def test_score_normalization_over_random_windows():
    rng = np.random.default_rng(11)
    for _ in range(200):
        m = int(rng.integers(2, 8))
        oids = [f"o{i}" for i in range(m)]
        stats = WindowStats(oids)
        stakes = {}
        for oid in oids:
            for _ in range(int(rng.integers(0, 6))):
                stats.record(oid, float(rng.uniform(0.1, 12.0)), bool(rng.integers(0, 2)),
                             BehaviorLevel(int(rng.integers(0, 4))))
            stakes[oid] = float(rng.uniform(0.0, 500.0))
        freqs = [relative_response_frequency(stats, oid, m) for oid in oids]
        assert all(f >= 0 for f in freqs)
        if stats.total_responses > 0:
            assert sum(freqs) == pytest.approx(m, rel=1e-9)
        else:
            assert sum(freqs) == 0.0
        if sum(stakes.values()) > 0:
            assert sum(token_score(stakes, oid) for oid in oids) == pytest.approx(m, rel=1e-9)


def sample_record(oid, arrival, rt, behavior, verified, exe=None):
    exe = rt if exe is None else exe
    return ServiceRecord(
        rid=0, oid=oid, arrival_ts=arrival, start_ts=arrival + (rt - exe),
        finish_ts=arrival + rt, exe_time=exe, response_time=rt,
        behavior=behavior, verified=verified, cost=0.5, service_matched=True,
    )


def test_engine_hand_computed_first_window():
    trust = TrustWeights()
    engine = ReputationEngine(
        ["a", "b"], {"a": 100.0, "b": 300.0}, trust, WindowConfig(length=5), deadline=10.0
    )
    assert engine.reputations == {"a": 0.5, "b": 0.5}
    assert engine.record_service(sample_record("a", 0.0, 5.0, BehaviorLevel.SAFE, True))
    assert not engine.record_service(
        sample_record("a", 1.0, 7.0, BehaviorLevel.MODERATE_HARM, False)
    )
    assert engine.record_service(sample_record("b", 2.0, 10.0, BehaviorLevel.SAFE, True))

    reps = engine.close_current_window()

    rel_a = 0.2 * (2 * 2 / 3) + 0.4 * 0.5 + 0.4 * (10.0 / 6.0)
    base_a = 0.4 * rel_a - 0.4 * 5.0 + 0.2 * 0.5
    rel_b = 0.2 * (1 * 2 / 3) + 0.4 * 1.0 + 0.4 * 1.0
    base_b = 0.4 * rel_b - 0.0 + 0.2 * 1.5
    assert reps["a"] == pytest.approx(math.tanh(0.6) * base_a, abs=1e-12)
    assert reps["b"] == pytest.approx(math.tanh(0.6) * base_b, abs=1e-12)

    rows = {r.oid: r for r in engine.trace}
    assert rows["a"].responses == 2 and rows["a"].successes == 1
    assert rows["a"].behavior == pytest.approx(5.0)
    assert rows["b"].success_rate == 1.0
    assert rows["b"].avg_response_time == 10.0
    assert engine.trusted_ids() == ["a", "b"]


def test_engine_idle_window_keeps_earning_stake_and_neutral_timeliness():
    trust = TrustWeights()
    engine = ReputationEngine(
        ["a"], {"a": 100.0}, trust, WindowConfig(length=5), deadline=10.0
    )
    first = engine.close_current_window()["a"]
    base_idle = 0.4 * 0.4 + 0.2 * 1.0    # reliability 0.4, token 1.0, no behavior
    assert first == pytest.approx(math.tanh(0.6) * base_idle, abs=1e-12)
    second = engine.close_current_window()["a"]
    assert second == pytest.approx(
        math.tanh(0.6) * base_idle + math.tanh(0.3) * first, abs=1e-12
    )
    assert engine.window_index == 2


def test_engine_stats_reset_between_windows():
    engine = ReputationEngine(
        ["a", "b"], {"a": 100.0, "b": 100.0}, TrustWeights(), WindowConfig(length=5), 10.0
    )
    engine.record_service(sample_record("a", 0.0, 2.0, BehaviorLevel.SAFE, True))
    engine.close_current_window()
    assert engine.stats.total_responses == 0


def test_engine_rejects_unknown_oracle_and_missing_stake():
    engine = ReputationEngine(["a"], {"a": 1.0}, TrustWeights(), WindowConfig(), 10.0)
    with pytest.raises(ValueError):
        engine.record_service(sample_record("zz", 0.0, 2.0, BehaviorLevel.SAFE, True))
    with pytest.raises(ValueError):
        ReputationEngine(["a", "b"], {"a": 1.0}, TrustWeights(), WindowConfig(), 10.0)
    with pytest.raises(ValueError):
        engine.is_trusted("zz")


def test_trace_csv_round_trips_floats_exactly(tmp_path):
    engine = ReputationEngine(
        ["a", "b"], {"a": 100.0, "b": 300.0}, TrustWeights(), WindowConfig(length=5), 10.0
    )
    engine.record_service(sample_record("a", 0.0, 5.0, BehaviorLevel.MINOR_HARM, True))
    engine.close_current_window()
    engine.record_service(sample_record("b", 0.0, 3.0, BehaviorLevel.SAFE, True))
    engine.close_current_window()
    path = tmp_path / "trace.csv"
    write_trace_csv(engine.trace, path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(engine.trace) == 4
    for got, want in zip(rows, engine.trace):
        assert int(got["window"]) == want.window
        assert got["oid"] == want.oid
        assert float(got["reputation"]) == want.reputation
        assert float(got["base"]) == want.base
        assert float(got["avg_response_time"]) == want.avg_response_time
