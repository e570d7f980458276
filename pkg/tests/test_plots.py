"""Figure builders: construction on real reports and byte-stable rendering."""

import numpy as np

from oraclesim.domain import validate_scenario
from oraclesim.experiments import run_episode, window_table
from oraclesim.plots import (
    attack_figure,
    comparison_figure,
    convergence_figure,
    reputation_figure,
    save_figure,
    selection_figure,
    sweep_figure,
    window_table_figure,
    _rolling_mean,
)


def small_report():
    cfg = validate_scenario({
        "seed": 3, "request_count": 120, "requests_per_window": 30,
        "service_classes": 1, "arrival_rate": 1.0,
        "complexity_mean": 1000.0, "complexity_std": 100.0,
    })
    return cfg, run_episode(cfg, "round-robin").report


def test_rolling_mean_window_and_values():
    series = np.array([1.0, 2.0, 3.0, 4.0])
    out = _rolling_mean(series, 2)
    assert np.allclose(out, [1.5, 2.5, 3.5])
    short = _rolling_mean(np.array([5.0]), 100)
    assert np.allclose(short, [5.0])


def test_episode_figures_build_and_save(tmp_path):
    cfg, report = small_report()
    for name, fig in [
        ("rep.png", reputation_figure(report, threshold=cfg.trust.threshold)),
        ("conv.png", convergence_figure(report)),
        ("sel.png", selection_figure(report)),
    ]:
        path = save_figure(fig, tmp_path / name)
        assert path.is_file() and path.stat().st_size > 0


def test_saved_png_bytes_are_reproducible(tmp_path):
    _, report = small_report()
    save_figure(reputation_figure(report), tmp_path / "a.png")
    save_figure(reputation_figure(report), tmp_path / "b.png")
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()


def test_comparison_and_sweep_figures(tmp_path):
    rows = [
        {"agent": "round-robin", "match_rate": 0.3, "success_rate": 0.8,
         "average_cost": 0.9, "malicious_fraction": 0.2},
        {"agent": "tco-drl", "match_rate": 0.9, "success_rate": 0.95,
         "average_cost": 0.4, "malicious_fraction": 0.02},
    ]
    save_figure(comparison_figure(rows), tmp_path / "cmp.png")
    series = {"round-robin": {"success_rate": [0.8, 0.7],
                              "malicious_fraction": [0.2, 0.3]}}
    save_figure(sweep_figure([0.0, 0.2], series, "noise"), tmp_path / "sweep.png")
    assert (tmp_path / "cmp.png").stat().st_size > 0
    assert (tmp_path / "sweep.png").stat().st_size > 0


def test_attack_and_window_table_figures(tmp_path):
    cfg, report = small_report()
    save_figure(attack_figure(report.oracle_ids[0], 2, -1.5, report, report),
                tmp_path / "attack.png")
    result = window_table(cfg, "round-robin", lengths=(1, 2))
    save_figure(
        window_table_figure(result.lengths, result.oracle_ids,
                            result.final_reputations, result.unit_base),
        tmp_path / "wt.png")
    assert (tmp_path / "attack.png").stat().st_size > 0
    assert (tmp_path / "wt.png").stat().st_size > 0
