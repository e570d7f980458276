"""CLI subcommands: layouts, exit codes, defaults, determinism."""

import filecmp
import json
from pathlib import Path

import pytest

from oraclesim.cli import main
from oraclesim.domain import load_scenario

EPISODE_FILES = ("summary.json", "reputation_trace.csv", "selection_counts.csv",
                 "convergence.csv")
FIGURE_FILES = ("reputation.png", "convergence.png", "selection.png")


def write_small_scenario(path: Path, **overrides) -> Path:
    raw = {
        "seed": 7,
        "request_count": 240,
        "requests_per_window": 30,
        "service_classes": 1,
        "arrival_rate": 1.0,
        "complexity_mean": 1000.0,
        "complexity_std": 100.0,
        "oracles": [
            {"oid": f"o{i}", "service_class": 0, "cost": 0.3 + 0.15 * i,
             "performance": 900.0 + 40.0 * i, "stake": 100.0,
             "behavior_class": cls}
            for i, cls in enumerate(["trusted", "trusted", "benign", "malicious"])
        ],
    }
    raw.update(overrides)
    path.write_text(json.dumps(raw))
    return path


def write_attack_scenario(path: Path) -> Path:
    oracles = [
        {"oid": f"o{i}", "service_class": 0, "cost": 0.4 + 0.1 * i,
         "performance": 1000.0, "stake": 100.0, "behavior_class": "trusted"}
        for i in range(3)
    ]
    oracles.append({
        "oid": "o3", "service_class": 0, "cost": 0.2, "performance": 1000.0,
        "stake": 100.0, "behavior_class": "trusted",
        "attack": {"kind": "me", "start_window": 2, "duration": 1},
    })
    raw = {
        "seed": 9, "request_count": 300, "requests_per_window": 30,
        "service_classes": 1, "arrival_rate": 0.5,
        "complexity_mean": 1000.0, "complexity_std": 100.0,
        "enforce_threshold": True,
        "behavior": {"distributions": {"trusted": [1.0, 0.0, 0.0, 0.0]}},
        "oracles": oracles,
    }
    path.write_text(json.dumps(raw))
    return path


def assert_episode_dir(base: Path, records: bool = True, figures: bool = True):
    for name in EPISODE_FILES:
        assert (base / name).is_file(), f"missing {base / name}"
    assert (base / "records.csv").is_file() == records
    for name in FIGURE_FILES:
        assert (base / name).is_file() == figures


def test_run_all_agents_layout(tmp_path):
    scenario = write_small_scenario(tmp_path / "s.json")
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(scenario), "--out", str(out)]) == 0
    assert (out / "scenario.json").is_file()
    assert (out / "comparison.csv").is_file()
    assert (out / "comparison.png").is_file()
    for agent in ("tco-drl", "round-robin", "blor", "psg"):
        assert_episode_dir(out / agent)
    header, *rows = (out / "comparison.csv").read_text().splitlines()
    assert header.startswith("agent,request_count,match_rate")
    assert len(rows) == 4


def test_run_single_agent(tmp_path):
    scenario = write_small_scenario(tmp_path / "s.json")
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(scenario), "--out", str(out),
                 "--agent", "blor"]) == 0
    assert (out / "blor").is_dir()
    assert not (out / "tco-drl").exists()
    rows = (out / "comparison.csv").read_text().splitlines()
    assert len(rows) == 2


def test_seed_override_is_recorded_and_changes_nothing_else(tmp_path):
    scenario = write_small_scenario(tmp_path / "s.json")
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(scenario), "--out", str(out),
                 "--agent", "round-robin", "--seed", "99"]) == 0
    copy = load_scenario(out / "scenario.json")
    assert copy.seed == 99
    original = load_scenario(scenario)
    assert copy.oracle_ids == original.oracle_ids
    assert load_scenario(scenario).seed == 7     # input file untouched


def test_usage_errors_exit_1(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["run", "--agent", "nonsense"])
    assert err.value.code == 1
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 1
    with pytest.raises(SystemExit) as err:
        main(["evaluate"])                       # --checkpoint is required
    assert err.value.code == 1


def test_runtime_errors_exit_2(tmp_path):
    assert main(["run", "--scenario", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "out")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"seed": -3}')
    assert main(["run", "--scenario", str(bad), "--out", str(tmp_path / "out2")]) == 2


def test_default_out_root_from_env(tmp_path, monkeypatch):
    scenario = write_small_scenario(tmp_path / "s.json")
    monkeypatch.setenv("ORACLESIM_OUT", str(tmp_path / "root"))
    assert main(["run", "--scenario", str(scenario), "--agent", "round-robin"]) == 0
    assert (tmp_path / "root" / "run" / "comparison.csv").is_file()


def test_sweep_noise_layout(tmp_path):
    scenario = write_small_scenario(tmp_path / "s.json")
    out = tmp_path / "out"
    assert main(["sweep-noise", "--scenario", str(scenario), "--out", str(out),
                 "--agent", "round-robin", "--levels", "0.0,0.25"]) == 0
    assert (out / "sweep_noise.csv").is_file()
    assert (out / "sweep_noise.png").is_file()
    for point in ("noise-0.00", "noise-0.25"):
        assert_episode_dir(out / "round-robin" / point, records=False, figures=False)
    header, *rows = (out / "sweep_noise.csv").read_text().splitlines()
    assert header.startswith("noise,agent,")
    assert len(rows) == 2


def test_sweep_malicious_layout(tmp_path):
    scenario = write_small_scenario(tmp_path / "s.json")
    out = tmp_path / "out"
    assert main(["sweep-malicious", "--scenario", str(scenario), "--out", str(out),
                 "--agent", "round-robin", "--counts", "0,2"]) == 0
    assert (out / "sweep_malicious.csv").is_file()
    assert (out / "sweep_malicious.png").is_file()
    for point in ("malicious_per_class-0", "malicious_per_class-2"):
        assert_episode_dir(out / "round-robin" / point, records=False, figures=False)


def test_attack_layout_and_summary(tmp_path):
    scenario = write_attack_scenario(tmp_path / "atk.json")
    out = tmp_path / "out"
    assert main(["attack", "--scenario", str(scenario), "--out", str(out)]) == 0
    assert_episode_dir(out / "composite")
    assert_episode_dir(out / "independent")
    assert (out / "attack.png").is_file()
    summary = json.loads((out / "attack_summary.json").read_text())
    assert summary["attack_kind"] == "me"
    assert summary["attacker"] == "o3"
    assert summary["burst_window"] == 2
    assert summary["agent"] == "round-robin"
    assert set(summary) >= {"recovery_windows_composite", "recovery_windows_independent",
                            "recovery_ratio", "threshold"}


def test_attack_requires_an_attacker(tmp_path):
    scenario = write_small_scenario(tmp_path / "s.json")   # no attack policy
    assert main(["attack", "--scenario", str(scenario),
                 "--out", str(tmp_path / "out")]) == 2


def test_window_table_layout(tmp_path):
    scenario = write_small_scenario(tmp_path / "s.json")
    out = tmp_path / "out"
    assert main(["window-table", "--scenario", str(scenario), "--out", str(out),
                 "--lengths", "1,3"]) == 0
    assert (out / "window_table.png").is_file()
    header, *rows = (out / "window_table.csv").read_text().splitlines()
    assert header == "window_length,unit_base,o0,o1,o2,o3"
    assert [r.split(",")[0] for r in rows] == ["1", "3"]


def test_window_table_lengths_span(tmp_path):
    scenario = write_small_scenario(tmp_path / "s.json")
    out = tmp_path / "out"
    assert main(["window-table", "--scenario", str(scenario), "--out", str(out),
                 "--lengths", "2-4"]) == 0
    rows = (out / "window_table.csv").read_text().splitlines()[1:]
    assert [r.split(",")[0] for r in rows] == ["2", "3", "4"]


def test_train_then_evaluate_roundtrip(tmp_path):
    scenario = write_small_scenario(tmp_path / "s.json")
    train_out = tmp_path / "train"
    assert main(["train", "--scenario", str(scenario), "--out", str(train_out)]) == 0
    checkpoint = train_out / "checkpoint.txt"
    assert checkpoint.is_file()
    assert_episode_dir(train_out)
    eval_out = tmp_path / "eval"
    assert main(["evaluate", "--scenario", str(scenario), "--out", str(eval_out),
                 "--checkpoint", str(checkpoint)]) == 0
    assert_episode_dir(eval_out)


def test_evaluate_rejects_mismatched_checkpoint(tmp_path):
    scenario = write_small_scenario(tmp_path / "s.json")
    train_out = tmp_path / "train"
    assert main(["train", "--scenario", str(scenario), "--out", str(train_out)]) == 0
    other = write_small_scenario(tmp_path / "wider.json", service_classes=2, oracles=[
        {"oid": f"o{i}", "service_class": i % 2, "cost": 0.5,
         "performance": 1000.0, "stake": 100.0, "behavior_class": "trusted"}
        for i in range(6)
    ])
    assert main(["evaluate", "--scenario", str(other),
                 "--out", str(tmp_path / "eval"),
                 "--checkpoint", str(train_out / "checkpoint.txt")]) == 2


def assert_trees_identical(left: Path, right: Path):
    cmp = filecmp.dircmp(left, right)
    agenda = [cmp]
    while agenda:
        node = agenda.pop()
        assert not node.left_only and not node.right_only, (
            f"tree mismatch: {node.left_only} {node.right_only}")
        match, mismatch, errors = filecmp.cmpfiles(
            node.left, node.right, node.common_files, shallow=False)
        assert not mismatch and not errors, f"differing files: {mismatch} {errors}"
        agenda.extend(node.subdirs.values())


@pytest.mark.parametrize("argv_tail", [
    ["run", "--agent", "all"],
    ["sweep-noise", "--agent", "psg", "--levels", "0.0,0.3"],
    ["window-table", "--lengths", "1,2"],
    ["train"],
])
def test_fixed_seed_reruns_are_byte_identical(tmp_path, argv_tail):
    scenario = write_small_scenario(tmp_path / "s.json")
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert main([argv_tail[0], "--scenario", str(scenario),
                     "--out", str(out), *argv_tail[1:]]) == 0
        outs.append(out)
    assert_trees_identical(*outs)


def test_attack_reruns_are_byte_identical(tmp_path):
    scenario = write_attack_scenario(tmp_path / "atk.json")
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        assert main(["attack", "--scenario", str(scenario), "--out", str(out)]) == 0
        outs.append(out)
    assert_trees_identical(*outs)
