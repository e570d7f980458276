"""Command-line experiment runner.

Subcommands: run, sweep-noise, sweep-malicious, attack, window-table, train,
evaluate. Every subcommand reads a scenario file (packaged defaults when
--scenario is omitted), never modifies it, and writes a self-contained output
directory: summary.json plus delimited files plus PNG figures. A fixed seed
reproduces the directory byte for byte.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from importlib import resources
from pathlib import Path

from .agents import AGENT_NAMES
from .domain import (
    BehaviorClass,
    ScenarioConfig,
    load_scenario,
    save_scenario,
    with_overrides,
)
from .env import write_records_csv
from .experiments import (
    DEFAULT_MALICIOUS_COUNTS,
    DEFAULT_NOISE_LEVELS,
    EpisodeResult,
    comparative,
    evaluate_checkpoint,
    run_attack,
    run_episode,
    sweep_malicious,
    sweep_noise,
    train_agent,
    window_table,
)
from .metrics import assignment_fractions, export_report
from .nn import load_network, save_network
from .plots import (
    attack_figure,
    comparison_figure,
    convergence_figure,
    reputation_figure,
    save_figure,
    selection_figure,
    sweep_figure,
    window_table_figure,
)

OUT_ENV_VAR = "ORACLESIM_OUT"
DEFAULT_OUT_ROOT = "results"
CHECKPOINT_FILE = "checkpoint.txt"
COMPARISON_FILE = "comparison.csv"

COMPARISON_COLUMNS = [
    "agent", "request_count", "match_rate", "success_rate", "average_cost",
    "average_response_time", "malicious_fraction", "benign_fraction",
    "trusted_fraction", "redirect_count", "total_reward",
]


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage failures exit 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _parse_ints(text: str) -> tuple[int, ...]:
    """Accepts comma lists ("1,2,5") and inclusive spans ("1-10")."""
    items: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        if sep and lo:
            items.extend(range(int(lo), int(hi) + 1))
        else:
            items.append(int(part))
    if not items:
        raise ValueError(f"no integers in {text!r}")
    return tuple(items)


def _load_cfg(args, default_name: str) -> ScenarioConfig:
    if args.scenario is not None:
        cfg = load_scenario(args.scenario)
    else:
        packaged = resources.files("oraclesim").joinpath(f"scenarios/{default_name}")
        with resources.as_file(packaged) as path:
            cfg = load_scenario(path)
    if getattr(args, "seed", None) is not None:
        cfg = with_overrides(cfg, seed=args.seed)
    return cfg


def _out_dir(args, subcommand: str) -> Path:
    if args.out is not None:
        out = Path(args.out)
    else:
        root = os.environ.get(OUT_ENV_VAR, DEFAULT_OUT_ROOT)
        out = Path(root) / subcommand
    out.mkdir(parents=True, exist_ok=True)
    return out


def _agent_list(args) -> tuple[str, ...]:
    return AGENT_NAMES if args.agent == "all" else (args.agent,)


def _metric_row(result: EpisodeResult) -> dict:
    fractions = assignment_fractions(result.cfg, result.env.records)
    report = result.report
    return {
        "agent": report.agent,
        "request_count": report.request_count,
        "match_rate": report.match_rate,
        "success_rate": report.success_rate,
        "average_cost": report.average_cost,
        "average_response_time": report.average_response_time,
        "malicious_fraction": fractions[BehaviorClass.MALICIOUS],
        "benign_fraction": fractions[BehaviorClass.BENIGN],
        "trusted_fraction": fractions[BehaviorClass.TRUSTED],
        "redirect_count": report.redirect_count,
        "total_reward": report.total_reward,
    }


def _write_rows_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def _write_episode_dir(
    result: EpisodeResult, out: Path, with_records: bool = True, with_figures: bool = True
) -> None:
    export_report(result.report, out)
    if with_records:
        write_records_csv(result.env.records, result.cfg.deadline, out / "records.csv")
    if with_figures:
        threshold = result.cfg.trust.threshold
        save_figure(reputation_figure(result.report, threshold), out / "reputation.png")
        save_figure(convergence_figure(result.report), out / "convergence.png")
        save_figure(selection_figure(result.report), out / "selection.png")


def _print_rows(rows: list[dict]) -> None:
    for row in rows:
        print(
            f"{row['agent']:12s} match={row['match_rate']:.3f} "
            f"success={row['success_rate']:.3f} cost={row['average_cost']:.4f} "
            f"malicious={row['malicious_fraction']:.4f}"
        )


# -- subcommands ---------------------------------------------------------------


def cmd_run(args) -> int:
    cfg = _load_cfg(args, "acceptance.json")
    out = _out_dir(args, "run")
    save_scenario(cfg, out / "scenario.json")
    results = comparative(cfg, _agent_list(args))
    rows = []
    for name, result in results.items():
        _write_episode_dir(result, out / name)
        rows.append(_metric_row(result))
    _write_rows_csv(out / COMPARISON_FILE, COMPARISON_COLUMNS, rows)
    save_figure(comparison_figure(rows), out / "comparison.png")
    _print_rows(rows)
    print(f"results in {out}")
    return 0


def _run_sweep(args, points, runner, point_name: str, point_fmt, csv_name: str) -> int:
    cfg = _load_cfg(args, "acceptance.json")
    out = _out_dir(args, csv_name.removesuffix(".csv").replace("_", "-"))
    save_scenario(cfg, out / "scenario.json")
    names = _agent_list(args)
    results = runner(cfg, names, points)
    rows = []
    series = {name: {"success_rate": [], "malicious_fraction": []} for name in names}
    for point, by_agent in results.items():
        for name, result in by_agent.items():
            _write_episode_dir(
                result, out / name / f"{point_name}-{point_fmt(point)}",
                with_records=False, with_figures=False,
            )
            row = {point_name: point, **_metric_row(result)}
            rows.append(row)
            series[name]["success_rate"].append(row["success_rate"])
            series[name]["malicious_fraction"].append(row["malicious_fraction"])
    _write_rows_csv(out / csv_name, [point_name, *COMPARISON_COLUMNS], rows)
    save_figure(sweep_figure(list(results), series, point_name), out / f"{csv_name.removesuffix('.csv')}.png")
    print(f"{len(rows)} runs; results in {out}")
    return 0


def cmd_sweep_noise(args) -> int:
    points = _parse_floats(args.levels) if args.levels else DEFAULT_NOISE_LEVELS
    def runner(cfg, names, pts):
        return sweep_noise(cfg, names, pts)
    return _run_sweep(args, points, runner, "noise", lambda p: f"{p:.2f}", "sweep_noise.csv")


def cmd_sweep_malicious(args) -> int:
    points = _parse_ints(args.counts) if args.counts else DEFAULT_MALICIOUS_COUNTS
    def runner(cfg, names, pts):
        return sweep_malicious(cfg, names, pts)
    return _run_sweep(args, points, runner, "malicious_per_class", str, "sweep_malicious.csv")


def cmd_attack(args) -> int:
    cfg = _load_cfg(args, "attack_me.json")
    out = _out_dir(args, "attack")
    save_scenario(cfg, out / "scenario.json")
    result = run_attack(cfg, args.agent)
    _write_episode_dir(result.composite, out / "composite")
    _write_episode_dir(result.independent, out / "independent")
    summary = {
        "agent": args.agent,
        "attacker": result.attacker_oid,
        "attack_kind": result.attack_kind.value,
        "burst_window": result.burst_window,
        "threshold": cfg.trust.threshold,
        "recovery_windows_composite": result.recovery_composite,
        "recovery_windows_independent": result.recovery_independent,
        "recovery_ratio": result.recovery_ratio,
    }
    (out / "attack_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    save_figure(
        attack_figure(result.attacker_oid, result.burst_window, cfg.trust.threshold,
                      result.composite.report, result.independent.report),
        out / "attack.png",
    )
    print(f"attack {summary['attack_kind']} on {summary['attacker']}: "
          f"recovery composite={result.recovery_composite} "
          f"independent={result.recovery_independent} ratio={result.recovery_ratio}")
    print(f"results in {out}")
    return 0


def cmd_window_table(args) -> int:
    cfg = _load_cfg(args, "window_table.json")
    out = _out_dir(args, "window-table")
    save_scenario(cfg, out / "scenario.json")
    lengths = _parse_ints(args.lengths) if args.lengths else tuple(range(1, 11))
    result = window_table(cfg, args.agent, lengths)
    with open(out / "window_table.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window_length", "unit_base", *result.oracle_ids])
        for i, length in enumerate(result.lengths):
            writer.writerow([
                length, _fmt(result.unit_base[i]),
                *(_fmt(v) for v in result.final_reputations[i].tolist()),
            ])
    save_figure(
        window_table_figure(result.lengths, result.oracle_ids,
                            result.final_reputations, result.unit_base),
        out / "window_table.png",
    )
    print(f"{len(result.lengths)} window lengths x {result.windows} windows; results in {out}")
    return 0


def cmd_train(args) -> int:
    cfg = _load_cfg(args, "acceptance.json")
    out = _out_dir(args, "train")
    save_scenario(cfg, out / "scenario.json")
    result = train_agent(cfg)
    save_network(result.agent.online, out / CHECKPOINT_FILE)
    _write_episode_dir(result, out)
    _print_rows([_metric_row(result)])
    print(f"checkpoint and results in {out}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _load_cfg(args, "acceptance.json")
    out = _out_dir(args, "evaluate")
    save_scenario(cfg, out / "scenario.json")
    network = load_network(args.checkpoint)
    result = evaluate_checkpoint(cfg, network)
    _write_episode_dir(result, out)
    _print_rows([_metric_row(result)])
    print(f"results in {out}")
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oraclesim",
                     description="Oracle-selection simulator: reputation engine, "
                                 "learning selector, baselines, attacks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_agent="all", agents=(*AGENT_NAMES, "all")):
        p.add_argument("--scenario", help="scenario JSON (default: packaged scenario)")
        p.add_argument("--out", help=f"output directory (default: ${OUT_ENV_VAR} or ./{DEFAULT_OUT_ROOT})")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        if agents:
            p.add_argument("--agent", choices=agents, default=default_agent)

    p = sub.add_parser("run", help="run one scenario with one or all selectors")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep-noise", help="re-run the comparison across behavior-noise levels")
    common(p)
    p.add_argument("--levels", help="comma-separated noise levels (default 0.0..0.5)")
    p.set_defaults(func=cmd_sweep_noise)

    p = sub.add_parser("sweep-malicious", help="re-run the comparison across hostile-oracle counts")
    common(p)
    p.add_argument("--counts", help="comma-separated hostile oracles per class (default 0,1,2,3)")
    p.set_defaults(func=cmd_sweep_malicious)

    p = sub.add_parser("attack", help="run an attack scenario under both window modes")
    common(p, default_agent="round-robin", agents=AGENT_NAMES)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("window-table", help="tabulate final reputations across window lengths")
    common(p, default_agent="round-robin", agents=AGENT_NAMES)
    p.add_argument("--lengths", help="window lengths, e.g. '1-10' or '2,5,8'")
    p.set_defaults(func=cmd_window_table)

    p = sub.add_parser("train", help="train the learning selector and save a checkpoint")
    common(p, agents=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="run a frozen checkpoint greedily")
    common(p, agents=None)
    p.add_argument("--checkpoint", required=True, help="checkpoint file from train")
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
