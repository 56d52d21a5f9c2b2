"""Command-line front end: train / eval / sweep / plot / validate-config.

Config files are JSON with sections named exactly like the config
dataclasses (env, attacker, defender, reward) plus top-level run keys;
``--set dotted.key=value`` overrides any of them. Exit codes: 0 success,
2 config/validation problem, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import re
import sys
from pathlib import Path

from .config import (
    ConfigError,
    RunConfig,
    apply_override,
    canonical_json,
    default_run_config,
    from_dict,
    parse_override_arg,
)
from .trainer import evaluate, make_agent, moving_average, train

OUT_ROOT_VAR = "PORTSIEGE_OUT_ROOT"


def load_run_config(path: str) -> RunConfig:
    """'base' (or nothing) means the built-in defaults; anything else is a JSON file."""
    if path in (None, "", "base"):
        return default_run_config()
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file is not valid JSON: {path}: {e}") from e
    return from_dict(raw)


def _resolve_config(args) -> RunConfig:
    cfg = load_run_config(getattr(args, "config", None))
    for item in getattr(args, "set", None) or []:
        key, raw = parse_override_arg(item)
        apply_override(cfg, key, raw)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    cfg.validate()
    return cfg


def _resolve_out_dir(cfg: RunConfig) -> Path:
    root = os.environ.get(OUT_ROOT_VAR)
    path = Path(cfg.out_dir)
    if root and not path.is_absolute():
        return Path(root) / path
    return path


def cmd_validate_config(args) -> int:
    cfg = _resolve_config(args)
    print(canonical_json(cfg))
    print("config ok", file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    out = _resolve_out_dir(cfg)
    print(canonical_json(cfg))
    every = max(1, cfg.episodes // 10)

    def progress(ep, s):
        if (ep + 1) % every == 0:
            print(
                f"episode {ep + 1}/{cfg.episodes}  "
                f"att {s.att_reward:+.1f}  def {s.def_reward:+.1f}  {s.outcome.token()}",
                file=sys.stderr,
            )

    log = train(cfg, out_dir=out, progress=progress)
    summary = json.loads((out / "summary.json").read_text())
    print(
        f"done: {cfg.episodes} episodes -> {out}  "
        f"attacker_win_rate={summary['attacker_win_rate']}",
        file=sys.stderr,
    )
    return 0


def _latest_checkpoints(run_dir: Path) -> dict:
    found = {}
    pattern = re.compile(r"(attacker|defender)-(\d+)\.npz$")
    for path in (run_dir / "checkpoints").glob("*.npz"):
        m = pattern.match(path.name)
        if m:
            side, ep = m.group(1), int(m.group(2))
            if side not in found or ep > found[side][0]:
                found[side] = (ep, path)
    return {side: path for side, (ep, path) in found.items()}


def cmd_eval(args) -> int:
    run_dir = Path(args.run)
    cfg_path = run_dir / "config.json"
    if not cfg_path.exists():
        raise ConfigError(f"not a run directory (no config.json): {run_dir}")
    cfg = from_dict(json.loads(cfg_path.read_text()))
    ckpts = _latest_checkpoints(run_dir)
    if set(ckpts) != {"attacker", "defender"}:
        print(f"error: missing checkpoints under {run_dir / 'checkpoints'}", file=sys.stderr)
        return 1
    attacker = make_agent("attacker", cfg.env, cfg.attacker, seed=0)
    defender = make_agent("defender", cfg.env, cfg.defender, seed=0)
    attacker.load(str(ckpts["attacker"]))
    defender.load(str(ckpts["defender"]))

    seed = args.seed if args.seed is not None else cfg.seed
    report = evaluate(
        cfg.env,
        attacker,
        defender,
        n_episodes=args.episodes,
        eps_eval=args.epsilon,
        seed=seed,
        rewards=cfg.reward,
    )
    payload = {
        "episodes": report.episodes,
        "eps_eval": args.epsilon,
        "seed": seed,
        "attacker_win_rate": report.attacker_win_rate,
        "defender_win_rate": report.defender_win_rate,
        "att_mean_reward": round(report.att_mean_reward, 6),
        "def_mean_reward": round(report.def_mean_reward, 6),
        "mean_steps": round(report.mean_steps, 6),
        "strategic_balance": report.strategic_balance,
        "outcome_counts": report.outcome_counts,
    }
    with open(run_dir / "eval.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cell_name(assignment) -> str:
    parts = [f"{k}={v}" for k, v in assignment]
    return "__".join(parts).replace("/", "-")


def cmd_sweep(args) -> int:
    base_cfg = _resolve_config(args)
    out_root = _resolve_out_dir(base_cfg)
    axes = []
    for axis in args.grid or []:
        key, raw = parse_override_arg(axis)
        values = [v.strip() for v in raw.split(",") if v.strip()]
        if not values:
            raise ConfigError(f"grid axis has no values: {axis}")
        axes.append((key, values))
    if not axes:
        print("empty grid: nothing to run", file=sys.stderr)
        return 0

    rows = []
    for combo in itertools.product(*[[(k, v) for v in vals] for k, vals in axes]):
        name = _cell_name(combo)
        cell_cfg = _resolve_config(args)  # fresh copy per cell
        try:
            for key, raw in combo:
                apply_override(cell_cfg, key, raw)
            cell_cfg.out_dir = str(out_root / name)
            cell_cfg.validate()
            train(cell_cfg, out_dir=cell_cfg.out_dir)
            summary = json.loads((Path(cell_cfg.out_dir) / "summary.json").read_text())
            rows.append({
                "cell": name,
                "status": "ok",
                "attacker_win_rate": summary["attacker_win_rate"],
                "att_mean_reward_final_100": summary["att_mean_reward_final_100"],
                "def_mean_reward_final_100": summary["def_mean_reward_final_100"],
            })
        except Exception as e:  # a failed cell must not sink the others
            rows.append({
                "cell": name,
                "status": f"failed: {e}",
                "attacker_win_rate": "",
                "att_mean_reward_final_100": "",
                "def_mean_reward_final_100": "",
            })

    out_root.mkdir(parents=True, exist_ok=True)
    fields = ["cell", "status", "attacker_win_rate",
              "att_mean_reward_final_100", "def_mean_reward_final_100"]
    with open(out_root / "comparison.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
    width = max(len(r["cell"]) for r in rows)
    for r in rows:
        print(
            f"{r['cell']:<{width}}  win_rate={r['attacker_win_rate']}  "
            f"att_r100={r['att_mean_reward_final_100']}  "
            f"def_r100={r['def_mean_reward_final_100']}  [{r['status']}]"
        )
    failed = any(r["status"] != "ok" for r in rows)
    return 1 if failed else 0


def cmd_plot(args) -> int:
    run_dir = Path(args.run)
    metrics = run_dir / "episodes.csv"
    if not metrics.exists():
        print(f"error: metrics file missing: {metrics}", file=sys.stderr)
        return 1
    episodes, att, deff, wins = [], [], [], []
    try:
        with open(metrics, newline="") as fh:
            for row in csv.DictReader(fh):
                episodes.append(int(row["episode"]))
                att.append(float(row["att_reward"]))
                deff.append(float(row["def_reward"]))
                wins.append(1.0 if row["outcome"] == "attacker_win" else 0.0)
    except (KeyError, ValueError) as e:
        print(f"error: corrupt metrics file: {metrics}: {e}", file=sys.stderr)
        return 1

    att_ma = moving_average(att, 50)
    def_ma = moving_average(deff, 50)
    win_100 = moving_average(wins, 100)
    out_path = run_dir / "plot_data.csv"
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["episode", "att_reward", "att_reward_ma50",
                    "def_reward", "def_reward_ma50", "att_win_rate_100"])
        for i, ep in enumerate(episodes):
            w.writerow([
                ep,
                f"{att[i]:.6f}",
                f"{att_ma[i]:.6f}",
                f"{deff[i]:.6f}",
                f"{def_ma[i]:.6f}",
                f"{win_100[i]:.6f}",
            ])
    print(f"wrote {out_path}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="portsiege",
        description="Attack/defense reinforcement-learning testbed on a multi-port host.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_args(p):
        p.add_argument("--config", default="base",
                       help="JSON run config, or 'base' for built-in defaults")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="dotted override, e.g. env.trap_detect_prob=0.0")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")

    p_train = sub.add_parser("train", help="run a training session")
    add_config_args(p_train)
    p_train.set_defaults(func=cmd_train)

    p_val = sub.add_parser("validate-config", help="resolve and check a config, then exit")
    add_config_args(p_val)
    p_val.set_defaults(func=cmd_validate_config)

    p_eval = sub.add_parser("eval", help="greedy evaluation of a finished run")
    p_eval.add_argument("--run", required=True, help="run directory")
    p_eval.add_argument("--episodes", type=int, default=100)
    p_eval.add_argument("--epsilon", type=float, default=0.0)
    p_eval.add_argument("--seed", type=int, default=None)
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep", help="train over a Cartesian grid of overrides")
    add_config_args(p_sweep)
    p_sweep.add_argument("--grid", action="append", metavar="KEY=V1,V2",
                         help="axis of the sweep; repeatable")
    p_sweep.set_defaults(func=cmd_sweep)

    p_plot = sub.add_parser("plot", help="export plot-ready series from a run")
    p_plot.add_argument("--run", required=True, help="run directory")
    p_plot.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
