"""
Self-play training, end to end
==============================

Trains both sides from scratch with tabular Q-learning on a small world,
then reads the run directory back: the per-episode CSV, the summary, and a
checkpoint reloaded into a frozen evaluation match.  The run is sized to
finish in well under a minute; bump `episodes` for a real curve.
"""

import csv
import json
from dataclasses import replace
from pathlib import Path
import tempfile

from portsiege import (
    EnvConfig,
    RunConfig,
    attacker_defaults,
    defender_defaults,
    evaluate,
    make_agent,
    moving_average,
    train,
)

env = EnvConfig(
    n_ports=6,
    vulnerable_min=1,
    vulnerable_max=2,
    t_min=90,
    t_max=150,
    n_ips=10,
    attacker_ip_count=3,
    max_steps=80,
)

# The stock hyper-parameters, but tabular backends and a faster epsilon
# decay so exploration winds down within this tiny budget.
run_cfg = RunConfig(
    env=env,
    attacker=replace(attacker_defaults(), backend="table", eps_decay=0.97),
    defender=replace(defender_defaults(), backend="table", eps_decay=0.97),
    episodes=150,
    seed=3,
    out_dir=str(Path(tempfile.mkdtemp()) / "selfplay"),
    checkpoint_every=50,
)

log = train(run_cfg)
print("artifacts written to", log.out_dir)
for p in sorted(log.out_dir.rglob("*")):
    if p.is_file():
        print("  ", p.relative_to(log.out_dir))

# --- the learning curve, straight from episodes.csv --------------------------
with open(log.out_dir / "episodes.csv") as fh:
    rows = list(csv.DictReader(fh))
att = [float(r["att_reward"]) for r in rows]
outcomes = [r["outcome"] for r in rows]
smooth = moving_average(att, window=25)
print("\nattacker reward, 25-episode moving average:")
for i in range(24, len(smooth), 25):
    bar = "#" * max(0, int((smooth[i] + 150) / 10))
    print(f"  ep {i + 1:3d}  {smooth[i]:8.1f}  {bar}")

summary = json.loads((log.out_dir / "summary.json").read_text())
print("\nsummary:", {k: summary[k] for k in
                     ("episodes", "attacker_win_rate",
                      "attacker_win_rate_final_100")})

# --- reload the final checkpoints and play them against each other -----------
att_agent = make_agent("attacker", env, run_cfg.attacker, seed=0)
def_agent = make_agent("defender", env, run_cfg.defender, seed=0)
att_agent.load(log.out_dir / "checkpoints" / "attacker-150.npz")
def_agent.load(log.out_dir / "checkpoints" / "defender-150.npz")

report = evaluate(env, att_agent, def_agent, n_episodes=50, seed=9)
print(f"\nfrozen rematch over 50 episodes: attacker wins "
      f"{report.attacker_win_rate:.0%}, defender wins "
      f"{report.defender_win_rate:.0%}")
print("outcomes:", dict(report.outcome_counts))
