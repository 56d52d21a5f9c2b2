"""
Scripted matchups and the closed-form outcome
=============================================

Pits the bundled scripted policies against each other and checks the
arithmetic by hand.  An undisturbed exploit stream lands `exploit_rate`
requests per traffic step, so against a sleeping defender the attacker
needs exactly ceil(threshold / exploit_rate) steps of traffic -- and the
final score follows from the price list alone.
"""

import math

from portsiege import (
    EnvConfig,
    FixedPortExploiter,
    IdleDefender,
    PortCloser,
    RandomDefender,
    RewardTable,
    TrapLayer,
    evaluate,
    new_episode,
    run_episode,
)

cfg = EnvConfig()
prices = RewardTable()

# --- matchup 1: exploiter vs. a defender who never acts ----------------------
seed = 5
world = new_episode(cfg, seed)
port = world.vulnerable_ports[0].id
threshold = world.vulnerable_ports[0].threshold

stats = run_episode(cfg, FixedPortExploiter(port), IdleDefender(), seed=seed)
traffic_steps = math.ceil(threshold / cfg.exploit_rate)
predicted = (
    prices.successful_exploit
    + prices.scan_cost
    + prices.exploit_attempt_cost * traffic_steps
)
print(f"seed {seed}: port {port} has threshold {threshold}")
print(f"  predicted: win after 1 scan + {traffic_steps} traffic steps, "
      f"attacker nets {predicted:+.3f}")
print(f"  observed:  {stats.outcome.token()} after {stats.steps} steps, "
      f"attacker {stats.att_reward:+.3f}, defender {stats.def_reward:+.3f}")
assert stats.att_reward == predicted
assert stats.steps == traffic_steps + 1  # the opening scan costs a step

# --- matchup 2: the same exploiter vs. hard counters -------------------------
print("\nexploiter vs. PortCloser (closes every vulnerable port):")
stats = run_episode(cfg, FixedPortExploiter(port), PortCloser(), seed=seed)
print(f"  {stats.outcome.token()} after {stats.steps} steps")

print("exploiter vs. TrapLayer (traps every port first):")
stats = run_episode(cfg, FixedPortExploiter(port), TrapLayer(), seed=seed)
print(f"  {stats.outcome.token()} after {stats.steps} steps, "
      f"defender {stats.def_reward:+.3f}")

# --- a small frozen-policy tournament ---------------------------------------
print("\n100-episode tournament, exploiter vs. random defender:")
report = evaluate(cfg, FixedPortExploiter(0), RandomDefender(3), n_episodes=100)
print(f"  attacker wins {report.attacker_win_rate:.0%}, "
      f"defender wins {report.defender_win_rate:.0%}")
print(f"  mean rewards: attacker {report.att_mean_reward:+.1f}, "
      f"defender {report.def_mean_reward:+.1f}")
print("  outcomes:", dict(report.outcome_counts))
