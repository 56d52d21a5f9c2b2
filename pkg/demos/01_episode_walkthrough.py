"""
A guided tour of a single episode
=================================

Builds one small world, pokes at it action by action, and prints what the
simulator reports back.  Run it, read the output top to bottom, and you have
seen every moving part once: scans, an exploit stream, background traffic,
and the terminal bookkeeping.
"""

import numpy as np

from portsiege import (
    AttackerAction,
    DefenderAction,
    EnvConfig,
    advance_traffic,
    attacker_act,
    attacker_observe,
    defender_act,
    defender_layout,
    defender_observe,
    new_episode,
    score_events,
    terminal_status,
)

cfg = EnvConfig(
    n_ports=6,
    vulnerable_min=2,
    vulnerable_max=2,
    t_min=60,
    t_max=60,
    n_ips=10,
    attacker_ip_count=2,
    normal_req_min=6,
    normal_req_max=10,
    max_steps=40,
)

state = new_episode(cfg, seed=12)

print("== the world ==")
for port in state.ports:
    tag = "VULNERABLE" if port.vulnerable else "safe"
    extra = f" threshold={port.threshold}" if port.vulnerable else ""
    print(f"  port {port.id}: {tag}{extra}")
print(f"  attacker holds IPs {state.reserved_ips}, "
      f"currently using {state.current_ip}")

# --- step 1: the attacker scans, the defender waits --------------------------
events = []
probe = attacker_act(state, AttackerAction.scan(0))
print(f"\nscan of port 0 reports: vulnerable={probe.scan.vulnerable} "
      f"anomaly={probe.scan.anomaly}")
events += probe.events
events += defender_act(state, DefenderAction.wait()).events
tick = advance_traffic(state)
events += tick.events
print(f"background traffic this step: {tick.traffic.benign_generated} "
      f"benign requests over the open ports")

# --- step 2..n: hammer the first vulnerable port -----------------------------
target = next(p.id for p in state.ports if p.vulnerable)
print(f"\nstreaming an exploit against port {target} "
      f"(threshold {state.ports[target].threshold}, "
      f"{cfg.exploit_rate} requests per step)")

while not terminal_status(state).is_terminal:
    events += attacker_act(state, AttackerAction.exploit(target)).events
    events += defender_act(state, DefenderAction.wait()).events
    events += advance_traffic(state).events
    landed = state.exploit_counters[state.current_ip, target]
    print(f"  step {state.step_count}: exploit counter at {landed}")

outcome = terminal_status(state)
print("\nepisode over:", outcome.token())

pair = score_events(events)
print(f"attacker scored {pair.attacker:+.3f}, defender {pair.defender:+.3f} "
      f"(sum of the win/loss pair is zero; the rest is private action cost)")

# --- what each side was able to see -----------------------------------------
att_vec = attacker_observe(state)
def_vec = defender_observe(state)
print(f"\nattacker observation has {att_vec.size} features, "
      f"defender {def_vec.size}")
layout = defender_layout(cfg)
with np.printoptions(precision=3, suppress=True):
    print("defender per-port load block:", def_vec[layout.slices()["port_volume"]])
print("feature blocks:", ", ".join(b.name for b in layout.blocks))
