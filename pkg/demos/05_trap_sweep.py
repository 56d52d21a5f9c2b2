"""
What traps are worth
====================

Sweeps the trap detection probability against a scripted attacker and
watches the attacker's fortunes collapse.  The striking part is how cheap
an effective trap is: detection compounds per delivered request, so a
30-request-per-step exploit stream gets caught almost surely even when a
single request would slip by 95 times out of 100.  The stream's own volume
is what betrays it.

The attacker policy is defined inline -- a policy is just a class with an
``act(state)`` method, and scripted policies get privileged state access.
"""

from dataclasses import replace

from portsiege import AttackerAction, EnvConfig, TrapLayer, evaluate
from portsiege.env import SCAN_UNKNOWN, SCAN_VULNERABLE, SCAN_VULNERABLE_ANOMALY


class ProbeAndStrike:
    """Scan ports in order; exploit the first one remembered as vulnerable.

    Stateless on purpose: everything it needs is in the episode state, so
    one instance can be reused across evaluation episodes.
    """

    def act(self, state):
        for port, code in enumerate(state.scan_memory):
            if code in (SCAN_VULNERABLE, SCAN_VULNERABLE_ANOMALY):
                return AttackerAction.exploit(port)
        for port, code in enumerate(state.scan_memory):
            if code == SCAN_UNKNOWN:
                return AttackerAction.scan(port)
        # Everything scanned, nothing vulnerable is reachable: idle by
        # re-scanning (there is no attacker no-op).
        return AttackerAction.scan(state.step_count % state.config.n_ports)


base = EnvConfig(max_steps=120)
per_step = lambda p: 1.0 - (1.0 - p) ** base.exploit_rate

print(f"{'p(detect)':>10} {'per-step catch':>15} {'attacker win':>13} "
      f"{'def reward':>11} {'steps':>6}")
for p in (0.0, 0.01, 0.05, 0.2, 0.6):
    cfg = replace(base, trap_detect_prob=p)
    report = evaluate(cfg, ProbeAndStrike(), TrapLayer(), n_episodes=150, seed=17)
    print(f"{p:>10.2f} {per_step(p):>15.1%} {report.attacker_win_rate:>13.0%} "
          f"{report.def_mean_reward:>11.1f} {report.mean_steps:>6.1f}")

print("\nAt p=0 traps are dead weight and the attacker romps.  By p=0.05 a")
print("full-rate stream survives a step with probability 0.95^30 = 21%, so")
print("most exploits die in the first step or two and the attacker is left")
print("idling on a blacklisted address until the clock runs out.")
