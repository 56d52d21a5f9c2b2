"""
Inside the Q-network learner
============================

The deep learner is three small parts glued together: a numpy MLP with
hand-derived gradients, a uniform replay buffer, and a lagged target
network.  This script exercises each part in isolation, including the
check that keeps the backprop honest -- analytic gradients against
central finite differences.
"""

import numpy as np

from portsiege import (
    MLP,
    ReplayBuffer,
    EpsilonSchedule,
    q_loss_and_grads,
    select_action,
)

rng = np.random.default_rng(4)

# --- the network -------------------------------------------------------------
net = MLP((5, 16, 3), rng)
x = rng.random((4, 5))
q = net.predict(x)
print("Q-values for a 4-row batch:\n", np.round(q, 3))

# --- analytic vs. numeric gradients ------------------------------------------
actions = rng.integers(3, size=4)
targets = rng.normal(size=4)
loss, w_grads, b_grads = q_loss_and_grads(net, x, actions, targets)
print(f"\nTD loss on the batch: {loss:.4f}")

h = 1e-6
worst = 0.0
for w, g in zip(net.parameters(), w_grads + b_grads):
    it = np.nditer(w, flags=["multi_index"])
    for _ in range(min(w.size, 20)):  # spot-check 20 entries per tensor
        idx = it.multi_index
        keep = w[idx]
        w[idx] = keep + h
        up, _ = q_loss_and_grads(net, x, actions, targets)[0], None
        w[idx] = keep - h
        down = q_loss_and_grads(net, x, actions, targets)[0]
        w[idx] = keep
        numeric = (up - down) / (2 * h)
        worst = max(worst, abs(numeric - g[idx]) / max(abs(numeric), 1e-8))
        it.iternext()
print(f"worst analytic-vs-numeric relative error: {worst:.2e}")
assert worst < 1e-4

# --- the replay buffer -------------------------------------------------------
buf = ReplayBuffer(capacity=8, obs_dim=2)
for i in range(12):
    buf.push(np.full(2, i, dtype=float), i % 3, float(i), np.zeros(2), False)
_, _, rewards, _, _ = buf.sample(4, np.random.default_rng(0))
print(f"\nbuffer holds {len(buf)} of 12 pushed transitions "
      f"(capacity 8, oldest evicted first)")
print("sampled rewards, no duplicates:", sorted(rewards.tolist()))

# --- epsilon-greedy decisions ------------------------------------------------
sched = EpsilonSchedule(1.0, 0.995, 0.05)
marks = [0, 100, 300, 598, 1000]
print("\nexploration schedule:",
      ", ".join(f"ep{m}={sched.value(m):.3f}" for m in marks))

qrow = np.array([0.1, 0.9, 0.9])
greedy = [select_action(qrow, 0.0, rng) for _ in range(5)]
print("greedy picks on [0.1, 0.9, 0.9]:", greedy, "(lowest index wins ties)")
