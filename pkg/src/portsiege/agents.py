"""Learning machinery: epsilon schedules, tabular Q-learning, and a
small numpy-only Q-network with replay and a periodically synced target.

Both sides run independent maximizers over their own reward stream; the
zero-sum coupling lives entirely in the mirrored reward events, not here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import AgentConfig
from .observe import ObservationLayout


@dataclass(frozen=True)
class EpsilonSchedule:
    """Exploration rate decayed per episode down to a floor:
    eps(t) = max(eps_min, eps_initial * eps_decay ** t)."""

    eps_initial: float
    eps_decay: float
    eps_min: float

    def value(self, episode: int) -> float:
        return max(self.eps_min, self.eps_initial * self.eps_decay ** episode)

    def floor_episode(self) -> int:
        """First episode index whose epsilon sits on the floor."""
        if self.eps_initial <= self.eps_min:
            return 0
        if self.eps_decay >= 1.0:
            raise ValueError("schedule never reaches the floor")
        t = math.ceil(math.log(self.eps_min / self.eps_initial) / math.log(self.eps_decay))
        # Guard the float estimate by walking to the exact boundary.
        while t > 0 and self.eps_initial * self.eps_decay ** (t - 1) <= self.eps_min:
            t -= 1
        while self.eps_initial * self.eps_decay ** t > self.eps_min:
            t += 1
        return t

    @classmethod
    def from_config(cls, cfg: AgentConfig) -> "EpsilonSchedule":
        return cls(cfg.eps_initial, cfg.eps_decay, cfg.eps_min)


def select_action(qvals: np.ndarray, eps: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy over a value row: with probability eps a uniform
    random action, otherwise the argmax (lowest index on ties)."""
    n = len(qvals)
    if n == 0:
        raise ValueError("select_action needs at least one action value")
    if rng.random() < eps:
        return int(rng.integers(n))
    return int(np.argmax(qvals))


# ---------------------------------------------------------------------------
# Tabular Q-learning
# ---------------------------------------------------------------------------


class TabularQAgent:
    """Sparse Q-table over discretized observations.

    Unvisited states read as all-zero without being materialized, so the
    table only ever holds states actually seen.
    """

    def __init__(self, layout: ObservationLayout, n_actions: int, cfg: AgentConfig,
                 seed: int = 0):
        cfg.validate()
        self.layout = layout
        self.n_actions = n_actions
        self.cfg = cfg
        self.rng = np.random.default_rng(seed)
        self.table: dict = {}

    def key(self, obs: np.ndarray) -> tuple:
        return self.layout.discretize(obs)

    def q_values(self, obs: np.ndarray) -> np.ndarray:
        row = self.table.get(self.key(obs))
        if row is None:
            return np.zeros(self.n_actions)
        return row.copy()

    def select_action(self, obs: np.ndarray, epsilon: float) -> int:
        row = self.table.get(self.key(obs))
        if row is None:
            row = np.zeros(self.n_actions)
        return select_action(row, epsilon, self.rng)

    def update(self, obs: np.ndarray, action: int, reward: float,
               next_obs: np.ndarray, done: bool) -> float:
        """One Q-learning backup; returns the TD error."""
        k = self.key(obs)
        row = self.table.get(k)
        if row is None:
            row = np.zeros(self.n_actions)
            self.table[k] = row
        bootstrap = 0.0
        if not done:
            nxt = self.table.get(self.key(next_obs))
            if nxt is not None:
                bootstrap = float(nxt.max())
        td = reward + self.cfg.gamma * bootstrap - row[action]
        row[action] += self.cfg.alpha * td
        return float(td)

    def save(self, path: str) -> None:
        if self.table:
            keys = np.array(sorted(self.table), dtype=np.int64)
            values = np.stack([self.table[tuple(k)] for k in keys.tolist()])
        else:
            keys = np.zeros((0, self.layout.dim), dtype=np.int64)
            values = np.zeros((0, self.n_actions))
        np.savez_compressed(path, kind="table", keys=keys, values=values)

    def load(self, path: str) -> None:
        with np.load(path) as data:
            keys, values = data["keys"], data["values"]
        self.table = {tuple(int(x) for x in k): v.copy() for k, v in zip(keys, values)}


# ---------------------------------------------------------------------------
# Replay buffer
# ---------------------------------------------------------------------------


class ReplayBuffer:
    """Fixed-capacity ring buffer of transitions in preallocated arrays."""

    def __init__(self, capacity: int, obs_dim: int):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.next_obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.dones = np.zeros(capacity)
        self.cursor = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def push(self, obs, action, reward, next_obs, done) -> None:
        i = self.cursor
        self.obs[i] = obs
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_obs[i] = next_obs
        self.dones[i] = float(done)
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator):
        """Uniform sample without replacement; callers must check len() first."""
        if batch_size > self.size:
            raise ValueError(
                f"cannot sample {batch_size} transitions from a buffer of {self.size}"
            )
        idx = rng.choice(self.size, size=batch_size, replace=False)
        return (self.obs[idx], self.actions[idx], self.rewards[idx],
                self.next_obs[idx], self.dones[idx])


# ---------------------------------------------------------------------------
# Q-network
# ---------------------------------------------------------------------------


class MLP:
    """Fully connected ReLU net, plain numpy, He-initialized."""

    def __init__(self, sizes, rng: np.random.Generator):
        self.sizes = tuple(sizes)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            scale = math.sqrt(2.0 / fan_in)
            self.weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    def forward(self, x: np.ndarray):
        """Returns the output plus the pre/post activations backprop needs."""
        pre, post = [], [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            pre.append(z)
            h = z if i == last else np.maximum(z, 0.0)
            post.append(h)
        return h, (pre, post)

    def predict(self, x: np.ndarray) -> np.ndarray:
        out, _ = self.forward(x)
        return out

    def clone(self) -> "MLP":
        other = MLP.__new__(MLP)
        other.sizes = self.sizes
        other.weights = [w.copy() for w in self.weights]
        other.biases = [b.copy() for b in self.biases]
        return other

    def copy_from(self, other: "MLP") -> None:
        for mine, theirs in zip(self.weights, other.weights):
            mine[:] = theirs
        for mine, theirs in zip(self.biases, other.biases):
            mine[:] = theirs

    def parameters(self):
        return list(self.weights) + list(self.biases)


def q_loss_and_grads(net: MLP, obs: np.ndarray, actions: np.ndarray,
                     targets: np.ndarray):
    """Mean-squared TD loss on the chosen actions, with analytic gradients
    for every weight and bias.

    loss = mean over the batch of (q[a] - target)^2
    """
    n = obs.shape[0]
    q, (pre, post) = net.forward(obs)
    picked = q[np.arange(n), actions]
    err = picked - targets
    loss = float(np.mean(err ** 2))

    d_out = np.zeros_like(q)
    d_out[np.arange(n), actions] = 2.0 * err / n

    w_grads = [None] * len(net.weights)
    b_grads = [None] * len(net.biases)
    delta = d_out
    for i in range(len(net.weights) - 1, -1, -1):
        w_grads[i] = post[i].T @ delta
        b_grads[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ net.weights[i].T) * (pre[i - 1] > 0.0)
    return loss, w_grads, b_grads


class DQNAgent:
    """Q-network learner: replay, epsilon-greedy, SGD, periodic target sync."""

    HIDDEN = (128, 128)

    def __init__(self, obs_dim: int, n_actions: int, cfg: AgentConfig,
                 seed: int = 0, hidden=None):
        cfg.validate()
        self.obs_dim = obs_dim
        self.n_actions = n_actions
        self.cfg = cfg
        self.rng = np.random.default_rng(seed)
        sizes = (obs_dim,) + tuple(hidden or self.HIDDEN) + (n_actions,)
        self.online = MLP(sizes, self.rng)
        self.target = self.online.clone()
        self.buffer = ReplayBuffer(cfg.buffer_capacity, obs_dim)
        self.env_steps = 0
        self.updates = 0

    def q_values(self, obs: np.ndarray) -> np.ndarray:
        return self.online.predict(obs[None, :])[0]

    def select_action(self, obs: np.ndarray, epsilon: float) -> int:
        return select_action(self.q_values(obs), epsilon, self.rng)

    def store(self, obs, action, reward, next_obs, done) -> None:
        self.buffer.push(obs, action, reward, next_obs, done)

    def learn_step(self):
        """One SGD step on a replay batch; None until the buffer can fill one.

        The target network resyncs on a fixed environment-step cadence,
        counted per call, whether or not the buffer could serve a batch yet.
        """
        self.env_steps += 1
        loss = None
        if len(self.buffer) >= self.cfg.batch_size:
            obs, actions, rewards, next_obs, dones = self.buffer.sample(
                self.cfg.batch_size, self.rng
            )
            next_q = self.target.predict(next_obs).max(axis=1)
            targets = rewards + self.cfg.gamma * next_q * (1.0 - dones)
            loss, w_grads, b_grads = q_loss_and_grads(self.online, obs, actions, targets)
            lr = self.cfg.alpha
            for w, g in zip(self.online.weights, w_grads):
                w -= lr * g
            for b, g in zip(self.online.biases, b_grads):
                b -= lr * g
            self.updates += 1
        if self.env_steps % self.cfg.target_sync_period == 0:
            self.target.copy_from(self.online)
        return loss

    def save(self, path: str) -> None:
        arrays = {"kind": "dqn", "sizes": np.array(self.online.sizes)}
        for i, w in enumerate(self.online.weights):
            arrays[f"w{i}"] = w
        for i, b in enumerate(self.online.biases):
            arrays[f"b{i}"] = b
        np.savez_compressed(path, **arrays)

    def load(self, path: str) -> None:
        with np.load(path) as data:
            for i in range(len(self.online.weights)):
                self.online.weights[i][:] = data[f"w{i}"]
                self.online.biases[i][:] = data[f"b{i}"]
        self.target.copy_from(self.online)
