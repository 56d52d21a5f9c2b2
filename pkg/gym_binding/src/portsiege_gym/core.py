"""Reset/step adapters over the portsiege game.

``TwoAgentEnv`` is the primary surface: one ``step`` takes an (attacker,
defender) action pair and applies a full game timestep. ``AttackerEnv`` and
``DefenderEnv`` are conventional single-agent views that embed an opponent —
scripted or loaded from a training checkpoint — chosen at construction.

The adapters add no game logic of their own; every transition is delegated
to the portsiege engine, so rollouts through an adapter are bit-identical to
the primary training harness under the same seed and action script.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from portsiege import (
    AgentConfig,
    ContractViolation,
    EnvConfig,
    RewardTable,
    advance_traffic,
    attacker_act,
    attacker_action_count,
    attacker_action_from_index,
    attacker_layout,
    attacker_observe,
    defender_act,
    defender_action_count,
    defender_action_from_index,
    defender_layout,
    defender_observe,
    make_agent,
    new_episode,
    score_events,
)

#: Terminal token that maps to ``truncated`` rather than ``terminated``.
TRUNCATION_TOKEN = "defender_win:survived-max-steps"


class DiscreteSpace:
    """Flat integer action space, {0, ..., n-1}."""

    def __init__(self, n: int):
        self.n = int(n)

    def contains(self, x) -> bool:
        return isinstance(x, (int, np.integer)) and 0 <= int(x) < self.n

    def sample(self, rng: Optional[np.random.Generator] = None) -> int:
        rng = rng if rng is not None else np.random.default_rng()
        return int(rng.integers(self.n))

    def __repr__(self):
        return f"DiscreteSpace({self.n})"


class BoxSpace:
    """Fixed-shape float vector space with uniform bounds."""

    def __init__(self, shape, low=0.0, high=1.0):
        self.shape = tuple(shape)
        self.low = float(low)
        self.high = float(high)

    def contains(self, x) -> bool:
        arr = np.asarray(x)
        return arr.shape == self.shape and bool(
            (arr >= self.low).all() and (arr <= self.high).all()
        )

    def __repr__(self):
        return f"BoxSpace(shape={self.shape}, low={self.low}, high={self.high})"


class _PolicyOpponent:
    """Greedy (or epsilon-greedy) wrapper around a value-learning agent."""

    def __init__(self, agent, side: str, epsilon: float = 0.0):
        if side not in ("attacker", "defender"):
            raise ValueError(f"unknown side: {side}")
        self.agent = agent
        self.side = side
        self.epsilon = epsilon

    def act(self, state):
        if self.side == "attacker":
            idx = self.agent.select_action(attacker_observe(state), self.epsilon)
            return attacker_action_from_index(state.config, idx)
        idx = self.agent.select_action(defender_observe(state), self.epsilon)
        return defender_action_from_index(state.config, idx)


def resolve_opponent(opponent, side: str, epsilon: float = 0.0):
    """Accept a scripted agent (``act(state)``) or a value learner
    (``select_action(obs, eps)``) and return something with ``act``."""
    if hasattr(opponent, "act"):
        return opponent
    if hasattr(opponent, "select_action"):
        return _PolicyOpponent(opponent, side, epsilon)
    raise TypeError(
        "opponent must expose act(state) or select_action(obs, epsilon); "
        f"got {type(opponent).__name__}"
    )


def from_checkpoint(side: str, path: str, config: EnvConfig,
                    agent_cfg: Optional[AgentConfig] = None):
    """Rebuild a trained agent from a run checkpoint for use as an opponent.

    The checkpoint records which backend wrote it, so the right agent kind
    is constructed automatically unless ``agent_cfg`` pins one.
    """
    if agent_cfg is None:
        with np.load(path) as data:
            kind = str(data["kind"]) if "kind" in data else "table"
        agent_cfg = AgentConfig(backend=kind)
    agent = make_agent(side, config, agent_cfg, seed=0)
    agent.load(path)
    return agent


class _Handle:
    """Shared episode plumbing for the three views."""

    def __init__(self, config: Optional[EnvConfig] = None,
                 rewards: Optional[RewardTable] = None):
        self.config = config if config is not None else EnvConfig()
        self.config.validate()
        self.rewards = rewards if rewards is not None else RewardTable()
        self._state = None
        self._done = True
        self._closed = False
        self._auto_seeds = np.random.default_rng()

    def close(self) -> None:
        self._closed = True
        self._state = None

    def _require_open(self) -> None:
        if self._closed:
            raise ContractViolation("handle is closed")

    def _require_active(self) -> None:
        self._require_open()
        if self._state is None or self._done:
            raise ContractViolation("no active episode; call reset() first")

    def _begin(self, seed: Optional[int]):
        self._require_open()
        if seed is None:
            seed = int(self._auto_seeds.integers(2 ** 63))
        self._state = new_episode(self.config, int(seed))
        self._done = False
        return self._state

    def _score(self, *event_lists):
        events = []
        for chunk in event_lists:
            events.extend(chunk)
        return score_events(events, shaping=self.config.shaping, table=self.rewards)

    def _finish(self, terminal):
        token = terminal.token()
        self._done = True
        truncated = token == TRUNCATION_TOKEN
        return (not truncated), truncated, token


class TwoAgentEnv(_Handle):
    """Both sides drive the same handle: step((attacker_idx, defender_idx))."""

    def __init__(self, config=None, rewards=None):
        super().__init__(config, rewards)
        self.action_space = (
            DiscreteSpace(attacker_action_count(self.config)),
            DiscreteSpace(defender_action_count(self.config)),
        )
        self.observation_space = (
            BoxSpace((attacker_layout(self.config).dim,)),
            BoxSpace((defender_layout(self.config).dim,)),
        )

    def reset(self, seed: Optional[int] = None):
        state = self._begin(seed)
        info = {
            "attacker": attacker_layout(self.config).describe(),
            "defender": defender_layout(self.config).describe(),
        }
        return (attacker_observe(state), defender_observe(state)), info

    def step(self, actions):
        self._require_active()
        a_idx, d_idx = actions
        # Decode both before touching the state so a bad pair changes nothing.
        a_action = attacker_action_from_index(self.config, int(a_idx))
        d_action = defender_action_from_index(self.config, int(d_idx))
        state = self._state
        ev_a = attacker_act(state, a_action)
        ev_d = defender_act(state, d_action)
        ev_t = advance_traffic(state)
        pair = self._score(ev_a.events, ev_d.events, ev_t.events)

        terminated = truncated = False
        info = {"illegal": (ev_a.illegal, ev_d.illegal)}
        if ev_t.terminal is not None:
            terminated, truncated, info["outcome"] = self._finish(ev_t.terminal)
        obs = (attacker_observe(state), defender_observe(state))
        return obs, (pair.attacker, pair.defender), terminated, truncated, info


class AttackerEnv(_Handle):
    """Attacker view: the embedded opponent plays defense every step."""

    def __init__(self, opponent, config=None, rewards=None,
                 opponent_epsilon: float = 0.0):
        super().__init__(config, rewards)
        self.opponent = resolve_opponent(opponent, "defender", opponent_epsilon)
        self.action_space = DiscreteSpace(attacker_action_count(self.config))
        self.observation_space = BoxSpace((attacker_layout(self.config).dim,))

    def reset(self, seed: Optional[int] = None):
        state = self._begin(seed)
        return attacker_observe(state), {"attacker": attacker_layout(self.config).describe()}

    def step(self, action):
        self._require_active()
        a_action = attacker_action_from_index(self.config, int(action))
        state = self._state
        ev_a = attacker_act(state, a_action)
        ev_d = defender_act(state, self.opponent.act(state))
        ev_t = advance_traffic(state)
        pair = self._score(ev_a.events, ev_d.events, ev_t.events)

        terminated = truncated = False
        info = {"illegal": ev_a.illegal}
        if ev_t.terminal is not None:
            terminated, truncated, info["outcome"] = self._finish(ev_t.terminal)
        return attacker_observe(state), pair.attacker, terminated, truncated, info


class DefenderEnv(_Handle):
    """Defender view: the embedded opponent attacks first each timestep.

    The attacker of the wrapped game moves before the defender, so ``reset``
    plays the opponent's opening move and the returned observation already
    reflects it; each ``step`` closes out one timestep and then plays the
    opponent's next move. The reward for a step scores the full timestep,
    opponent's events included.
    """

    def __init__(self, opponent, config=None, rewards=None,
                 opponent_epsilon: float = 0.0):
        super().__init__(config, rewards)
        self.opponent = resolve_opponent(opponent, "attacker", opponent_epsilon)
        self.action_space = DiscreteSpace(defender_action_count(self.config))
        self.observation_space = BoxSpace((defender_layout(self.config).dim,))
        self._pending_attacker_events = []

    def reset(self, seed: Optional[int] = None):
        state = self._begin(seed)
        ev_a = attacker_act(state, self.opponent.act(state))
        self._pending_attacker_events = ev_a.events
        return defender_observe(state), {"defender": defender_layout(self.config).describe()}

    def step(self, action):
        self._require_active()
        d_action = defender_action_from_index(self.config, int(action))
        state = self._state
        ev_d = defender_act(state, d_action)
        ev_t = advance_traffic(state)
        pair = self._score(self._pending_attacker_events, ev_d.events, ev_t.events)
        self._pending_attacker_events = []

        terminated = truncated = False
        info = {"illegal": ev_d.illegal}
        if ev_t.terminal is not None:
            terminated, truncated, info["outcome"] = self._finish(ev_t.terminal)
        else:
            ev_a = attacker_act(state, self.opponent.act(state))
            self._pending_attacker_events = ev_a.events
        return defender_observe(state), pair.defender, terminated, truncated, info
