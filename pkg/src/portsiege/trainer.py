"""Self-play harness: episode loop, training runs with metrics artifacts,
greedy evaluation, and a few deterministic scripted baselines.

A run directory contains ``config.json`` (the resolved run config),
``layouts.json`` (observation layouts), ``episodes.csv`` (one row per
episode), ``summary.json`` (aggregates), and ``checkpoints/``. Everything
written is a pure function of (config, seed), so double runs diff clean.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .agents import DQNAgent, EpsilonSchedule, TabularQAgent
from .config import AgentConfig, EnvConfig, RewardTable, RunConfig, canonical_json, config_hash
from .env import (
    AttackerAction,
    DefenderAction,
    EnvState,
    TerminalStatus,
    advance_traffic,
    attacker_act,
    attacker_action_count,
    attacker_action_from_index,
    defender_act,
    defender_action_count,
    defender_action_from_index,
    new_episode,
)
from .observe import attacker_layout, attacker_observe, defender_layout, defender_observe
from .rewards import score_events

CSV_HEADER = ["episode", "att_reward", "def_reward", "outcome", "steps", "att_eps", "def_eps"]


@dataclass
class EpisodeStats:
    episode: int
    att_reward: float
    def_reward: float
    outcome: TerminalStatus
    steps: int
    att_eps: float
    def_eps: float
    att_illegal: int = 0
    def_illegal: int = 0


@dataclass
class TrainingLog:
    stats: list
    run_cfg: RunConfig
    seed: int
    out_dir: Optional[Path] = None
    wall_clock_s: float = 0.0  # informational only; never written to metrics


@dataclass
class EvalReport:
    episodes: int
    attacker_win_rate: float
    defender_win_rate: float
    att_mean_reward: float
    def_mean_reward: float
    mean_steps: float
    outcome_counts: dict = field(default_factory=dict)

    @property
    def strategic_balance(self) -> float:
        """Attacker wins over total episodes."""
        return self.attacker_win_rate


def moving_average(series, window: int = 50):
    """Trailing mean; element i averages the last min(i+1, window) values."""
    if window < 1:
        raise ValueError("window must be >= 1")
    out = []
    acc = 0.0
    vals = list(series)
    for i, v in enumerate(vals):
        acc += v
        if i >= window:
            acc -= vals[i - window]
        out.append(acc / min(i + 1, window))
    return out


# ---------------------------------------------------------------------------
# Scripted baselines
# ---------------------------------------------------------------------------


class FixedPortExploiter:
    """Scan one port once, then hammer it with the exploit forever."""

    def __init__(self, port: int):
        self.port = port
        self._scanned = False

    def act(self, state: EnvState) -> AttackerAction:
        if not self._scanned:
            self._scanned = True
            return AttackerAction.scan(self.port)
        return AttackerAction.exploit(self.port)


class IdleDefender:
    def act(self, state: EnvState) -> DefenderAction:
        return DefenderAction.wait()


class PortCloser:
    """Close every open vulnerable port, one per turn, then wait."""

    def act(self, state: EnvState) -> DefenderAction:
        for p in state.ports:
            if p.vulnerable and p.open:
                return DefenderAction.close_port(p.id)
        return DefenderAction.wait()


class TrapLayer:
    """Trap every open port, one per turn, then wait."""

    def act(self, state: EnvState) -> DefenderAction:
        for p in state.ports:
            if p.open and not p.trapped:
                return DefenderAction.set_trap(p.id)
        return DefenderAction.wait()


class RandomAttacker:
    def __init__(self, seed: int = 0):
        self.rng = np.random.default_rng(seed)

    def act(self, state: EnvState) -> AttackerAction:
        idx = int(self.rng.integers(attacker_action_count(state.config)))
        return attacker_action_from_index(state.config, idx)


class RandomDefender:
    def __init__(self, seed: int = 0):
        self.rng = np.random.default_rng(seed)

    def act(self, state: EnvState) -> DefenderAction:
        idx = int(self.rng.integers(defender_action_count(state.config)))
        return defender_action_from_index(state.config, idx)


# ---------------------------------------------------------------------------
# Episode loop
# ---------------------------------------------------------------------------


def _is_learner(agent) -> bool:
    return isinstance(agent, (TabularQAgent, DQNAgent))


def _feed(agent, obs, action_idx, reward, next_obs, done) -> None:
    if isinstance(agent, TabularQAgent):
        agent.update(obs, action_idx, reward, next_obs, done)
    elif isinstance(agent, DQNAgent):
        agent.store(obs, action_idx, reward, next_obs, done)
        agent.learn_step()


def run_episode(
    env_cfg: EnvConfig,
    attacker,
    defender,
    seed: int,
    episode: int = 0,
    att_eps: float = 0.0,
    def_eps: float = 0.0,
    learn_attacker: bool = False,
    learn_defender: bool = False,
    rewards: RewardTable = None,
) -> EpisodeStats:
    """One full episode: attacker move, defender move, traffic, repeat.

    Each agent is either a learner (``select_action(obs, eps)`` over action
    indices, fed its own (s, a, r, s') each timestep when learning is on) or
    a scripted baseline (``act(state)`` with privileged state access).
    """
    table = rewards if rewards is not None else RewardTable()
    state = new_episode(env_cfg, seed)
    att_total = def_total = 0.0
    att_illegal = def_illegal = 0
    steps = 0
    att_learner = _is_learner(attacker)
    def_learner = _is_learner(defender)

    while True:
        if att_learner:
            obs_a = attacker_observe(state)
            a_idx = attacker.select_action(obs_a, att_eps)
            a_action = attacker_action_from_index(env_cfg, a_idx)
        else:
            obs_a, a_idx = None, None
            a_action = attacker.act(state)
        ev_a = attacker_act(state, a_action)

        if def_learner:
            obs_d = defender_observe(state)
            d_idx = defender.select_action(obs_d, def_eps)
            d_action = defender_action_from_index(env_cfg, d_idx)
        else:
            obs_d, d_idx = None, None
            d_action = defender.act(state)
        ev_d = defender_act(state, d_action)

        ev_t = advance_traffic(state)
        pair = score_events(
            ev_a.events + ev_d.events + ev_t.events,
            shaping=env_cfg.shaping,
            table=table,
        )
        att_total += pair.attacker
        def_total += pair.defender
        att_illegal += int(ev_a.illegal)
        def_illegal += int(ev_d.illegal)
        steps += 1
        done = ev_t.terminal is not None

        if learn_attacker and att_learner:
            _feed(attacker, obs_a, a_idx, pair.attacker, attacker_observe(state), done)
        if learn_defender and def_learner:
            _feed(defender, obs_d, d_idx, pair.defender, defender_observe(state), done)

        if done:
            return EpisodeStats(
                episode=episode,
                att_reward=att_total,
                def_reward=def_total,
                outcome=ev_t.terminal,
                steps=steps,
                att_eps=att_eps,
                def_eps=def_eps,
                att_illegal=att_illegal,
                def_illegal=def_illegal,
            )


# ---------------------------------------------------------------------------
# Training runs
# ---------------------------------------------------------------------------


def make_agent(side: str, env_cfg: EnvConfig, agent_cfg: AgentConfig, seed: int):
    if side == "attacker":
        layout, n_actions = attacker_layout(env_cfg), attacker_action_count(env_cfg)
    elif side == "defender":
        layout, n_actions = defender_layout(env_cfg), defender_action_count(env_cfg)
    else:
        raise ValueError(f"unknown side: {side}")
    if agent_cfg.backend == "table":
        return TabularQAgent(layout, n_actions, agent_cfg, seed=seed)
    return DQNAgent(layout.dim, n_actions, agent_cfg, seed=seed)


def _write_metrics(out: Path, run_cfg: RunConfig, stats, checkpoints) -> None:
    with open(out / "episodes.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for s in stats:
            w.writerow([
                s.episode,
                f"{s.att_reward:.6f}",
                f"{s.def_reward:.6f}",
                s.outcome.token(),
                s.steps,
                f"{s.att_eps:.6f}",
                f"{s.def_eps:.6f}",
            ])

    att_rewards = [s.att_reward for s in stats]
    def_rewards = [s.def_reward for s in stats]
    att_wins = [1.0 if s.outcome.token() == "attacker_win" else 0.0 for s in stats]
    tail = min(100, len(stats)) or 1
    counts: dict = {}
    for s in stats:
        counts[s.outcome.token()] = counts.get(s.outcome.token(), 0) + 1
    summary = {
        "config_hash": config_hash(run_cfg),
        "episodes": len(stats),
        "seed": run_cfg.seed,
        "outcome_counts": dict(sorted(counts.items())),
        "attacker_win_rate": round(sum(att_wins) / max(len(stats), 1), 6),
        "defender_win_rate": round(1.0 - sum(att_wins) / max(len(stats), 1), 6)
        if stats else 0.0,
        "att_mean_reward_final_100": round(float(np.mean(att_rewards[-tail:])), 6)
        if stats else 0.0,
        "def_mean_reward_final_100": round(float(np.mean(def_rewards[-tail:])), 6)
        if stats else 0.0,
        "att_moving_avg_final": round(moving_average(att_rewards)[-1], 6) if stats else 0.0,
        "def_moving_avg_final": round(moving_average(def_rewards)[-1], 6) if stats else 0.0,
        "attacker_win_rate_final_100": round(sum(att_wins[-tail:]) / tail, 6) if stats else 0.0,
        "mean_steps": round(float(np.mean([s.steps for s in stats])), 6) if stats else 0.0,
        "att_illegal_total": sum(s.att_illegal for s in stats),
        "def_illegal_total": sum(s.def_illegal for s in stats),
        "checkpoints": checkpoints,
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def train(run_cfg: RunConfig, out_dir=None, progress=None) -> TrainingLog:
    """Run the configured number of self-play episodes and write artifacts.

    ``progress``, when given, is called as progress(episode_index, stats)
    after each episode. Returns the in-memory log; the trained agents are
    attached as ``log.attacker`` / ``log.defender``.
    """
    run_cfg.validate()
    out = Path(out_dir if out_dir is not None else run_cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "checkpoints").mkdir(exist_ok=True)

    with open(out / "config.json", "w") as fh:
        fh.write(canonical_json(run_cfg))
        fh.write("\n")
    layouts = {
        "attacker": attacker_layout(run_cfg.env).describe(),
        "defender": defender_layout(run_cfg.env).describe(),
    }
    with open(out / "layouts.json", "w") as fh:
        json.dump(layouts, fh, indent=2, sort_keys=True)
        fh.write("\n")

    master = np.random.default_rng(run_cfg.seed)
    att_seed = int(master.integers(2 ** 32))
    def_seed = int(master.integers(2 ** 32))
    attacker = make_agent("attacker", run_cfg.env, run_cfg.attacker, att_seed)
    defender = make_agent("defender", run_cfg.env, run_cfg.defender, def_seed)
    att_sched = EpsilonSchedule.from_config(run_cfg.attacker)
    def_sched = EpsilonSchedule.from_config(run_cfg.defender)

    stats = []
    checkpoints = []
    t0 = time.perf_counter()
    for ep in range(run_cfg.episodes):
        env_seed = int(master.integers(2 ** 63))
        s = run_episode(
            run_cfg.env,
            attacker,
            defender,
            seed=env_seed,
            episode=ep,
            att_eps=att_sched.value(ep),
            def_eps=def_sched.value(ep),
            learn_attacker=run_cfg.learn_attacker,
            learn_defender=run_cfg.learn_defender,
            rewards=run_cfg.reward,
        )
        stats.append(s)
        if progress is not None:
            progress(ep, s)
        last = ep + 1 == run_cfg.episodes
        if run_cfg.checkpoint_every and ((ep + 1) % run_cfg.checkpoint_every == 0 or last):
            for side, agent in (("attacker", attacker), ("defender", defender)):
                rel = f"checkpoints/{side}-{ep + 1}.npz"
                agent.save(str(out / rel))
                if rel not in checkpoints:
                    checkpoints.append(rel)

    _write_metrics(out, run_cfg, stats, checkpoints)
    log = TrainingLog(
        stats=stats,
        run_cfg=run_cfg,
        seed=run_cfg.seed,
        out_dir=out,
        wall_clock_s=time.perf_counter() - t0,
    )
    log.attacker = attacker
    log.defender = defender
    return log


def evaluate(
    env_cfg: EnvConfig,
    attacker,
    defender,
    n_episodes: int,
    eps_eval: float = 0.0,
    seed: int = 0,
    rewards: RewardTable = None,
) -> EvalReport:
    """Frozen-policy rollouts: no learning, epsilon pinned at ``eps_eval``."""
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    master = np.random.default_rng(seed)
    stats = [
        run_episode(
            env_cfg,
            attacker,
            defender,
            seed=int(master.integers(2 ** 63)),
            episode=ep,
            att_eps=eps_eval,
            def_eps=eps_eval,
            rewards=rewards,
        )
        for ep in range(n_episodes)
    ]
    counts: dict = {}
    for s in stats:
        counts[s.outcome.token()] = counts.get(s.outcome.token(), 0) + 1
    att_wins = sum(1 for s in stats if s.outcome.token() == "attacker_win")
    return EvalReport(
        episodes=n_episodes,
        attacker_win_rate=att_wins / n_episodes,
        defender_win_rate=(n_episodes - att_wins) / n_episodes,
        att_mean_reward=float(np.mean([s.att_reward for s in stats])),
        def_mean_reward=float(np.mean([s.def_reward for s in stats])),
        mean_steps=float(np.mean([s.steps for s in stats])),
        outcome_counts=dict(sorted(counts.items())),
    )
