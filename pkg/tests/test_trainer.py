"""Harness behavior: episode loop, metrics artifacts, evaluation, baselines."""

import csv
import json
import math
from dataclasses import replace

import numpy as np
import pytest

from portsiege.agents import DQNAgent, TabularQAgent
from portsiege.config import (
    EnvConfig,
    RunConfig,
    attacker_defaults,
    defender_defaults,
)
from portsiege.env import new_episode
from portsiege.trainer import (
    CSV_HEADER,
    FixedPortExploiter,
    IdleDefender,
    PortCloser,
    RandomAttacker,
    RandomDefender,
    TrapLayer,
    evaluate,
    make_agent,
    moving_average,
    run_episode,
    train,
)
from test_env import small_config


class TestMovingAverage:
    def test_two_point_window(self):
        assert moving_average([0.0, 100.0], window=2) == [0.0, 50.0]

    def test_trailing_window_slides(self):
        assert moving_average([1, 2, 3, 4], window=2) == [1.0, 1.5, 2.5, 3.5]

    def test_warmup_uses_what_exists(self):
        out = moving_average([2, 4, 6], window=10)
        assert out == [2.0, 3.0, 4.0]

    def test_window_one_is_identity(self):
        assert moving_average([5, 7, 9], window=1) == [5.0, 7.0, 9.0]

    def test_bad_window(self):
        with pytest.raises(ValueError):
            moving_average([1, 2], window=0)


class TestScriptedEpisodes:
    def test_undefended_exploit_runs_to_the_threshold(self):
        # Seed 5 deals port 10 a threshold of exactly 300: one scan step,
        # then ceil(300/30) = 10 delivery steps, then the win bonus.
        stats = run_episode(EnvConfig(), FixedPortExploiter(10), IdleDefender(), seed=5)
        assert stats.outcome.token() == "attacker_win"
        assert stats.steps == 11
        assert stats.att_reward == pytest.approx(97.375)
        assert stats.def_reward == pytest.approx(-100.0)

    @pytest.mark.parametrize("seed", [0, 1, 3])
    def test_undefended_exploit_reward_closed_form(self, seed):
        cfg = EnvConfig()
        world = new_episode(cfg, seed)
        port = world.vulnerable_ports[0]
        stats = run_episode(cfg, FixedPortExploiter(port.id), IdleDefender(), seed=seed)
        traffic_steps = math.ceil(port.threshold / cfg.exploit_rate)
        assert stats.outcome.token() == "attacker_win"
        assert stats.steps == traffic_steps + 1
        assert stats.att_reward == pytest.approx(100.0 - 0.125 - 0.25 * traffic_steps)
        assert stats.def_reward == pytest.approx(-100.0)

    def test_port_closer_shuts_out_the_attacker(self):
        stats = run_episode(EnvConfig(), FixedPortExploiter(0), PortCloser(), seed=7)
        assert stats.outcome.token() == "defender_win:all-vuln-closed"

    def test_random_vs_random_terminates(self):
        stats = run_episode(
            small_config(), RandomAttacker(seed=1), RandomDefender(seed=2), seed=3
        )
        assert stats.steps <= small_config().max_steps
        assert stats.outcome.is_terminal

    def test_trap_layer_covers_open_ports(self):
        cfg = small_config(t_min=500, t_max=500)
        state = new_episode(cfg, 0)
        layer = TrapLayer()
        seen = set()
        for _ in range(cfg.n_ports):
            action = layer.act(state)
            seen.add(action.port)
            state.ports[action.port].trapped = True
        assert seen == {0, 1, 2, 3}
        assert layer.act(state).port is None  # wait once everything is trapped


class TestLearnerEpisodes:
    def test_tabular_self_play_populates_tables(self):
        cfg = small_config()
        att = make_agent("attacker", cfg, replace(attacker_defaults(), backend="table"), 1)
        dfd = make_agent("defender", cfg, replace(defender_defaults(), backend="table"), 2)
        for ep in range(5):
            stats = run_episode(
                cfg, att, dfd, seed=ep, episode=ep, att_eps=1.0, def_eps=1.0,
                learn_attacker=True, learn_defender=True,
            )
            assert stats.outcome.is_terminal
        assert len(att.table) > 0
        assert len(dfd.table) > 0

    def test_learning_off_leaves_agents_untouched(self):
        cfg = small_config()
        att = make_agent("attacker", cfg, replace(attacker_defaults(), backend="table"), 1)
        dfd = make_agent("defender", cfg, replace(defender_defaults(), backend="table"), 2)
        run_episode(cfg, att, dfd, seed=0, att_eps=1.0, def_eps=1.0)
        assert att.table == {} and dfd.table == {}

    def test_stats_carry_the_epsilons(self):
        cfg = small_config()
        att = make_agent("attacker", cfg, replace(attacker_defaults(), backend="table"), 1)
        stats = run_episode(cfg, att, IdleDefender(), seed=0, att_eps=0.25)
        assert stats.att_eps == 0.25
        assert stats.def_eps == 0.0


class TestMakeAgent:
    def test_backend_selection(self):
        cfg = small_config()
        table = make_agent("attacker", cfg, replace(attacker_defaults(), backend="table"), 0)
        assert isinstance(table, TabularQAgent)
        dqn = make_agent("defender", cfg, replace(defender_defaults(), backend="dqn"), 0)
        assert isinstance(dqn, DQNAgent)

    def test_action_space_sizes_match_side(self):
        cfg = small_config()
        att = make_agent("attacker", cfg, replace(attacker_defaults(), backend="table"), 0)
        dfd = make_agent("defender", cfg, replace(defender_defaults(), backend="table"), 0)
        assert att.n_actions == 2 * cfg.n_ports + 2
        assert dfd.n_actions == 1 + cfg.n_ips + 3 * cfg.n_ports

    def test_unknown_side_rejected(self):
        with pytest.raises(ValueError):
            make_agent("referee", small_config(), attacker_defaults(), 0)


def tiny_run_config(tmp_path, name="run", **overrides) -> RunConfig:
    base = dict(
        env=small_config(),
        attacker=replace(attacker_defaults(), backend="table"),
        defender=replace(defender_defaults(), backend="table"),
        episodes=6,
        seed=9,
        out_dir=str(tmp_path / name),
        checkpoint_every=3,
    )
    base.update(overrides)
    return RunConfig(**base)


class TestTrainArtifacts:
    def test_run_directory_contents(self, tmp_path):
        run_cfg = tiny_run_config(tmp_path)
        log = train(run_cfg)
        out = log.out_dir
        for fname in ("config.json", "layouts.json", "episodes.csv", "summary.json"):
            assert (out / fname).is_file()
        assert (out / "checkpoints" / "attacker-3.npz").is_file()
        assert (out / "checkpoints" / "defender-6.npz").is_file()
        assert len(log.stats) == 6

    def test_episode_csv_shape(self, tmp_path):
        log = train(tiny_run_config(tmp_path))
        with open(log.out_dir / "episodes.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == CSV_HEADER
        assert len(rows) == 1 + 6
        episodes = [int(r[0]) for r in rows[1:]]
        assert episodes == list(range(6))
        for r in rows[1:]:
            float(r[1]), float(r[2])  # rewards parse
            assert r[3].startswith(("attacker_win", "defender_win"))

    def test_summary_aggregates(self, tmp_path):
        log = train(tiny_run_config(tmp_path))
        with open(log.out_dir / "summary.json") as fh:
            summary = json.load(fh)
        assert summary["episodes"] == 6
        assert summary["attacker_win_rate"] + summary["defender_win_rate"] == pytest.approx(1.0)
        assert sum(summary["outcome_counts"].values()) == 6
        assert summary["checkpoints"]
        assert "wall" not in " ".join(summary.keys())

    def test_epsilons_follow_the_schedules(self, tmp_path):
        log = train(tiny_run_config(tmp_path))
        att = [s.att_eps for s in log.stats]
        assert att[0] == 1.0
        assert att == sorted(att, reverse=True)

    def test_progress_callback_sees_every_episode(self, tmp_path):
        calls = []
        train(tiny_run_config(tmp_path), progress=lambda ep, s: calls.append((ep, s.episode)))
        assert calls == [(i, i) for i in range(6)]

    def test_identical_configs_reproduce_byte_identical_metrics(self, tmp_path):
        cfg_a = tiny_run_config(tmp_path, name="a")
        cfg_b = tiny_run_config(tmp_path, name="b")
        a = train(cfg_a).out_dir
        b = train(cfg_b).out_dir
        for fname in ("episodes.csv", "summary.json"):
            assert (a / fname).read_bytes() == (b / fname).read_bytes(), fname
        # config.json differs only by its own out_dir; the hash masks that.
        ja = json.loads((a / "config.json").read_text())
        jb = json.loads((b / "config.json").read_text())
        ja.pop("out_dir"), jb.pop("out_dir")
        assert ja == jb

    def test_different_seed_changes_outcomes(self, tmp_path):
        a = train(tiny_run_config(tmp_path, name="a")).out_dir
        b = train(tiny_run_config(tmp_path, name="c", seed=10)).out_dir
        assert (a / "episodes.csv").read_bytes() != (b / "episodes.csv").read_bytes()


class TestEvaluate:
    def test_win_rates_partition_the_episodes(self):
        report = evaluate(
            small_config(), RandomAttacker(0), RandomDefender(0), n_episodes=20, seed=4
        )
        assert report.episodes == 20
        assert report.attacker_win_rate + report.defender_win_rate == pytest.approx(1.0)
        assert sum(report.outcome_counts.values()) == 20
        assert report.strategic_balance == report.attacker_win_rate

    def test_closing_defender_always_wins(self):
        report = evaluate(
            EnvConfig(), FixedPortExploiter(0), PortCloser(), n_episodes=10, seed=1
        )
        assert report.defender_win_rate == 1.0
        assert report.attacker_win_rate == 0.0

    def test_rejects_empty_evaluation(self):
        with pytest.raises(ValueError):
            evaluate(small_config(), RandomAttacker(0), RandomDefender(0), n_episodes=0)
