"""Learning components: schedules, action selection, Q-table, replay, network."""

import numpy as np
import pytest

from portsiege.agents import (
    DQNAgent,
    EpsilonSchedule,
    MLP,
    ReplayBuffer,
    TabularQAgent,
    q_loss_and_grads,
    select_action,
)
from portsiege.config import AgentConfig, attacker_defaults, defender_defaults
from portsiege.observe import attacker_layout
from test_env import small_config


class TestEpsilonSchedule:
    def test_starts_at_initial(self):
        sched = EpsilonSchedule.from_config(attacker_defaults())
        assert sched.value(0) == 1.0

    def test_attacker_floor_episode(self):
        sched = EpsilonSchedule(1.0, 0.995, 0.05)
        assert sched.floor_episode() == 598
        assert sched.value(597) > 0.05
        assert sched.value(598) == 0.05

    def test_defender_floor_episode(self):
        sched = EpsilonSchedule(1.0, 0.99, 0.05)
        assert sched.floor_episode() == 299
        assert sched.value(298) > 0.05
        assert sched.value(299) == 0.05

    def test_matches_closed_form_before_floor(self):
        sched = EpsilonSchedule(0.9, 0.97, 0.01)
        for t in [0, 1, 5, 50]:
            assert sched.value(t) == pytest.approx(0.9 * 0.97 ** t)

    def test_never_increases(self):
        sched = EpsilonSchedule.from_config(defender_defaults())
        values = [sched.value(t) for t in range(1200)]
        for a, b in zip(values, values[1:]):
            assert b <= a
        assert values[-1] == 0.05

    def test_degenerate_cases(self):
        assert EpsilonSchedule(0.05, 0.9, 0.05).floor_episode() == 0
        with pytest.raises(ValueError):
            EpsilonSchedule(1.0, 1.0, 0.05).floor_episode()


class TestSelectAction:
    def test_greedy_picks_argmax(self):
        rng = np.random.default_rng(0)
        assert select_action(np.array([1.0, 5.0, 3.0]), 0.0, rng) == 1

    def test_ties_break_to_lowest_index(self):
        rng = np.random.default_rng(0)
        assert select_action(np.array([2.0, 2.0, 0.0]), 0.0, rng) == 0

    def test_fully_random_is_uniform(self):
        rng = np.random.default_rng(123)
        qvals = np.array([0.0, 9.0, 1.0, -4.0])
        counts = np.zeros(4)
        for _ in range(10_000):
            counts[select_action(qvals, 1.0, rng)] += 1
        freqs = counts / 10_000
        assert np.all(np.abs(freqs - 0.25) < 0.02)

    def test_greedy_choice_ignores_constant_shifts(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            row = rng.normal(size=6)
            base = select_action(row, 0.0, rng)
            for shift in (-100.0, 0.5, 1e6):
                assert select_action(row + shift, 0.0, rng) == base

    def test_empty_row_rejected(self):
        with pytest.raises(ValueError):
            select_action(np.array([]), 0.0, np.random.default_rng(0))


def make_table_agent(alpha=0.001, gamma=0.95, n_actions=3, seed=0) -> TabularQAgent:
    cfg = AgentConfig(alpha=alpha, gamma=gamma)
    layout = attacker_layout(small_config())
    return TabularQAgent(layout, n_actions, cfg, seed=seed)


def obs_variant(layout, code: int) -> np.ndarray:
    """Distinct observation vectors that discretize to distinct keys."""
    vec = np.zeros(layout.dim)
    vec[0] = code / 3.0  # scan_result slot, categorical with 4 levels
    return vec


class TestTabularQ:
    def test_reads_do_not_materialize_rows(self):
        agent = make_table_agent()
        obs = np.zeros(agent.layout.dim)
        assert (agent.q_values(obs) == 0.0).all()
        agent.select_action(obs, 0.0)
        assert agent.table == {}

    def test_first_backup_from_empty_table(self):
        agent = make_table_agent(alpha=0.001)
        obs = np.zeros(agent.layout.dim)
        td = agent.update(obs, 1, reward=1.0, next_obs=obs, done=True)
        assert td == pytest.approx(1.0)
        assert agent.q_values(obs)[1] == pytest.approx(0.001)

    def test_zero_signal_leaves_zeros(self):
        agent = make_table_agent()
        obs = np.zeros(agent.layout.dim)
        td = agent.update(obs, 0, reward=0.0, next_obs=obs, done=True)
        assert td == 0.0
        assert (agent.q_values(obs) == 0.0).all()

    def test_fixed_point_backup(self):
        # Q(s,a)=10 with r=0, gamma=1 and max Q(s')=10 is self-consistent:
        # the update must leave it exactly in place.
        agent = make_table_agent(gamma=1.0)
        obs = obs_variant(agent.layout, 0)
        nxt = obs_variant(agent.layout, 1)
        agent.table[agent.key(obs)] = np.array([10.0, 0.0, 0.0])
        agent.table[agent.key(nxt)] = np.array([4.0, 10.0, 1.0])
        td = agent.update(obs, 0, reward=0.0, next_obs=nxt, done=False)
        assert td == 0.0
        assert agent.q_values(obs)[0] == pytest.approx(10.0)

    def test_terminal_update_skips_bootstrap(self):
        agent = make_table_agent(alpha=0.5, gamma=1.0)
        obs = obs_variant(agent.layout, 0)
        nxt = obs_variant(agent.layout, 1)
        agent.table[agent.key(nxt)] = np.array([50.0, 0.0, 0.0])
        agent.update(obs, 0, reward=2.0, next_obs=nxt, done=True)
        assert agent.q_values(obs)[0] == pytest.approx(1.0)  # 0.5 * 2.0, no 50

    def test_unseen_next_state_bootstraps_zero(self):
        agent = make_table_agent(alpha=1.0, gamma=0.9)
        obs = obs_variant(agent.layout, 0)
        nxt = obs_variant(agent.layout, 1)
        agent.update(obs, 2, reward=3.0, next_obs=nxt, done=False)
        assert agent.q_values(obs)[2] == pytest.approx(3.0)
        assert agent.key(nxt) not in agent.table

    def test_save_load_round_trip(self, tmp_path):
        agent = make_table_agent(alpha=0.5)
        rng = np.random.default_rng(3)
        layout = agent.layout
        for code in range(4):
            obs = obs_variant(layout, code)
            agent.update(obs, int(rng.integers(3)), float(rng.normal()), obs, True)
        path = str(tmp_path / "table.npz")
        agent.save(path)
        fresh = make_table_agent(alpha=0.5)
        fresh.load(path)
        assert set(fresh.table) == set(agent.table)
        for k, row in agent.table.items():
            np.testing.assert_array_equal(fresh.table[k], row)


class TestReplayBuffer:
    def test_overwrite_evicts_oldest(self):
        buf = ReplayBuffer(capacity=2, obs_dim=1)
        for tag in (1.0, 2.0, 3.0):
            buf.push([tag], 0, tag, [tag], False)
        assert len(buf) == 2
        assert sorted(buf.rewards.tolist()) == [2.0, 3.0]

    def test_full_draw_is_a_permutation(self):
        buf = ReplayBuffer(capacity=5, obs_dim=1)
        for i in range(5):
            buf.push([float(i)], i, float(i), [float(i)], False)
        _, actions, rewards, _, _ = buf.sample(5, np.random.default_rng(0))
        assert sorted(actions.tolist()) == [0, 1, 2, 3, 4]
        assert sorted(rewards.tolist()) == [0.0, 1.0, 2.0, 3.0, 4.0]

    def test_overdraw_rejected(self):
        buf = ReplayBuffer(capacity=8, obs_dim=1)
        buf.push([0.0], 0, 0.0, [0.0], False)
        with pytest.raises(ValueError):
            buf.sample(2, np.random.default_rng(0))

    def test_sampling_is_uniform(self):
        buf = ReplayBuffer(capacity=8, obs_dim=1)
        for i in range(8):
            buf.push([0.0], i, 0.0, [0.0], False)
        rng = np.random.default_rng(11)
        counts = np.zeros(8)
        trials = 4000
        for _ in range(trials):
            _, actions, _, _, _ = buf.sample(4, rng)
            counts[actions] += 1
        # Each slot appears in a draw with p=1/2; binomial 3-sigma band.
        expected = trials * 0.5
        sigma = np.sqrt(trials * 0.25)
        assert np.all(np.abs(counts - expected) <= 3 * sigma)

    def test_fields_round_trip(self):
        buf = ReplayBuffer(capacity=4, obs_dim=2)
        buf.push([0.5, -1.0], 3, 7.25, [1.0, 2.0], True)
        obs, actions, rewards, next_obs, dones = buf.sample(1, np.random.default_rng(0))
        np.testing.assert_array_equal(obs[0], [0.5, -1.0])
        assert actions[0] == 3
        assert rewards[0] == 7.25
        np.testing.assert_array_equal(next_obs[0], [1.0, 2.0])
        assert dones[0] == 1.0


class TestMLP:
    def test_zero_weights_give_zero_output(self):
        net = MLP((4, 8, 3), np.random.default_rng(0))
        for w in net.weights:
            w[:] = 0.0
        out = net.predict(np.ones((5, 4)))
        assert out.shape == (5, 3)
        assert (out == 0.0).all()

    def test_layer_shapes_and_zero_bias_init(self):
        net = MLP((6, 16, 16, 4), np.random.default_rng(1))
        assert [w.shape for w in net.weights] == [(6, 16), (16, 16), (16, 4)]
        for b in net.biases:
            assert (b == 0.0).all()

    def test_clone_is_independent(self):
        net = MLP((3, 5, 2), np.random.default_rng(2))
        twin = net.clone()
        x = np.random.default_rng(3).normal(size=(4, 3))
        np.testing.assert_array_equal(net.predict(x), twin.predict(x))
        twin.weights[0][:] = 99.0
        assert not np.array_equal(net.weights[0], twin.weights[0])

    def test_copy_from_syncs_parameters(self):
        rng = np.random.default_rng(4)
        a = MLP((3, 5, 2), rng)
        b = MLP((3, 5, 2), rng)
        b.copy_from(a)
        x = rng.normal(size=(6, 3))
        np.testing.assert_array_equal(a.predict(x), b.predict(x))

    def test_relu_hidden_linear_output(self):
        # Negative pre-activations are clipped in hidden layers but the
        # output layer must stay linear (Q-values can be negative).
        net = MLP((2, 4, 1), np.random.default_rng(5))
        net.weights[0][:] = -1.0
        net.weights[1][:] = 1.0
        net.biases[1][:] = -3.0
        out = net.predict(np.array([[1.0, 1.0]]))
        assert out[0, 0] == pytest.approx(-3.0)  # hidden clamps to 0, bias passes


def finite_difference_grads(net, obs, actions, targets, h=1e-6):
    grads = []
    for param in net.parameters():
        g = np.zeros_like(param)
        flat = param.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            lo_plus, _, _ = q_loss_and_grads(net, obs, actions, targets)
            flat[i] = orig - h
            lo_minus, _, _ = q_loss_and_grads(net, obs, actions, targets)
            flat[i] = orig
            g.ravel()[i] = (lo_plus - lo_minus) / (2 * h)
        grads.append(g)
    return grads


class TestQGradients:
    def test_loss_is_mean_squared_error_on_chosen_actions(self):
        net = MLP((3, 4, 2), np.random.default_rng(6))
        obs = np.random.default_rng(7).normal(size=(5, 3))
        actions = np.array([0, 1, 1, 0, 1])
        targets = np.linspace(-1, 1, 5)
        loss, _, _ = q_loss_and_grads(net, obs, actions, targets)
        q = net.predict(obs)
        expected = np.mean((q[np.arange(5), actions] - targets) ** 2)
        assert loss == pytest.approx(expected, rel=1e-12)

    def test_unchosen_actions_get_no_output_gradient(self):
        net = MLP((3, 4, 3), np.random.default_rng(8))
        obs = np.random.default_rng(9).normal(size=(4, 3))
        actions = np.zeros(4, dtype=np.int64)  # nobody picks actions 1 or 2
        targets = np.ones(4)
        _, _, b_grads = q_loss_and_grads(net, obs, actions, targets)
        assert b_grads[-1][1] == 0.0
        assert b_grads[-1][2] == 0.0

    @pytest.mark.parametrize("seed", [0, 1])
    def test_analytic_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        net = MLP((3, 6, 4, 2), rng)
        obs = rng.normal(size=(5, 3))
        actions = rng.integers(2, size=5)
        targets = rng.normal(size=5)
        _, w_grads, b_grads = q_loss_and_grads(net, obs, actions, targets)
        numeric = finite_difference_grads(net, obs, actions, targets)
        analytic = w_grads + b_grads
        for a, n in zip(analytic, numeric):
            denom = max(np.abs(n).max(), 1e-8)
            assert np.abs(a - n).max() / denom < 1e-4


class TestDQNAgent:
    def small(self, **overrides):
        cfg_kwargs = dict(
            alpha=0.01,
            gamma=0.9,
            batch_size=2,
            buffer_capacity=32,
            target_sync_period=4,
        )
        cfg_kwargs.update(overrides)
        return DQNAgent(obs_dim=3, n_actions=2, cfg=AgentConfig(**cfg_kwargs),
                        seed=0, hidden=(8,))

    def test_no_learning_before_a_full_batch(self):
        agent = self.small(batch_size=4)
        agent.store(np.zeros(3), 0, 0.0, np.zeros(3), False)
        assert agent.learn_step() is None
        assert agent.updates == 0
        assert agent.env_steps == 1

    def test_loss_appears_once_batch_is_available(self):
        agent = self.small()
        for i in range(2):
            agent.store(np.full(3, float(i)), i, float(i), np.zeros(3), True)
        loss = agent.learn_step()
        assert isinstance(loss, float)
        assert agent.updates == 1

    def test_target_sync_counts_environment_steps(self):
        agent = self.small(target_sync_period=4)
        for i in range(2):
            agent.store(np.full(3, float(i)), i, 1.0, np.zeros(3), True)
        x = np.ones((1, 3))
        for step in range(1, 4):
            agent.learn_step()
            # Online drifts; target must still hold the pre-training weights.
            assert not np.allclose(agent.online.predict(x), agent.target.predict(x))
        agent.learn_step()  # step 4: resync
        np.testing.assert_array_equal(agent.online.predict(x), agent.target.predict(x))

    def test_sync_cadence_ticks_even_while_buffer_is_short(self):
        agent = self.small(batch_size=16, target_sync_period=3)
        for _ in range(5):
            agent.learn_step()
        assert agent.env_steps == 5
        assert agent.updates == 0

    def test_greedy_action_matches_network_argmax(self):
        agent = self.small()
        obs = np.array([0.2, -0.4, 0.9])
        assert agent.select_action(obs, 0.0) == int(np.argmax(agent.q_values(obs)))

    def test_repeated_updates_fit_a_terminal_target(self):
        agent = self.small(alpha=0.05, batch_size=1)
        obs = np.array([1.0, 0.0, -1.0])
        agent.store(obs, 1, 1.0, obs, True)
        for _ in range(300):
            agent.learn_step()
        assert agent.q_values(obs)[1] == pytest.approx(1.0, abs=0.05)

    def test_save_load_round_trip(self, tmp_path):
        agent = self.small()
        for i in range(4):
            agent.store(np.full(3, float(i)), i % 2, float(i), np.zeros(3), True)
        for _ in range(6):
            agent.learn_step()
        path = str(tmp_path / "net.npz")
        agent.save(path)
        fresh = self.small()
        fresh.load(path)
        x = np.random.default_rng(5).normal(size=(7, 3))
        np.testing.assert_array_equal(agent.online.predict(x), fresh.online.predict(x))
        # Loading must leave online and target in agreement.
        np.testing.assert_array_equal(fresh.online.predict(x), fresh.target.predict(x))
