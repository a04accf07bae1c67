import numpy as np
import pytest

from pounce.epmc import (DistillConfig, Discriminator, EpmcEnv, EpmcPolicy,
                         GAIL_REWARD_CAP, TeacherSet, build_policy,
                         command_reward, fall_recovery_reward, gail_reward,
                         gail_update, kl_categorical, kl_value,
                         nav_direction_reward, nav_speed_reward,
                         stair_edge_penalty)
from pounce.nn import Tensor, log_softmax
from pounce.pmc import PmcPolicy
from pounce.sim import SimConfig


def test_direction_reward_values():
    e = np.array([1.0, 0.0])
    assert abs(nav_direction_reward(e, e) - 1.0) < 1e-12
    # d . d_hat = 0.8
    d_hat = np.array([0.8, 0.6])
    assert abs(nav_direction_reward(e, d_hat) - np.exp(-1.0)) < 1e-9
    assert abs(nav_direction_reward(e, -e) - np.exp(-10.0)) < 1e-12


def test_direction_reward_requires_unit_vectors():
    with pytest.raises(ValueError):
        nav_direction_reward(np.array([2.0, 0.0]), np.array([1.0, 0.0]))


def test_speed_reward_values():
    assert abs(nav_speed_reward(1.5, 1.5) - 1.0) < 1e-12
    assert abs(nav_speed_reward(3.0, 2.5) - np.exp(-2.0)) < 1e-9


def test_command_reward_weights():
    e = np.array([1.0, 0.0])
    assert abs(command_reward(e, e, 2.0, 2.0) - 1.0) < 1e-12


def test_stair_penalty_counts_contacts():
    edges = np.array([1.0, 2.0])
    toes = np.array([[0.98, 0.0], [1.04, 0.0], [1.96, 0.1], [2.5, 0.0]])
    contacts = [True, True, True, True]
    # first three toes within 5 cm of an edge
    assert stair_edge_penalty(contacts, toes, edges) == -0.75
    assert stair_edge_penalty([False] * 4, toes, edges) == 0.0
    all_near = np.array([[1.01, 0], [0.96, 0], [2.04, 0], [1.99, 0]])
    assert stair_edge_penalty([True] * 4, all_near, edges) == -1.0


def test_stair_penalty_boundary_strictly_inside():
    edges = np.array([1.0])
    exact = np.array([[1.05, 0.0]])
    assert stair_edge_penalty([True], exact, edges) == 0.0


def test_fall_recovery_reward_values():
    nominal = np.zeros(8)
    # upright, motionless, at nominal pose
    r = fall_recovery_reward(-1.0, -1.0, 0.0, nominal, np.zeros(8), nominal)
    assert r == 0.0
    # pure spin at 1 rad/s
    r = fall_recovery_reward(-1.0, -1.0, 1.0, nominal, np.zeros(8), nominal)
    assert abs(r - (-0.1)) < 1e-12


def test_fall_recovery_righting_telescopes_positive():
    nominal = np.zeros(8)
    g = np.linspace(1.0, -1.0, 51)  # upside down -> upright
    total = sum(fall_recovery_reward(g[i], g[i - 1], 0.0, nominal,
                                     np.zeros(8), nominal)
                for i in range(1, 51))
    assert abs(total - 160.0) < 1e-9


def test_gail_reward_values():
    assert abs(gail_reward(0.5) - np.log(2.0)) < 1e-12
    assert gail_reward(0.0) == 0.0
    assert gail_reward(1.0 - 1e-12) == GAIL_REWARD_CAP
    vals = gail_reward(np.array([0.1, 0.9]))
    assert np.all(vals >= 0.0) and np.all(vals <= GAIL_REWARD_CAP)


def test_discriminator_loss_at_half():
    rng = np.random.default_rng(0)
    disc = Discriminator(rng)
    # zero the output layer so D == 0.5 everywhere
    disc.net.layers[-1].W.data[:] = 0.0
    disc.net.layers[-1].b.data[:] = 0.0
    pe = rng.standard_normal((64, 90))
    ae = rng.standard_normal((64, 8))
    d = disc.probability(pe, ae)
    np.testing.assert_allclose(d, 0.5)
    # loss before the update step equals 2 ln 2
    from pounce.nn import no_grad
    logits_e = disc.logits(pe, ae)
    loss = -(np.log(0.5) + np.log(0.5))
    assert abs(loss - 2 * np.log(2.0)) < 1e-12


def test_discriminator_separates_toy_data():
    rng = np.random.default_rng(1)
    disc = Discriminator(rng, lr=1e-3)
    pe = rng.standard_normal((256, 90)) + 3.0
    ae = rng.standard_normal((256, 8))
    pp = rng.standard_normal((256, 90)) - 3.0
    ap = rng.standard_normal((256, 8))
    loss = None
    for _ in range(200):
        loss = gail_update(disc, (pe, ae), (pp, ap))
    assert loss < 0.1


def test_discriminator_identical_distributions_stay_confused():
    rng = np.random.default_rng(2)
    disc = Discriminator(rng, lr=1e-3)
    data_p = rng.standard_normal((512, 90))
    data_a = rng.standard_normal((512, 8))
    for _ in range(100):
        sel_e = rng.choice(512, 128, replace=False)
        sel_p = rng.choice(512, 128, replace=False)
        gail_update(disc, (data_p[sel_e], data_a[sel_e]),
                    (data_p[sel_p], data_a[sel_p]))
    held_p = rng.standard_normal((512, 90))
    held_a = rng.standard_normal((512, 8))
    mean_d = disc.probability(held_p, held_a).mean()
    assert 0.4 <= mean_d <= 0.6


def test_gail_update_rejects_empty():
    rng = np.random.default_rng(3)
    disc = Discriminator(rng)
    with pytest.raises(ValueError):
        gail_update(disc, (np.empty((0, 90)), np.empty((0, 8))),
                    (np.ones((1, 90)), np.ones((1, 8))))


def test_kl_properties():
    rng = np.random.default_rng(4)
    logits = rng.standard_normal((16, 256))
    lp = log_softmax(Tensor(logits)).data
    np.testing.assert_allclose(kl_value(lp, lp), 0.0, atol=1e-12)
    lp2 = log_softmax(Tensor(rng.standard_normal((16, 256)))).data
    assert np.all(kl_value(lp, lp2) >= -1e-12)


def test_kl_uniform_vs_onehot():
    uniform = np.full((1, 256), -np.log(256.0))
    logits = np.full((1, 256), -100.0)
    logits[0, 7] = 0.0
    onehot = log_softmax(Tensor(logits)).data
    # between a one-hot and a uniform distribution the defined ordering
    # evaluates to ln 256 exactly
    kl = kl_value(onehot, uniform)
    assert abs(kl[0] - np.log(256.0)) < 1e-6
    # the training objective's ordering (student || teacher) blows up
    # against a near-one-hot teacher, as it should
    assert kl_value(uniform, onehot)[0] > np.log(256.0)


def test_epmc_policy_shapes_and_determinism():
    rng = np.random.default_rng(5)
    policy = build_policy(rng, None, "flat")
    n = 3
    obs = {
        "proprio": rng.standard_normal((n, 90)),
        "command": np.tile([1.0, 0.0, 1.5], (n, 1)),
        "height_grid": rng.standard_normal((n, 25, 13)) * 0.1,
        "depth_grid": np.full((n, 25, 13), 3.0),
        "rays": np.full((n, 128), 10.0),
    }
    h, c = policy.initial_state(n)
    idx, residual, lp, val, motor, _ = policy.act(obs, h, c,
                                                  np.random.default_rng(0),
                                                  deterministic=True)
    idx2, residual2, _, _, motor2, _ = policy.act(obs, h, c,
                                                  np.random.default_rng(9),
                                                  deterministic=True)
    np.testing.assert_array_equal(idx, idx2)
    np.testing.assert_array_equal(motor, motor2)
    assert np.all((idx >= 0) & (idx < 256))
    np.testing.assert_array_equal(residual, np.zeros((n, 8)))


def test_residual_head_only_on_stairs_and_uniform():
    rng = np.random.default_rng(6)
    assert not build_policy(rng, None, "flat").residual_head
    assert not build_policy(rng, None, "hurdles").residual_head
    assert build_policy(rng, None, "stairs").residual_head
    assert build_policy(rng, None, "uniform").residual_head


def test_frozen_primitive_untouched_by_training_step():
    rng = np.random.default_rng(7)
    policy = build_policy(rng, None, "flat")
    from pounce.ppo import PPOConfig, PPOTrainer, RolloutBatch
    trainer = PPOTrainer(policy, PPOConfig(lr=1e-3, epochs=1, minibatches=1))
    frozen_before = {k: p.data.copy() for k, p in policy.named_parameters()
                     if k.startswith("pmc/")}
    n = 32
    batch = RolloutBatch(
        obs={
            "proprio": rng.standard_normal((n, 90)),
            "command": np.tile([1.0, 0.0, 1.5], (n, 1)),
            "height_grid": rng.standard_normal((n, 25, 13)) * 0.1,
            "depth_grid": np.full((n, 25, 13), 3.0),
            "rays": np.full((n, 128), 10.0),
            "h": np.zeros((n, 32)),
            "c": np.zeros((n, 32)),
        },
        actions=np.concatenate(
            [rng.integers(0, 256, (n, 1)).astype(float), np.zeros((n, 8))], axis=1),
        log_probs=np.full(n, -5.0),
        rewards=rng.standard_normal(n),
        values=np.zeros(n), dones=np.zeros(n),
        advantages=rng.standard_normal(n), returns=rng.standard_normal(n))
    metrics = trainer.update(batch, rng)
    assert metrics["aborted"] == 0.0
    for k, p in policy.named_parameters():
        if k.startswith("pmc/"):
            np.testing.assert_array_equal(p.data, frozen_before[k])


def test_env_flat_runs_and_resamples_direction():
    env = EpmcEnv("flat", 2, seed=0, horizon=6.0)
    rng = np.random.default_rng(8)
    dirs = set()
    for _ in range(60):
        _, _, _, infos = env.step(rng.uniform(-0.1, 0.1, (2, 8)))
        dirs.add((env.command_dir[0], env.command_dir[1]))
    assert env.command_speed.min() >= 0.5 and env.command_speed.max() <= 3.0


def test_env_speed_sampling_uniform():
    from scipy.stats import kstest
    env = EpmcEnv("flat", 1, seed=1)
    speeds = []
    for _ in range(3000):
        env.reset_env(0)
        speeds.append(env.command_speed[0])
    stat = kstest(speeds, "uniform", args=(0.5, 2.5))
    assert stat.pvalue > 0.01


def test_env_obstacle_direction_constant():
    env = EpmcEnv("hurdles", 1, seed=2, horizon=3.0)
    rng = np.random.default_rng(9)
    for _ in range(100):
        env.step(rng.uniform(-0.1, 0.1, (1, 8)))
        assert env.command_dir[0] == 1.0


def test_env_sparse_failure_gets_no_speed_bonus():
    env = EpmcEnv("hurdles", 1, seed=3, horizon=0.5)
    rng = np.random.default_rng(10)
    total = 0.0
    done = False
    while not done:
        r, dones, _, infos = env.step(np.zeros((1, 8)))
        total += float(r[0])
        done = bool(dones[0])
        if done:
            assert not infos[0]["success"]
    # direction term only: every step reward <= 0.5
    assert total <= 0.5 * (infos[0]["steps"] + 1) + 1e-9


def test_env_sparse_success_bonus_accounting():
    env = EpmcEnv("hurdles", 1, seed=4, horizon=10.0)
    env.terrains[0].course_end = -0.1  # behind the spawn: immediate success
    r, dones, _, infos = env.step(np.zeros((1, 8)))
    assert dones[0] and infos[0]["success"]
    avg = infos[0]["avg_projected_speed"]
    expected_bonus = 0.5 * np.exp(-4.0 * abs(infos[0]["command_speed"] - avg))
    assert r[0] >= expected_bonus - 1e-9


def test_teacher_set_selection():
    rng = np.random.default_rng(11)
    flat = build_policy(rng, None, "flat")
    rec = build_policy(rng, None, "recovery")
    ts = TeacherSet({"flat": flat}, recovery=rec)
    assert ts.select("flat", fallen=False) is flat
    assert ts.select("flat", fallen=True) is rec
    ts2 = TeacherSet({"flat": flat})
    assert ts2.select("flat", fallen=True) is flat
    with pytest.raises(KeyError):
        ts.select("blocks", fallen=False)
    with pytest.raises(ValueError):
        TeacherSet({})


def test_student_initialized_as_teacher_zero_kl():
    rng = np.random.default_rng(12)
    teacher = build_policy(rng, None, "uniform")
    student = build_policy(np.random.default_rng(12), None, "uniform")
    student.load_arrays(teacher.state_arrays())
    obs = {
        "proprio": rng.standard_normal((2, 90)),
        "command": np.tile([1.0, 0.0, 1.0], (2, 1)),
        "height_grid": np.zeros((2, 25, 13)),
        "depth_grid": np.full((2, 25, 13), 3.0),
        "rays": np.full((2, 128), 10.0),
    }
    h, c = teacher.initial_state(2)
    t_lp, _, _ = teacher.code_distribution(obs, h, c)
    s_lp, _, _ = student.code_distribution(obs, h, c)
    np.testing.assert_allclose(kl_value(s_lp, t_lp), 0.0, atol=1e-12)
