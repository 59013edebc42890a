import numpy as np
import pandas as pd
import pytest
from conftest import USERS

from platoon.intel.auction import estimate_inference_cost
from platoon.intel.commnet import (
    CommNetPolicy,
    Trajectory,
    accumulate_policy_gradient,
    advantages,
    comm_mean,
    comm_means,
    discounted_returns,
    evaluate,
    reinforce_update,
    rollout,
    sample_joint_action,
    surrogate_loss,
    train_marl,
)
from platoon.intel.config import (
    CheckpointError,
    CommNetConfig,
    CoverageConfig,
    DimensionError,
    DivergenceError,
    MarlTrainConfig,
    NumericalError,
)
from platoon.intel.envs import CoverageEnv, brute_force_optimal
from platoon.intel.numcore import finite_diff_grad, relative_error
from platoon.intel.utils import make_rng


def small_policy(n=3, obs_dim=4, actions=3, activation="tanh", seed=0):
    config = CommNetConfig(hidden=5, layers=2, activation=activation, init_scale=0.5)
    return CommNetPolicy.initialize(n, obs_dim, actions, config, make_rng(seed))


def synthetic_trajectory(rng, T, n=3, obs_dim=4, actions=3):
    return Trajectory(
        observations=rng.standard_normal((T, n, obs_dim)),
        actions=rng.integers(0, actions, (T, n)),
        rewards=rng.standard_normal(T),
        log_probs=np.zeros((T, n)),
    )


# ----------------------------------------------------------
#  Communication
# ----------------------------------------------------------


def test_comm_means_excludes_self():
    H = np.array([[1.0, 0.0], [3.0, 0.0], [5.0, 0.0]])
    assert np.allclose(comm_means(H)[:, 0], [4.0, 3.0, 2.0])
    assert np.allclose(comm_means(H)[:, 1], 0.0)


def test_comm_mean_scalar_agents():
    H = np.array([[1.0], [2.0], [3.0]])
    assert [float(comm_mean(H, i)[0]) for i in range(3)] == pytest.approx([2.5, 2.0, 1.5])


def test_comm_mean_lone_agent_gets_zeros():
    assert np.array_equal(comm_means(np.array([[1.5, -2.0]])), np.zeros((1, 2)))


def test_comm_mean_out_of_range():
    with pytest.raises(IndexError):
        comm_mean(np.ones((2, 3)), 2)
    with pytest.raises(DimensionError):
        comm_means(np.ones(3))


def test_comm_mean_pair_swaps():
    H = np.array([[1.0, -2.0], [0.5, 4.0]])
    assert np.array_equal(comm_mean(H, 0), H[1])
    assert np.array_equal(comm_mean(H, 1), H[0])


def test_comm_mean_five_agents(rng):
    H = rng.standard_normal((5, 3))
    for i in range(5):
        others = [H[j] for j in range(5) if j != i]
        assert np.allclose(comm_mean(H, i), sum(others) / 4, atol=1e-12)
    assert np.allclose(comm_means(H).sum(axis=0), H.sum(axis=0), atol=1e-12)


def test_forward_is_permutation_equivariant(rng):
    policy = small_policy(n=4)
    obs = rng.standard_normal((4, 4))
    perm = np.array([2, 0, 3, 1])
    probs = policy.forward(obs)
    assert np.allclose(policy.forward(obs[perm]), probs[perm], atol=1e-12)


def test_equivariance_and_symmetry_on_random_policies(rng):
    configs = [
        CommNetConfig(hidden=6, layers=2, activation=a, init_scale=0.8)
        for a in ("relu", "tanh", "sigmoid")
    ]
    for trial in range(1000):
        n = int(rng.integers(2, 6))
        policy = CommNetPolicy.initialize(n, 3, 4, configs[trial % 3], rng)
        obs = rng.standard_normal((n, 3))
        perm = rng.permutation(n)
        probs = policy.forward(obs)
        assert np.allclose(policy.forward(obs[perm]), probs[perm], rtol=0, atol=1e-12)

        same = policy.forward(np.tile(obs[0], (n, 1)))
        assert np.allclose(same, same[0], rtol=0, atol=1e-12)


def test_identical_agents_get_identical_policies(rng):
    policy = small_policy()
    obs = np.tile(rng.standard_normal(4), (3, 1))
    probs = policy.forward(obs)
    assert np.allclose(probs, probs[0], atol=1e-12)


def test_forward_distributions(rng):
    policy = small_policy()
    probs = policy.forward(rng.standard_normal((6, 3, 4)))
    assert probs.shape == (6, 3, 3)
    assert np.allclose(probs.sum(axis=-1), 1.0)
    assert np.all(probs > 0)

    with pytest.raises(DimensionError):
        policy.forward(rng.standard_normal((2, 4)))
    with pytest.raises(DimensionError):
        policy.forward(rng.standard_normal((3, 5)))


def test_zeros_policy_is_uniform(rng):
    policy = CommNetPolicy.zeros(2, 11, 5, hidden=4)
    assert np.allclose(policy.forward(rng.standard_normal((2, 11))), 0.2)


def test_bad_parameter_shapes():
    policy = CommNetPolicy.zeros(2, 3, 4, hidden=4)
    with pytest.raises(DimensionError, match="W_dec"):
        CommNetPolicy(2, 3, 5, policy.store)


# ----------------------------------------------------------
#  Policy gradient
# ----------------------------------------------------------


@pytest.mark.parametrize("activation", ["tanh", "sigmoid"])
def test_policy_gradient_matches_finite_differences(activation):
    rng = make_rng(42)
    policy = small_policy(activation=activation, seed=1)
    batch = [synthetic_trajectory(rng, 4), synthetic_trajectory(rng, 3)]
    gamma = 0.9

    policy.store.zero_grad()
    loss = accumulate_policy_gradient(policy, batch, gamma)
    analytic = {name: policy.store.grad(name).copy() for name in policy.store}
    numeric = finite_diff_grad(lambda s: surrogate_loss(policy, batch, gamma), policy.store, 1e-6)

    assert loss == pytest.approx(surrogate_loss(policy, batch, gamma), rel=1e-12)
    assert relative_error(analytic, numeric) < 1e-4


def test_policy_gradient_needs_a_trajectory():
    with pytest.raises(ValueError):
        accumulate_policy_gradient(small_policy(), [], 0.9)


def test_discounted_returns():
    assert discounted_returns([1.0, 1.0, 1.0], 0.5) == pytest.approx([1.75, 1.5, 1.0])
    assert discounted_returns([1.0, 2.0], 0.0) == pytest.approx([1.0, 2.0])


def test_advantages_center_every_step(rng):
    batch = [synthetic_trajectory(rng, 5) for _ in range(4)]
    advs = np.array(advantages(batch, 0.95))
    assert advs.shape == (4, 5)
    assert np.allclose(advs.sum(axis=0), 0.0)


def test_trajectory_checks_lengths(rng):
    with pytest.raises(DimensionError):
        Trajectory(np.zeros((3, 2, 4)), np.zeros((2, 2), dtype=int), np.zeros(3), np.zeros((3, 2)))
    with pytest.raises(NumericalError):
        Trajectory(np.zeros((1, 2, 4)), np.zeros((1, 2), dtype=int), np.array([np.nan]),
                   np.zeros((1, 2)))


def test_reinforce_with_zero_lr_keeps_parameters(rng):
    policy = small_policy()
    before = policy.store.copy()
    info = reinforce_update(policy, [synthetic_trajectory(rng, 3) for _ in range(3)], 0.0, 0.9)
    for name in policy.store:
        assert np.array_equal(policy.store[name], before[name])
    assert info.grad_norm > 0
    assert np.all(policy.store.grad("W_dec") == 0.0)


def test_reinforce_with_equal_returns_keeps_parameters(rng):
    policy = small_policy()
    before = policy.store.copy()
    tr = synthetic_trajectory(rng, 3)
    info = reinforce_update(policy, [tr, tr], 1.0, 0.9)
    for name in policy.store:
        assert np.array_equal(policy.store[name], before[name])
    assert info.loss == 0.0
    assert info.mean_return == pytest.approx(tr.total_reward)


# ----------------------------------------------------------
#  Sampling and rollouts
# ----------------------------------------------------------


def test_sample_joint_action_deterministic_rows(rng):
    probs = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    for _ in range(20):
        actions, log_probs = sample_joint_action(probs, rng)
        assert actions.tolist() == [1, 2]
        assert np.array_equal(log_probs, [0.0, 0.0])


def test_sample_joint_action_frequencies(rng):
    target = np.array([0.2, 0.5, 0.3])
    actions, log_probs = sample_joint_action(np.tile(target, (100_000, 1)), rng)
    freq = np.bincount(actions, minlength=3) / len(actions)
    assert np.allclose(freq, target, atol=0.01)
    assert np.allclose(log_probs, np.log(target[actions]))


def test_rollout_records_the_episode(coverage):
    policy = CommNetPolicy.zeros(2, coverage.obs_dim, coverage.n_actions, hidden=4)
    tr = rollout(policy, coverage, 5)
    assert tr.observations.shape == (3, 2, coverage.obs_dim)
    assert tr.actions.shape == (3, 2)
    assert tr.rewards.shape == (3,)
    assert len(tr.states) == 4
    assert tr.states[0].t == 0
    assert tr.states[-1].t == 3
    assert np.allclose(tr.log_probs, np.log(0.2))

    again = rollout(policy, coverage, 5)
    assert np.array_equal(again.actions, tr.actions)
    assert np.array_equal(again.rewards, tr.rewards)


def test_greedy_rollout_of_uniform_policy(coverage):
    policy = CommNetPolicy.zeros(2, coverage.obs_dim, coverage.n_actions, hidden=4)
    tr = rollout(policy, coverage, 0, mode="greedy")
    # ties go to the first action (north)
    assert np.all(tr.actions == 0)
    assert tr.states[-1].positions == ((0, 0), (4, 1))
    assert tr.rewards.tolist() == [4.0, 3.0, 3.0]


def test_rollout_checks_policy_and_mode(coverage):
    with pytest.raises(DimensionError):
        rollout(CommNetPolicy.zeros(3, coverage.obs_dim, 5, hidden=4), coverage, 0)
    policy = CommNetPolicy.zeros(2, coverage.obs_dim, 5, hidden=4)
    with pytest.raises(ValueError, match="mode"):
        rollout(policy, coverage, 0, mode="best")


# ----------------------------------------------------------
#  Training and evaluation
# ----------------------------------------------------------


@pytest.fixture()
def marl_configs():
    return (
        CommNetConfig(hidden=4, layers=1),
        MarlTrainConfig(episodes=8, batch_episodes=4, lr=0.01, seed=3),
    )


def test_train_marl_metrics(coverage, marl_configs):
    result = train_marl(coverage, *marl_configs)
    assert list(result.metrics.columns) == ["episode", "return", "loss"]
    assert result.metrics["episode"].tolist() == list(range(8))
    assert result.metrics["loss"].nunique() <= 2
    assert np.all(np.isfinite(result.metrics["return"]))
    assert result.policy.n_agents == 2


def test_train_marl_is_deterministic(coverage, marl_configs):
    policy_config, config = marl_configs
    one = train_marl(coverage, policy_config, config)
    two = train_marl(coverage, policy_config, config.merged(threads=2))
    pd.testing.assert_frame_equal(one.metrics, two.metrics)
    for name in one.policy.store:
        assert np.array_equal(one.policy.store[name], two.policy.store[name])


def test_train_marl_divergence(coverage, marl_configs, mocker):
    mocker.patch(
        "platoon.intel.commnet.reinforce_update",
        side_effect=NumericalError("surrogate loss"),
    )
    with pytest.raises(DivergenceError) as info:
        train_marl(coverage, *marl_configs)
    assert info.value.iteration == 0


def test_evaluate_greedy_is_exact(coverage):
    policy = CommNetPolicy.zeros(2, coverage.obs_dim, coverage.n_actions, hidden=4)
    report = evaluate(policy, coverage, 5, mode="greedy", seed=1)
    assert report.mean_return == 10.0
    assert report.stderr == 0.0
    assert report.final_reward == 3.0
    assert report.to_json()["episodes"] == 5

    with pytest.raises(ValueError):
        evaluate(policy, coverage, 0)


def test_evaluate_is_reproducible(energy):
    policy = CommNetPolicy.initialize(3, 3, 4, CommNetConfig(hidden=4), make_rng(0))
    one = evaluate(policy, energy, 6, mode="sample", seed=2)
    two = evaluate(policy, energy, 6, mode="sample", seed=2, threads=3)
    assert one == two


def test_zero_lr_stays_at_random_baseline(coverage, marl_configs):
    policy_config, config = marl_configs
    config = config.merged(lr=0.0, episodes=12)
    initial = train_marl(coverage, policy_config, config.merged(episodes=0)).policy
    result = train_marl(coverage, policy_config, config)
    for name in initial.store:
        assert np.array_equal(result.policy.store[name], initial.store[name])
    baseline = evaluate(initial, coverage, 12, mode="sample", seed=config.seed)
    assert result.metrics["return"].mean() == pytest.approx(baseline.mean_return)


@pytest.mark.slow
def test_training_reaches_near_optimal_coverage():
    env = CoverageEnv(
        CoverageConfig.from_dict(
            {"W": 5, "H": 5, "agents": 2, "radius": 1, "horizon": 10, "users": USERS}
        )
    )
    optimum, _ = brute_force_optimal(env)
    result = train_marl(env, CommNetConfig(), MarlTrainConfig())
    report = evaluate(result.policy, env, 100, mode="greedy", seed=1)
    assert report.final_reward >= 0.9 * optimum


# ----------------------------------------------------------
#  Checkpoints and cost
# ----------------------------------------------------------


def test_checkpoint_round_trip(rng):
    policy = small_policy(activation="sigmoid")
    doc = policy.to_checkpoint(seed=4)
    assert doc["kind"] == "commnet"
    restored = CommNetPolicy.from_checkpoint(doc)
    assert restored.activation == "sigmoid"
    obs = rng.standard_normal((3, 4))
    assert np.array_equal(restored.forward(obs), policy.forward(obs))


def test_checkpoint_errors():
    doc = small_policy().to_checkpoint()
    with pytest.raises(CheckpointError, match="version"):
        CommNetPolicy.from_checkpoint({**doc, "version": 2})
    missing = {k: v for k, v in doc.items() if k != "params"}
    with pytest.raises(CheckpointError):
        CommNetPolicy.from_checkpoint(missing, "policy.json")
    with pytest.raises(CheckpointError, match="bad parameters"):
        CommNetPolicy.from_checkpoint({**doc, "actions": 7})


def test_inference_cost():
    cost = estimate_inference_cost(CommNetPolicy.zeros(2, 11, 5, hidden=4, layers=2))
    assert [c.name for c in cost.layers] == ["encoder", "comm0", "comm1", "decoder"]
    assert cost.macs == 272
    assert cost.adds == 34
    assert cost.activations == 34
    assert cost.comparisons == 0
    assert cost.total == 340
