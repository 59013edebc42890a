"""
CommNet policy and its REINFORCE trainer.

One parameter set is shared by every agent (centralized training); at run time
each agent feeds only its own observation through the network and exchanges
hidden vectors with the others (distributed execution):

    h0_i      = act(W_enc o_i + b_enc)
    c^l_i     = mean of h^l_j over j != i
    h^{l+1}_i = act(H^l h^l_i + C^l c^l_i)
    pi_i      = softmax(W_dec h^L_i + b_dec)
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd

from .auction import LayerCost
from .config.exceptions import CheckpointError, DimensionError, DivergenceError, NumericalError
from .config.records import CommNetConfig, MarlTrainConfig
from .envs.base import Env
from .numcore import ParamStore, activation, activation_grad, sgd_step, softmax_temp
from .utils import make_rng, ordered_map, spawn_rngs

__all__ = [
    "CommNetPolicy",
    "Trajectory",
    "UpdateInfo",
    "MarlResult",
    "EvalReport",
    "comm_mean",
    "comm_means",
    "sample_joint_action",
    "rollout",
    "discounted_returns",
    "advantages",
    "surrogate_loss",
    "accumulate_policy_gradient",
    "reinforce_update",
    "train_marl",
    "evaluate",
]

_logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


def _others_index(n: int) -> np.ndarray:
    return np.array([[j for j in range(n) if j != i] for i in range(n)], dtype=np.intp)


def comm_means(H) -> np.ndarray:
    """Communication vectors of every agent for hidden states of shape ``(..., n, d)``.

    The other agents' vectors are summed in sorted order, which makes the
    result independent of how agents are labelled, bit for bit. A lone agent
    receives the zero vector.
    """
    H = np.asarray(H, dtype=np.float64)
    if H.ndim < 2:
        raise DimensionError("comm_means", ("n", "d"), H.shape)
    n = H.shape[-2]
    if n == 1:
        return np.zeros_like(H)
    others = H[..., _others_index(n), :]  # (..., n, n-1, d)
    return np.sort(others, axis=-2).sum(axis=-2) / (n - 1)


def comm_mean(H, i: int) -> np.ndarray:
    """``c_i = (1 / (n - 1)) * sum_{j != i} h_j`` for per-agent hidden vectors ``(n, d)``."""
    H = np.asarray(H, dtype=np.float64)
    if not 0 <= i < H.shape[0]:
        raise IndexError(f"Agent {i} out of range for {H.shape[0]} agents")
    return comm_means(H)[i]


def _comm_backward(dC: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. hidden states given the gradient w.r.t. comm vectors."""
    n = dC.shape[-2]
    if n == 1:
        return np.zeros_like(dC)
    return (dC.sum(axis=-2, keepdims=True) - dC) / (n - 1)


@dataclass
class _Cache:
    obs: np.ndarray
    pre: list = field(default_factory=list)
    hidden: list = field(default_factory=list)
    comm: list = field(default_factory=list)
    probs: np.ndarray | None = None


class CommNetPolicy:
    """Shared-parameter CommNet over a fixed number of agents."""

    def __init__(
        self,
        n_agents: int,
        obs_dim: int,
        n_actions: int,
        store: ParamStore,
        activation: str = "tanh",
    ):
        self.n_agents = n_agents
        self.obs_dim = obs_dim
        self.n_actions = n_actions
        self.store = store
        self.activation = activation
        d = store["W_enc"].shape[0]
        L = store["H"].shape[0]
        expected = {
            "W_enc": (d, obs_dim),
            "b_enc": (d,),
            "H": (L, d, d),
            "C": (L, d, d),
            "W_dec": (n_actions, d),
            "b_dec": (n_actions,),
        }
        for name, shape in expected.items():
            if store[name].shape != shape:
                raise DimensionError(f"CommNet parameter '{name}'", shape, store[name].shape)
        if L < 1:
            raise DimensionError("CommNet layers", ("L >= 1",), (L,))

    @classmethod
    def initialize(
        cls,
        n_agents: int,
        obs_dim: int,
        n_actions: int,
        config: CommNetConfig,
        rng: np.random.Generator | None = None,
    ) -> CommNetPolicy:
        rng = rng if rng is not None else make_rng(config.seed)
        d, L, s = config.hidden, config.layers, config.init_scale
        store = ParamStore()
        store.add("W_enc", s * rng.standard_normal((d, obs_dim)))
        store.add("b_enc", np.zeros(d))
        store.add("H", s * rng.standard_normal((L, d, d)))
        store.add("C", s * rng.standard_normal((L, d, d)))
        store.add("W_dec", s * rng.standard_normal((n_actions, d)))
        store.add("b_dec", np.zeros(n_actions))
        return cls(n_agents, obs_dim, n_actions, store, config.activation)

    @classmethod
    def zeros(cls, n_agents, obs_dim, n_actions, hidden=32, layers=2, activation="tanh"):
        """A policy whose every action distribution is uniform."""
        store = ParamStore()
        store.add("W_enc", np.zeros((hidden, obs_dim)))
        store.add("b_enc", np.zeros(hidden))
        store.add("H", np.zeros((layers, hidden, hidden)))
        store.add("C", np.zeros((layers, hidden, hidden)))
        store.add("W_dec", np.zeros((n_actions, hidden)))
        store.add("b_dec", np.zeros(n_actions))
        return cls(n_agents, obs_dim, n_actions, store, activation)

    @property
    def hidden(self) -> int:
        return self.store["W_enc"].shape[0]

    @property
    def layers(self) -> int:
        return self.store["H"].shape[0]

    def _check_obs(self, obs) -> np.ndarray:
        obs = np.asarray(obs, dtype=np.float64)
        if obs.ndim < 2 or obs.shape[-2:] != (self.n_agents, self.obs_dim):
            raise DimensionError(
                "CommNet observations", ("...", self.n_agents, self.obs_dim), obs.shape
            )
        return obs

    def _forward(self, obs) -> _Cache:
        p = self.store
        cache = _Cache(self._check_obs(obs))
        pre = cache.obs @ p["W_enc"].T + p["b_enc"]
        h = activation(self.activation, pre)
        cache.pre.append(pre)
        cache.hidden.append(h)
        for l in range(self.layers):
            c = comm_means(h)
            pre = h @ p["H"][l].T + c @ p["C"][l].T
            h = activation(self.activation, pre)
            cache.comm.append(c)
            cache.pre.append(pre)
            cache.hidden.append(h)
        logits = h @ p["W_dec"].T + p["b_dec"]
        cache.probs = softmax_temp(logits, 1.0, axis=-1)
        return cache

    def forward(self, obs) -> np.ndarray:
        """Action distributions ``(..., n_agents, n_actions)`` for joint observations."""
        return self._forward(obs).probs

    def _backward(self, cache: _Cache, d_logits: np.ndarray) -> None:
        """Accumulate parameter gradients given the gradient w.r.t. the logits."""
        p = self.store
        act = self.activation

        def outer(a, b):
            return a.reshape(-1, a.shape[-1]).T @ b.reshape(-1, b.shape[-1])

        h_last = cache.hidden[-1]
        p.accumulate("W_dec", outer(d_logits, h_last))
        p.accumulate("b_dec", d_logits.reshape(-1, self.n_actions).sum(axis=0))
        dh = d_logits @ p["W_dec"]
        dH = np.zeros_like(p["H"])
        dC = np.zeros_like(p["C"])
        for l in reversed(range(self.layers)):
            d_pre = dh * activation_grad(act, cache.pre[l + 1], cache.hidden[l + 1])
            dH[l] = outer(d_pre, cache.hidden[l])
            dC[l] = outer(d_pre, cache.comm[l])
            d_comm = d_pre @ p["C"][l]
            dh = d_pre @ p["H"][l] + _comm_backward(d_comm)
        p.accumulate("H", dH)
        p.accumulate("C", dC)
        d_pre = dh * activation_grad(act, cache.pre[0], cache.hidden[0])
        p.accumulate("W_enc", outer(d_pre, cache.obs))
        p.accumulate("b_enc", d_pre.reshape(-1, self.hidden).sum(axis=0))

    def layer_costs(self) -> list[LayerCost]:
        n, d, A, o = self.n_agents, self.hidden, self.n_actions, self.obs_dim
        costs = [LayerCost("encoder", macs=n * d * o, adds=n * d, activations=n * d)]
        for l in range(self.layers):
            costs.append(
                LayerCost(
                    f"comm{l}",
                    macs=2 * n * d * d + n * d,
                    adds=n * max(n - 2, 0) * d + n * d,
                    activations=n * d,
                )
            )
        costs.append(LayerCost("decoder", macs=n * A * d, adds=n * A, activations=n * A))
        return costs

    def to_checkpoint(self, seed: int | None = None) -> dict:
        return {
            "version": CHECKPOINT_VERSION,
            "kind": "commnet",
            "n_agents": self.n_agents,
            "obs_dim": self.obs_dim,
            "hidden": self.hidden,
            "layers": self.layers,
            "actions": self.n_actions,
            "activation": self.activation,
            "params": self.store.to_json(),
            "seed": seed,
        }

    @classmethod
    def from_checkpoint(cls, doc: dict, path="<checkpoint>") -> CommNetPolicy:
        match doc:
            case {"version": 1, "kind": "commnet", "n_agents": int(n), "obs_dim": int(o),
                  "actions": int(A), "activation": str(act), "params": dict(params)}:
                pass
            case {"kind": "commnet", "version": version} if version != CHECKPOINT_VERSION:
                raise CheckpointError(path, f"unsupported version {version}")
            case _:
                raise CheckpointError(path, "not a version 1 'commnet' checkpoint")
        try:
            store = ParamStore.from_json(params)
            return cls(n, o, A, store, act)
        except (KeyError, TypeError, ValueError, NumericalError) as e:
            raise CheckpointError(path, f"bad parameters: {e}") from e

    def __repr__(self):
        return (
            f"CommNetPolicy(n_agents={self.n_agents}, obs_dim={self.obs_dim}, "
            f"hidden={self.hidden}, layers={self.layers}, actions={self.n_actions}, "
            f"activation={self.activation!r})"
        )


# ----------------------------------------------------------
#  Rollouts
# ----------------------------------------------------------


def sample_joint_action(probs, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """One independent categorical draw per agent; returns actions and their log-probabilities."""
    probs = np.asarray(probs, dtype=np.float64)
    u = rng.random(probs.shape[0])
    cdf = np.cumsum(probs, axis=-1)
    actions = np.array(
        [min(int(np.searchsorted(cdf[i], u[i], side="right")), probs.shape[1] - 1)
         for i in range(probs.shape[0])],
        dtype=np.int64,
    )
    with np.errstate(divide="ignore"):
        log_probs = np.log(probs[np.arange(probs.shape[0]), actions])
    return actions, log_probs


@dataclass
class Trajectory:
    """One episode: observations ``(T, n, obs_dim)``, actions ``(T, n)``, rewards ``(T,)``."""

    observations: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    log_probs: np.ndarray
    states: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        T = len(self.rewards)
        if not (len(self.observations) == len(self.actions) == len(self.log_probs) == T):
            raise DimensionError(
                "trajectory",
                (T,),
                (len(self.observations), len(self.actions), len(self.log_probs)),
            )
        if not np.all(np.isfinite(self.rewards)):
            raise NumericalError("trajectory rewards")

    @property
    def total_reward(self) -> float:
        return float(np.sum(self.rewards))


def rollout(
    policy: CommNetPolicy,
    env: Env,
    seed,
    mode: str = "sample",
    rng: np.random.Generator | None = None,
) -> Trajectory:
    """Play one episode; every state visited (including the last) is kept in ``states``."""
    if env.n_agents != policy.n_agents or env.obs_dim != policy.obs_dim:
        raise DimensionError(
            "policy/environment", (env.n_agents, env.obs_dim), (policy.n_agents, policy.obs_dim)
        )
    rng = rng if rng is not None else make_rng(seed)
    state, obs = env.reset(seed)
    states = [state]
    observations, actions, rewards, log_probs = [], [], [], []
    done = False
    while not done:
        probs = policy.forward(obs)
        match mode:
            case "sample":
                a, lp = sample_joint_action(probs, rng)
            case "greedy":
                a = np.argmax(probs, axis=-1)
                lp = np.log(probs[np.arange(len(a)), a])
            case _:
                raise ValueError(f"Unknown rollout mode '{mode}', expected 'sample' or 'greedy'")
        result = env.step(state, a.tolist())
        observations.append(obs)
        actions.append(a)
        rewards.append(result.reward)
        log_probs.append(lp)
        state, obs, done = result.state, result.observations, result.done
        states.append(state)
    return Trajectory(
        np.array(observations),
        np.array(actions, dtype=np.int64),
        np.array(rewards, dtype=np.float64),
        np.array(log_probs),
        states,
    )


# ----------------------------------------------------------
#  REINFORCE
# ----------------------------------------------------------


def discounted_returns(rewards, gamma: float) -> np.ndarray:
    rewards = np.asarray(rewards, dtype=np.float64)
    G = np.zeros_like(rewards)
    running = 0.0
    for t in reversed(range(len(rewards))):
        running = rewards[t] + gamma * running
        G[t] = running
    return G


def advantages(trajectories: Sequence[Trajectory], gamma: float) -> list[np.ndarray]:
    """Discounted returns minus their per-time-step mean over the batch."""
    returns = [discounted_returns(tr.rewards, gamma) for tr in trajectories]
    T = max(len(G) for G in returns)
    totals = np.zeros(T)
    counts = np.zeros(T)
    for G in returns:
        totals[: len(G)] += G
        counts[: len(G)] += 1
    baseline = totals / np.maximum(counts, 1)
    return [G - baseline[: len(G)] for G in returns]


def _log_pi(probs, actions) -> np.ndarray:
    return np.log(np.take_along_axis(probs, actions[..., None], axis=-1)[..., 0])


def surrogate_loss(
    policy: CommNetPolicy,
    trajectories: Sequence[Trajectory],
    gamma: float,
    advs: Sequence[np.ndarray] | None = None,
) -> float:
    """``-(1/B) sum_episodes sum_t sum_i A_t log pi(a_{i,t} | o_{i,t})``."""
    advs = advantages(trajectories, gamma) if advs is None else advs
    B = len(trajectories)
    total = 0.0
    for tr, A in zip(trajectories, advs):
        probs = policy.forward(tr.observations)
        total += float(np.sum(A[:, None] * _log_pi(probs, tr.actions)))
    return -total / B


@dataclass(frozen=True)
class UpdateInfo:
    loss: float
    grad_norm: float
    mean_return: float


def accumulate_policy_gradient(
    policy: CommNetPolicy, trajectories: Sequence[Trajectory], gamma: float
) -> float:
    """Add the gradient of :func:`surrogate_loss` to the policy's store; returns the loss."""
    if not trajectories:
        raise ValueError("A policy gradient needs at least one trajectory")
    advs = advantages(trajectories, gamma)
    B = len(trajectories)
    loss = 0.0
    for tr, A in zip(trajectories, advs):
        cache = policy._forward(tr.observations)
        loss -= float(np.sum(A[:, None] * _log_pi(cache.probs, tr.actions))) / B
        onehot = np.zeros_like(cache.probs)
        np.put_along_axis(onehot, tr.actions[..., None], 1.0, axis=-1)
        d_logits = (A[:, None, None] / B) * (cache.probs - onehot)
        policy._backward(cache, d_logits)
    return loss


def reinforce_update(
    policy: CommNetPolicy, trajectories: Sequence[Trajectory], lr: float, gamma: float
) -> UpdateInfo:
    """One REINFORCE step with a batch-mean baseline on the shared parameters."""
    policy.store.zero_grad()
    loss = accumulate_policy_gradient(policy, trajectories, gamma)
    grad_norm = policy.store.grad_norm()
    if not math.isfinite(loss):
        raise NumericalError("surrogate loss")
    sgd_step(policy.store, lr)
    mean_return = float(np.mean([tr.total_reward for tr in trajectories]))
    return UpdateInfo(loss, grad_norm, mean_return)


@dataclass
class MarlResult:
    policy: CommNetPolicy
    metrics: pd.DataFrame


def train_marl(
    env: Env, policy_config: CommNetConfig, config: MarlTrainConfig
) -> MarlResult:
    """Alternate batched rollouts and REINFORCE updates; deterministic given ``config.seed``.

    Episode e resets the environment with seed ``[seed, 1, e]`` and samples
    actions from stream ``[seed, 2, e]``, so results do not depend on
    ``config.threads``. One metrics row per episode carries the loss of the
    update its batch fed.
    """
    init_rng = spawn_rngs([config.seed, 0], 1)[0]
    policy = CommNetPolicy.initialize(
        env.n_agents, env.obs_dim, env.n_actions, policy_config, init_rng
    )
    _logger.info(
        "Training %r on %r for %d episodes (lr=%g, gamma=%g, batch=%d)",
        policy, env, config.episodes, config.lr, config.gamma, config.batch_episodes,
    )

    def play(e):
        return rollout(policy, env, [config.seed, 1, e], "sample", make_rng([config.seed, 2, e]))

    rows = []
    start = time.perf_counter()
    for first in range(0, config.episodes, config.batch_episodes):
        batch = range(first, min(first + config.batch_episodes, config.episodes))
        trajectories = ordered_map(play, batch, config.threads)
        try:
            info = reinforce_update(policy, trajectories, config.lr, config.gamma)
        except NumericalError as e:
            _logger.error("MARL training diverged at episode %d: %s", first, e)
            raise DivergenceError(e.what, first) from e
        for e, tr in zip(batch, trajectories):
            rows.append((e, tr.total_reward, info.loss))
        done = batch[-1] + 1
        if done // config.log_every > first // config.log_every:
            _logger.info(
                "episode %d: mean return %.4f loss %.6f (%.1fs)",
                done, info.mean_return, info.loss, time.perf_counter() - start,
            )
    metrics = pd.DataFrame(rows, columns=["episode", "return", "loss"])
    metrics = metrics.astype({"episode": "int64"})
    return MarlResult(policy, metrics)


@dataclass(frozen=True)
class EvalReport:
    mean_return: float
    stderr: float
    final_reward: float
    episodes: int
    mode: str
    seed: int

    def to_json(self) -> dict:
        return {
            "mean_return": self.mean_return,
            "stderr": self.stderr,
            "final_reward": self.final_reward,
            "episodes": self.episodes,
            "mode": self.mode,
            "seed": self.seed,
        }


def evaluate(
    policy: CommNetPolicy,
    env: Env,
    episodes: int,
    mode: str = "greedy",
    seed: int = 0,
    threads: int = 1,
) -> EvalReport:
    """Mean episode return (and mean last-step reward) of a frozen policy."""
    if episodes < 1:
        raise ValueError(f"episodes must be >= 1, got {episodes}")

    def play(e):
        return rollout(policy, env, [seed, 1, e], mode, make_rng([seed, 2, e]))

    trajectories = ordered_map(play, range(episodes), threads)
    returns = np.array([tr.total_reward for tr in trajectories])
    final = np.array([tr.rewards[-1] for tr in trajectories])
    if episodes > 1 and np.ptp(returns) > 0.0:
        stderr = float(returns.std(ddof=1) / math.sqrt(episodes))
    else:
        stderr = 0.0
    return EvalReport(float(returns.mean()), stderr, float(final.mean()), episodes, mode, seed)
