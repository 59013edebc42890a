"""
The neural Myerson auction.

Bids pass through a monotonic virtual-valuation network
``phi(v) = max_k min_j (exp(alpha[k, j]) * v + beta[k, j])``; a softmax over
the transformed bids plus a dummy zero bid allocates the item; the winner pays
``phi^{-1}(ReLU(max of the other transformed bids))``. Training minimizes the
negative soft-mode revenue with plain SGD and hand-derived gradients. Reported
revenue, IC and IR numbers always use the hard (argmax) rule.

Bidder indices are 0-based throughout.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd

from .config.exceptions import (
    CheckpointError,
    ConfigError,
    DivergenceError,
    NumericalError,
)
from .config.records import AuctionTrainConfig, DistributionConfig
from .numcore import ParamStore, group_max_of_min, group_min_of_max, sgd_step, softmax_temp
from .utils import make_rng, spawn_rngs

__all__ = [
    "Distribution",
    "ValuationSampler",
    "MonotonicNet",
    "AuctionOutcome",
    "TrainResult",
    "LayerCost",
    "InferenceCost",
    "validate_profile",
    "transform_bids",
    "inverse_transform",
    "allocate",
    "payment_raw",
    "run_auction",
    "hard_outcomes",
    "revenue_loss",
    "kink_margin",
    "train_auction",
    "allocate_sequential",
    "estimate_inference_cost",
    "complexity_bound",
]

_logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


# ----------------------------------------------------------
#  Valuation distributions
# ----------------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    """A regular single-bidder valuation distribution with its virtual value.

    uniform(low, high):           phi(v) = 2v - high
    exponential(rate, cap):       truncated to [0, cap],
                                  phi(v) = v - (1 - exp(-rate (cap - v))) / rate
    """

    kind: str = "uniform"
    low: float = 0.0
    high: float = 1.0
    rate: float = 1.0
    cap: float = 5.0

    @classmethod
    def from_config(cls, cfg: DistributionConfig) -> Distribution:
        return cls(cfg.kind, cfg.low, cfg.high, cfg.rate, cfg.cap)

    @classmethod
    def uniform(cls, low: float = 0.0, high: float = 1.0) -> Distribution:
        return cls("uniform", low=low, high=high)

    @classmethod
    def exponential(cls, rate: float = 1.0, cap: float = 5.0) -> Distribution:
        return cls("exponential", rate=rate, cap=cap)

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "uniform":
            return self.low, self.high
        return 0.0, self.cap

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "uniform":
            if self.low == self.high:
                return np.full(size, self.low, dtype=np.float64)
            return rng.uniform(self.low, self.high, size)
        u = rng.random(size)
        return -np.log1p(-u * (-math.expm1(-self.rate * self.cap))) / self.rate

    def virtual(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if self.kind == "uniform":
            return 2.0 * v - self.high
        return v + np.expm1(-self.rate * (self.cap - v)) / self.rate

    def inverse_virtual(self, y, iterations: int = 80) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        if self.kind == "uniform":
            return (y + self.high) / 2.0
        # phi is increasing on [0, cap]; bisect, clamping outside its range
        lo = np.zeros_like(y)
        hi = np.full_like(y, self.cap)
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            below = self.virtual(mid) < y
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)


class ValuationSampler:
    """Draws valuation profiles, one distribution per bidder.

    Streams are produced by generators handed in by the caller, so a seeded
    generator reproduces its profiles bit for bit.
    """

    def __init__(self, distributions: Sequence[Distribution], seed: int = 0):
        if not distributions:
            raise ConfigError("A sampler needs at least one bidder distribution")
        self.distributions = tuple(distributions)
        self.seed = seed

    @classmethod
    def iid(cls, dist: Distribution, n_bidders: int, seed: int = 0) -> ValuationSampler:
        return cls([dist] * n_bidders, seed=seed)

    @classmethod
    def from_config(cls, cfg: AuctionTrainConfig) -> ValuationSampler:
        dists = [Distribution.from_config(d) for d in cfg.dist]
        if len(dists) == 1:
            dists = dists * cfg.bidders
        return cls(dists, seed=cfg.seed)

    @property
    def n_bidders(self) -> int:
        return len(self.distributions)

    @property
    def is_iid(self) -> bool:
        return len(set(self.distributions)) == 1

    def support(self, bidder: int = 0) -> tuple[float, float]:
        return self.distributions[bidder].support

    def rng(self, *stream) -> np.random.Generator:
        return make_rng([self.seed, *stream])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Return a ``(size, n_bidders)`` array of valuations."""
        if self.is_iid:
            return self.distributions[0].sample(rng, (size, self.n_bidders))
        return np.stack([d.sample(rng, size) for d in self.distributions], axis=1)

    def __repr__(self):
        return f"ValuationSampler({list(self.distributions)}, seed={self.seed})"


# ----------------------------------------------------------
#  The monotonic network
# ----------------------------------------------------------


class MonotonicNet:
    """Max-of-min piecewise-linear virtual-valuation network.

    Parameters live in a ParamStore as ``alpha`` and ``beta`` of shape
    ``(P, K, J)`` with ``P = 1`` when bidders share the transform and
    ``P = n_bidders`` otherwise. Weights are ``exp(alpha)``, hence strictly
    positive and the transform strictly increasing.
    """

    def __init__(self, n_bidders: int, store: ParamStore, shared: bool = True):
        alpha, beta = store["alpha"], store["beta"]
        if alpha.ndim != 3 or alpha.shape != beta.shape:
            raise ConfigError(f"alpha/beta must share a (P, K, J) shape, got {alpha.shape}")
        expected = 1 if shared else n_bidders
        if alpha.shape[0] != expected:
            raise ConfigError(
                f"{'shared' if shared else 'per-bidder'} net for {n_bidders} bidders "
                f"needs {expected} parameter sets, got {alpha.shape[0]}"
            )
        self.n_bidders = n_bidders
        self.shared = shared
        self.store = store

    @classmethod
    def initialize(
        cls,
        n_bidders: int,
        groups: int,
        units: int,
        *,
        shared: bool = True,
        rng: np.random.Generator,
        scale: float = 0.1,
    ) -> MonotonicNet:
        """Random net close to the identity transform."""
        sets = 1 if shared else n_bidders
        store = ParamStore()
        store.add("alpha", scale * rng.standard_normal((sets, groups, units)))
        store.add("beta", scale * rng.standard_normal((sets, groups, units)))
        return cls(n_bidders, store, shared=shared)

    @classmethod
    def from_affine(cls, slope: float, intercept: float, n_bidders: int = 1) -> MonotonicNet:
        """A shared K=J=1 net computing ``slope * v + intercept``."""
        if not slope > 0:
            raise ConfigError(f"slope must be positive, got {slope}")
        store = ParamStore()
        store.add("alpha", [[[math.log(slope)]]])
        store.add("beta", [[[intercept]]])
        return cls(n_bidders, store, shared=True)

    @classmethod
    def uniform_preset(cls, n_bidders: int = 1) -> MonotonicNet:
        """The analytic uniform[0, 1] virtual value ``phi(v) = 2v - 1``."""
        return cls.from_affine(2.0, -1.0, n_bidders)

    @property
    def groups(self) -> int:
        return self.store["alpha"].shape[1]

    @property
    def units(self) -> int:
        return self.store["alpha"].shape[2]

    @property
    def param_index(self) -> np.ndarray:
        """Parameter set used by each bidder."""
        if self.shared:
            return np.zeros(self.n_bidders, dtype=np.intp)
        return np.arange(self.n_bidders, dtype=np.intp)

    def weights(self, bidder: int = 0) -> tuple[np.ndarray, np.ndarray]:
        p = 0 if self.shared else bidder
        return np.exp(self.store["alpha"][p]), self.store["beta"][p]

    def phi(self, v, bidder: int = 0) -> np.ndarray:
        """Transform of a scalar or array of values for one bidder."""
        w, theta = self.weights(bidder)
        return group_max_of_min(v, w, theta)

    def phi_inverse(self, y, bidder: int = 0) -> np.ndarray:
        w, theta = self.weights(bidder)
        return group_min_of_max(y, 1.0 / w, -theta / w)

    def with_bidders(self, n_bidders: int) -> MonotonicNet:
        """The same shared transform applied to a different bidder count."""
        if not self.shared:
            raise ConfigError("Only a shared net can be resized")
        return MonotonicNet(n_bidders, self.store, shared=True)

    def layer_costs(self) -> list[LayerCost]:
        n, K, J = self.n_bidders, self.groups, self.units
        return [
            LayerCost("affine", macs=n * K * J),
            LayerCost("min-max", comparisons=n * (K * (J - 1) + (K - 1))),
        ]

    def to_checkpoint(self, train_config: dict | None = None, seed: int | None = None) -> dict:
        alpha, beta = self.store["alpha"], self.store["beta"]
        if self.shared:
            alpha, beta = alpha[0], beta[0]
        return {
            "version": CHECKPOINT_VERSION,
            "kind": "myerson",
            "shared": self.shared,
            "N": self.n_bidders,
            "K": self.groups,
            "J": self.units,
            "alpha": alpha.tolist(),
            "beta": beta.tolist(),
            "train_config": train_config,
            "seed": seed,
        }

    @classmethod
    def from_checkpoint(cls, doc: dict, path="<checkpoint>") -> MonotonicNet:
        match doc:
            case {"version": 1, "kind": "myerson", "shared": bool(shared), "N": int(n),
                  "K": int(K), "J": int(J), "alpha": alpha, "beta": beta}:
                pass
            case {"kind": "myerson", "version": version} if version != CHECKPOINT_VERSION:
                raise CheckpointError(path, f"unsupported version {version}")
            case _:
                raise CheckpointError(path, "not a version 1 'myerson' checkpoint")
        try:
            alpha = np.asarray(alpha, dtype=np.float64)
            beta = np.asarray(beta, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise CheckpointError(path, f"alpha/beta are not numeric arrays: {e}") from e
        if shared:
            alpha, beta = alpha[None, ...], beta[None, ...]
        expected = (1 if shared else n, K, J)
        if alpha.shape != expected or beta.shape != expected:
            raise CheckpointError(
                path, f"alpha/beta shape {alpha.shape} does not match {expected}"
            )
        store = ParamStore()
        try:
            store.add("alpha", alpha)
            store.add("beta", beta)
        except NumericalError as e:
            raise CheckpointError(path, str(e)) from e
        return cls(n, store, shared=shared)

    def __repr__(self):
        mode = "shared" if self.shared else "per-bidder"
        return f"MonotonicNet(N={self.n_bidders}, K={self.groups}, J={self.units}, {mode})"


# ----------------------------------------------------------
#  Forward pieces (vectorized over profiles)
# ----------------------------------------------------------


def validate_profile(bids) -> np.ndarray:
    """Return bids as a float array; every bid must be finite and >= 0."""
    bids = np.asarray(bids, dtype=np.float64)
    if bids.ndim == 0 or bids.shape[-1] < 1:
        raise ConfigError("A bid profile needs at least one bid")
    if not np.all(np.isfinite(bids)) or np.any(bids < 0):
        raise ConfigError(f"Bids must be finite and non-negative, got {bids.tolist()}")
    return bids


def _as_batch(net: MonotonicNet, values) -> tuple[np.ndarray, bool]:
    values = np.asarray(values, dtype=np.float64)
    single = values.ndim == 1
    if single:
        values = values[None, :]
    if values.ndim != 2 or values.shape[1] != net.n_bidders:
        raise ConfigError(
            f"Expected profiles with {net.n_bidders} bids, got shape {values.shape}"
        )
    return values, single


def _forward(net: MonotonicNet, V: np.ndarray):
    """Transformed bids and the active (k, j) piece of every (profile, bidder)."""
    idx = net.param_index
    w = np.exp(net.store["alpha"])[idx]  # (N, K, J)
    beta = net.store["beta"][idx]
    z = V[..., None, None] * w + beta  # (S, N, K, J)
    j = np.argmin(z, axis=-1)
    t = np.take_along_axis(z, j[..., None], axis=-1)[..., 0]
    k = np.argmax(t, axis=-1)
    bbar = np.take_along_axis(t, k[..., None], axis=-1)[..., 0]
    j = np.take_along_axis(j, k[..., None], axis=-1)[..., 0]
    return bbar, k, j


def _inverse(net: MonotonicNet, Y: np.ndarray):
    """Column i of `Y` is inverted with bidder i's transform; returns the active pieces."""
    idx = net.param_index
    inv_w = np.exp(-net.store["alpha"])[idx]
    beta = net.store["beta"][idx]
    z = (Y[..., None, None] - beta) * inv_w
    j = np.argmax(z, axis=-1)
    t = np.take_along_axis(z, j[..., None], axis=-1)[..., 0]
    k = np.argmin(t, axis=-1)
    x = np.take_along_axis(t, k[..., None], axis=-1)[..., 0]
    j = np.take_along_axis(j, k[..., None], axis=-1)[..., 0]
    return x, k, j


def _others_max(bbar: np.ndarray):
    """Max over the other bidders for every bidder, and which bidder attains it.

    With a single bidder there is no other bid; -inf is returned with source -1.
    """
    S, N = bbar.shape
    if N == 1:
        return np.full((S, 1), -np.inf), np.full((S, 1), -1, dtype=np.intp)
    rows = np.arange(S)
    m1 = np.argmax(bbar, axis=1)
    top = bbar[rows, m1]
    masked = bbar.copy()
    masked[rows, m1] = -np.inf
    m2 = np.argmax(masked, axis=1)
    second = masked[rows, m2]
    is_top = np.arange(N)[None, :] == m1[:, None]
    value = np.where(is_top, second[:, None], top[:, None])
    source = np.where(is_top, m2[:, None], m1[:, None])
    return value, source


def transform_bids(net: MonotonicNet, profile) -> np.ndarray:
    """``b_i = max_k min_j (exp(alpha_kj) v_i + beta_kj)`` with bidder i's parameters."""
    V, single = _as_batch(net, validate_profile(profile))
    bbar = _forward(net, V)[0]
    return bbar[0] if single else bbar


def inverse_transform(net: MonotonicNet, y, bidder: int = 0) -> np.ndarray:
    """``phi^{-1}(y) = min_k max_j (y - beta_kj) / exp(alpha_kj)``."""
    return net.phi_inverse(y, bidder)


def allocate(bbar, k: float) -> np.ndarray:
    """Softmax over the transformed bids plus a dummy zero bid (last slot: no sale)."""
    bbar = np.asarray(bbar, dtype=np.float64)
    x = np.concatenate([bbar, np.zeros(bbar.shape[:-1] + (1,))], axis=-1)
    return softmax_temp(x, k, axis=-1)


def payment_raw(bbar) -> np.ndarray:
    """``p0_i = ReLU(max_{j != i} b_j)``; a lone bidder faces the dummy 0."""
    bbar = np.asarray(bbar, dtype=np.float64)
    single = bbar.ndim == 1
    batch = bbar[None, :] if single else bbar
    others = _others_max(batch)[0]
    p0 = np.maximum(others, 0.0)
    return p0[0] if single else p0


# ----------------------------------------------------------
#  Outcomes
# ----------------------------------------------------------


@dataclass
class AuctionOutcome:
    """Result of one auction. `winner` is None when the item is not sold."""

    bids: np.ndarray
    transformed: np.ndarray
    allocation: np.ndarray
    raw_payment: np.ndarray
    payment: np.ndarray
    winner: int | None
    mode: str = "hard"
    expected_payment: np.ndarray | None = field(default=None, repr=False)

    @property
    def revenue(self) -> float:
        if self.mode == "soft":
            return float(np.sum(self.expected_payment))
        return float(np.sum(self.payment))

    def to_json(self) -> dict:
        doc = {
            "mode": self.mode,
            "bids": self.bids.tolist(),
            "transformed": self.transformed.tolist(),
            "allocation": self.allocation.tolist(),
            "raw_payment": self.raw_payment.tolist(),
            "payment": self.payment.tolist(),
            "winner": self.winner,
            "no_sale": self.winner is None,
            "revenue": self.revenue,
        }
        if self.expected_payment is not None:
            doc["expected_payment"] = self.expected_payment.tolist()
        return doc


def hard_outcomes(net: MonotonicNet, V) -> tuple[np.ndarray, np.ndarray]:
    """Hard-mode Myerson rule on a batch of profiles.

    Returns ``(winners, payments)``: winners has shape ``(S,)`` with -1 for no
    sale; payments has shape ``(S, N)`` and is zero except for the winner.
    Ties go to the lowest bidder index, and the dummy (index N) loses ties.
    Prices are floored at 0.
    """
    V, _ = _as_batch(net, V)
    S, N = V.shape
    bbar = _forward(net, V)[0]
    x = np.concatenate([bbar, np.zeros((S, 1))], axis=1)
    w = np.argmax(x, axis=1)
    sale = w < N
    p0 = np.maximum(_others_max(bbar)[0], 0.0)
    price = np.maximum(_inverse(net, p0)[0], 0.0)
    onehot = (np.arange(N)[None, :] == w[:, None]) & sale[:, None]
    payments = np.where(onehot, price, 0.0)
    winners = np.where(sale, w, -1)
    return winners, payments


def run_auction(net: MonotonicNet, profile, k: float, mode: str = "hard") -> AuctionOutcome:
    """Run one auction in soft (probabilistic) or hard (argmax) mode."""
    bids = validate_profile(profile)
    V, _ = _as_batch(net, bids)
    N = net.n_bidders
    bbar = _forward(net, V)[0]
    p0 = np.maximum(_others_max(bbar)[0], 0.0)
    price = _inverse(net, p0)[0][0]
    x = np.concatenate([bbar[0], [0.0]])
    w = int(np.argmax(x))
    winner = w if w < N else None
    match mode:
        case "soft":
            g = allocate(bbar[0], k)
            return AuctionOutcome(
                bids, bbar[0], g, p0[0], price, winner, "soft", expected_payment=g[:N] * price
            )
        case "hard":
            g = np.zeros(N + 1)
            g[w] = 1.0
            payment = np.zeros(N)
            if winner is not None:
                payment[winner] = max(price[winner], 0.0)
            return AuctionOutcome(bids, bbar[0], g, p0[0], payment, winner, "hard")
        case _:
            raise ConfigError(f"Unknown auction mode '{mode}', expected 'soft' or 'hard'")


def allocate_sequential(net: MonotonicNet, profile, units: int) -> list[tuple[int, float]]:
    """Sell `units` identical items one at a time with the hard Myerson rule.

    Each round is a single-item auction among the bidders that have not won
    yet. Stops early when the dummy wins. Returns ``(winner, payment)`` pairs
    in round order.
    """
    bids = validate_profile(profile)
    V, _ = _as_batch(net, bids)
    bbar = _forward(net, V)[0][0]
    active = np.ones(net.n_bidders, dtype=bool)
    rounds = []
    for _ in range(units):
        if not active.any():
            break
        masked = np.where(active, bbar, -np.inf)
        w = int(np.argmax(masked))
        if masked[w] < 0.0:
            break
        others = np.where(active & (np.arange(net.n_bidders) != w), bbar, -np.inf)
        p0 = max(float(np.max(others)), 0.0)
        rounds.append((w, max(float(net.phi_inverse(p0, w)), 0.0)))
        active[w] = False
    return rounds


# ----------------------------------------------------------
#  Loss and gradients
# ----------------------------------------------------------


def revenue_loss(net: MonotonicNet, profiles, k: float, accumulate: bool = True) -> float:
    """Negative soft-mode revenue, averaged over the batch.

    ``loss = -(1/S) sum_s sum_i g_i p_i`` with ``p_i = phi_i^{-1}(p0_i)``.
    With `accumulate`, the analytic gradients w.r.t. ``alpha`` and ``beta`` are
    added to the net's ParamStore.
    """
    V, _ = _as_batch(net, profiles)
    S, N = V.shape
    if S == 0:
        raise ConfigError("revenue_loss needs a non-empty batch")

    bbar, ka, ja = _forward(net, V)
    others, source = _others_max(bbar)
    p0 = np.maximum(others, 0.0)
    pay, kb, jb = _inverse(net, p0)
    g = allocate(bbar, k)

    loss = -float(np.sum(g[:, :N] * pay)) / S
    if not math.isfinite(loss):
        raise NumericalError("revenue loss")
    if not accumulate:
        return loss

    alpha = net.store["alpha"]
    beta = net.store["beta"]
    pidx = np.broadcast_to(net.param_index[None, :], (S, N))

    d_pay = -g[:, :N] / S
    a = np.zeros((S, N + 1))
    a[:, :N] = -pay / S
    d_x = k * g * (a - np.sum(g * a, axis=1, keepdims=True))
    d_bbar = d_x[:, :N].copy()

    # payment inverse: pay = (p0 - beta_b) * exp(-alpha_b)
    inv_w = np.exp(-alpha[pidx, kb, jb])
    d_alpha = np.zeros_like(alpha)
    d_beta = np.zeros_like(beta)
    np.add.at(d_alpha, (pidx, kb, jb), -d_pay * pay)
    np.add.at(d_beta, (pidx, kb, jb), -d_pay * inv_w)

    # ReLU(max of others) routes into the attaining bidder's transformed bid
    live = others > 0.0
    rows = np.broadcast_to(np.arange(S)[:, None], (S, N))
    np.add.at(d_bbar, (rows[live], source[live]), (d_pay * inv_w)[live])

    # forward piece: bbar = exp(alpha_a) v + beta_a
    w_active = np.exp(alpha[pidx, ka, ja])
    np.add.at(d_alpha, (pidx, ka, ja), d_bbar * w_active * V)
    np.add.at(d_beta, (pidx, ka, ja), d_bbar)

    net.store.accumulate("alpha", d_alpha)
    net.store.accumulate("beta", d_beta)
    return loss


def _gap(z: np.ndarray, axis: int) -> np.ndarray:
    """Distance between the two smallest entries along `axis` (inf if fewer than two)."""
    if z.shape[axis] < 2:
        return np.full(np.delete(z.shape, axis), np.inf)
    part = np.partition(z, 1, axis=axis)
    first = np.take(part, 0, axis=axis)
    second = np.take(part, 1, axis=axis)
    return second - first


def kink_margin(net: MonotonicNet, profiles) -> float:
    """Smallest distance to a tie of any min, max or ReLU in the loss of a batch.

    Finite-difference gradient checks are meaningful only where this margin is
    comfortably larger than the perturbation.
    """
    V, _ = _as_batch(net, profiles)
    idx = net.param_index
    w = np.exp(net.store["alpha"])[idx]
    beta = net.store["beta"][idx]
    margins = []

    z = V[..., None, None] * w + beta
    t = np.min(z, axis=-1)
    margins += [_gap(z, -1).min(), _gap(-t, -1).min()]

    bbar = np.max(t, axis=-1)
    if bbar.shape[1] >= 2:
        # the top three decide every bidder's max over the others
        top = np.sort(bbar, axis=1)[:, -3:]
        margins.append(np.diff(top, axis=1).min())
    others = _others_max(bbar)[0]
    finite = np.isfinite(others)
    if finite.any():
        margins.append(np.abs(others[finite]).min())

    p0 = np.maximum(others, 0.0)
    zi = (p0[..., None, None] - beta) / w
    ti = np.max(zi, axis=-1)
    margins += [_gap(-zi, -1).min(), _gap(ti, -1).min()]
    return float(min(margins))


# ----------------------------------------------------------
#  Training
# ----------------------------------------------------------


@dataclass
class TrainResult:
    net: MonotonicNet
    metrics: pd.DataFrame
    revenue: float
    stderr: float


def _hard_revenue(net: MonotonicNet, V: np.ndarray) -> tuple[float, float]:
    per_profile = hard_outcomes(net, V)[1].sum(axis=1)
    mean = float(per_profile.mean()) if per_profile.size else 0.0
    if per_profile.size > 1:
        stderr = float(per_profile.std(ddof=1) / math.sqrt(per_profile.size))
    else:
        stderr = 0.0
    return mean, stderr


def train_auction(
    config: AuctionTrainConfig, sampler: ValuationSampler | None = None
) -> TrainResult:
    """Batched SGD on :func:`revenue_loss`; deterministic given ``config.seed``.

    Emits one metrics row per iteration (loss and the hard-mode revenue of the
    batch) and finishes with a hard-mode Monte Carlo estimate over
    ``config.eval_samples`` fresh profiles.
    """
    if sampler is None:
        sampler = ValuationSampler.from_config(config)
    if sampler.n_bidders != config.bidders:
        raise ConfigError(
            f"Sampler has {sampler.n_bidders} bidders, config expects {config.bidders}"
        )
    rng_init, rng_data, rng_eval = spawn_rngs(config.seed, 3)
    net = MonotonicNet.initialize(
        config.bidders,
        config.groups,
        config.units,
        shared=config.shared,
        rng=rng_init,
        scale=config.init_scale,
    )
    _logger.info(
        "Training %r for %d iterations (lr=%g, batch=%d, k=%g)",
        net,
        config.iterations,
        config.lr,
        config.batch_size,
        config.train_temperature,
    )

    rows = []
    start = time.perf_counter()
    for it in range(config.iterations):
        V = sampler.sample(rng_data, config.batch_size)
        try:
            loss = revenue_loss(net, V, config.train_temperature)
            sgd_step(net.store, config.lr)
        except NumericalError as e:
            _logger.error("Auction training diverged at iteration %d: %s", it, e)
            raise DivergenceError(e.what, it) from e
        revenue = _hard_revenue(net, V)[0]
        rows.append((it, loss, revenue, time.perf_counter() - start))
        if (it + 1) % config.log_every == 0:
            _logger.info("iter %d: loss=%.6f revenue_hard=%.6f", it + 1, loss, revenue)

    metrics = pd.DataFrame(rows, columns=["iter", "loss", "revenue_hard", "seconds"])
    metrics = metrics.astype({"iter": "int64"})
    revenue, stderr = _hard_revenue(net, sampler.sample(rng_eval, config.eval_samples))
    _logger.info("Hard-mode revenue %.6f +- %.6f", revenue, stderr)
    return TrainResult(net, metrics, revenue, stderr)


# ----------------------------------------------------------
#  Inference cost
# ----------------------------------------------------------


@dataclass(frozen=True)
class LayerCost:
    name: str
    macs: int = 0
    comparisons: int = 0
    activations: int = 0
    adds: int = 0


@dataclass(frozen=True)
class InferenceCost:
    layers: tuple[LayerCost, ...]

    @property
    def macs(self) -> int:
        return sum(c.macs for c in self.layers)

    @property
    def comparisons(self) -> int:
        return sum(c.comparisons for c in self.layers)

    @property
    def activations(self) -> int:
        return sum(c.activations for c in self.layers)

    @property
    def adds(self) -> int:
        return sum(c.adds for c in self.layers)

    @property
    def total(self) -> int:
        return self.macs + self.comparisons + self.activations + self.adds

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(c.name, c.macs, c.comparisons, c.activations, c.adds) for c in self.layers],
            columns=["layer", "macs", "comparisons", "activations", "adds"],
        )

    def to_json(self) -> dict:
        return {
            "macs": self.macs,
            "comparisons": self.comparisons,
            "activations": self.activations,
            "adds": self.adds,
            "total": self.total,
            "layers": self.to_frame().to_dict(orient="records"),
        }


def estimate_inference_cost(model) -> InferenceCost:
    """Operation count of one forward pass, summed layer by layer.

    `model` is anything exposing ``layer_costs()``: a MonotonicNet or a
    CommNet policy.
    """
    try:
        layers = model.layer_costs()
    except AttributeError as e:
        raise ConfigError(f"Cannot estimate the cost of {type(model).__name__}") from e
    return InferenceCost(tuple(layers))


def complexity_bound(width: int, n_layers: int) -> int:
    """``(O_M(m) + O_A(m)) * NL`` with ``O_M(m) = m^2`` matrix and ``O_A(m) = m``
    activation operations per layer of width m."""
    if width < 1 or n_layers < 0:
        raise ConfigError(f"Invalid architecture: width={width}, layers={n_layers}")
    return (width * width + width) * n_layers
