"""
Classical single-item auctions and the audit harness.

Every mechanism exposes a vectorized ``outcomes(profiles)`` returning
``(winners, payments)`` for a ``(S, N)`` batch; winners are 0-based with -1
meaning no sale. Audits (revenue, IC regret, IR violations) work on any
mechanism, neural or analytic, through that single interface.
"""
from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
import pandas as pd

from .auction import Distribution, MonotonicNet, ValuationSampler, hard_outcomes, validate_profile
from .config.exceptions import ConfigError
from .config.records import AuditConfig
from .utils import as_seed_sequence, chunk_sizes, ordered_map

__all__ = [
    "Mechanism",
    "FirstPrice",
    "SecondPrice",
    "AnalyticMyerson",
    "NeuralMyerson",
    "RevenueEstimate",
    "AuditReport",
    "fpa",
    "spa",
    "analytic_myerson",
    "make_mechanism",
    "monte_carlo_revenue",
    "ic_regret",
    "ir_violation",
    "audit",
    "compare",
    "optimal_revenue_uniform",
    "spa_revenue_uniform",
]

_logger = logging.getLogger(__name__)

#: Slack for payment > value checks; covers phi/phi^-1 round-off.
IR_TOLERANCE = 1e-9


def _batch(profiles) -> np.ndarray:
    V = np.asarray(profiles, dtype=np.float64)
    if V.ndim == 1:
        V = V[None, :]
    if V.ndim != 2 or V.shape[1] < 1:
        raise ConfigError(f"Expected a (samples, bidders) array, got shape {V.shape}")
    return V


def _top_two(scores: np.ndarray):
    """Winner index (first maximum), and the best score among the others (-inf if none)."""
    S, N = scores.shape
    rows = np.arange(S)
    w = np.argmax(scores, axis=1)
    if N == 1:
        return w, np.full(S, -np.inf)
    rest = scores.copy()
    rest[rows, w] = -np.inf
    return w, np.max(rest, axis=1)


class Mechanism(ABC):
    """A single-item allocation and payment rule."""

    name = "mechanism"

    @abstractmethod
    def outcomes(self, profiles) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(winners, payments)`` for a batch of bid profiles."""

    def __call__(self, profile) -> tuple[int | None, np.ndarray]:
        bids = validate_profile(profile)
        winners, payments = self.outcomes(bids[None, :])
        w = int(winners[0])
        return (w if w >= 0 else None), payments[0]

    def __repr__(self):
        return f"{type(self).__name__}()"


class FirstPrice(Mechanism):
    """Highest bid wins (lowest index on ties) and pays its own bid."""

    name = "fpa"

    def outcomes(self, profiles):
        V = _batch(profiles)
        S, N = V.shape
        w, _ = _top_two(V)
        payments = np.zeros((S, N))
        payments[np.arange(S), w] = V[np.arange(S), w]
        return w, payments


class SecondPrice(Mechanism):
    """Highest bid wins and pays the second-highest bid; a lone bidder pays 0."""

    name = "spa"

    def outcomes(self, profiles):
        V = _batch(profiles)
        S, N = V.shape
        w, second = _top_two(V)
        payments = np.zeros((S, N))
        payments[np.arange(S), w] = np.where(np.isfinite(second), second, 0.0)
        return w, payments


class AnalyticMyerson(Mechanism):
    """Myerson's optimal auction for known regular distributions.

    The bidder with the highest virtual value wins if that value is >= 0 and
    pays ``phi_w^{-1}(max(0, best other virtual value))``.

    `virtual` and `inverse` are either one callable applied to every bidder or
    one callable per bidder.
    """

    name = "myerson"

    def __init__(self, virtual, inverse):
        self.virtual = virtual
        self.inverse = inverse

    @classmethod
    def from_distributions(cls, dists: Sequence[Distribution]) -> AnalyticMyerson:
        return cls([d.virtual for d in dists], [d.inverse_virtual for d in dists])

    @classmethod
    def uniform(cls) -> AnalyticMyerson:
        """The uniform[0, 1] preset, ``phi(v) = 2v - 1``."""
        return cls(lambda v: 2.0 * np.asarray(v) - 1.0, lambda y: (np.asarray(y) + 1.0) / 2.0)

    @staticmethod
    def _per_bidder(fns, n: int) -> list[Callable]:
        if callable(fns):
            return [fns] * n
        if len(fns) != n:
            raise ConfigError(f"{len(fns)} virtual-value functions for {n} bidders")
        return list(fns)

    def outcomes(self, profiles):
        V = _batch(profiles)
        S, N = V.shape
        virtual = self._per_bidder(self.virtual, N)
        inverse = self._per_bidder(self.inverse, N)
        Y = np.stack([np.asarray(virtual[i](V[:, i]), dtype=np.float64) for i in range(N)], 1)
        w, second = _top_two(Y)
        rows = np.arange(S)
        sale = Y[rows, w] >= 0.0
        p0 = np.maximum(second, 0.0)
        price = np.zeros(S)
        for i in range(N):
            mine = sale & (w == i)
            if mine.any():
                price[mine] = np.maximum(inverse[i](p0[mine]), 0.0)
        payments = np.zeros((S, N))
        payments[rows[sale], w[sale]] = price[sale]
        return np.where(sale, w, -1), payments

    def __repr__(self):
        return "AnalyticMyerson()"


class NeuralMyerson(Mechanism):
    """Hard-mode rule of a trained MonotonicNet."""

    name = "neural"

    def __init__(self, net: MonotonicNet):
        self.net = net

    def outcomes(self, profiles):
        return hard_outcomes(self.net, _batch(profiles))

    def __repr__(self):
        return f"NeuralMyerson({self.net!r})"


def fpa(profile) -> tuple[int | None, np.ndarray]:
    return FirstPrice()(profile)


def spa(profile) -> tuple[int | None, np.ndarray]:
    return SecondPrice()(profile)


def analytic_myerson(profile, virtual, inverse) -> tuple[int | None, np.ndarray]:
    return AnalyticMyerson(virtual, inverse)(profile)


def make_mechanism(
    name: str, sampler: ValuationSampler, net: MonotonicNet | None = None
) -> Mechanism:
    """Build a mechanism by name: fpa, spa, myerson (analytic for the sampler) or neural."""
    match name:
        case "fpa":
            return FirstPrice()
        case "spa":
            return SecondPrice()
        case "myerson":
            return AnalyticMyerson.from_distributions(sampler.distributions)
        case "neural" if net is not None:
            return NeuralMyerson(net)
        case "neural":
            raise ConfigError("The neural mechanism needs a trained model")
        case _:
            raise ConfigError(
                f"Unknown mechanism '{name}', expected one of fpa, spa, myerson, neural"
            )


# ----------------------------------------------------------
#  Monte Carlo audits
# ----------------------------------------------------------


@dataclass(frozen=True)
class RevenueEstimate:
    revenue: float
    stderr: float
    samples: int

    def to_json(self) -> dict:
        return {"revenue": self.revenue, "stderr": self.stderr, "samples": self.samples}


def _chunk_streams(seed, samples: int):
    """Fixed-size chunks, each paired with its own child seed sequence."""
    sizes = chunk_sizes(samples)
    children = as_seed_sequence(seed).spawn(len(sizes))
    return list(zip(sizes, children))


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    if values.size < 2 or np.ptp(values) == 0.0:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / math.sqrt(values.size))


def monte_carlo_revenue(
    mech: Mechanism,
    sampler: ValuationSampler,
    samples: int,
    *,
    seed=None,
    threads: int = 1,
) -> RevenueEstimate:
    """Mean total payment over seeded truthful profiles, with its standard error.

    The result does not depend on `threads`: chunks are fixed-size, seeded
    independently and reduced in chunk order.
    """
    if samples < 1:
        raise ConfigError(f"samples must be >= 1, got {samples}")
    seed = sampler.seed if seed is None else seed

    def work(item):
        size, child = item
        V = sampler.sample(np.random.default_rng(child), size)
        return mech.outcomes(V)[1].sum(axis=1)

    revenue = np.concatenate(ordered_map(work, _chunk_streams(seed, samples), threads))
    mean, stderr = _mean_stderr(revenue)
    _logger.debug("%r revenue %.6f +- %.6f over %d samples", mech, mean, stderr, samples)
    return RevenueEstimate(mean, stderr, samples)


def ic_regret(
    mech: Mechanism,
    sampler: ValuationSampler,
    grid: int = 101,
    opponents: int = 10000,
    *,
    seed=None,
    threads: int = 1,
) -> float:
    """Largest expected gain from misreporting, over a grid of values and reports.

    For each bidder the same opponent profiles are reused for every report m
    (common random numbers), so ``u(m; v) = P(win | m) v - E[pay | m]`` and the
    regret at v is ``max_m u(m; v) - u(v; v)``. Allocation is always hard.
    """
    if grid < 2:
        raise ConfigError(f"The misreport grid needs at least 2 points, got {grid}")
    seed = sampler.seed if seed is None else seed
    N = sampler.n_bidders
    streams = as_seed_sequence(seed).spawn(N)
    worst = 0.0
    for i in range(N):
        lo, hi = sampler.support(i)
        points = np.linspace(lo, hi, grid)
        others = sampler.sample(np.random.default_rng(streams[i]), opponents)

        def report(m, i=i, others=others):
            V = others.copy()
            V[:, i] = m
            winners, payments = mech.outcomes(V)
            return float(np.mean(winners == i)), float(np.mean(payments[:, i]))

        results = ordered_map(report, points, threads)
        win = np.array([r[0] for r in results])
        pay = np.array([r[1] for r in results])
        utility = points[:, None] * win[None, :] - pay[None, :]  # [value, report]
        regret = utility.max(axis=1) - np.diag(utility)
        worst = max(worst, float(regret.max()))
        _logger.debug("Bidder %d: max regret %.6f", i, regret.max())
    return worst


def ir_violation(
    mech: Mechanism,
    sampler: ValuationSampler,
    samples: int,
    *,
    seed=None,
    threads: int = 1,
) -> float:
    """Fraction of truthful profiles where some bidder pays more than its value
    times its (hard) allocation."""
    if samples < 1:
        raise ConfigError(f"samples must be >= 1, got {samples}")
    seed = sampler.seed if seed is None else seed

    def work(item):
        size, child = item
        V = sampler.sample(np.random.default_rng(child), size)
        winners, payments = mech.outcomes(V)
        alloc = (np.arange(V.shape[1])[None, :] == winners[:, None]).astype(np.float64)
        return int(np.count_nonzero(np.any(payments > V * alloc + IR_TOLERANCE, axis=1)))

    violations = sum(ordered_map(work, _chunk_streams(seed, samples), threads))
    return violations / samples


@dataclass(frozen=True)
class AuditReport:
    revenue: float
    stderr: float
    ic_regret: float
    ir_rate: float
    samples: int
    grid: int
    opponents: int
    seed: int

    def to_json(self) -> dict:
        return {
            "revenue": self.revenue,
            "stderr": self.stderr,
            "ic_regret": self.ic_regret,
            "ir_rate": self.ir_rate,
            "samples": self.samples,
            "grid": self.grid,
            "opponents": self.opponents,
            "seed": self.seed,
        }


def audit(mech: Mechanism, sampler: ValuationSampler, config: AuditConfig) -> AuditReport:
    """Revenue, IC regret and IR violation rate of one mechanism."""
    _logger.info("Auditing %r with %s", mech, config)
    estimate = monte_carlo_revenue(
        mech, sampler, config.samples, seed=[config.seed, 0], threads=config.threads
    )
    regret = ic_regret(
        mech, sampler, config.grid, config.opponents,
        seed=[config.seed, 1], threads=config.threads,
    )
    ir_rate = ir_violation(
        mech, sampler, config.samples, seed=[config.seed, 2], threads=config.threads
    )
    return AuditReport(
        estimate.revenue,
        estimate.stderr,
        regret,
        ir_rate,
        config.samples,
        config.grid,
        config.opponents,
        config.seed,
    )


def compare(
    mechanisms: Mapping[str, Mechanism],
    sampler: ValuationSampler,
    samples: int,
    *,
    seed=None,
    threads: int = 1,
) -> pd.DataFrame:
    """Revenue of several mechanisms on the same profiles, one row per mechanism."""
    rows = []
    for name, mech in mechanisms.items():
        est = monte_carlo_revenue(mech, sampler, samples, seed=seed, threads=threads)
        rows.append((name, est.revenue, est.stderr, est.samples))
    return pd.DataFrame(rows, columns=["mechanism", "revenue", "stderr", "samples"])


def optimal_revenue_uniform(n: int) -> float:
    """Expected revenue of the optimal auction with n i.i.d. uniform[0, 1] bidders."""
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    return (n - 1) / (n + 1) + 2.0**-n / (n + 1)


def spa_revenue_uniform(n: int) -> float:
    """Expected second-price revenue with n i.i.d. uniform[0, 1] bidders."""
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    return (n - 1) / (n + 1)
