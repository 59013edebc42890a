"""
EV charging stations sharing surplus energy.

Each station has a battery, a photovoltaic schedule and seeded Poisson demand.
Stations may buy energy from the grid or offer their battery to a common
pool; the pool covers the shortfall of the other stations pro rata. The team
reward is minus the grid purchase cost minus a penalty per unit of unserved
demand.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..config.records import EnergyConfig
from ..utils import make_rng
from .base import Env, StepResult

__all__ = ["EnergyEnv", "EnergyState", "StationFlows"]

_logger = logging.getLogger(__name__)

SERVE, CHARGE, SHARE, BUY = range(4)


@dataclass(frozen=True)
class EnergyState:
    t: int
    battery: tuple[float, ...]
    demand: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True)
class StationFlows:
    """Energy moved by every station during one step (all arrays per station)."""

    pv: np.ndarray
    bought: np.ndarray
    pool_in: np.ndarray
    pool_out: np.ndarray
    served: np.ndarray
    shortfall: np.ndarray
    curtailed: np.ndarray
    battery_delta: np.ndarray

    def imbalance(self) -> np.ndarray:
        """``in - out`` per station; zero up to round-off."""
        inflow = self.pv + self.bought + self.pool_in - self.pool_out
        return inflow - (self.served + self.battery_delta + self.curtailed)


class EnergyEnv(Env):
    kind = "energy"
    action_names = ("serve", "charge-from-PV", "share-to-pool", "buy-1-unit")

    def __init__(self, config: EnergyConfig | None = None):
        super().__init__(config if config is not None else EnergyConfig())

    @property
    def n_agents(self) -> int:
        return self.config.agents

    @property
    def obs_dim(self) -> int:
        return 3

    def pv(self, t: int) -> float:
        schedule = self.config.pv_schedule
        return float(schedule[t % len(schedule)])

    def price(self, t: int) -> float:
        schedule = self.config.price_schedule
        return float(schedule[t % len(schedule)])

    def reset(self, seed) -> tuple[EnergyState, np.ndarray]:
        cfg = self.config
        rng = make_rng([cfg.demand_seed, seed])
        demand = rng.poisson(cfg.demand_mean, (cfg.horizon, cfg.agents)).astype(np.float64)
        demand.flags.writeable = False
        state = EnergyState(0, (float(cfg.initial_battery),) * cfg.agents, demand)
        return state, self.observe(state)

    def observe(self, state: EnergyState) -> np.ndarray:
        cfg = self.config
        obs = np.empty((cfg.agents, 3))
        obs[:, 0] = np.asarray(state.battery) / cfg.capacity
        obs[:, 1] = self.price(state.t)
        obs[:, 2] = state.demand[state.t] if state.t < cfg.horizon else 0.0
        return obs

    def flows(self, state: EnergyState, actions) -> StationFlows:
        """Resolve one step of local dispatch and pool sharing."""
        cfg = self.config
        n = cfg.agents
        a = np.asarray(actions)
        demand = state.demand[state.t]
        battery = np.asarray(state.battery, dtype=np.float64)
        pv = np.full(n, self.pv(state.t))

        bought = np.where(a == BUY, 1.0, 0.0)
        supply = pv + bought
        served = np.minimum(demand, supply)
        short = demand - served
        from_battery = np.where(a == CHARGE, 0.0, np.minimum(short, battery))
        served = served + from_battery
        short = short - from_battery
        level = battery - from_battery
        leftover = supply - np.minimum(demand, supply)
        charge = np.minimum(leftover, cfg.capacity - level)
        curtailed = leftover - charge
        level = level + charge

        offers = np.where(a == SHARE, level, 0.0)
        requests = np.where(a == SHARE, 0.0, short)
        transfer = min(offers.sum(), requests.sum())
        pool_out = np.zeros(n)
        pool_in = np.zeros(n)
        if transfer > 0.0:
            pool_out = transfer * offers / offers.sum()
            pool_in = transfer * requests / requests.sum()
        level = level - pool_out
        served = served + pool_in
        short = short - pool_in

        return StationFlows(
            pv=pv,
            bought=bought,
            pool_in=pool_in,
            pool_out=pool_out,
            served=served,
            shortfall=short,
            curtailed=curtailed,
            battery_delta=level - battery,
        )

    def step(self, state: EnergyState, actions) -> StepResult:
        actions = self.check_actions(state, actions)
        f = self.flows(state, actions)
        cost = self.price(state.t) * float(f.bought.sum())
        reward = -cost - self.config.penalty * float(f.shortfall.sum())
        battery = np.clip(np.asarray(state.battery) + f.battery_delta, 0.0, self.config.capacity)
        nxt = EnergyState(state.t + 1, tuple(battery.tolist()), state.demand)
        return StepResult(nxt, self.observe(nxt), reward, nxt.t >= self.horizon)

    def render(self, state: EnergyState) -> str:
        cfg = self.config
        lines = [f"t={state.t} pv={self.pv(state.t):g} price={self.price(state.t):g}"]
        for i, b in enumerate(state.battery):
            d = state.demand[state.t, i] if state.t < cfg.horizon else 0.0
            lines.append(f"station {i}: battery {b:g}/{cfg.capacity:g} demand {d:g}")
        return "\n".join(lines)
