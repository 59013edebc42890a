"""
Common environment interface.

Environments are value-semantics state machines: ``reset`` builds an immutable
state from a seed and ``step`` maps ``(state, joint action)`` to a new state
without touching the old one, so episodes can run side by side.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from ..config.exceptions import ConfigError, DimensionError, InvalidAction

__all__ = ["Env", "StepResult", "make_env"]


@dataclass(frozen=True)
class StepResult:
    state: Any
    observations: np.ndarray
    reward: float
    done: bool


class Env(ABC):
    """A cooperative multi-agent environment with a shared team reward."""

    kind: str = "env"
    action_names: tuple[str, ...] = ()

    def __init__(self, config):
        self.config = config

    @property
    def n_actions(self) -> int:
        return len(self.action_names)

    @property
    @abstractmethod
    def n_agents(self) -> int: ...

    @property
    @abstractmethod
    def obs_dim(self) -> int: ...

    @property
    def horizon(self) -> int:
        return self.config.horizon

    @abstractmethod
    def reset(self, seed) -> tuple[Any, np.ndarray]:
        """Return the initial state and the ``(n_agents, obs_dim)`` observations."""

    @abstractmethod
    def step(self, state, actions: Sequence[int]) -> StepResult: ...

    @abstractmethod
    def observe(self, state) -> np.ndarray: ...

    @abstractmethod
    def render(self, state) -> str: ...

    def check_actions(self, state, actions) -> list[int]:
        if state.t >= self.horizon:
            raise ValueError(f"Episode already finished at t={state.t}")
        actions = list(actions)
        if len(actions) != self.n_agents:
            raise DimensionError(f"{self.kind} step actions", (self.n_agents,), (len(actions),))
        checked = []
        for agent, a in enumerate(actions):
            if isinstance(a, (bool, np.bool_)) or not isinstance(a, (int, np.integer)):
                raise InvalidAction(agent, a, self.n_actions)
            if not 0 <= a < self.n_actions:
                raise InvalidAction(agent, a, self.n_actions)
            checked.append(int(a))
        return checked

    def to_json(self) -> dict:
        return self.config.to_dict()

    def __repr__(self):
        return f"{type(self).__name__}({self.config!r})"


def make_env(config) -> Env:
    """Build an environment from a record or a ``{"kind": ...}`` mapping."""
    from .coverage import CoverageEnv
    from .energy import EnergyEnv
    from ..config.records import CoverageConfig, EnergyConfig

    match config:
        case CoverageConfig():
            return CoverageEnv(config)
        case EnergyConfig():
            return EnergyEnv(config)
        case {"kind": "coverage"}:
            return CoverageEnv(CoverageConfig.from_dict(config))
        case {"kind": "energy"}:
            return EnergyEnv(EnergyConfig.from_dict(config))
        case Mapping():
            raise ConfigError(
                f"Unknown environment kind {config.get('kind')!r}, expected 'coverage' or 'energy'"
            )
        case _:
            raise ConfigError(f"Cannot build an environment from {type(config).__name__}")
