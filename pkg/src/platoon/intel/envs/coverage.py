"""
Multi-UAV coverage gridworld.

Agents move on a W x H grid and cover every user within Chebyshev distance
``radius``. The team reward of a step is the number of users covered by at
least one agent after the move; overlapping footprints earn nothing extra.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from ..config.exceptions import StateSpaceTooLarge
from ..config.records import CoverageConfig
from ..utils import make_rng
from .base import Env, StepResult

__all__ = ["CoverageEnv", "CoverageState", "brute_force_optimal", "MAX_PLACEMENTS"]

_logger = logging.getLogger(__name__)

#: Largest joint-placement count brute_force_optimal will enumerate.
MAX_PLACEMENTS = 10**6

# (dx, dy) per action; y grows southwards
MOVES = ((0, -1), (0, 1), (1, 0), (-1, 0), (0, 0))


@dataclass(frozen=True)
class CoverageState:
    t: int
    positions: tuple[tuple[int, int], ...]


class CoverageEnv(Env):
    kind = "coverage"
    action_names = ("N", "S", "E", "W", "stay")

    def __init__(self, config: CoverageConfig | None = None):
        super().__init__(config if config is not None else CoverageConfig())
        cfg = self.config
        self.users = np.array(cfg.users, dtype=np.int64).reshape(-1, 2)
        self.counts = np.zeros((cfg.height, cfg.width), dtype=np.float64)
        np.add.at(self.counts, (self.users[:, 1], self.users[:, 0]), 1.0)
        r = cfg.radius
        self._padded = np.pad(self.counts, r)

    @property
    def n_agents(self) -> int:
        return self.config.agents

    @property
    def obs_dim(self) -> int:
        return 2 + (2 * self.config.radius + 1) ** 2

    @property
    def n_users(self) -> int:
        return len(self.users)

    def reset(self, seed) -> tuple[CoverageState, np.ndarray]:
        cfg = self.config
        if cfg.start is not None:
            positions = tuple((int(x), int(y)) for x, y in cfg.start)
        else:
            rng = make_rng(seed)
            xs = rng.integers(0, cfg.width, cfg.agents)
            ys = rng.integers(0, cfg.height, cfg.agents)
            positions = tuple(zip(xs.tolist(), ys.tolist()))
        state = CoverageState(0, positions)
        return state, self.observe(state)

    def observe(self, state: CoverageState) -> np.ndarray:
        cfg = self.config
        side = 2 * cfg.radius + 1
        obs = np.empty((self.n_agents, self.obs_dim))
        for i, (x, y) in enumerate(state.positions):
            obs[i, 0] = x / max(cfg.width - 1, 1)
            obs[i, 1] = y / max(cfg.height - 1, 1)
            obs[i, 2:] = self._padded[y : y + side, x : x + side].ravel()
        return obs

    def covered(self, positions) -> np.ndarray:
        """Boolean mask over users covered by at least one agent."""
        if self.n_users == 0:
            return np.zeros(0, dtype=bool)
        pos = np.asarray(positions, dtype=np.int64).reshape(-1, 2)
        dist = np.max(np.abs(self.users[:, None, :] - pos[None, :, :]), axis=-1)
        return np.any(dist <= self.config.radius, axis=1)

    def coverage(self, positions) -> float:
        return float(np.count_nonzero(self.covered(positions)))

    def step(self, state: CoverageState, actions) -> StepResult:
        actions = self.check_actions(state, actions)
        cfg = self.config
        moved = []
        for agent, ((x, y), a) in enumerate(zip(state.positions, actions)):
            if agent == cfg.frozen_agent:
                moved.append((x, y))
                continue
            dx, dy = MOVES[a]
            moved.append(
                (min(max(x + dx, 0), cfg.width - 1), min(max(y + dy, 0), cfg.height - 1))
            )
        nxt = CoverageState(state.t + 1, tuple(moved))
        return StepResult(nxt, self.observe(nxt), self.coverage(moved), nxt.t >= self.horizon)

    def render(self, state: CoverageState) -> str:
        cfg = self.config
        grid = [["."] * cfg.width for _ in range(cfg.height)]
        covered = self.covered(state.positions)
        for (x, y), c in zip(self.users.tolist(), covered):
            grid[y][x] = "U" if c else "u"
        for x, y in state.positions:
            grid[y][x] = "A"
        lines = [f"t={state.t} reward={self.coverage(state.positions):g}"]
        lines += ["".join(row) for row in grid]
        return "\n".join(lines)


def brute_force_optimal(env: CoverageEnv) -> tuple[float, tuple[tuple[int, int], ...]]:
    """Best single-step unique coverage over every joint placement of the agents.

    Ties resolve to the lexicographically smallest placement. Raises
    :class:`StateSpaceTooLarge` beyond ``MAX_PLACEMENTS`` placements.
    """
    cfg = env.config
    cells = [(x, y) for x in range(cfg.width) for y in range(cfg.height)]
    total = len(cells) ** cfg.agents
    if total > MAX_PLACEMENTS:
        raise StateSpaceTooLarge(
            f"{total} joint placements exceed the brute-force limit of {MAX_PLACEMENTS}"
        )
    # one bit per user
    masks = []
    for cell in cells:
        bits = 0
        for u, c in enumerate(env.covered([cell])):
            if c:
                bits |= 1 << u
        masks.append(bits)

    best, best_combo = -1, None
    for combo in itertools.product(range(len(cells)), repeat=cfg.agents):
        bits = 0
        for c in combo:
            bits |= masks[c]
        value = bits.bit_count()
        if value > best:
            best, best_combo = value, combo
            if best == env.n_users:
                break
    placement = tuple(cells[c] for c in best_combo)
    _logger.debug("Brute-force optimum %d at %s over %d placements", best, placement, total)
    return float(best), placement
