"""Replanning best-first playing agent.

Each planning slice runs A* over forward-simulated states from the current
state. Edges are macro-actions held for ``action_repeat`` ticks, ``g`` counts
ticks and ``h = (flag_x - x) / top_speed`` never overestimates the remaining
ticks. The first action of the best plan is committed and the agent replans.

Open-list keys are ``(floor(f / tie_quantum), jumps in plan)``; equal keys are
broken by a seeded random draw, which is the only source of run-to-run
variation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .level import TileGrid
from .sim import kernel as K
from .sim.engine import Playtrace, SimConfig, SimState, events_from_array

ACTIONS = np.array(
    [
        K.LEFT,
        K.RIGHT,
        K.RIGHT | K.JUMP,
        K.RIGHT | K.RUN,
        K.RIGHT | K.RUN | K.JUMP,
        K.JUMP,
        0,
    ],
    dtype=np.int64,
)
DEFAULT_ACTION = K.RIGHT | K.RUN


@dataclass(frozen=True)
class AgentConfig:
    replan_horizon: int = 24
    node_budget: int = 4000
    noise_seed: int = 0
    action_repeat: int = 4
    tie_quantum: float = 1.0
    patience: int = 48

    def __post_init__(self):
        if min(self.replan_horizon, self.node_budget, self.action_repeat, self.patience) <= 0:
            raise ValueError("agent budgets must be positive")
        if self.tie_quantum < 0:
            raise ValueError("tie_quantum must be non-negative")


def plan_and_play(
    grid: TileGrid,
    sim_config: SimConfig | None = None,
    agent_config: AgentConfig | None = None,
) -> Playtrace:
    """Play ``grid`` once with the planning agent.

    Raises:
        MalformedLevelError: if the level has no start or flag.
    """
    sim_config = sim_config or SimConfig()
    agent_config = agent_config or AgentConfig()
    state = SimState.from_level(grid, sim_config)
    ev, av, log = K.play(
        state.grid,
        state.avatar_vec,
        state.entities,
        state.cfg,
        ACTIONS,
        agent_config.replan_horizon,
        agent_config.node_budget,
        agent_config.action_repeat,
        float(agent_config.tie_quantum),
        agent_config.patience,
        agent_config.noise_seed % (2**32),
        DEFAULT_ACTION,
    )
    return Playtrace(
        events=events_from_array(ev),
        won=int(av[K.A_STATUS]) == K.WON,
        distance=float(av[K.A_FURTHEST]),
        ticks_used=int(av[K.A_TICK]),
        actions=tuple(int(a) for a in log),
    )


def evaluate_n_runs(
    grid: TileGrid,
    n: int,
    sim_config: SimConfig | None = None,
    agent_config: AgentConfig | None = None,
    seed_base: int = 0,
) -> list[Playtrace]:
    """``n`` independent plays with noise seeds ``seed_base + i``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    agent_config = agent_config or AgentConfig()
    return [
        plan_and_play(grid, sim_config, replace(agent_config, noise_seed=seed_base + i))
        for i in range(n)
    ]
