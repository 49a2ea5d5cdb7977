"""Deterministic tile-physics simulation with mechanic detection."""

from .engine import (
    Action,
    AvatarState,
    MalformedLevelError,
    MechanicEvent,
    Mode,
    Outcome,
    Playtrace,
    SimConfig,
    SimState,
    classify_jump,
    flag_column,
    hold_right,
    level_reach,
    run_episode,
    step,
)

__all__ = [
    "Action",
    "AvatarState",
    "MalformedLevelError",
    "MechanicEvent",
    "Mode",
    "Outcome",
    "Playtrace",
    "SimConfig",
    "SimState",
    "classify_jump",
    "flag_column",
    "hold_right",
    "level_reach",
    "run_episode",
    "step",
]
