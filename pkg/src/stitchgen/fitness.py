"""Fault counting, the playability constraint and the mechanic-matching fitness."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .level import MechanicKind
from .sim.engine import Playtrace

MechanicSequence = list  # list[MechanicKind]; ticks and positions stripped


def mechanic_sequence(trace: Playtrace) -> list[MechanicKind]:
    """Event kinds in tick order (same-tick events are already ordered by code)."""
    return [e.kind for e in trace.events]


@dataclass(frozen=True)
class FaultReport:
    missed: int
    extras: int


@dataclass(frozen=True)
class FitnessWeights:
    S: float = 1.0
    W_missed: float = 0.1
    a: float = 0.5
    b: float = 0.1
    c: float = 0.0
    N: int = 5
    p: float = 0.6

    def __post_init__(self):
        if self.S <= 0:
            raise ValueError("S must be positive")
        if self.a < 0 or self.b < 0:
            raise ValueError("a and b must be non-negative")
        if not 0 < self.p <= 1:
            raise ValueError("p must be in (0, 1]")
        if self.N < 1:
            raise ValueError("N must be >= 1")


def count_faults(generated: Sequence, target: Sequence) -> FaultReport:
    """Greedy left-to-right alignment of ``target`` against ``generated``.

    Each target mechanic is looked up from the cursor onward. A hit at offset
    ``k`` costs ``k`` extras and moves the cursor past it; no hit costs one
    miss and leaves the cursor where it is. Generated events after the last
    hit are not counted.
    """
    missed = extras = 0
    cursor = 0
    n = len(generated)
    for want in target:
        j = cursor
        while j < n and generated[j] != want:
            j += 1
        if j < n:
            extras += j - cursor
            cursor = j + 1
        else:
            missed += 1
    return FaultReport(missed, extras)


def constraint_value(traces: Sequence[Playtrace], level_width: float, weights: FitnessWeights = FitnessWeights()) -> float:
    """1 when the win rate reaches ``p``, else the mean fraction of the level covered."""
    if not traces:
        raise ValueError("need at least one trace")
    if level_width <= 0:
        raise ValueError("level_width must be positive")
    win_rate = sum(t.won for t in traces) / len(traces)
    if win_rate >= weights.p:
        return 1.0
    covered = [min(max(t.distance / level_width, 0.0), 1.0) for t in traces]
    return sum(covered) / len(covered)


def fitness_score(report: FaultReport, weights: FitnessWeights = FitnessWeights()) -> float:
    """``S - (P_missed + P_extra * (S - P_missed))``.

    Once misses alone exceed ``S`` the remaining score is clamped at zero
    before the extras penalty scales it; otherwise extra mechanics would start
    to raise the score. Below that point this is the plain formula.
    """
    p_missed = weights.W_missed * report.missed
    p_extra = weights.a * math.tanh(weights.b * report.extras) + weights.c
    return weights.S - (p_missed + p_extra * max(weights.S - p_missed, 0.0))


def select_scoring_trace(traces: Iterable[Playtrace]) -> Playtrace | None:
    """The winning trace with the fewest events; earliest run on ties."""
    best = None
    for t in traces:
        if t.won and (best is None or len(t.events) < len(best.events)):
            best = t
    return best
