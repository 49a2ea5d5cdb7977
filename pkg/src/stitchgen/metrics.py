"""Evaluation battery: playability, mechanic matching and tile-pattern KL divergence."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .agent import AgentConfig, evaluate_n_runs
from .fitness import count_faults, mechanic_sequence
from .level import TileGrid
from .sim.engine import Playtrace, SimConfig

DEFAULT_WINDOW = (3, 3)
DEFAULT_EPSILON = 1e-5


def playability(grid: TileGrid, runs: int = 20, sim_config: SimConfig | None = None,
                agent_config: AgentConfig | None = None, seed: int = 0) -> float:
    traces = evaluate_n_runs(grid, runs, sim_config, agent_config, seed_base=seed)
    return sum(t.won for t in traces) / runs


@dataclass(frozen=True)
class PatternDistribution:
    window: tuple[int, int]
    counts: dict  # pattern bytes -> count
    total: int


def pattern_distribution(grid: TileGrid, window: tuple[int, int] = DEFAULT_WINDOW) -> PatternDistribution:
    """Count every ``w x h`` window (stride 1, no wrap)."""
    w, h = window
    arr = np.ascontiguousarray(grid.array, dtype=np.int8)
    if arr.shape[0] < h or arr.shape[1] < w:
        raise ValueError(f"grid {arr.shape[1]}x{arr.shape[0]} smaller than window {w}x{h}")
    views = np.lib.stride_tricks.sliding_window_view(arr, (h, w))
    flat = views.reshape(-1, h * w)
    counts = Counter(row.tobytes() for row in flat)
    return PatternDistribution((w, h), dict(counts), int(flat.shape[0]))


def tpkl_divergence(p: PatternDistribution, q: PatternDistribution, epsilon: float = DEFAULT_EPSILON) -> float:
    """Smoothed KL(P || Q) over the union of patterns seen in either."""
    if p.window != q.window:
        raise ValueError(f"window mismatch {p.window} vs {q.window}")
    if p.total <= 0 or q.total <= 0:
        raise ValueError("distributions must be non-empty")
    alphabet = set(p.counts) | set(q.counts)
    zp = p.total + epsilon * len(alphabet)
    zq = q.total + epsilon * len(alphabet)
    kl = 0.0
    for x in alphabet:
        px = (p.counts.get(x, 0) + epsilon) / zp
        qx = (q.counts.get(x, 0) + epsilon) / zq
        kl += px * math.log(px / qx)
    return max(kl, 0.0)


@dataclass(frozen=True)
class DiversityReport:
    values: tuple[float, ...]
    mean: float
    std: float  # population std

    @classmethod
    def of(cls, values: Sequence[float]) -> "DiversityReport":
        values = tuple(float(v) for v in values)
        mean = sum(values) / len(values)
        std = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
        return cls(values, mean, std)


def within_group_diversity(levels: Sequence[TileGrid], window: tuple[int, int] = DEFAULT_WINDOW,
                           epsilon: float = DEFAULT_EPSILON) -> DiversityReport:
    """Each level's smallest divergence to any other level, then mean and std."""
    if len(levels) < 2:
        raise ValueError("need at least 2 levels")
    dists = [pattern_distribution(g, window) for g in levels]
    minima = []
    for i, p in enumerate(dists):
        minima.append(min(tpkl_divergence(p, q, epsilon) for j, q in enumerate(dists) if j != i))
    return DiversityReport.of(minima)


def vs_target_diversity(levels: Sequence[TileGrid], target: TileGrid, window: tuple[int, int] = DEFAULT_WINDOW,
                        epsilon: float = DEFAULT_EPSILON, reverse: bool = False) -> DiversityReport:
    """Divergence of each level (as P) from the target (as Q); ``reverse`` flips the roles."""
    if not levels:
        raise ValueError("need at least 1 level")
    q = pattern_distribution(target, window)
    vals = []
    for g in levels:
        p = pattern_distribution(g, window)
        vals.append(tpkl_divergence(q, p, epsilon) if reverse else tpkl_divergence(p, q, epsilon))
    return DiversityReport.of(vals)


def write_diversity_csv(path: str | Path, report: DiversityReport, level_ids: Sequence[str]) -> None:
    if len(level_ids) != len(report.values):
        raise ValueError("one id per value required")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level_id", "min_div"])
        for lid, v in zip(level_ids, report.values):
            w.writerow([lid, f"{v:.6f}"])
        w.writerow(["mean", f"{report.mean:.6f}"])
        w.writerow(["std", f"{report.std:.6f}"])


@dataclass(frozen=True)
class MatchStats:
    matched: int
    extras: int
    normalized_matched: float | None
    normalized_extras: float | None


def mechanic_match_stats(trace: Playtrace | Sequence, target: Sequence) -> MatchStats:
    generated = mechanic_sequence(trace) if isinstance(trace, Playtrace) else list(trace)
    report = count_faults(generated, target)
    matched = len(target) - report.missed
    if not target:
        return MatchStats(matched, report.extras, None, None)
    return MatchStats(matched, report.extras, matched / len(target), report.extras / len(target))
