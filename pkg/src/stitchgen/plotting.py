"""Matplotlib figures for evolution runs: fitness, mechanic and length curves."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evolve import GenerationStats  # noqa: E402

_META = {"Software": None}  # keep PNG bytes free of version strings


def _nan_to_none(xs):
    return [None if (x is None or (isinstance(x, float) and math.isnan(x))) else x for x in xs]


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
    return path


def plot_fitness(runs: Mapping[str, Sequence[GenerationStats]], path: str | Path) -> Path:
    """Best (solid) and mean (dashed) feasible fitness per generation."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for i, (label, stats) in enumerate(runs.items()):
        color = f"C{i % 10}"
        gens = [s.generation for s in stats]
        ax.plot(gens, _nan_to_none([s.best_fitness for s in stats]), color=color, label=f"{label} best")
        ax.plot(gens, _nan_to_none([s.mean_fitness for s in stats]), color=color, ls="--", label=f"{label} mean")
    ax.set_xlabel("generation")
    ax.set_ylabel("fitness")
    ax.legend(fontsize="small")
    return _save(fig, Path(path))


def plot_mechanics(runs: Mapping[str, Sequence[GenerationStats]], target_sizes: Mapping[str, int],
                   path: str | Path) -> Path:
    """Mean matched (solid) and extra (dashed) mechanics, normalized by target size."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for i, (label, stats) in enumerate(runs.items()):
        color = f"C{i % 10}"
        n = max(target_sizes.get(label, 1), 1)
        gens = [s.generation for s in stats]
        ax.plot(gens, _nan_to_none([s.mean_matched / n for s in stats]), color=color, label=f"{label} matches")
        ax.plot(gens, _nan_to_none([s.mean_extras / n for s in stats]), color=color, ls="--", label=f"{label} extras")
    ax.set_xlabel("generation")
    ax.set_ylabel("fraction of target")
    ax.legend(fontsize="small")
    return _save(fig, Path(path))


def plot_lengths(runs: Mapping[str, Sequence[GenerationStats]], path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for i, (label, stats) in enumerate(runs.items()):
        ax.plot([s.generation for s in stats], [s.mean_scenes for s in stats], color=f"C{i % 10}", label=label)
    ax.set_xlabel("generation")
    ax.set_ylabel("mean scenes per level")
    ax.legend(fontsize="small")
    return _save(fig, Path(path))


def write_run_figures(runs: Mapping[str, Sequence[GenerationStats]], target_sizes: Mapping[str, int],
                      directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return [
        plot_fitness(runs, directory / "fitness.png"),
        plot_mechanics(runs, target_sizes, directory / "mechanics.png"),
        plot_lengths(runs, directory / "lengths.png"),
    ]
