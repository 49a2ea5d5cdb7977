"""Random and greedy scene stitchers used as comparison points."""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from .agent import AgentConfig, plan_and_play
from .corpus import Corpus
from .level import Chromosome, MechanicKind, assemble_level
from .sim.engine import SimConfig

MIN_SCENES = 5
MAX_SCENES = 25


def random_level(corpus: Corpus, rng: random.Random, min_scenes: int = MIN_SCENES,
                 max_scenes: int = MAX_SCENES) -> Chromosome:
    length = rng.randint(min_scenes, max_scenes)
    ids = corpus.ids
    return Chromosome(tuple(ids[rng.randrange(len(ids))] for _ in range(length)))


def consumed_prefix(labels: frozenset, target: Sequence[MechanicKind], cursor: int) -> int:
    """How many target mechanics from ``cursor`` on a scene with ``labels`` consumes.

    Each label is spent at most once; consumption stops at the first mechanic
    the scene cannot (or can no longer) supply.
    """
    left = set(labels)
    n = 0
    while cursor + n < len(target) and target[cursor + n] in left:
        left.discard(target[cursor + n])
        n += 1
    return n


def greedy_level(target: Sequence[MechanicKind], corpus: Corpus, rng: random.Random,
                 min_scenes: int = MIN_SCENES, max_scenes: int = MAX_SCENES) -> Chromosome:
    length = rng.randint(min_scenes, max_scenes)
    target = list(target)
    cursor = 0
    ids = []
    for _ in range(length):
        best, pool = -1, []
        for sid in corpus.ids:
            n = consumed_prefix(corpus.labels(sid), target, cursor)
            if n > best:
                best, pool = n, [sid]
            elif n == best:
                pool.append(sid)
        ids.append(pool[rng.randrange(len(pool))])
        cursor += best
    return Chromosome(tuple(ids))


class GenerationBudgetError(RuntimeError):
    """Raised when ``max_attempts`` runs out; carries what was found so far."""

    def __init__(self, keepers: list[Chromosome], attempts: int):
        super().__init__(f"only {len(keepers)} playable levels after {attempts} attempts")
        self.keepers = keepers
        self.attempts = attempts


@dataclass
class PlayableBatch:
    levels: list[Chromosome]
    attempts: int


def agent_beats(corpus: Corpus, sim_config: SimConfig | None = None,
                agent_config: AgentConfig | None = None, seed: int = 0) -> Callable[[Chromosome, int], bool]:
    """Predicate: one seeded agent run wins the assembled level."""
    agent_config = agent_config or AgentConfig()

    def check(chromosome: Chromosome, attempt: int) -> bool:
        cfg = replace(agent_config, noise_seed=seed + attempt)
        return plan_and_play(assemble_level(chromosome, corpus), sim_config, cfg).won

    return check


def generate_until_playable(
    generator: Callable[[], Chromosome],
    is_playable: Callable[[Chromosome, int], bool],
    count: int,
    max_attempts: int,
) -> PlayableBatch:
    """Keep generating until ``count`` levels pass ``is_playable``.

    ``is_playable`` receives the candidate and the 0-based attempt number.

    Raises:
        GenerationBudgetError: after ``max_attempts`` candidates without enough keepers.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    keepers: list[Chromosome] = []
    attempts = 0
    while len(keepers) < count:
        if attempts >= max_attempts:
            raise GenerationBudgetError(keepers, attempts)
        level = generator()
        if is_playable(level, attempts):
            keepers.append(level)
        attempts += 1
    return PlayableBatch(keepers, attempts)
