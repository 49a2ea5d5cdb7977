"""Desk-scale comparison of evolved, greedy and random levels.

A seed family is one master seed fanned out to every component. Each family
traces its own target level, evolves against it, builds baseline levels and
measures them all the same way.
"""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from .agent import AgentConfig, plan_and_play
from .baselines import greedy_level, random_level
from .corpus import Corpus
from .evolve import EvolutionResult, EvolveConfig, GenerationStats, evolve
from .fitness import FitnessWeights, mechanic_sequence
from .level import Chromosome, MechanicKind, TileGrid, assemble_level
from .metrics import mechanic_match_stats, playability, vs_target_diversity, within_group_diversity
from .sim.engine import SimConfig

log = logging.getLogger(__name__)

# master seed fan-out: family f, component c -> master + FAMILY_STRIDE * f + c
FAMILY_STRIDE = 1000
SEED_TARGET = 0
SEED_EVOLVE = 100
SEED_GREEDY = 200
SEED_RANDOM = 300
SEED_PLAY = 400
SEED_DENSE = 500


def component_seed(master: int, family: int, component: int) -> int:
    return master + FAMILY_STRIDE * family + component


@dataclass(frozen=True)
class Target:
    chromosome: Chromosome
    grid: TileGrid
    sequence: tuple[MechanicKind, ...]


def find_target(
    corpus: Corpus,
    rng: random.Random,
    scenes: tuple[int, int] = (12, 15),
    mechanics: tuple[int, int] = (40, 70),
    sim_config: SimConfig | None = None,
    agent_config: AgentConfig | None = None,
    max_tries: int = 2000,
) -> Target:
    """Trace random stitched levels until one is beaten with a mechanic count in range."""
    for _ in range(max_tries):
        ids = corpus.ids
        ch = Chromosome(tuple(ids[rng.randrange(len(ids))] for _ in range(rng.randint(*scenes))))
        grid = assemble_level(ch, corpus)
        trace = plan_and_play(grid, sim_config, agent_config)
        if trace.won and mechanics[0] <= len(trace.events) <= mechanics[1]:
            return Target(ch, grid, tuple(mechanic_sequence(trace)))
    raise RuntimeError(f"no target with {mechanics} mechanics after {max_tries} tries")


@dataclass(frozen=True)
class DeskConfig:
    families: int = 5
    levels_per_method: int = 5
    population_size: int = 10
    generations: int = 50
    eval_runs: int = 3
    playability_runs: int = 20
    target_scenes: tuple[int, int] = (12, 15)
    target_mechanics: tuple[int, int] = (40, 50)
    density_ratio: float = 1.6
    density_tolerance: float = 0.08
    master_seed: int = 0
    sim: SimConfig = field(default_factory=SimConfig)
    # a shorter planning slice halves play time at nearly the same win rate
    agent: AgentConfig = field(default_factory=lambda: AgentConfig(replan_horizon=20))

    def evolve_config(self, seed: int) -> EvolveConfig:
        return EvolveConfig(
            population_size=self.population_size,
            generations=self.generations,
            weights=FitnessWeights(N=self.eval_runs),
            seed=seed,
            sim=self.sim,
            agent=self.agent,
        )


@dataclass
class MethodResult:
    levels: list[Chromosome]
    playability: list[float]
    normalized_matched: list[float]
    within: float = float("nan")
    vs_target: float = float("nan")

    @property
    def mean_playability(self) -> float:
        return sum(self.playability) / len(self.playability)

    @property
    def mean_matched(self) -> float:
        return sum(self.normalized_matched) / len(self.normalized_matched)


@dataclass
class FamilyResult:
    family: int
    target: Target
    dense_target: Target
    evolved: MethodResult
    greedy: MethodResult
    random: MethodResult
    runs: list[list[GenerationStats]]
    dense_run: list[GenerationStats]
    final_matched: float  # mean over runs of final-generation mean matched / |target|
    seconds: float = 0.0


def _final_matched(stats: Sequence[GenerationStats], n_target: int) -> float:
    return stats[-1].mean_matched / n_target


def measure(levels: Sequence[Chromosome], corpus: Corpus, target: Target, cfg: DeskConfig, seed: int,
            match: Sequence[float] | None = None) -> MethodResult:
    grids = [assemble_level(ch, corpus) for ch in levels]
    plays = [playability(g, cfg.playability_runs, cfg.sim, cfg.agent, seed=seed) for g in grids]
    if match is None:
        # one seeded play per level; counts whatever it triggered, won or not
        match = [
            mechanic_match_stats(plan_and_play(g, cfg.sim, replace(cfg.agent, noise_seed=seed)),
                                 target.sequence).normalized_matched
            for g in grids
        ]
    res = MethodResult(list(levels), plays, list(match))
    res.within = within_group_diversity(grids).mean if len(grids) > 1 else 0.0
    res.vs_target = vs_target_diversity(grids, target.grid).mean
    return res


def run_family(corpus: Corpus, cfg: DeskConfig, family: int,
               progress: Callable[[str], None] | None = None) -> FamilyResult:
    t0 = time.time()
    say = progress or (lambda msg: log.info(msg))
    seed = lambda c: component_seed(cfg.master_seed, family, c)

    trng = random.Random(seed(SEED_TARGET))
    target = find_target(corpus, trng, cfg.target_scenes, cfg.target_mechanics, cfg.sim, cfg.agent)
    lo = round(len(target.sequence) * cfg.density_ratio * (1 - cfg.density_tolerance))
    hi = round(len(target.sequence) * cfg.density_ratio * (1 + cfg.density_tolerance))
    dense = find_target(corpus, random.Random(seed(SEED_DENSE)), (cfg.target_scenes[0], 25), (lo, hi),
                        cfg.sim, cfg.agent)
    say(f"family {family}: target {len(target.sequence)} mechanics, dense {len(dense.sequence)}")

    runs: list[EvolutionResult] = []
    for r in range(cfg.levels_per_method):
        ec = cfg.evolve_config(seed(SEED_EVOLVE) + r)
        runs.append(evolve(target.sequence, corpus, ec))
        say(f"family {family}: run {r} best {runs[-1].best.fitness} ({time.time() - t0:.0f}s)")
    dense_run = evolve(dense.sequence, corpus, cfg.evolve_config(seed(SEED_EVOLVE)))
    say(f"family {family}: dense run scenes {dense_run.stats[-1].mean_scenes:.1f} "
        f"vs {runs[0].stats[-1].mean_scenes:.1f}")

    n = len(target.sequence)
    evolved_levels = [res.best.chromosome for res in runs]
    evolved_match = [res.best.matched / n if res.best.matched is not None else 0.0 for res in runs]
    grng = random.Random(seed(SEED_GREEDY))
    rrng = random.Random(seed(SEED_RANDOM))
    greedy_levels = [greedy_level(target.sequence, corpus, grng) for _ in range(cfg.levels_per_method)]
    random_levels = [random_level(corpus, rrng) for _ in range(cfg.levels_per_method)]
    play_seed = seed(SEED_PLAY)
    result = FamilyResult(
        family=family,
        target=target,
        dense_target=dense,
        evolved=measure(evolved_levels, corpus, target, cfg, play_seed, evolved_match),
        greedy=measure(greedy_levels, corpus, target, cfg, play_seed),
        random=measure(random_levels, corpus, target, cfg, play_seed),
        runs=[res.stats for res in runs],
        dense_run=dense_run.stats,
        final_matched=sum(_final_matched(res.stats, n) for res in runs) / len(runs),
    )
    result.seconds = time.time() - t0
    say(f"family {family}: done in {result.seconds:.0f}s")
    return result


def run_desk(corpus: Corpus, cfg: DeskConfig, progress: Callable[[str], None] | None = None) -> list[FamilyResult]:
    return [run_family(corpus, cfg, f, progress) for f in range(cfg.families)]
