"""FI-2Pop genetic algorithm over scene chromosomes.

Two populations live side by side: infeasible chromosomes are ranked by how
close the agent gets to beating them, feasible ones by mechanic-matching
fitness. Offspring land wherever their own evaluation puts them.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .agent import AgentConfig, evaluate_n_runs
from .corpus import (
    Corpus,
    linear_rank_weights,
    rank_sample_inverse_mechanics,
    sample_scene_by_count,
    weighted_index,
)
from .fitness import (
    FaultReport,
    FitnessWeights,
    constraint_value,
    count_faults,
    fitness_score,
    mechanic_sequence,
    select_scoring_trace,
)
from .level import Chromosome, MechanicKind, Scene, assemble_level
from .sim.engine import Playtrace, SimConfig, level_reach

log = logging.getLogger(__name__)

MAX_SCENE_MECHANICS = 12
STATS_HEADER = (
    "generation",
    "best_fitness",
    "mean_fitness",
    "mean_constraint",
    "mean_scenes",
    "mean_matched",
    "mean_extras",
)


@dataclass(frozen=True)
class EvolveConfig:
    population_size: int = 250
    crossover_rate: float = 0.70
    mutation_rate: float = 0.20
    elite_count: int = 1
    min_scenes: int = 5
    max_scenes: int = 25
    generations: int = 50
    init_mechanic_std: float = 1.0
    weights: FitnessWeights = field(default_factory=FitnessWeights)
    seed: int = 0
    agent_seed: int = 0  # noise seeds for the N evaluation runs start here
    init_mu: float | None = None  # per-scene mechanic mean; None means |target| / L
    sim: SimConfig = field(default_factory=SimConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    workers: int = 1
    # reject offspring outside [min_scenes, max_scenes]; False lets operators drift freely
    bound_lengths: bool = True

    def __post_init__(self):
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.crossover_rate + self.mutation_rate > 1.0 + 1e-12:
            raise ValueError("crossover_rate + mutation_rate must be <= 1")
        if not 1 <= self.min_scenes <= self.max_scenes:
            raise ValueError("need 1 <= min_scenes <= max_scenes")
        if self.population_size < 1 or self.generations < 0:
            raise ValueError("population_size must be >= 1 and generations >= 0")
        if not 0 <= self.elite_count <= self.population_size:
            raise ValueError("elite_count must be in [0, population_size]")
        if self.init_mechanic_std < 0:
            raise ValueError("init_mechanic_std must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class EvaluatedChromosome:
    chromosome: Chromosome
    constraint: float
    fitness: float | None = None
    trace: Playtrace | None = None  # scoring trace (fewest events among wins)
    faults: FaultReport | None = None
    win_rate: float = 0.0
    matched: int | None = None  # |target| - missed, when a winning trace exists

    @property
    def feasible(self) -> bool:
        return self.constraint == 1.0


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_constraint: float
    mean_constraint: float
    mean_scenes: float
    mean_matched: float
    mean_extras: float
    feasible_count: int = 0

    def row(self) -> list:
        return [self.generation, self.best_fitness, self.mean_fitness, self.mean_constraint,
                self.mean_scenes, self.mean_matched, self.mean_extras]


# -- initialization ---------------------------------------------------------


def initialize_population(
    target: Sequence[MechanicKind], corpus: Corpus, config: EvolveConfig, rng: random.Random
) -> list[Chromosome]:
    population = []
    for _ in range(config.population_size):
        length = rng.randint(config.min_scenes, config.max_scenes)
        mu = config.init_mu if config.init_mu is not None else len(target) / length
        ids = []
        for _ in range(length):
            count = round(rng.gauss(mu, config.init_mechanic_std)) if config.init_mechanic_std else round(mu)
            count = min(max(count, 0), MAX_SCENE_MECHANICS)
            ids.append(sample_scene_by_count(corpus, count, rng).id)
        population.append(Chromosome(tuple(ids)))
    return population


# -- operators --------------------------------------------------------------


def _cuts(n: int, rng: random.Random) -> tuple[int, int]:
    i, j = rng.randint(0, n), rng.randint(0, n)
    return (i, j) if i <= j else (j, i)


def crossover_at(
    a: Sequence[str], b: Sequence[str], cut_a: tuple[int, int], cut_b: tuple[int, int]
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Swap ``a[cut_a]`` with ``b[cut_b]``; no repair."""
    (i, j), (k, m) = cut_a, cut_b
    a, b = tuple(a), tuple(b)
    return a[:i] + b[k:m] + a[j:], b[:k] + a[i:j] + b[m:]


def crossover(
    parent_a: Chromosome, parent_b: Chromosome, rng: random.Random, corpus: Corpus | None = None
) -> tuple[Chromosome, Chromosome]:
    """Variable-length two-point crossover.

    An empty child gets one inverse-rank-sampled scene from ``corpus``; without
    a corpus the first scene of the other parent is used.
    """
    if not len(parent_a) or not len(parent_b):
        raise ValueError("parents must be non-empty")
    ca, cb = crossover_at(parent_a.scenes, parent_b.scenes, _cuts(len(parent_a), rng), _cuts(len(parent_b), rng))
    kids = []
    for child, other in ((ca, parent_b), (cb, parent_a)):
        if not child:
            child = (rank_sample_inverse_mechanics(corpus, rng).id,) if corpus is not None else (other[0],)
        kids.append(Chromosome(child))
    return kids[0], kids[1]


def label_score(labels: frozenset, wanted: frozenset) -> float:
    return len(labels & wanted) - 0.25 * len(labels - wanted)


def nearest_label_scene(corpus: Corpus, wanted: Iterable[MechanicKind], rng: random.Random) -> Scene:
    """Uniform choice among scenes maximizing coverage minus a quarter per surplus label."""
    wanted = frozenset(wanted)
    best, pool = -math.inf, []
    for sid in corpus.ids:
        s = label_score(corpus.labels(sid), wanted)
        if s > best:
            best, pool = s, [sid]
        elif s == best:
            pool.append(sid)
    return corpus.scenes[pool[rng.randrange(len(pool))]]


MUTATIONS = ("delete", "add", "split", "merge", "change")


def mutation_site(chromosome: Chromosome, corpus: Corpus, rng: random.Random) -> int:
    """Scene index by linear rank, scenes with more labels weigh more."""
    weights = linear_rank_weights([corpus.mechanic_count(s) for s in chromosome])
    return weighted_index(list(itertools.accumulate(weights)), rng)


def apply_mutation(
    chromosome: Chromosome, op: str, index: int, corpus: Corpus, rng: random.Random
) -> Chromosome:
    ids = list(chromosome.scenes)
    if op == "delete" and len(ids) == 1:
        op = "change"
    if op == "delete":
        del ids[index]
    elif op == "add":
        at = index + (1 if rng.random() < 0.5 else 0)
        ids.insert(at, rank_sample_inverse_mechanics(corpus, rng).id)
    elif op == "split":
        labels = sorted(corpus.labels(ids[index]))
        rng.shuffle(labels)
        half = len(labels) // 2
        left = nearest_label_scene(corpus, labels[:half], rng).id
        right = nearest_label_scene(corpus, labels[half:], rng).id
        ids[index : index + 1] = [left, right]
    elif op == "merge":
        if len(ids) == 1:
            ids[0] = nearest_label_scene(corpus, corpus.labels(ids[0]), rng).id
        else:
            go_right = rng.random() < 0.5
            if go_right and index == len(ids) - 1:
                go_right = False
            elif not go_right and index == 0:
                go_right = True
            lo = index if go_right else index - 1
            union = corpus.labels(ids[lo]) | corpus.labels(ids[lo + 1])
            ids[lo : lo + 2] = [nearest_label_scene(corpus, union, rng).id]
    elif op == "change":
        ids[index] = rank_sample_inverse_mechanics(corpus, rng).id
    else:
        raise ValueError(f"unknown mutation {op!r}")
    return Chromosome(tuple(ids))


def mutate(chromosome: Chromosome, corpus: Corpus, rng: random.Random) -> Chromosome:
    if not len(chromosome):
        raise ValueError("cannot mutate an empty chromosome")
    index = mutation_site(chromosome, corpus, rng)
    op = MUTATIONS[rng.randrange(len(MUTATIONS))]
    return apply_mutation(chromosome, op, index, corpus, rng)


# -- evaluation -------------------------------------------------------------


def evaluate_chromosome(
    chromosome: Chromosome, target: Sequence[MechanicKind], corpus: Corpus, config: EvolveConfig
) -> EvaluatedChromosome:
    grid = assemble_level(chromosome, corpus)
    traces = evaluate_n_runs(grid, config.weights.N, config.sim, config.agent, seed_base=config.agent_seed)
    constraint = constraint_value(traces, level_reach(grid), config.weights)
    win_rate = sum(t.won for t in traces) / len(traces)
    best = select_scoring_trace(traces)
    faults = count_faults(mechanic_sequence(best), target) if best is not None else None
    fitness = fitness_score(faults, config.weights) if constraint == 1.0 else None
    matched = len(target) - faults.missed if faults is not None else None
    return EvaluatedChromosome(chromosome, constraint, fitness, best, faults, win_rate, matched)


class Evaluator:
    """Caches evaluations by chromosome; results depend only on the chromosome."""

    def __init__(self, target, corpus: Corpus, config: EvolveConfig):
        self.target = list(target)
        self.corpus = corpus
        self.config = config
        self.cache: dict[tuple[str, ...], EvaluatedChromosome] = {}
        self.calls = 0

    def __call__(self, population: Sequence[Chromosome]) -> list[EvaluatedChromosome]:
        todo = list(dict.fromkeys(c.scenes for c in population if c.scenes not in self.cache))
        fn = lambda ids: evaluate_chromosome(Chromosome(ids), self.target, self.corpus, self.config)
        if self.config.workers > 1 and len(todo) > 1:
            with ThreadPoolExecutor(self.config.workers) as pool:
                done = list(pool.map(fn, todo))
        else:
            done = [fn(ids) for ids in todo]
        self.calls += len(todo)
        self.cache.update(zip(todo, done))
        return [self.cache[c.scenes] for c in population]


# -- selection and the main loop -------------------------------------------


def _fitness_key(e: EvaluatedChromosome) -> float:
    return e.fitness if e.feasible else e.constraint


def rank_pick(pool: Sequence[EvaluatedChromosome], rng: random.Random) -> EvaluatedChromosome:
    weights = linear_rank_weights([_fitness_key(e) for e in pool])
    return pool[weighted_index(list(itertools.accumulate(weights)), rng)]


def pick_elites(evaluated: Sequence[EvaluatedChromosome], count: int) -> list[EvaluatedChromosome]:
    feasible = [e for e in evaluated if e.feasible]
    if feasible:
        # stable sort keeps population order among equal fitness
        return sorted(feasible, key=lambda e: -e.fitness)[:count]
    return sorted(evaluated, key=lambda e: -e.constraint)[:count]


def split_slots(total: int, n_feasible: int, n_infeasible: int) -> tuple[int, int]:
    """Offspring slots per population, proportional to size, at least 1 for each non-empty one."""
    n = n_feasible + n_infeasible
    if total <= 0 or n == 0:
        return 0, 0
    f = round(total * n_feasible / n)
    if n_feasible and f == 0:
        f = 1
    if n_infeasible and f == total and total > 1:
        f = total - 1
    if not n_infeasible:
        f = total
    if not n_feasible:
        f = 0
    return f, total - f


def breed(
    pool: Sequence[EvaluatedChromosome], slots: int, config: EvolveConfig, corpus: Corpus, rng: random.Random
) -> list[Chromosome]:
    """Fill ``slots`` children by the crossover / mutation / copy lottery.

    With ``bound_lengths`` an out-of-range child is dropped and the lottery
    redrawn; after many rejections the remaining slots fall back to copies.
    """
    lo, hi = config.min_scenes, config.max_scenes
    ok = (lambda ch: lo <= len(ch) <= hi) if config.bound_lengths else (lambda ch: True)
    out: list[Chromosome] = []
    rejected = 0
    while len(out) < slots:
        if rejected > 50 * slots:
            out.append(rank_pick(pool, rng).chromosome)
            continue
        r = rng.random()
        if r < config.crossover_rate:
            a, b = rank_pick(pool, rng), rank_pick(pool, rng)
            kids = crossover(a.chromosome, b.chromosome, rng, corpus)
        elif r < config.crossover_rate + config.mutation_rate:
            kids = (mutate(rank_pick(pool, rng).chromosome, corpus, rng),)
        else:
            kids = (rank_pick(pool, rng).chromosome,)
        for ch in kids:
            if ok(ch):
                out.append(ch)
            else:
                rejected += 1
    return out[:slots]


def _mean(xs: list[float]) -> float:
    return sum(xs) / len(xs) if xs else math.nan


def generation_stats(gen: int, evaluated: Sequence[EvaluatedChromosome]) -> GenerationStats:
    feasible = [e for e in evaluated if e.feasible]
    fit = [e.fitness for e in feasible]
    return GenerationStats(
        generation=gen,
        best_fitness=max(fit) if fit else math.nan,
        mean_fitness=_mean(fit),
        best_constraint=max(e.constraint for e in evaluated),
        mean_constraint=_mean([e.constraint for e in evaluated]),
        mean_scenes=_mean([len(e.chromosome) for e in evaluated]),
        mean_matched=_mean([e.matched for e in feasible]),
        mean_extras=_mean([e.faults.extras for e in feasible]),
        feasible_count=len(feasible),
    )


@dataclass
class EvolutionResult:
    best: EvaluatedChromosome
    stats: list[GenerationStats]
    final_population: list[EvaluatedChromosome]
    evaluations: int = 0


def evolve(
    target: Sequence[MechanicKind],
    corpus: Corpus,
    config: EvolveConfig,
    rng: random.Random | None = None,
    on_generation: Callable[[GenerationStats], None] | None = None,
) -> EvolutionResult:
    """Full run; ``run_evolution`` is the (best, stats) view of this."""
    rng = rng if rng is not None else random.Random(config.seed)
    evaluate = Evaluator(target, corpus, config)
    evaluated = evaluate(initialize_population(target, corpus, config, rng))
    stats = []
    for gen in range(config.generations + 1):
        s = generation_stats(gen, evaluated)
        stats.append(s)
        log.debug("gen %d best %.4f feasible %d", gen, s.best_fitness, s.feasible_count)
        if on_generation:
            on_generation(s)
        if gen == config.generations:
            break
        elites = pick_elites(evaluated, config.elite_count)
        feasible = [e for e in evaluated if e.feasible]
        infeasible = [e for e in evaluated if not e.feasible]
        f_slots, i_slots = split_slots(config.population_size - len(elites), len(feasible), len(infeasible))
        children = [e.chromosome for e in elites]
        if f_slots:
            children += breed(feasible, f_slots, config, corpus, rng)
        if i_slots:
            children += breed(infeasible, i_slots, config, corpus, rng)
        evaluated = evaluate(children)
    return EvolutionResult(pick_elites(evaluated, 1)[0], stats, list(evaluated), evaluate.calls)


def run_evolution(
    target: Sequence[MechanicKind], corpus: Corpus, config: EvolveConfig, rng: random.Random | None = None
) -> tuple[EvaluatedChromosome, list[GenerationStats]]:
    res = evolve(target, corpus, config, rng)
    return res.best, res.stats


def write_stats_csv(path: str | Path, stats: Iterable[GenerationStats]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STATS_HEADER)
        for s in stats:
            w.writerow([_fmt(v) for v in s.row()])


def read_stats_csv(path: str | Path) -> list[GenerationStats]:
    """Inverse of ``write_stats_csv``; columns not in the file come back as NaN."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            vals = {k: float(row[k]) for k in STATS_HEADER[1:]}
            out.append(GenerationStats(generation=int(row["generation"]), best_constraint=math.nan, **vals))
    return out


def _fmt(v) -> str:
    if isinstance(v, int):
        return str(v)
    return "nan" if math.isnan(v) else repr(round(float(v), 10))
