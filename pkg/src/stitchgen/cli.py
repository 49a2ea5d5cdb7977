"""Command-line experiment runner.

Subcommands: trace, generate, evaluate, corpus-check, build-corpus, report, desk.
Every command is a function of its inputs and ``--seed``; wall-clock times go
to ``timing.json`` so the other outputs stay byte-identical across reruns.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import random
import sys
import time
from collections import Counter
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .agent import AgentConfig, evaluate_n_runs, plan_and_play
from .baselines import GenerationBudgetError, agent_beats, generate_until_playable, greedy_level, random_level
from .corpus import Corpus, CorpusError, load_corpus, save_corpus
from .evolve import EvolveConfig, evolve, read_stats_csv, write_stats_csv
from .experiment import (
    SEED_EVOLVE,
    SEED_GREEDY,
    SEED_PLAY,
    SEED_RANDOM,
    SEED_TARGET,
    DeskConfig,
    component_seed,
    run_desk,
)
from .fitness import FitnessWeights, mechanic_sequence, select_scoring_trace
from .level import (
    Chromosome,
    LevelFormatError,
    MechanicKind,
    assemble_level,
    read_level,
    read_mechanic_sequence,
    stitch_scenes,
    write_level,
    write_mechanic_sequence,
)
from .metrics import (
    mechanic_match_stats,
    playability,
    vs_target_diversity,
    within_group_diversity,
    write_diversity_csv,
)
from .plotting import write_run_figures
from .sim.engine import MalformedLevelError, SimConfig
from .synthetic import SyntheticConfig, build_synthetic_corpus

log = logging.getLogger("stitchgen")

EXIT_BUDGET = 3
EXIT_CHECK_FAILED = 1


# -- configuration ----------------------------------------------------------


@dataclass
class ExperimentConfig:
    corpus: str | None = None
    target_level: str | None = None
    target_seq: str | None = None
    generator: str = "evolve"
    out: str = "out"
    seed: int = 0
    levels_to_generate: int = 20
    max_attempts: int = 200
    evolve: EvolveConfig = field(default_factory=EvolveConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)

    def validate(self):
        if (self.target_level is None) == (self.target_seq is None):
            raise ValueError("give exactly one of --target-level / --target-seq")
        if self.generator not in ("evolve", "greedy", "random"):
            raise ValueError(f"unknown generator {self.generator!r}")
        if self.levels_to_generate < 1:
            raise ValueError("--count must be >= 1")


def _update(obj, values: dict, where: str):
    known = {f.name for f in fields(obj)}
    bad = set(values) - known
    if bad:
        raise ValueError(f"unknown {where} keys: {sorted(bad)}")
    return replace(obj, **values)


def apply_overrides(cfg: ExperimentConfig, data: dict) -> ExperimentConfig:
    """Merge a JSON config: top-level ExperimentConfig keys plus
    ``evolve``, ``weights``, ``sim`` and ``agent`` sections."""
    data = dict(data)
    sections = {k: data.pop(k, None) or {} for k in ("evolve", "weights", "sim", "agent")}
    cfg = _update(cfg, data, "experiment")
    evo = cfg.evolve
    if sections["weights"]:
        evo = replace(evo, weights=_update(evo.weights, sections["weights"], "weights"))
    if sections["evolve"]:
        evo = _update(evo, sections["evolve"], "evolve")
    sim = _update(cfg.sim, sections["sim"], "sim") if sections["sim"] else cfg.sim
    agent = _update(cfg.agent, sections["agent"], "agent") if sections["agent"] else cfg.agent
    return replace(cfg, evolve=replace(evo, sim=sim, agent=agent), sim=sim, agent=agent)


def _config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if getattr(args, "config", None):
        cfg = apply_overrides(cfg, json.loads(Path(args.config).read_text()))
    top = {}
    for name in ("corpus", "target_level", "target_seq", "generator", "out", "seed", "max_attempts"):
        v = getattr(args, name, None)
        if v is not None:
            top[name] = v
    if getattr(args, "count", None) is not None:
        top["levels_to_generate"] = args.count
    cfg = replace(cfg, **top)
    evo = {}
    for flag, key in (("population", "population_size"), ("generations", "generations"), ("workers", "workers")):
        v = getattr(args, flag, None)
        if v is not None:
            evo[key] = v
    weights = cfg.evolve.weights
    if getattr(args, "runs_per_eval", None) is not None:
        weights = replace(weights, N=args.runs_per_eval)
    return replace(cfg, evolve=replace(cfg.evolve, weights=weights, **evo))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _load_corpus(path: str | None) -> Corpus:
    if path is None:
        log.info("no --corpus given, using the built-in synthetic corpus")
        return build_synthetic_corpus()
    return load_corpus(path)


def _write_timing(out: Path, started: float, **extra):
    (out / "timing.json").write_text(json.dumps({"wall_clock_seconds": round(time.time() - started, 3), **extra},
                                                indent=2) + "\n")


def _summary(seq: list[MechanicKind]) -> dict:
    counts = Counter(m.label for m in seq)
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return {
        "total": len(seq),
        "unique": len(counts),
        "most_frequent": ordered[0] if ordered else None,
        "least_frequent": ordered[-1] if ordered else None,
        "counts": dict(ordered),
    }


def _target_sequence(cfg: ExperimentConfig) -> list[MechanicKind]:
    if cfg.target_seq:
        return read_mechanic_sequence(cfg.target_seq)
    agent = replace(cfg.agent, noise_seed=component_seed(cfg.seed, 0, SEED_TARGET))
    trace = plan_and_play(read_level(cfg.target_level), cfg.sim, agent)
    if not trace.won:
        log.warning("agent did not beat %s; using the best attempt's trace", cfg.target_level)
    return mechanic_sequence(trace)


# -- commands ---------------------------------------------------------------


def cmd_trace(args) -> int:
    cfg = _config_from_args(args)
    grid = read_level(args.level)
    agent = replace(cfg.agent, noise_seed=args.seed)
    trace = plan_and_play(grid, cfg.sim, agent)
    seq = mechanic_sequence(trace)
    out = Path(args.output) if args.output else Path(args.level).with_suffix(".seq")
    write_mechanic_sequence(out, seq)
    summary = {"level": str(args.level), "won": trace.won, "distance": round(trace.distance, 3), **_summary(seq)}
    if not trace.won:
        log.warning("agent did not beat %s; trace is the best attempt", args.level)
    out.with_suffix(".summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"{out}: {summary['total']} mechanics, {summary['unique']} unique, won={trace.won}")
    if summary["most_frequent"]:
        print("most frequent: {} ({})".format(*summary["most_frequent"]))
        print("least frequent: {} ({})".format(*summary["least_frequent"]))
    return 0


def _write_levels(out: Path, corpus: Corpus, levels: list[Chromosome], rows: list[dict]):
    (out / "levels").mkdir(parents=True, exist_ok=True)
    for i, ch in enumerate(levels):
        write_level(out / "levels" / f"level_{i:03d}.lvl", assemble_level(ch, corpus))
    with open(out / "levels.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level_id", "scenes", *(rows[0].keys() if rows else [])])
        for i, (ch, row) in enumerate(zip(levels, rows)):
            w.writerow([f"level_{i:03d}", " ".join(ch.scenes), *row.values()])


def cmd_generate(args) -> int:
    started = time.time()
    cfg = _config_from_args(args)
    cfg.validate()
    corpus = _load_corpus(cfg.corpus)
    target = _target_sequence(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_mechanic_sequence(out / "target.seq", target)
    levels: list[Chromosome] = []
    rows: list[dict] = []
    attempts = 0
    exhausted = False

    if cfg.generator == "evolve":
        (out / "stats").mkdir(exist_ok=True)
        runs = {}
        while len(levels) < cfg.levels_to_generate:
            if attempts >= cfg.max_attempts:
                exhausted = True
                break
            seed = component_seed(cfg.seed, attempts, SEED_EVOLVE)
            res = evolve(target, corpus, replace(cfg.evolve, seed=seed))
            write_stats_csv(out / "stats" / f"run_{attempts:03d}.csv", res.stats)
            runs[f"run {attempts}"] = res.stats
            log.info("run %d: best fitness %s constraint %.3f", attempts, res.best.fitness, res.best.constraint)
            attempts += 1
            if res.best.feasible:
                levels.append(res.best.chromosome)
                rows.append({"seed": seed, "constraint": res.best.constraint, "fitness": res.best.fitness,
                             "matched": res.best.matched, "extras": res.best.faults.extras})
        if runs:
            write_run_figures(runs, {k: len(target) for k in runs}, out / "figures")
    else:
        if cfg.generator == "greedy":
            rng = random.Random(component_seed(cfg.seed, 0, SEED_GREEDY))
            gen = lambda: greedy_level(target, corpus, rng)
        else:
            rng = random.Random(component_seed(cfg.seed, 0, SEED_RANDOM))
            gen = lambda: random_level(corpus, rng)
        check = agent_beats(corpus, cfg.sim, cfg.agent, seed=component_seed(cfg.seed, 0, SEED_PLAY))
        try:
            batch = generate_until_playable(gen, check, cfg.levels_to_generate, cfg.max_attempts)
            levels, attempts = batch.levels, batch.attempts
        except GenerationBudgetError as exc:
            levels, attempts, exhausted = exc.keepers, exc.attempts, True
        rows = [{} for _ in levels]

    _write_levels(out, corpus, levels, rows)
    manifest = {
        "command": "generate",
        "config": _jsonable(asdict(cfg)),
        "seeds": {
            "master": cfg.seed,
            "family_stride": 1000,
            "offsets": {"target": SEED_TARGET, "evolve": SEED_EVOLVE, "greedy": SEED_GREEDY,
                        "random": SEED_RANDOM, "play": SEED_PLAY},
        },
        "target_length": len(target),
        "levels": len(levels),
        "attempts": attempts,
        "budget_exhausted": exhausted,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    _write_timing(out, started)
    print(f"{len(levels)} playable levels in {attempts} attempts -> {out}")
    if exhausted:
        log.error("budget exhausted: %d of %d levels", len(levels), cfg.levels_to_generate)
        return EXIT_BUDGET
    return 0


def cmd_evaluate(args) -> int:
    cfg = _config_from_args(args)
    cfg.validate()
    directory = Path(args.levels)
    grids, ids = [], []
    for path in sorted(directory.glob("*.lvl")):
        try:
            grids.append(read_level(path))
            ids.append(path.stem)
        except (OSError, LevelFormatError) as exc:
            log.warning("skipping %s: %s", path, exc)
    if not grids:
        log.error("no readable levels in %s", directory)
        return EXIT_CHECK_FAILED
    target = _target_sequence(cfg)
    target_grid = read_level(cfg.target_level) if cfg.target_level else None
    out = Path(args.out) if args.out else directory
    out.mkdir(parents=True, exist_ok=True)
    seed = component_seed(cfg.seed, 0, SEED_PLAY)

    rows = []
    for lid, grid in zip(ids, grids):
        try:
            traces = evaluate_n_runs(grid, args.runs, cfg.sim, cfg.agent, seed_base=seed)
        except MalformedLevelError as exc:
            log.warning("skipping %s: %s", lid, exc)
            continue
        play = sum(t.won for t in traces) / len(traces)
        trace = select_scoring_trace(traces) or traces[0]
        m = mechanic_match_stats(trace, target)
        rows.append([lid, f"{play:.4f}", m.matched, m.extras,
                     "" if m.normalized_matched is None else f"{m.normalized_matched:.4f}",
                     "" if m.normalized_extras is None else f"{m.normalized_extras:.4f}"])
    with open(out / "evaluation.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level_id", "playability", "matched", "extras", "norm_matched", "norm_extras"])
        w.writerows(rows)

    lines = [f"levels: {len(rows)}",
             f"playability: {sum(float(r[1]) for r in rows) / max(len(rows), 1):.4f}"]
    if len(grids) > 1:
        within = within_group_diversity(grids)
        write_diversity_csv(out / "diversity_within.csv", within, ids)
        lines.append(f"within-group TPKLDiv: {within.mean:.4f} +- {within.std:.4f}")
    if target_grid is not None:
        vs = vs_target_diversity(grids, target_grid)
        write_diversity_csv(out / "diversity_target.csv", vs, ids)
        lines.append(f"vs-target TPKLDiv: {vs.mean:.4f} +- {vs.std:.4f}")
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def cmd_corpus_check(args) -> int:
    cfg = _config_from_args(args)
    try:
        corpus = load_corpus(args.manifest)
    except CorpusError as exc:
        log.error("%s", exc)
        return EXIT_CHECK_FAILED
    failures = 0
    rows = []
    for sid in corpus.ids:
        scene = corpus.scenes[sid]
        traces = evaluate_n_runs(stitch_scenes([scene]), args.runs, cfg.sim, cfg.agent, seed_base=args.seed)
        wins = [t for t in traces if t.won]
        ok = any(scene.mechanics <= set(mechanic_sequence(t)) for t in wins)
        failures += not ok
        labels = " ".join(m.label for m in sorted(scene.mechanics))
        rows.append([sid, len(wins), args.runs, labels, "ok" if ok else "UNVERIFIED"])
        if not ok:
            log.warning("scene %s: labels [%s] not all seen in a winning run", sid, labels)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["scene_id", "wins", "runs", "labels", "status"])
    writer.writerows(rows)
    print(f"# {len(corpus)} scenes loaded, {len(corpus.skipped)} skipped, {failures} unverified", file=sys.stderr)
    return EXIT_CHECK_FAILED if failures or corpus.skipped else 0


def cmd_build_corpus(args) -> int:
    corpus = build_synthetic_corpus(SyntheticConfig(seed=args.seed, variants=args.variants))
    path = save_corpus(corpus, args.out)
    print(f"{len(corpus)} scenes -> {path}")
    return 0


def cmd_report(args) -> int:
    directory = Path(args.stats)
    runs = {p.stem: read_stats_csv(p) for p in sorted(directory.glob("*.csv"))}
    if not runs:
        log.error("no stats CSVs in %s", directory)
        return EXIT_CHECK_FAILED
    n = len(read_mechanic_sequence(args.target_seq)) if args.target_seq else 1
    paths = write_run_figures(runs, {k: n for k in runs}, args.out or directory)
    for p in paths:
        print(p)
    return 0


def cmd_desk(args) -> int:
    started = time.time()
    corpus = _load_corpus(args.corpus)
    cfg = DeskConfig(families=args.families, levels_per_method=args.levels, population_size=args.population,
                     generations=args.generations, master_seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    results = run_desk(corpus, cfg, progress=lambda msg: log.info(msg))
    with open(out / "desk.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["family", "target_len", "dense_len", "method", "playability", "norm_matched",
                    "within_div", "vs_target_div"])
        for r in results:
            for name in ("evolved", "greedy", "random"):
                m = getattr(r, name)
                w.writerow([r.family, len(r.target.sequence), len(r.dense_target.sequence), name,
                            f"{m.mean_playability:.4f}", f"{m.mean_matched:.4f}", f"{m.within:.4f}",
                            f"{m.vs_target:.4f}"])
    for r in results:
        fam = out / f"family_{r.family}"
        (fam / "stats").mkdir(parents=True, exist_ok=True)
        runs = {f"run {i}": s for i, s in enumerate(r.runs)}
        for i, s in enumerate(r.runs):
            write_stats_csv(fam / "stats" / f"run_{i:03d}.csv", s)
        write_stats_csv(fam / "stats" / "dense.csv", r.dense_run)
        write_run_figures(runs, {k: len(r.target.sequence) for k in runs}, fam)
        write_run_figures({"sparse": r.runs[0], "dense": r.dense_run},
                          {"sparse": len(r.target.sequence), "dense": len(r.dense_target.sequence)},
                          fam / "density")
    _write_timing(out, started)
    print((out / "desk.csv").read_text(), end="")
    return 0


# -- parser -----------------------------------------------------------------


def _add_target(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--target-level", help="level file to trace for the target sequence")
    g.add_argument("--target-seq", help="mechanic-sequence file, one name per line")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stitchgen", description="Scene-stitching level generation experiments.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("trace", help="play a level once and write its mechanic sequence")
    t.add_argument("level")
    t.add_argument("-o", "--output", help="sequence file (default: LEVEL with .seq suffix)")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--config", help="JSON overrides (sim / agent sections)")
    t.set_defaults(func=cmd_trace)

    g = sub.add_parser("generate", help="generate playable levels with one generator")
    g.add_argument("--corpus", help="corpus.json manifest (default: built-in synthetic corpus)")
    _add_target(g)
    g.add_argument("--generator", choices=("evolve", "greedy", "random"))
    g.add_argument("--out")
    g.add_argument("--seed", type=int)
    g.add_argument("--count", type=int, help="levels to generate (default 20)")
    g.add_argument("--max-attempts", type=int, help="evolution runs or baseline candidates allowed")
    g.add_argument("--population", type=int)
    g.add_argument("--generations", type=int)
    g.add_argument("--runs-per-eval", type=int, help="agent runs per chromosome (N)")
    g.add_argument("--workers", type=int, help="threads for chromosome evaluation")
    g.add_argument("--config", help="JSON overrides")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("evaluate", help="playability, mechanic matching and diversity of a level directory")
    e.add_argument("levels", help="directory of .lvl files")
    _add_target(e)
    e.add_argument("--runs", type=int, default=20)
    e.add_argument("--seed", type=int)
    e.add_argument("--out", help="report directory (default: the level directory)")
    e.add_argument("--config", help="JSON overrides")
    e.set_defaults(func=cmd_evaluate)

    c = sub.add_parser("corpus-check", help="parse a corpus and verify scene labels with the agent")
    c.add_argument("manifest")
    c.add_argument("--runs", type=int, default=6)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--config", help="JSON overrides")
    c.set_defaults(func=cmd_corpus_check)

    b = sub.add_parser("build-corpus", help="write the synthetic scene corpus")
    b.add_argument("out")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--variants", type=int, default=3)
    b.set_defaults(func=cmd_build_corpus)

    r = sub.add_parser("report", help="draw fitness, mechanic and length figures from stats CSVs")
    r.add_argument("stats", help="directory of per-generation CSVs")
    r.add_argument("--target-seq", help="normalize mechanic curves by this target's length")
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)

    d = sub.add_parser("desk", help="desk-scale evolved / greedy / random comparison")
    d.add_argument("--corpus")
    d.add_argument("--families", type=int, default=5)
    d.add_argument("--levels", type=int, default=5)
    d.add_argument("--population", type=int, default=10)
    d.add_argument("--generations", type=int, default=50)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", default="desk")
    d.set_defaults(func=cmd_desk)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, CorpusError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
