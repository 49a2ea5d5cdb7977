import inspect
import itertools
import random
from collections import Counter

import numpy as np
import pytest

from stitchgen.agent import AgentConfig
from stitchgen.baselines import (
    GenerationBudgetError,
    agent_beats,
    consumed_prefix,
    generate_until_playable,
    greedy_level,
    random_level,
)
from stitchgen.corpus import Corpus
from stitchgen.level import MechanicKind as M
from stitchgen.level import TileGrid

from conftest import flat_grid, micro_corpus, scene

A, B, C, D = M.JUMP, M.COIN_COLLECT, M.STOMP_KILL, M.BRICK_BLOCK


def test_random_length_histogram_uniform(abc_corpus):
    rng = random.Random(0)
    n = 10_000
    hist = Counter(len(random_level(abc_corpus, rng)) for _ in range(n))
    assert set(hist) == set(range(5, 26))
    expected = n / 21
    # 5% of n per bucket, the tolerance the statistical check is pinned to
    assert all(abs(v - expected) <= 0.05 * n for v in hist.values())
    assert all(abs(v - expected) / expected < 0.2 for v in hist.values())


def test_random_scene_choice_uniform(abc_corpus):
    rng = random.Random(1)
    counts = Counter(s for _ in range(3000) for s in random_level(abc_corpus, rng))
    total = sum(counts.values())
    assert all(abs(counts[s] / total - 0.2) < 0.01 for s in abc_corpus.ids)


def test_random_single_scene_and_seeded(flat_corpus, abc_corpus):
    assert set(random_level(flat_corpus, random.Random(5))) == {"s0"}
    assert random_level(abc_corpus, random.Random(9)) == random_level(abc_corpus, random.Random(9))


def test_random_level_ignores_target(abc_corpus):
    assert "target" not in inspect.signature(random_level).parameters
    # same seed, interleaved greedy calls for different targets elsewhere do not matter
    a = [random_level(abc_corpus, random.Random(s)) for s in range(20)]
    for tgt in ([A], [B, C, A]):
        greedy_level(tgt, abc_corpus, random.Random(0))
        assert [random_level(abc_corpus, random.Random(s)) for s in range(20)] == a


def test_consumed_prefix():
    assert consumed_prefix(frozenset({A, B}), [A, B, C], 0) == 2
    assert consumed_prefix(frozenset({A, B}), [A, A, B], 0) == 1  # each label spent once
    assert consumed_prefix(frozenset({B}), [A, B], 0) == 0
    assert consumed_prefix(frozenset({A}), [A], 1) == 0


def test_greedy_takes_maximal_scene():
    corpus = micro_corpus([(A,), (B,), (A, B), ()])
    for seed in range(20):
        lvl = greedy_level([A, B], corpus, random.Random(seed))
        assert lvl[0] == "s2"


def test_greedy_empty_target_uniform(abc_corpus):
    rng = random.Random(3)
    counts = Counter(s for _ in range(2000) for s in greedy_level([], abc_corpus, rng))
    total = sum(counts.values())
    assert all(abs(counts[s] / total - 0.2) < 0.015 for s in abc_corpus.ids)
    hist = Counter(len(greedy_level([], abc_corpus, rng)) for _ in range(4000))
    assert set(hist) == set(range(5, 26))


def _cursor(ids, corpus, target):
    cur = 0
    for sid in ids:
        cur += consumed_prefix(corpus.labels(sid), target, cur)
    return cur


def test_greedy_never_skips_a_consumable_mechanic(abc_corpus):
    rng = random.Random(11)
    for _ in range(300):
        target = [rng.choice([A, B, C]) for _ in range(rng.randint(0, 12))]
        lvl = greedy_level(target, abc_corpus, rng)
        cur = 0
        for sid in lvl:
            got = consumed_prefix(abc_corpus.labels(sid), target, cur)
            assert got == max(consumed_prefix(abc_corpus.labels(s), target, cur) for s in abc_corpus.ids)
            cur += got


def test_greedy_cursor_is_never_beaten_by_another_pairing():
    # set labels make per-slot greedy stay ahead of any fixed-length pairing
    corpus = micro_corpus([(A, B), (A,), (B, C, D), (C,), (A, C), (B, D)])
    rng = random.Random(2)
    for _ in range(60):
        target = [rng.choice([A, B, C, D]) for _ in range(rng.randint(1, 8))]
        for length in (1, 2, 3):
            g = greedy_level(target, corpus, random.Random(0), min_scenes=length, max_scenes=length)
            best = max(_cursor(p, corpus, target) for p in itertools.product(corpus.ids, repeat=length))
            assert _cursor(g, corpus, target) == best


def test_generate_until_playable_flat(flat_corpus):
    rng = random.Random(0)
    batch = generate_until_playable(lambda: random_level(flat_corpus, rng, 1, 2), agent_beats(flat_corpus), 4, 10)
    assert len(batch.levels) == 4 and batch.attempts == 4


def test_generate_until_playable_budget():
    void = np.zeros_like(flat_grid().array)
    corpus = Corpus.from_scenes([scene("void", (), TileGrid(void))])
    check = agent_beats(corpus, agent_config=AgentConfig(patience=20, node_budget=500))
    with pytest.raises(GenerationBudgetError) as info:
        generate_until_playable(lambda: random_level(corpus, random.Random(0), 2, 2), check, 2, 3)
    assert info.value.keepers == [] and info.value.attempts == 3
    with pytest.raises(ValueError):
        generate_until_playable(lambda: None, check, 0, 3)


def test_attempts_at_least_count():
    rng = random.Random(4)
    keep = lambda ch, attempt: rng.random() < 0.5
    for count in (1, 3, 7):
        batch = generate_until_playable(lambda: "x", keep, count, 1000)
        assert batch.attempts >= count and len(batch.levels) == count


def test_partial_result_carries_keepers():
    calls = iter([True, False, False, False])
    with pytest.raises(GenerationBudgetError) as info:
        generate_until_playable(lambda: "lvl", lambda ch, i: next(calls), 2, 4)
    assert info.value.keepers == ["lvl"]
