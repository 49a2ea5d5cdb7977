import json
import random
from collections import Counter

import pytest

from stitchgen.corpus import (
    Corpus,
    CorpusError,
    inverse_mechanic_weights,
    linear_rank_weights,
    load_corpus,
    rank_sample_inverse_mechanics,
    sample_scene_by_count,
    save_corpus,
)
from stitchgen.level import MechanicKind as M
from stitchgen.synthetic import SyntheticConfig, build_synthetic_corpus

from conftest import micro_corpus

ROW = "-" * 16


def write_scene(path, rows):
    path.write_text("\n".join(rows) + "\n")


def make_manifest(tmp_path, entries):
    (tmp_path / "scenes").mkdir(exist_ok=True)
    data = {"scene_width": 16, "scene_height": 14, "scenes": entries}
    p = tmp_path / "corpus.json"
    p.write_text(json.dumps(data))
    return p


def flat_rows():
    return [ROW] * 12 + ["X" * 16] * 2


def test_load_three(tmp_path):
    p = make_manifest(tmp_path, [{"path": f"scenes/a{i}.lvl", "mechanics": ["Jump"] if i else []} for i in range(3)])
    for i in range(3):
        write_scene(tmp_path / "scenes" / f"a{i}.lvl", flat_rows())
    c = load_corpus(p)
    assert len(c) == 3
    assert c.labels("a1") == frozenset({M.JUMP})


def test_load_skips_unknown_tiles(tmp_path, caplog):
    p = make_manifest(tmp_path, [{"path": "scenes/ok.lvl", "mechanics": []},
                                 {"path": "scenes/bad.lvl", "mechanics": ["Jump"]}])
    write_scene(tmp_path / "scenes" / "ok.lvl", flat_rows())
    write_scene(tmp_path / "scenes" / "bad.lvl", ["Z" + ROW[1:]] + flat_rows()[1:])
    with caplog.at_level("WARNING"):
        c = load_corpus(p)
    assert len(c) == 1 and c.skipped == ("bad",)
    assert "bad" in caplog.text


def test_load_errors(tmp_path):
    p = make_manifest(tmp_path, [])
    with pytest.raises(CorpusError):
        load_corpus(p)
    with pytest.raises(CorpusError):
        load_corpus(tmp_path / "missing.json")


def test_save_load_round_trip(tmp_path, synthetic):
    again = load_corpus(save_corpus(synthetic, tmp_path))
    assert again.ids == synthetic.ids
    for sid in synthetic.ids:
        assert again.scenes[sid] == synthetic.scenes[sid]


def test_index_consistency(synthetic):
    for count, ids in synthetic.by_mechanic_count.items():
        assert all(len(synthetic.labels(s)) == count for s in ids)
    assert sum(len(v) for v in synthetic.by_mechanic_count.values()) == len(synthetic)
    assert synthetic.flat_ids()


def test_sample_by_count():
    c = micro_corpus([(), (M.JUMP,), (M.JUMP, M.COIN_COLLECT), (M.JUMP, M.COIN_COLLECT, M.STOMP_KILL)])
    rng = random.Random(1)
    assert sample_scene_by_count(c, 0, rng).id == "s0"
    assert sample_scene_by_count(c, 99, rng).id == "s3"
    gap = micro_corpus([(), (M.JUMP, M.COIN_COLLECT)])
    # 1 is equally far from 0 and 2: ties go to the smaller count
    assert sample_scene_by_count(gap, 1, rng).id == "s0"
    a = [sample_scene_by_count(c, 1, random.Random(7)).id for _ in range(3)]
    assert len(set(a)) == 1


def test_rank_weights_two_scenes():
    c = micro_corpus([(), (M.JUMP, M.COIN_COLLECT, M.STOMP_KILL, M.BRICK_BLOCK, M.LOW_JUMP)])
    w = inverse_mechanic_weights(c)
    assert w == {"s0": 2.0, "s1": 1.0}
    rng = random.Random(0)
    hits = sum(rank_sample_inverse_mechanics(c, rng).id == "s0" for _ in range(30000))
    assert abs(hits / 30000 - 2 / 3) < 0.01


def test_rank_weights_ties_and_singleton():
    assert linear_rank_weights([3, 3, 3]) == [2.0, 2.0, 2.0]
    assert linear_rank_weights([5, 1, 5, 0]) == [3.5, 2.0, 3.5, 1.0]
    single = micro_corpus([(M.JUMP,)])
    assert rank_sample_inverse_mechanics(single, random.Random(3)).id == "s0"


def test_rank_sampler_empirical_distribution():
    labels = [(), (M.JUMP,), (M.JUMP, M.COIN_COLLECT), (M.STOMP_KILL,), (M.JUMP, M.COIN_COLLECT, M.STOMP_KILL)]
    c = micro_corpus(labels)
    w = inverse_mechanic_weights(c)
    total = sum(w.values())
    rng = random.Random(2024)
    n = 100_000
    counts = Counter(rank_sample_inverse_mechanics(c, rng).id for _ in range(n))
    for sid in c.ids:
        assert abs(counts[sid] / n - w[sid] / total) < 0.02 * (w[sid] / total) + 0.002


def test_synthetic_covers_all_mechanics_as_singletons(synthetic):
    singles = {next(iter(synthetic.labels(s))) for s in synthetic.ids if synthetic.mechanic_count(s) == 1}
    assert singles == set(M)
    assert len(synthetic) >= 60
    assert synthetic.flat_ids()
    assert any(synthetic.mechanic_count(s) >= 2 for s in synthetic.ids)


def test_synthetic_deterministic():
    a, b = build_synthetic_corpus(), build_synthetic_corpus()
    assert a.ids == b.ids and all(a.scenes[s] == b.scenes[s] for s in a.ids)
    assert build_synthetic_corpus(SyntheticConfig(seed=1)).ids == a.ids


def test_empty_corpus_rejected():
    with pytest.raises(CorpusError):
        Corpus({})
