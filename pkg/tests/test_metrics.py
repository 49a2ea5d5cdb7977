import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stitchgen.level import MechanicKind as M
from stitchgen.level import TileGrid, TileKind as T
from stitchgen.metrics import (
    DiversityReport,
    PatternDistribution,
    mechanic_match_stats,
    pattern_distribution,
    playability,
    tpkl_divergence,
    vs_target_diversity,
    within_group_diversity,
    write_diversity_csv,
)

from oracles import fault_oracle, smoothed_kl

KINDS = [T.EMPTY, T.GROUND, T.BRICK, T.COIN, T.SOLID_BLOCK]


def grid(h, w, fill=T.EMPTY):
    return TileGrid(np.full((h, w), fill, dtype=np.int8))


def random_grid(rng, h=None, w=None):
    h = h or rng.randint(3, 8)
    w = w or rng.randint(3, 20)
    return TileGrid(np.array([[rng.choice(KINDS) for _ in range(w)] for _ in range(h)], dtype=np.int8))


def runway(width=40):
    a = np.zeros((14, width), dtype=np.int8)
    a[12:, :] = T.GROUND
    a[11, 1] = T.MARIO_START
    a[11, width - 2] = T.FLAG
    return TileGrid(a)


# -- pattern counts --------------------------------------------------------


def test_window_counts():
    p = pattern_distribution(grid(3, 3))
    assert p.total == 1 and list(p.counts.values()) == [1]
    assert pattern_distribution(grid(3, 4)).total == 2
    u = pattern_distribution(grid(10, 10))
    assert len(u.counts) == 1 and u.total == 64
    with pytest.raises(ValueError):
        pattern_distribution(grid(2, 10))


@given(st.integers(3, 12), st.integers(3, 30), st.integers(0, 1000))
def test_window_count_formula(h, w, seed):
    p = pattern_distribution(random_grid(random.Random(seed), h, w))
    assert p.total == (w - 2) * (h - 2) == sum(p.counts.values())
    assert all(len(k) == 9 for k in p.counts)


def test_patterns_are_exact_tile_windows():
    a = np.zeros((4, 5), dtype=np.int8)
    a[1, 2] = T.BRICK
    p = pattern_distribution(TileGrid(a))
    hand = {}
    for r in range(2):
        for c in range(3):
            key = a[r:r + 3, c:c + 3].tobytes()
            hand[key] = hand.get(key, 0) + 1
    assert p.counts == hand


# -- divergence ------------------------------------------------------------


def test_identical_is_zero():
    p = pattern_distribution(random_grid(random.Random(0), 6, 20))
    assert abs(tpkl_divergence(p, p)) < 1e-12


def test_disjoint_closed_form_and_asymmetry():
    p = PatternDistribution((3, 3), {b"x": 5}, 5)
    q = PatternDistribution((3, 3), {b"y": 1}, 1)
    eps = 1e-3
    assert math.isclose(tpkl_divergence(p, q, eps), smoothed_kl({"x": 5}, {"y": 1}, eps), rel_tol=1e-12)
    assert math.isclose(tpkl_divergence(q, p, eps), smoothed_kl({"y": 1}, {"x": 5}, eps), rel_tol=1e-12)
    assert abs(tpkl_divergence(p, q, eps) - tpkl_divergence(q, p, eps)) > 1e-6
    # spelled out on the 2-symbol alphabet
    px, py = (5 + eps) / (5 + 2 * eps), eps / (5 + 2 * eps)
    qx, qy = eps / (1 + 2 * eps), (1 + eps) / (1 + 2 * eps)
    assert math.isclose(tpkl_divergence(p, q, eps), px * math.log(px / qx) + py * math.log(py / qy), rel_tol=1e-12)


def test_window_mismatch_rejected():
    p = pattern_distribution(grid(4, 4), (3, 3))
    q = pattern_distribution(grid(4, 4), (2, 2))
    with pytest.raises(ValueError):
        tpkl_divergence(p, q)


def test_divergence_matches_reference_and_nonnegative():
    rng = random.Random(7)
    for _ in range(1000):
        g1, g2 = random_grid(rng, 4), random_grid(rng, 4)
        p, q = pattern_distribution(g1), pattern_distribution(g2)
        d = tpkl_divergence(p, q)
        assert d >= 0
        ref = smoothed_kl(p.counts, q.counts, 1e-5)
        assert math.isclose(d, max(ref, 0.0), rel_tol=1e-9, abs_tol=1e-12)


# -- group diversity -------------------------------------------------------


def test_within_group_basics():
    g = random_grid(random.Random(1), 6, 30)
    r = within_group_diversity([g, g])
    assert r.values == (0.0, 0.0) and r.mean == 0.0
    with pytest.raises(ValueError):
        within_group_diversity([g])


def test_within_group_reference_and_permutation():
    rng = random.Random(3)
    levels = [random_grid(rng, 5, rng.randint(10, 30)) for _ in range(6)]
    r = within_group_diversity(levels)
    ds = [pattern_distribution(x) for x in levels]
    ref = [min(smoothed_kl(ds[i].counts, ds[j].counts, 1e-5) for j in range(6) if j != i) for i in range(6)]
    assert all(math.isclose(a, b, rel_tol=1e-9) for a, b in zip(r.values, ref))
    assert math.isclose(r.mean, sum(ref) / 6, rel_tol=1e-9)
    assert math.isclose(r.std, float(np.std(ref)), abs_tol=1e-9)
    order = list(range(6))
    rng.shuffle(order)
    shuffled = within_group_diversity([levels[i] for i in order])
    assert math.isclose(shuffled.mean, r.mean, rel_tol=1e-12)
    assert sorted(shuffled.values) == pytest.approx(sorted(r.values), rel=1e-12)


def test_vs_target():
    rng = random.Random(5)
    tgt = random_grid(rng, 5, 25)
    r = vs_target_diversity([tgt], tgt)
    assert r.mean == 0 and r.std == 0
    others = [random_grid(rng, 5, 25) for _ in range(3)]
    fwd = vs_target_diversity(others, tgt)
    back = vs_target_diversity(others, tgt, reverse=True)
    q = pattern_distribution(tgt)
    for g, f, b in zip(others, fwd.values, back.values):
        p = pattern_distribution(g)
        assert math.isclose(f, tpkl_divergence(p, q)) and math.isclose(b, tpkl_divergence(q, p))
    with pytest.raises(ValueError):
        vs_target_diversity([], tgt)


def test_diversity_report_stats():
    r = DiversityReport.of([1.0, 2.0, 3.0, 6.0])
    assert r.mean == 3.0
    assert math.isclose(r.std, math.sqrt((4 + 1 + 0 + 9) / 4))


def test_diversity_csv(tmp_path):
    r = DiversityReport.of([0.5, 0.25])
    p = tmp_path / "div.csv"
    write_diversity_csv(p, r, ["a", "b"])
    assert p.read_text().splitlines() == ["level_id,min_div", "a,0.500000", "b,0.250000", "mean,0.375000",
                                          "std,0.125000"]
    with pytest.raises(ValueError):
        write_diversity_csv(p, r, ["a"])


# -- playability and matching ----------------------------------------------


def test_playability_flat_and_impossible():
    assert playability(runway(), runs=20) == 1.0
    a = runway().array.copy()
    a[12:, 8:34] = T.EMPTY
    assert playability(TileGrid(a), runs=3) == 0.0
    v = playability(runway(), runs=7)
    assert v * 7 == round(v * 7)


def test_mechanic_match_stats():
    target = [M.JUMP, M.COIN_COLLECT, M.STOMP_KILL]
    s = mechanic_match_stats(list(target), target)
    assert (s.matched, s.extras, s.normalized_matched) == (3, 0, 1.0)
    assert mechanic_match_stats([], target).matched == 0
    # a swap: one target mechanic missed and one extra
    gen = [M.JUMP, M.STOMP_KILL, M.COIN_COLLECT]
    missed, extras = fault_oracle(gen, target)
    s = mechanic_match_stats(gen, target)
    assert (s.matched, s.extras) == (len(target) - missed, extras) == (2, 1)
    assert math.isclose(s.normalized_extras, 1 / 3)
    empty = mechanic_match_stats([M.JUMP], [])
    assert empty.normalized_matched is None and empty.normalized_extras is None


@settings(max_examples=300)
@given(st.lists(st.sampled_from([M.JUMP, M.COIN_COLLECT, M.STOMP_KILL]), max_size=8),
       st.lists(st.sampled_from([M.JUMP, M.COIN_COLLECT, M.STOMP_KILL]), min_size=1, max_size=8))
def test_match_stats_against_oracle(gen, target):
    missed, extras = fault_oracle(gen, target)
    s = mechanic_match_stats(gen, target)
    assert s.matched == len(target) - missed and s.extras == extras
