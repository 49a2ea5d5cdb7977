import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stitchgen.level import (
    TILE_CHARS,
    Chromosome,
    CorpusMissError,
    LevelFormatError,
    MechanicKind,
    TileGrid,
    TileKind,
    assemble_level,
    format_mechanic_sequence,
    parse_level_text,
    read_mechanic_sequence,
    serialize_level_text,
    write_mechanic_sequence,
)

from conftest import micro_corpus


def test_tile_charset_is_frozen():
    assert "".join(TILE_CHARS[t] for t in TileKind) == "-XSQ!otT#=gkyFM"
    assert len(set(TILE_CHARS.values())) == len(TileKind)


def test_twelve_mechanics_with_stable_codes():
    assert len(MechanicKind) == 12
    assert [int(m) for m in MechanicKind] == list(range(12))
    assert MechanicKind.from_label("LowJump") is MechanicKind.LOW_JUMP
    assert MechanicKind.from_label("QUESTION_BLOCK") is MechanicKind.QUESTION_BLOCK
    with pytest.raises(ValueError):
        MechanicKind.from_label("Fireball")


def test_parse_small():
    g = parse_level_text("--\nXX")
    assert (g.width, g.height) == (2, 2)
    assert g.cells == (TileKind.EMPTY, TileKind.EMPTY, TileKind.GROUND, TileKind.GROUND)


def test_parse_unknown_char_reports_position():
    with pytest.raises(LevelFormatError, match=r"line 2, column 3"):
        parse_level_text("---\n--Z")


def test_parse_ragged():
    with pytest.raises(LevelFormatError):
        parse_level_text("---\n--")


def test_serialize_examples():
    assert serialize_level_text(TileGrid([[0]])) == "-"
    ground = TileGrid.filled(16, 14, TileKind.GROUND)
    assert serialize_level_text(ground).split("\n") == ["X" * 16] * 14


grids = st.integers(1, 12).flatmap(
    lambda w: st.lists(st.lists(st.sampled_from(list(TileKind)), min_size=w, max_size=w), min_size=1, max_size=12)
)


@settings(max_examples=1000, deadline=None)
@given(grids)
def test_round_trip(rows):
    g = TileGrid(rows)
    text = serialize_level_text(g)
    assert parse_level_text(text) == g
    assert serialize_level_text(parse_level_text(text)) == text


def test_assemble_single_scene():
    corpus = micro_corpus([()])
    g = assemble_level(Chromosome(("s0",)), corpus)
    assert g.width == 22
    assert g.positions(TileKind.MARIO_START)[0][1] == 1
    assert g.positions(TileKind.FLAG)[0][1] >= 19


def test_assemble_fourteen_scenes():
    corpus = micro_corpus([()])
    assert assemble_level(Chromosome(("s0",) * 14), corpus).width == 230


def test_assemble_errors():
    corpus = micro_corpus([()])
    with pytest.raises(ValueError):
        assemble_level(Chromosome(()), corpus)
    with pytest.raises(CorpusMissError):
        assemble_level(Chromosome(("nope",)), corpus)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(["s0", "s1", "s2"]), min_size=1, max_size=30))
def test_assemble_width_formula_and_verbatim_copy(ids):
    corpus = micro_corpus([(), (MechanicKind.JUMP,), (MechanicKind.COIN_COLLECT,)])
    g = assemble_level(Chromosome(ids), corpus)
    assert g.width == 3 + 16 * len(ids) + 3
    for k, sid in enumerate(ids):
        np.testing.assert_array_equal(g.array[:, 3 + 16 * k : 3 + 16 * (k + 1)], corpus.scenes[sid].grid.array)
    assert assemble_level(Chromosome(ids), corpus) == g


def test_mechanic_sequence_file(tmp_path):
    seq = [MechanicKind.JUMP, MechanicKind.HIGH_JUMP, MechanicKind.COIN_COLLECT]
    assert format_mechanic_sequence(seq) == "Jump\nHighJump\nCoinCollect\n"
    p = tmp_path / "t.txt"
    write_mechanic_sequence(p, seq)
    assert read_mechanic_sequence(p) == seq
