import numpy as np
import pytest

from stitchgen.corpus import Corpus
from stitchgen.level import MechanicKind as M
from stitchgen.level import Scene, TileGrid, TileKind as T
from stitchgen.synthetic import build_synthetic_corpus

W, H = 16, 14


def flat_grid(width=W, height=H):
    a = np.zeros((height, width), dtype=np.int8)
    a[height - 2 :, :] = T.GROUND
    return TileGrid(a)


def scene(sid, labels=(), grid=None):
    return Scene(sid, grid if grid is not None else flat_grid(), frozenset(labels))


def micro_corpus(label_sets):
    """Corpus of flat scenes with the given label sets, ids s0, s1, ..."""
    return Corpus.from_scenes(scene(f"s{i}", labels) for i, labels in enumerate(label_sets))


@pytest.fixture(scope="session")
def synthetic():
    return build_synthetic_corpus()


@pytest.fixture
def flat_corpus():
    return micro_corpus([()])


@pytest.fixture
def abc_corpus():
    return micro_corpus([(), (M.JUMP,), (M.COIN_COLLECT,), (M.JUMP, M.COIN_COLLECT), (M.STOMP_KILL,)])


# criterion number -> result line, filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
