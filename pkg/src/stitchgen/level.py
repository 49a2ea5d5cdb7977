"""Tiles, mechanics, scenes and the `.lvl` text format.

Levels are stored as rows of single characters, top row first::

    -  empty            X  ground           S  brick
    Q  ?-block (coin)   !  ?-block (power)  o  coin
    #  solid block      T  pipe top         t  pipe body
    =  platform         g  goomba           k  koopa
    y  spiky            F  flag             M  mario start

The mapping is a file-format contract; do not change it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np


class LevelFormatError(ValueError):
    """Raised for malformed level text."""


class CorpusMissError(KeyError):
    """Raised when a chromosome references a scene id the corpus lacks."""


class TileKind(enum.IntEnum):
    EMPTY = 0
    GROUND = 1
    BRICK = 2
    QUESTION_COIN = 3
    QUESTION_POWERUP = 4
    COIN = 5
    PIPE_BODY = 6
    PIPE_TOP = 7
    SOLID_BLOCK = 8
    PLATFORM = 9
    GOOMBA = 10
    KOOPA = 11
    SPIKY = 12
    FLAG = 13
    MARIO_START = 14

    @property
    def char(self) -> str:
        return TILE_CHARS[self]

    @property
    def is_solid(self) -> bool:
        return self in SOLID_TILES

    @property
    def is_enemy(self) -> bool:
        return self in ENEMY_TILES


TILE_CHARS = {
    TileKind.EMPTY: "-",
    TileKind.GROUND: "X",
    TileKind.BRICK: "S",
    TileKind.QUESTION_COIN: "Q",
    TileKind.QUESTION_POWERUP: "!",
    TileKind.COIN: "o",
    TileKind.PIPE_BODY: "t",
    TileKind.PIPE_TOP: "T",
    TileKind.SOLID_BLOCK: "#",
    TileKind.PLATFORM: "=",
    TileKind.GOOMBA: "g",
    TileKind.KOOPA: "k",
    TileKind.SPIKY: "y",
    TileKind.FLAG: "F",
    TileKind.MARIO_START: "M",
}
CHAR_TILES = {c: t for t, c in TILE_CHARS.items()}

SOLID_TILES = frozenset(
    {
        TileKind.GROUND,
        TileKind.BRICK,
        TileKind.QUESTION_COIN,
        TileKind.QUESTION_POWERUP,
        TileKind.PIPE_BODY,
        TileKind.PIPE_TOP,
        TileKind.SOLID_BLOCK,
    }
)
ENEMY_TILES = frozenset({TileKind.GOOMBA, TileKind.KOOPA, TileKind.SPIKY})


class MechanicKind(enum.IntEnum):
    """The twelve tracked mechanics. The integer value is the stable code."""

    JUMP = 0
    LOW_JUMP = 1
    HIGH_JUMP = 2
    SHORT_JUMP = 3
    LONG_JUMP = 4
    STOMP_KILL = 5
    SHELL_KILL = 6
    FALL_KILL = 7
    MODE_CHANGE = 8
    COIN_COLLECT = 9
    BRICK_BLOCK = 10
    QUESTION_BLOCK = 11

    @property
    def label(self) -> str:
        """CamelCase name used in text files, e.g. ``LowJump``."""
        return "".join(part.capitalize() for part in self.name.split("_"))

    @classmethod
    def from_label(cls, text: str) -> "MechanicKind":
        key = text.strip()
        for kind in cls:
            if key in (kind.label, kind.name):
                return kind
        raise ValueError(f"unknown mechanic name: {text!r}")


class TileGrid:
    """Immutable rectangular grid of tiles, row 0 at the top."""

    __slots__ = ("_cells", "_hash")

    def __init__(self, cells: np.ndarray | Sequence[Sequence[int]]):
        arr = np.array(cells, dtype=np.int8)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise LevelFormatError(f"grid must be a non-empty 2-D array, got shape {arr.shape}")
        if arr.min() < 0 or arr.max() > max(TileKind):
            raise LevelFormatError("grid contains codes outside TileKind")
        arr.setflags(write=False)
        self._cells = arr
        self._hash = None

    @classmethod
    def filled(cls, width: int, height: int, kind: TileKind = TileKind.EMPTY) -> "TileGrid":
        return cls(np.full((height, width), int(kind), dtype=np.int8))

    @property
    def width(self) -> int:
        return self._cells.shape[1]

    @property
    def height(self) -> int:
        return self._cells.shape[0]

    @property
    def array(self) -> np.ndarray:
        """Read-only ``(height, width)`` int8 view."""
        return self._cells

    @property
    def cells(self) -> tuple[TileKind, ...]:
        """Row-major tuple of tile kinds."""
        return tuple(TileKind(int(v)) for v in self._cells.ravel())

    def __getitem__(self, rc: tuple[int, int]) -> TileKind:
        r, c = rc
        return TileKind(int(self._cells[r, c]))

    def positions(self, kind: TileKind) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(self._cells == int(kind))
        return list(zip(rows.tolist(), cols.tolist()))

    def count(self, *kinds: TileKind) -> int:
        return int(np.isin(self._cells, [int(k) for k in kinds]).sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TileGrid):
            return NotImplemented
        return self._cells.shape == other._cells.shape and bool(
            np.array_equal(self._cells, other._cells)
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._cells.shape, self._cells.tobytes()))
        return self._hash

    def __repr__(self) -> str:
        return f"TileGrid({self.width}x{self.height})"

    def __str__(self) -> str:
        return serialize_level_text(self)


def parse_level_text(text: str) -> TileGrid:
    """Parse `.lvl` text into a grid.

    Raises:
        LevelFormatError: on ragged rows or an unknown character; the message
            carries the 1-based line and column.
    """
    lines = [ln.rstrip("\r") for ln in text.split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise LevelFormatError("empty level text")
    width = len(lines[0])
    rows = []
    for i, line in enumerate(lines, start=1):
        if len(line) != width:
            raise LevelFormatError(f"line {i}: expected {width} columns, got {len(line)}")
        row = []
        for j, ch in enumerate(line, start=1):
            try:
                row.append(int(CHAR_TILES[ch]))
            except KeyError:
                raise LevelFormatError(f"unknown tile character {ch!r} at line {i}, column {j}") from None
        rows.append(row)
    if width == 0:
        raise LevelFormatError("level rows are empty")
    return TileGrid(rows)


def serialize_level_text(grid: TileGrid) -> str:
    chars = [TILE_CHARS[TileKind(k)] for k in range(len(TileKind))]
    return "\n".join("".join(chars[v] for v in row) for row in grid.array.tolist())


def read_level(path: str | Path) -> TileGrid:
    return parse_level_text(Path(path).read_text())


def write_level(path: str | Path, grid: TileGrid) -> None:
    Path(path).write_text(serialize_level_text(grid) + "\n")


@dataclass(frozen=True)
class Scene:
    id: str
    grid: TileGrid
    mechanics: frozenset[MechanicKind] = field(default_factory=frozenset)

    @property
    def width(self) -> int:
        return self.grid.width

    @property
    def height(self) -> int:
        return self.grid.height


@dataclass(frozen=True)
class Chromosome:
    """Ordered scene ids; the level is their left-to-right stitching."""

    scenes: tuple[str, ...]

    def __post_init__(self):
        if not isinstance(self.scenes, tuple):
            object.__setattr__(self, "scenes", tuple(self.scenes))

    def __len__(self) -> int:
        return len(self.scenes)

    def __iter__(self) -> Iterator[str]:
        return iter(self.scenes)

    def __getitem__(self, i):
        return self.scenes[i]


PAD_WIDTH = 3
PAD_GROUND_ROWS = 2


def _pad(height: int, marker: TileKind) -> np.ndarray:
    pad = np.zeros((height, PAD_WIDTH), dtype=np.int8)
    ground = min(PAD_GROUND_ROWS, height - 1)
    pad[height - ground :, :] = int(TileKind.GROUND)
    pad[height - ground - 1, 1] = int(marker)
    return pad


def stitch_scenes(scenes: Iterable[Scene]) -> TileGrid:
    """Concatenate scenes between a start pad (with Mario) and an exit pad (with the flag)."""
    scenes = list(scenes)
    if not scenes:
        raise ValueError("cannot assemble an empty chromosome")
    height = scenes[0].height
    for s in scenes:
        if s.height != height:
            raise ValueError(f"scene {s.id} has height {s.height}, expected {height}")
    parts = [_pad(height, TileKind.MARIO_START)]
    parts.extend(s.grid.array for s in scenes)
    parts.append(_pad(height, TileKind.FLAG))
    return TileGrid(np.concatenate(parts, axis=1))


def assemble_level(chromosome: Chromosome | Sequence[str], corpus) -> TileGrid:
    """Build the playable grid for a chromosome.

    Width is ``3 + sum(scene widths) + 3``. Scene columns are copied verbatim.

    Raises:
        ValueError: for an empty chromosome.
        CorpusMissError: if an id is not in ``corpus``.
    """
    ids = list(chromosome)
    if not ids:
        raise ValueError("cannot assemble an empty chromosome")
    scenes = []
    for sid in ids:
        try:
            scenes.append(corpus.scenes[sid])
        except KeyError:
            raise CorpusMissError(sid) from None
    return stitch_scenes(scenes)


def read_mechanic_sequence(path: str | Path) -> list[MechanicKind]:
    out = []
    for line in Path(path).read_text().splitlines():
        if line.strip() and not line.lstrip().startswith("#"):
            out.append(MechanicKind.from_label(line))
    return out


def format_mechanic_sequence(seq: Iterable[MechanicKind]) -> str:
    return "".join(MechanicKind(m).label + "\n" for m in seq)


def write_mechanic_sequence(path: str | Path, seq: Iterable[MechanicKind]) -> None:
    Path(path).write_text(format_mechanic_sequence(seq))
