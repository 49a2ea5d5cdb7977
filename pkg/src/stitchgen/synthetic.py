"""Hand-built scene library used when the published corpus is unavailable.

Every template is a small piece of level geometry that forces or strongly
affords a set of mechanics under the bundled physics and agent. Labels list
the mechanics the scene showcases; the scene may trigger others as well
(any clearing jump is also a Jump plus a height and length class, for
example). Scenes are drawn deterministically from a seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .level import MechanicKind as M
from .level import Scene, TileGrid, TileKind as T


@dataclass(frozen=True)
class SyntheticConfig:
    width: int = 16
    height: int = 14
    seed: int = 0
    variants: int = 3  # geometry variants drawn per template

    def __post_init__(self):
        if self.width < 12 or self.height < 10:
            raise ValueError("synthetic scenes need at least 12x10 tiles")
        if self.variants < 1:
            raise ValueError("variants must be >= 1")


class _Sketch:
    """Mutable scene canvas with two rows of ground."""

    def __init__(self, width: int, height: int):
        self.w = width
        self.h = height
        self.a = np.zeros((height, width), dtype=np.int8)
        self.floor = height - 2  # first ground row; feet rest at y == floor
        self.a[self.floor :, :] = T.GROUND

    def fill(self, r0, r1, c0, c1, kind):
        self.a[max(r0, 0) : r1 + 1, max(c0, 0) : c1 + 1] = kind
        return self

    def gap(self, c0, c1):
        return self.fill(self.floor, self.h - 1, c0, c1, T.EMPTY)

    def pillar(self, c0, c1, height, kind=T.SOLID_BLOCK):
        return self.fill(self.floor - height, self.floor - 1, c0, c1, kind)

    def pipe(self, c, height):
        self.fill(self.floor - height + 1, self.floor - 1, c, c + 1, T.PIPE_BODY)
        return self.fill(self.floor - height, self.floor - height, c, c + 1, T.PIPE_TOP)

    def roof(self, c0, c1, clearance, kind=T.SOLID_BLOCK):
        """Solid mass from the top down to ``clearance`` tiles above the floor."""
        return self.fill(0, self.floor - clearance - 1, c0, c1, kind)

    def put(self, r, c, kind):
        self.a[r, c] = kind
        return self

    def grid(self) -> TileGrid:
        return TileGrid(self.a)


def _flat(s: _Sketch, rng: random.Random, v: int):
    if v % 4 == 1:
        for c in rng.sample(range(1, s.w - 1), 4):
            s.put(rng.randint(1, 3), c, T.BRICK)
    elif v % 4 == 2:
        c = rng.randint(1, s.w - 6)
        s.fill(2, 2, c, c + 4, T.PLATFORM)
    elif v % 4 == 3:
        s.fill(s.floor, s.h - 1, 0, s.w - 1, T.SOLID_BLOCK)
    return frozenset()


def _gap(s, rng, v):
    width = 2 + v % 3
    c = rng.randint(3, s.w - width - 3)
    s.gap(c, c + width - 1)


def _wide_gap(s, rng, v):
    width = 5 + v % 2
    c = rng.randint(3, s.w - width - 3)
    s.gap(c, c + width - 1)


def _wall(s, rng, v):
    height = 3 + v % 2
    c = rng.randint(4, s.w - 5)
    if v % 2:
        s.pipe(c, height)
    else:
        s.pillar(c, c + 1, height)


def _tunnel_hop(s, rng, v):
    """Low corridor ending in a one-tile step: only a short, low hop gets through."""
    c0 = rng.randint(0, 3)
    c1 = s.w - rng.randint(2, 4)
    s.roof(c0, c1, 2)
    step = c1 - 1 - v % 2
    s.pillar(step, c1, 1)
    # headroom over the step, and a brick a big avatar can smash to climb it
    s.fill(s.floor - 3, s.floor - 3, step, c1, T.EMPTY)
    s.put(s.floor - 3, step - 1, T.BRICK)


def _ceiling_bump(kind):
    """Corridor whose ceiling holds ``kind`` tiles over a step, so the hop bumps one."""

    def build(s, rng, v):
        clearance = 3
        c0 = rng.randint(0, 2)
        c1 = s.w - rng.randint(2, 3)
        s.roof(c0, c1, clearance)
        step = rng.randint(c0 + 6, c1 - 3)
        s.pillar(step, step + 1, 1)
        row = s.floor - clearance - 1
        s.fill(row, row, step - 5, step, kind)

    return build


def _power_hall(s, rng, v):
    """Powerup over a step at the start of a low hall with goombas further on."""
    s.roof(0, s.w - 1, 3)
    step = rng.randint(4, 5)
    s.pillar(step, step + 1, 1)
    s.fill(s.floor - 4, s.floor - 4, step - 3, step, T.QUESTION_POWERUP)
    for c in (step + 5, step + 8):
        if c < s.w - 1:
            s.put(s.floor - 1, c, T.GOOMBA)


def _duct(s, rng, v):
    """One-tile crawlspace: a small avatar walks through, a big one is stuck."""
    a = rng.randint(2, 5)
    b = rng.randint(a + 4, s.w - 2)
    s.roof(a, b, 1)
    if v % 4 == 3:  # only the last label set carries coins
        s.fill(s.floor - 1, s.floor - 1, a + 1, b - 1, T.COIN)


def _coins(s, rng, v):
    c = rng.randint(1, 5)
    n = rng.randint(3, 6)
    s.fill(s.floor - 1, s.floor - 1, c, min(c + n, s.w - 2), T.COIN)


def _coin_gap(s, rng, v):
    width = 3 + v % 2
    c = rng.randint(4, s.w - width - 4)
    s.gap(c, c + width - 1)
    s.fill(s.floor - 1, s.floor - 1, c - 3, c - 1, T.COIN)


def _goombas(s, rng, v):
    for c in sorted(rng.sample(range(6, s.w - 1), 1 + v % 2)):
        s.put(s.floor - 1, c, T.GOOMBA)


def _goomba_hall(s, rng, v):
    """Goombas in a low hall: too little headroom to clear them, so they get stomped."""
    c0 = rng.randint(1, 3)
    s.roof(c0, s.w - 1, 3)
    first = rng.randint(c0 + 4, c0 + 6)
    for k in range(2 + v % 2):
        c = first + 3 * k
        if c < s.w - 1:
            s.put(s.floor - 1, c, T.GOOMBA)


def _koopa_hall(s, rng, v):
    """Koopa ahead of goombas in a low hall; the stomped shell slides into them."""
    s.roof(1, s.w - 1, 3 - v % 2)
    c = rng.randint(4, 5)
    s.put(s.floor - 1, c, T.KOOPA)
    for g in (c + 5 + v % 2, c + 8 + v % 2):
        if g < s.w - 1:
            s.put(s.floor - 1, g, T.GOOMBA)


def _ledge_walker(kind):
    """Enemy on a raised ledge that walks off into a pit before the avatar arrives."""

    def build(s, rng, v):
        p = rng.randint(4, 6)
        s.gap(p, p + 2)
        s.pillar(p + 3, p + 6, 2)
        s.put(s.floor - 3, p + 3, kind)

    return build


def _edge_gap(s, rng, v):
    """Gap running into a scene edge; two of these side by side may be too wide to clear."""
    width = 5 + v % 2
    if v % 2:
        s.gap(0, width - 1)
    else:
        s.gap(s.w - width, s.w - 1)


def _spiky_tunnel(s, rng, v):
    """Spiky walking through a low corridor; a small avatar hops it, a big one cannot."""
    c0 = rng.randint(1, 3)
    s.roof(c0, s.w - rng.randint(2, 3), 2)
    s.put(s.floor - 1, rng.randint(c0 + 8, s.w - 4), T.SPIKY)


def _rise(s, rng, v):
    """Stairs up to a plateau that runs off the right edge."""
    a = rng.randint(3, 6)
    s.pillar(a, a + 1, 2)
    s.pillar(a + 2, s.w - 1, 4 + v % 2)


def _plateau(s, rng, v):
    """High ground from the left edge that steps back down."""
    b = rng.randint(6, 11)
    s.pillar(0, b, 4)
    s.pillar(b + 1, b + 2, 2)
    if v % 2:
        s.put(s.floor - 5, rng.randint(2, b - 1), T.GOOMBA)


def _high_pass(s, rng, v):
    """Raised ground across the whole scene with a pit in it."""
    s.pillar(0, s.w - 1, 4)
    p = rng.randint(4, s.w - 8)
    s.fill(s.floor - 4, s.h - 1, p, p + 2, T.EMPTY)
    if v % 3 == 1:
        s.fill(s.floor - 5, s.floor - 5, p + 5, s.w - 1, T.COIN)


def _spiky_hop(s, rng, v):
    c = rng.randint(6, s.w - 3)
    s.put(s.floor - 1, c, T.SPIKY)


# (name, builder, label sets to emit for each geometry variant)
TEMPLATES = [
    ("flat", _flat, [()]),
    ("gap", _gap, [(M.JUMP,), (M.JUMP, M.HIGH_JUMP, M.LONG_JUMP), (M.JUMP, M.LONG_JUMP)]),
    ("widegap", _wide_gap, [(M.LONG_JUMP,), (M.JUMP, M.LONG_JUMP)]),
    ("wall", _wall, [(M.HIGH_JUMP,), (M.JUMP, M.HIGH_JUMP), (M.HIGH_JUMP, M.LONG_JUMP)]),
    ("hop", _tunnel_hop, [(M.LOW_JUMP,), (M.SHORT_JUMP,), (M.LOW_JUMP, M.SHORT_JUMP), (M.JUMP, M.LOW_JUMP, M.SHORT_JUMP)]),
    ("brick", _ceiling_bump(T.BRICK), [(M.BRICK_BLOCK,), (M.BRICK_BLOCK, M.HIGH_JUMP), (M.JUMP, M.BRICK_BLOCK)]),
    ("qblock", _ceiling_bump(T.QUESTION_COIN), [(M.QUESTION_BLOCK,), (M.QUESTION_BLOCK, M.COIN_COLLECT), (M.JUMP, M.QUESTION_BLOCK, M.COIN_COLLECT)]),
    ("power", _ceiling_bump(T.QUESTION_POWERUP), [(M.MODE_CHANGE,), (M.QUESTION_BLOCK, M.MODE_CHANGE), (M.QUESTION_BLOCK,), (M.JUMP, M.MODE_CHANGE), (M.JUMP, M.QUESTION_BLOCK), (M.JUMP, M.QUESTION_BLOCK, M.MODE_CHANGE)]),
    ("powerhall", _power_hall, [(M.MODE_CHANGE, M.STOMP_KILL), (M.QUESTION_BLOCK, M.MODE_CHANGE, M.STOMP_KILL), (M.STOMP_KILL,)]),
    ("duct", _duct, [(), (), (), (M.COIN_COLLECT,)]),
    ("coins", _coins, [(M.COIN_COLLECT,)]),
    ("coingap", _coin_gap, [(M.COIN_COLLECT, M.JUMP), (M.COIN_COLLECT, M.JUMP, M.LONG_JUMP)]),
    ("goomba", _goombas, [(M.JUMP,)]),
    ("stomp", _goomba_hall, [(M.STOMP_KILL,), (M.JUMP, M.STOMP_KILL)]),
    ("shell", _koopa_hall, [(M.SHELL_KILL,), (M.STOMP_KILL, M.SHELL_KILL), (M.JUMP, M.STOMP_KILL, M.SHELL_KILL)]),
    ("ledge", _ledge_walker(T.GOOMBA), [(M.FALL_KILL,), (M.FALL_KILL, M.JUMP)]),
    ("ledgek", _ledge_walker(T.KOOPA), [(M.FALL_KILL, M.LONG_JUMP)]),
    ("edgegap", _edge_gap, [(M.LONG_JUMP,), (M.JUMP, M.LONG_JUMP)]),
    ("spikyhall", _spiky_tunnel, [(M.LOW_JUMP,), (M.JUMP, M.SHORT_JUMP)]),
    ("rise", _rise, [(M.HIGH_JUMP,), (M.JUMP, M.HIGH_JUMP), (M.JUMP, M.HIGH_JUMP, M.LONG_JUMP)]),
    ("plateau", _plateau, [(M.HIGH_JUMP,), (M.JUMP, M.HIGH_JUMP)]),
    ("highpass", _high_pass, [(M.HIGH_JUMP,), (M.COIN_COLLECT, M.HIGH_JUMP), (M.JUMP, M.LONG_JUMP)]),
    ("spiky", _spiky_hop, [(M.JUMP,), (M.JUMP, M.HIGH_JUMP)]),
]


def template_scenes(config: SyntheticConfig = SyntheticConfig()):
    """Yield ``(template name, Scene)`` pairs in a fixed order."""
    rng = random.Random(config.seed)
    for name, build, label_sets in TEMPLATES:
        seen = set()
        for v in range(config.variants):
            for k, labels in enumerate(label_sets):
                for _attempt in range(8):
                    s = _Sketch(config.width, config.height)
                    build(s, rng, v * len(label_sets) + k)
                    grid = s.grid()
                    if grid not in seen:
                        break
                seen.add(grid)
                sid = f"{name}-{v}{k}"
                yield name, Scene(sid, grid, frozenset(labels))


def build_synthetic_corpus(config: SyntheticConfig = SyntheticConfig()) -> Corpus:
    """Deterministic synthetic corpus covering every mechanic as a singleton label."""
    return Corpus.from_scenes(scene for _name, scene in template_scenes(config))
