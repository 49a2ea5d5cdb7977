"""Python-facing simulator: configs, state wrappers, episodes and traces."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from ..level import MechanicKind, TileGrid, TileKind
from . import kernel as K


class MalformedLevelError(ValueError):
    """Raised when a level lacks a Mario start or a flag."""


@dataclass(frozen=True)
class SimConfig:
    """Physics constants, in tiles and ticks.

    ``max_run_speed`` is the walking cap; holding run doubles it.
    ``max_ticks=None`` means 30 ticks per level column.
    """

    gravity: float = 0.12
    jump_impulse: float = 0.9
    max_run_speed: float = 0.3
    max_ticks: int | None = None
    high_jump_y_threshold: float = 2.0
    long_jump_x_threshold: float = 4.0
    jump_hold_ticks: int = 8
    held_gravity_scale: float = 0.75
    jump_cut_speed: float = 0.3
    acceleration: float = 0.04
    friction: float = 0.05
    max_fall_speed: float = 0.9
    enemy_speed: float = 0.06
    shell_speed: float = 0.8
    mushroom_speed: float = 0.12
    stomp_bounce: float = 0.5
    invulnerable_ticks: int = 30
    activation_distance: float = 18.0
    avatar_width: float = 0.75
    small_height: float = 0.9
    big_height: float = 1.8
    entity_size: float = 0.875

    def __post_init__(self):
        for name in ("gravity", "jump_impulse", "max_run_speed", "high_jump_y_threshold",
                     "long_jump_x_threshold"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_ticks is not None and self.max_ticks <= 0:
            raise ValueError("max_ticks must be positive")
        if self.max_fall_speed >= 1.0 or 2 * self.max_run_speed >= 1.0:
            raise ValueError("speeds must stay below one tile per tick")

    @property
    def top_speed(self) -> float:
        return 2.0 * self.max_run_speed

    def tick_budget(self, level_width: int) -> int:
        return self.max_ticks if self.max_ticks is not None else 30 * level_width

    def as_array(self) -> np.ndarray:
        cfg = np.zeros(K.NC)
        cfg[K.C_GRAVITY] = self.gravity
        cfg[K.C_IMPULSE] = self.jump_impulse
        cfg[K.C_WALK] = self.max_run_speed
        cfg[K.C_HIGH] = self.high_jump_y_threshold
        cfg[K.C_LONG] = self.long_jump_x_threshold
        cfg[K.C_HOLD_TICKS] = self.jump_hold_ticks
        cfg[K.C_HELD_SCALE] = self.held_gravity_scale
        cfg[K.C_CUT] = self.jump_cut_speed
        cfg[K.C_ACCEL] = self.acceleration
        cfg[K.C_FRICTION] = self.friction
        cfg[K.C_MAX_FALL] = self.max_fall_speed
        cfg[K.C_ENEMY_SPEED] = self.enemy_speed
        cfg[K.C_SHELL_SPEED] = self.shell_speed
        cfg[K.C_MUSHROOM_SPEED] = self.mushroom_speed
        cfg[K.C_BOUNCE] = self.stomp_bounce
        cfg[K.C_INV_TICKS] = self.invulnerable_ticks
        cfg[K.C_ACTIVATION] = self.activation_distance
        cfg[K.C_AV_WIDTH] = self.avatar_width
        cfg[K.C_SMALL_H] = self.small_height
        cfg[K.C_BIG_H] = self.big_height
        cfg[K.C_ENT_SIZE] = self.entity_size
        return cfg


class Mode(Enum):
    SMALL = 0
    BIG = 1
    FIRE = 2


class Outcome(Enum):
    RUNNING = K.RUNNING
    WON = K.WON
    LOST = K.LOST


@dataclass(frozen=True)
class Action:
    left: bool = False
    right: bool = False
    jump: bool = False
    run: bool = False

    @property
    def bits(self) -> int:
        return (K.LEFT * self.left) | (K.RIGHT * self.right) | (K.JUMP * self.jump) | (K.RUN * self.run)

    @classmethod
    def from_bits(cls, bits: int) -> "Action":
        return cls(bool(bits & K.LEFT), bool(bits & K.RIGHT), bool(bits & K.JUMP), bool(bits & K.RUN))


@dataclass(frozen=True)
class AvatarState:
    x: float
    y: float
    vx: float
    vy: float
    mode: Mode
    on_ground: bool
    jump_origin: tuple[float, float] | None
    width: float
    height: float

    def box(self) -> tuple[float, float, float, float]:
        """``(left, top, right, bottom)`` in tiles."""
        return (self.x, self.y - self.height, self.x + self.width, self.y)


@dataclass(frozen=True)
class MechanicEvent:
    kind: MechanicKind
    tick: int
    x: float


@dataclass(frozen=True)
class Playtrace:
    events: tuple[MechanicEvent, ...]
    won: bool
    distance: float
    ticks_used: int
    actions: tuple[int, ...] = field(default=(), compare=False, repr=False)  # per-tick action bits

    @property
    def mechanics(self) -> list[MechanicKind]:
        return [e.kind for e in self.events]

    def dump(self) -> str:
        """One ``tick,kind,x`` line per event."""
        return "".join(f"{e.tick},{e.kind.label},{e.x:.3f}\n" for e in self.events)


def events_from_array(rows: np.ndarray) -> tuple[MechanicEvent, ...]:
    """Convert kernel event rows, ordering same-tick events by mechanic code."""
    items = sorted(
        ((int(r[1]), int(r[0]), float(r[2])) for r in rows),
        key=lambda t: (t[0], t[1]),
    )
    return tuple(MechanicEvent(MechanicKind(k), t, x) for t, k, x in items)


def classify_jump(
    origin: tuple[float, float],
    landing: tuple[float, float],
    apex_rise: float,
    config: SimConfig,
) -> set[MechanicKind]:
    """Mechanics fired when an airborne jump phase lands."""
    kinds = {MechanicKind.JUMP}
    kinds.add(MechanicKind.HIGH_JUMP if apex_rise > config.high_jump_y_threshold else MechanicKind.LOW_JUMP)
    dx = abs(landing[0] - origin[0])
    kinds.add(MechanicKind.LONG_JUMP if dx > config.long_jump_x_threshold else MechanicKind.SHORT_JUMP)
    return kinds


_ENEMY_KIND = {TileKind.GOOMBA: K.K_GOOMBA, TileKind.KOOPA: K.K_KOOPA, TileKind.SPIKY: K.K_SPIKY}
_STRIPPED = (TileKind.GOOMBA, TileKind.KOOPA, TileKind.SPIKY, TileKind.FLAG, TileKind.MARIO_START)


def flag_column(grid: TileGrid) -> int:
    cols = np.nonzero((grid.array == int(TileKind.FLAG)).any(axis=0))[0]
    if cols.size == 0:
        raise MalformedLevelError("level has no flag")
    return int(cols[0])


def level_reach(grid: TileGrid) -> float:
    """Distance from x=0 at which the level counts as beaten."""
    return float(flag_column(grid))


@dataclass
class SimState:
    """Mutable simulation state backed by kernel arrays."""

    grid: np.ndarray
    avatar_vec: np.ndarray
    entities: np.ndarray
    config: SimConfig
    cfg: np.ndarray = field(repr=False)

    @classmethod
    def from_level(cls, level: TileGrid, config: SimConfig | None = None) -> "SimState":
        config = config or SimConfig()
        arr = level.array
        starts = np.argwhere(arr == int(TileKind.MARIO_START))
        if starts.size == 0:
            raise MalformedLevelError("level has no Mario start")
        fx = flag_column(level)
        grid = arr.astype(np.int8).copy()
        for kind in _STRIPPED:
            grid[grid == int(kind)] = int(TileKind.EMPTY)
        r, c = (int(v) for v in starts[0])
        av = np.zeros(K.NA)
        av[K.A_X] = c + 0.5 * (1.0 - config.avatar_width)
        av[K.A_Y] = r + 1.0
        av[K.A_FLAGX] = fx
        av[K.A_FURTHEST] = min(av[K.A_X], fx)
        av[K.A_MAXTICKS] = config.tick_budget(level.width)
        ents = []
        pad = 0.5 * (1.0 - config.entity_size)
        for (er, ec) in np.argwhere(np.isin(arr, [int(k) for k in _ENEMY_KIND])):
            kind = _ENEMY_KIND[TileKind(int(arr[er, ec]))]
            ents.append([kind, ec + pad, er + 1.0, -config.enemy_speed, 0.0, K.S_DORMANT, 0.0])
        for _ in range(level.count(TileKind.QUESTION_POWERUP)):
            ents.append([K.K_MUSHROOM, 0.0, 0.0, 0.0, 0.0, K.S_HIDDEN, 0.0])
        ent_arr = np.array(ents, dtype=np.float64).reshape(-1, K.NE_COLS)
        return cls(np.ascontiguousarray(grid), av, ent_arr, config, config.as_array())

    def copy(self) -> "SimState":
        return SimState(self.grid.copy(), self.avatar_vec.copy(), self.entities.copy(),
                        self.config, self.cfg)

    @property
    def tick(self) -> int:
        return int(self.avatar_vec[K.A_TICK])

    @property
    def outcome(self) -> Outcome:
        return Outcome(int(self.avatar_vec[K.A_STATUS]))

    @property
    def terminated(self) -> bool:
        return self.outcome is not Outcome.RUNNING

    @property
    def avatar(self) -> AvatarState:
        a = self.avatar_vec
        mode = Mode(int(a[K.A_MODE]))
        jumping = a[K.A_JUMPING] > 0.5
        return AvatarState(
            x=float(a[K.A_X]),
            y=float(a[K.A_Y]),
            vx=float(a[K.A_VX]),
            vy=float(a[K.A_VY]),
            mode=mode,
            on_ground=bool(a[K.A_GROUND] > 0.5),
            jump_origin=(float(a[K.A_OX]), float(a[K.A_OY])) if jumping else None,
            width=self.config.avatar_width,
            height=self.config.small_height if mode is Mode.SMALL else self.config.big_height,
        )

    @property
    def furthest(self) -> float:
        return float(self.avatar_vec[K.A_FURTHEST])

    @property
    def alive_enemies(self) -> int:
        e = self.entities
        mask = (e[:, K.E_KIND] != K.K_MUSHROOM) & (e[:, K.E_STATE] != K.S_DEAD)
        return int(mask.sum())


ActionLike = Action | int


def _bits(action: ActionLike) -> int:
    return action.bits if isinstance(action, Action) else int(action)


def step(state: SimState, action: ActionLike) -> tuple[SimState, list[MechanicEvent]]:
    """Advance ``state`` one tick in place and return it with the tick's events."""
    ev = np.zeros((64, 3))
    grid, _owned, nev = K.step(state.grid, True, state.avatar_vec, state.entities,
                               _bits(action), state.cfg, ev, 0)
    state.grid = grid
    return state, list(events_from_array(ev[:nev]))


Policy = Callable[[SimState], ActionLike] | Sequence[ActionLike]


def run_episode(grid: TileGrid, policy: Policy, config: SimConfig | None = None) -> Playtrace:
    """Play ``policy`` until won, lost or out of ticks.

    ``policy`` is either a callable returning the next action for a state or
    a finite action sequence (the episode then ends when it is exhausted, and
    counts as lost if still running).
    """
    state = SimState.from_level(grid, config)
    if callable(policy):
        events: list[MechanicEvent] = []
        while not state.terminated:
            state, fired = step(state, policy(state))
            events.extend(fired)
        return _trace(state, tuple(events))
    actions = np.array([_bits(a) for a in policy], dtype=np.int64)
    _g, av, _e, ev, nev = K.run_actions(state.grid, state.avatar_vec, state.entities,
                                        actions, state.cfg, max(64, 12 * len(actions) + 64))
    won = int(av[K.A_STATUS]) == K.WON
    return Playtrace(events_from_array(ev), won, float(av[K.A_FURTHEST]), int(av[K.A_TICK]))


def _trace(state: SimState, events: tuple[MechanicEvent, ...]) -> Playtrace:
    ordered = tuple(sorted(events, key=lambda e: (e.tick, int(e.kind))))
    return Playtrace(ordered, state.outcome is Outcome.WON, state.furthest, state.tick)


def hold_right(run: bool = True) -> Callable[[SimState], Action]:
    action = Action(right=True, run=run)
    return lambda _state: action
