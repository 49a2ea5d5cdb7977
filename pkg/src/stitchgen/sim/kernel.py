"""Compiled tile-physics step and A* planner.

State lives in flat arrays so the planner can snapshot nodes cheaply:

* ``grid``: ``(H, W)`` int8 tile codes (markers already stripped).
* ``av``: avatar vector indexed by the ``A_*`` constants.
* ``ents``: ``(n, 7)`` entity table indexed by the ``E_*`` constants.
* ``cfg``: physics constants indexed by the ``C_*`` constants.

Coordinates are in tiles, ``y`` grows downward and the avatar's ``y`` is its
feet. Grids are copy-on-write inside the planner: :func:`step` copies before
its first write unless told the grid is already owned.
"""

from __future__ import annotations

import heapq
import math

import numpy as np
from numba import njit, types
from numba.typed import Dict, List

_SKEY = types.UniTuple(types.int64, 6)

# avatar slots
A_X = 0
A_Y = 1
A_VX = 2
A_VY = 3
A_MODE = 4
A_GROUND = 5
A_JUMPING = 6
A_OX = 7
A_OY = 8
A_APEX = 9
A_HOLD = 10
A_INV = 11
A_STATUS = 12
A_TICK = 13
A_FURTHEST = 14
A_FLAGX = 15
A_JUMPS = 16
A_MAXTICKS = 17
A_PREVJUMP = 18
NA = 19

RUNNING = 0
WON = 1
LOST = 2

# entity columns
E_KIND = 0
E_X = 1
E_Y = 2
E_VX = 3
E_VY = 4
E_STATE = 5
E_TIMER = 6
NE_COLS = 7

K_GOOMBA = 0
K_KOOPA = 1
K_SPIKY = 2
K_SHELL = 3
K_MUSHROOM = 4

S_DORMANT = 0
S_ACTIVE = 1
S_DEAD = 2
S_HIDDEN = 3

# cfg slots
C_GRAVITY = 0
C_IMPULSE = 1
C_WALK = 2
C_HIGH = 3
C_LONG = 4
C_HOLD_TICKS = 5
C_HELD_SCALE = 6
C_CUT = 7
C_ACCEL = 8
C_FRICTION = 9
C_MAX_FALL = 10
C_ENEMY_SPEED = 11
C_SHELL_SPEED = 12
C_MUSHROOM_SPEED = 13
C_BOUNCE = 14
C_INV_TICKS = 15
C_ACTIVATION = 16
C_AV_WIDTH = 17
C_SMALL_H = 18
C_BIG_H = 19
C_ENT_SIZE = 20
NC = 21

# action bits
LEFT = 1
RIGHT = 2
JUMP = 4
RUN = 8

# mechanic codes (mirror level.MechanicKind)
M_JUMP = 0
M_LOW = 1
M_HIGH = 2
M_SHORT = 3
M_LONG = 4
M_STOMP = 5
M_SHELL = 6
M_FALL = 7
M_MODE = 8
M_COIN = 9
M_BRICK = 10
M_QUESTION = 11

# tile codes (mirror level.TileKind)
T_EMPTY = 0
T_BRICK = 2
T_QCOIN = 3
T_QPOWER = 4
T_COIN = 5
T_SOLID = 8
T_PLATFORM = 9

SOLID = np.array([0, 1, 1, 1, 1, 0, 1, 1, 1, 0, 0, 0, 0, 0, 0], dtype=np.bool_)

EPS = 1e-6


@njit(cache=True, inline="always")
def _solid(grid, r, c):
    if c < 0:
        return True
    if r < 0 or r >= grid.shape[0] or c >= grid.shape[1]:
        return False
    return SOLID[grid[r, c]]


@njit(cache=True, inline="always")
def _standable(grid, r, c):
    if c < 0:
        return True
    if r < 0 or r >= grid.shape[0] or c >= grid.shape[1]:
        return False
    t = grid[r, c]
    return SOLID[t] or t == T_PLATFORM


@njit(cache=True, inline="always")
def _emit(ev, nev, kind, tick, x):
    if nev < ev.shape[0]:
        ev[nev, 0] = kind
        ev[nev, 1] = tick
        ev[nev, 2] = x
    return nev + 1


@njit(cache=True, inline="always")
def _height(av, cfg):
    return cfg[C_SMALL_H] if av[A_MODE] < 0.5 else cfg[C_BIG_H]


@njit(cache=True)
def _headroom(grid, x, y, h, w):
    r0 = int(math.floor(y - h + EPS))
    r1 = int(math.floor(y - EPS))
    c0 = int(math.floor(x + EPS))
    c1 = int(math.floor(x + w - EPS))
    for r in range(r0, r1 + 1):
        for c in range(c0, c1 + 1):
            if _solid(grid, r, c):
                return False
    return True


@njit(cache=True)
def _grow_fit(grid, x, y, h, w):
    """Feet y at which a box of height ``h`` fits, pushing down below a ceiling; -1 if none."""
    if _headroom(grid, x, y, h, w):
        return y
    c0 = int(math.floor(x + EPS))
    c1 = int(math.floor(x + w - EPS))
    low = -1
    for r in range(int(math.floor(y - h + EPS)), int(math.floor(y - EPS)) + 1):
        for c in range(c0, c1 + 1):
            if _solid(grid, r, c):
                low = r
    ny = low + 1.0 + h
    if ny - y > h or not _headroom(grid, x, ny, h, w):
        return -1.0
    return ny


@njit(cache=True)
def _move_body(grid, x, y, vx, vy, w, h):
    """Axis-separated move of a box; returns (x, y, vx, vy, landed, bump_row)."""
    nx = x + vx
    if nx < 0.0:
        nx = 0.0
        vx = 0.0
    r0 = int(math.floor(y - h + EPS))
    r1 = int(math.floor(y - EPS))
    if vx > 0.0:
        c = int(math.floor(nx + w - EPS))
        for r in range(r0, r1 + 1):
            if _solid(grid, r, c):
                nx = c - w
                vx = 0.0
                break
    elif vx < 0.0:
        c = int(math.floor(nx))
        for r in range(r0, r1 + 1):
            if _solid(grid, r, c):
                nx = c + 1.0
                vx = 0.0
                break
    c0 = int(math.floor(nx + EPS))
    c1 = int(math.floor(nx + w - EPS))
    ny = y + vy
    landed = False
    bump_row = -1
    if vy > 0.0:
        r = int(math.floor(ny - EPS))
        if y <= r + EPS:
            for c in range(c0, c1 + 1):
                if _standable(grid, r, c):
                    ny = float(r)
                    vy = 0.0
                    landed = True
                    break
    elif vy < 0.0:
        r = int(math.floor(ny - h))
        if y - h >= r + 1.0 - EPS:
            for c in range(c0, c1 + 1):
                if _solid(grid, r, c):
                    ny = r + 1.0 + h
                    vy = 0.0
                    bump_row = r
                    break
    return nx, ny, vx, vy, landed, bump_row


@njit(cache=True, inline="always")
def _overlap(ax, ay, aw, ah, bx, by, bw, bh):
    return ax < bx + bw and bx < ax + aw and ay - ah < by and by - bh < ay


@njit(cache=True)
def _damage(av, cfg, ev, nev, tick):
    if av[A_INV] > 0:
        return nev
    if av[A_MODE] > 0.5:
        av[A_MODE] -= 1.0
        av[A_INV] = cfg[C_INV_TICKS]
        nev = _emit(ev, nev, M_MODE, tick, av[A_X])
    else:
        av[A_STATUS] = LOST
    return nev


@njit(cache=True)
def step(grid, owned, av, ents, action, cfg, ev, nev):
    """Advance one tick in place. Returns ``(grid, owned, nev)``."""
    if av[A_STATUS] != RUNNING:
        return grid, owned, nev
    height, width = grid.shape
    tick = av[A_TICK]
    go_left = (action & LEFT) != 0
    go_right = (action & RIGHT) != 0
    hold_jump = (action & JUMP) != 0
    run = (action & RUN) != 0
    w = cfg[C_AV_WIDTH]

    # horizontal intent
    vx = av[A_VX]
    cap = cfg[C_WALK] * (2.0 if run else 1.0)
    direction = (1 if go_right else 0) - (1 if go_left else 0)
    if direction != 0:
        target = direction * cap
        if vx < target:
            vx = min(vx + cfg[C_ACCEL], target)
        elif vx > target:
            vx = max(vx - cfg[C_ACCEL], target)
    elif vx > 0.0:
        vx = max(0.0, vx - cfg[C_FRICTION])
    elif vx < 0.0:
        vx = min(0.0, vx + cfg[C_FRICTION])

    # vertical intent
    vy = av[A_VY]
    pressed = hold_jump and av[A_PREVJUMP] < 0.5
    av[A_PREVJUMP] = 1.0 if hold_jump else 0.0
    if av[A_GROUND] > 0.5 and pressed:
        vy = -cfg[C_IMPULSE]
        av[A_GROUND] = 0.0
        av[A_JUMPING] = 1.0
        av[A_OX] = av[A_X]
        av[A_OY] = av[A_Y]
        av[A_APEX] = av[A_Y]
        av[A_HOLD] = 0.0
        av[A_JUMPS] += 1.0
    g = cfg[C_GRAVITY]
    if av[A_JUMPING] > 0.5 and vy < 0.0:
        if hold_jump and av[A_HOLD] < cfg[C_HOLD_TICKS]:
            g = g * cfg[C_HELD_SCALE]
            av[A_HOLD] += 1.0
        elif not hold_jump:
            av[A_HOLD] = cfg[C_HOLD_TICKS]
            if vy < -cfg[C_CUT]:
                vy = -cfg[C_CUT]
    vy = min(vy + g, cfg[C_MAX_FALL])

    h = _height(av, cfg)
    prev_y = av[A_Y]
    falling = vy > 0.0
    nx, ny, vx, vy, landed, bump_row = _move_body(grid, av[A_X], av[A_Y], vx, vy, w, h)
    av[A_X] = nx
    av[A_Y] = ny
    av[A_VX] = vx
    av[A_VY] = vy
    av[A_GROUND] = 1.0 if landed else 0.0

    if bump_row >= 0:
        c0 = int(math.floor(nx + EPS))
        c1 = int(math.floor(nx + w - EPS))
        cc = int(math.floor(nx + 0.5 * w))
        if not _solid(grid, bump_row, cc):
            cc = c0 if _solid(grid, bump_row, c0) else c1
        if 0 <= cc < width and 0 <= bump_row < height:
            t = grid[bump_row, cc]
            if t == T_BRICK:
                nev = _emit(ev, nev, M_BRICK, tick, nx)
                if av[A_MODE] > 0.5:
                    if not owned:
                        grid = grid.copy()
                        owned = True
                    grid[bump_row, cc] = T_EMPTY
            elif t == T_QCOIN or t == T_QPOWER:
                if not owned:
                    grid = grid.copy()
                    owned = True
                grid[bump_row, cc] = T_SOLID
                nev = _emit(ev, nev, M_QUESTION, tick, nx)
                if t == T_QCOIN:
                    nev = _emit(ev, nev, M_COIN, tick, nx)
                else:
                    for i in range(ents.shape[0]):
                        if ents[i, E_KIND] == K_MUSHROOM and ents[i, E_STATE] == S_HIDDEN:
                            ents[i, E_STATE] = S_ACTIVE
                            # the item drops out underneath, into the bumping avatar
                            ents[i, E_X] = cc + 0.5 * (1.0 - cfg[C_ENT_SIZE])
                            ents[i, E_Y] = bump_row + 1.0 + cfg[C_ENT_SIZE]
                            ents[i, E_VX] = cfg[C_MUSHROOM_SPEED]
                            ents[i, E_VY] = 0.0
                            break

    if av[A_JUMPING] > 0.5:
        if ny < av[A_APEX]:
            av[A_APEX] = ny
        if landed:
            av[A_JUMPING] = 0.0
            nev = _emit(ev, nev, M_JUMP, tick, nx)
            rise = av[A_OY] - av[A_APEX]
            nev = _emit(ev, nev, M_HIGH if rise > cfg[C_HIGH] else M_LOW, tick, nx)
            dx = abs(nx - av[A_OX])
            nev = _emit(ev, nev, M_LONG if dx > cfg[C_LONG] else M_SHORT, tick, nx)

    # coins
    r0 = int(math.floor(ny - h + EPS))
    r1 = int(math.floor(ny - EPS))
    c0 = int(math.floor(nx + EPS))
    c1 = int(math.floor(nx + w - EPS))
    for r in range(max(r0, 0), min(r1, height - 1) + 1):
        for c in range(max(c0, 0), min(c1, width - 1) + 1):
            if grid[r, c] == T_COIN:
                if not owned:
                    grid = grid.copy()
                    owned = True
                grid[r, c] = T_EMPTY
                nev = _emit(ev, nev, M_COIN, tick, nx)

    if ny - h > height:
        av[A_STATUS] = LOST

    # entities
    es = cfg[C_ENT_SIZE]
    for i in range(ents.shape[0]):
        st = ents[i, E_STATE]
        if st == S_DEAD or st == S_HIDDEN:
            continue
        if st == S_DORMANT:
            if abs(ents[i, E_X] - nx) <= cfg[C_ACTIVATION]:
                ents[i, E_STATE] = S_ACTIVE
            else:
                continue
        elif ents[i, E_X] < nx - cfg[C_ACTIVATION]:
            # left far behind: despawn quietly, like an off-screen sprite
            ents[i, E_STATE] = S_DEAD
            continue
        kind = ents[i, E_KIND]
        if ents[i, E_TIMER] > 0:
            ents[i, E_TIMER] -= 1.0
        evy = min(ents[i, E_VY] + cfg[C_GRAVITY], cfg[C_MAX_FALL])
        evx = ents[i, E_VX]
        ex, ey, nvx, evy, elanded, _b = _move_body(grid, ents[i, E_X], ents[i, E_Y], evx, evy, es, es)
        if nvx == 0.0 and evx != 0.0:
            nvx = -evx
        ents[i, E_X] = ex
        ents[i, E_Y] = ey
        ents[i, E_VX] = nvx
        ents[i, E_VY] = evy
        if ey - es > height:
            ents[i, E_STATE] = S_DEAD
            if kind == K_GOOMBA or kind == K_KOOPA or kind == K_SPIKY:
                nev = _emit(ev, nev, M_FALL, tick, ex)
            continue
        if av[A_STATUS] != RUNNING:
            continue
        h = _height(av, cfg)
        if not _overlap(nx, ny, w, h, ex, ey, es, es):
            continue
        stomp = falling and prev_y <= ey - es + 0.5
        if kind == K_MUSHROOM:
            if av[A_MODE] < 1.5:
                if av[A_MODE] < 0.5:
                    gy = _grow_fit(grid, nx, ny, cfg[C_BIG_H], w)
                    if gy < 0.0:
                        continue
                    ny = gy
                    av[A_Y] = gy
                av[A_MODE] += 1.0
                nev = _emit(ev, nev, M_MODE, tick, nx)
            ents[i, E_STATE] = S_DEAD
        elif kind == K_SPIKY:
            nev = _damage(av, cfg, ev, nev, tick)
        elif kind == K_GOOMBA or kind == K_KOOPA:
            if stomp:
                if kind == K_GOOMBA:
                    ents[i, E_STATE] = S_DEAD
                else:
                    # the stomp knocks the shell sliding the way the avatar travels
                    ents[i, E_KIND] = K_SHELL
                    if av[A_VX] > 0.05:
                        ents[i, E_VX] = cfg[C_SHELL_SPEED]
                    elif av[A_VX] < -0.05:
                        ents[i, E_VX] = -cfg[C_SHELL_SPEED]
                    else:
                        ents[i, E_VX] = 0.0
                    ents[i, E_TIMER] = 6.0
                nev = _emit(ev, nev, M_STOMP, tick, nx)
                av[A_VY] = -cfg[C_BOUNCE]
                av[A_GROUND] = 0.0
            else:
                nev = _damage(av, cfg, ev, nev, tick)
        elif kind == K_SHELL:
            if ents[i, E_TIMER] > 0:
                continue
            if ents[i, E_VX] == 0.0:
                push = 1.0 if nx + 0.5 * w <= ex + 0.5 * es else -1.0
                ents[i, E_VX] = push * cfg[C_SHELL_SPEED]
                ents[i, E_TIMER] = 8.0
                if stomp:
                    av[A_VY] = -cfg[C_BOUNCE]
                    av[A_GROUND] = 0.0
            elif stomp:
                ents[i, E_VX] = 0.0
                ents[i, E_TIMER] = 6.0
                av[A_VY] = -cfg[C_BOUNCE]
                av[A_GROUND] = 0.0
            else:
                nev = _damage(av, cfg, ev, nev, tick)

    # moving shells
    for i in range(ents.shape[0]):
        if ents[i, E_KIND] != K_SHELL or ents[i, E_STATE] != S_ACTIVE or ents[i, E_VX] == 0.0:
            continue
        for j in range(ents.shape[0]):
            if j == i or ents[j, E_STATE] != S_ACTIVE:
                continue
            kj = ents[j, E_KIND]
            if kj == K_MUSHROOM:
                continue
            if _overlap(ents[i, E_X], ents[i, E_Y], es, es, ents[j, E_X], ents[j, E_Y], es, es):
                ents[j, E_STATE] = S_DEAD
                if kj != K_SHELL:
                    nev = _emit(ev, nev, M_SHELL, tick, ents[j, E_X])

    if av[A_INV] > 0:
        av[A_INV] -= 1.0
    fx = av[A_FLAGX]
    if av[A_STATUS] == RUNNING and av[A_X] >= fx:
        av[A_STATUS] = WON
    reach = min(av[A_X], fx)
    if av[A_STATUS] == WON:
        reach = fx
    if reach > av[A_FURTHEST]:
        av[A_FURTHEST] = reach
    av[A_TICK] = tick + 1.0
    if av[A_STATUS] == RUNNING and av[A_TICK] >= av[A_MAXTICKS]:
        av[A_STATUS] = LOST
    return grid, owned, nev


@njit(cache=True)
def run_actions(grid, av, ents, actions, cfg, ev_cap):
    """Replay a fixed action list from the given state (copied). Stops at a terminal state."""
    grid = grid.copy()
    av = av.copy()
    ents = ents.copy()
    ev = np.zeros((ev_cap, 3))
    nev = 0
    owned = True
    for k in range(actions.shape[0]):
        if av[A_STATUS] != RUNNING:
            break
        grid, owned, nev = step(grid, owned, av, ents, actions[k], cfg, ev, nev)
    return grid, av, ents, ev[: min(nev, ev_cap)], nev


@njit(cache=True)
def _expand_child(nodes_av, nodes_ents, c, parent, grids, grid_idx, action, cfg, repeat, scratch):
    nodes_av[c, :] = nodes_av[parent, :]
    nodes_ents[c, :, :] = nodes_ents[parent, :, :]
    g = grids[grid_idx]
    owned = False
    ticks = 0
    for _k in range(repeat):
        g, owned, _ne = step(g, owned, nodes_av[c], nodes_ents[c], action, cfg, scratch, 0)
        ticks += 1
        if nodes_av[c, A_STATUS] != RUNNING:
            break
    return g, owned, ticks


@njit(cache=True, inline="always")
def _state_key(av, gi):
    """Quantized avatar state plus level-copy index, used to drop revisits.

    Two nodes on different grid copies (a brick broken in one) are different states.
    """
    return (
        int(math.floor(av[A_X] * 8.0)),
        int(math.floor(av[A_Y] * 8.0)),
        int(math.floor(av[A_VX] * 16.0)),
        int(math.floor(av[A_VY] * 16.0)),
        int(av[A_MODE]) * 4 + int(av[A_PREVJUMP]) * 2 + int(av[A_GROUND]),
        gi,
    )


@njit(cache=True)
def _key(av, cfg, quantum):
    if av[A_STATUS] == WON:
        f = av[A_TICK]
    else:
        f = av[A_TICK] + max(0.0, av[A_FLAGX] - av[A_X]) / (2.0 * cfg[C_WALK])
    if quantum > 0.0:
        f = math.floor(f / quantum)
    return f


@njit(cache=True)
def _search(heap, grids, cfg, actions, horizon, budget, repeat, quantum, n,
            node_av, node_ents, node_grid, node_parent, node_action, node_first,
            node_depth, node_open, node_rand, scratch, visited):
    """Continue best-first search over the current tree.

    Returns ``(best, n)``; ``best`` is the node whose plan is followed (0 when
    no plan beats standing still).
    """
    n_act = actions.shape[0]
    cap = node_av.shape[0]
    expansions = 0
    best = -1
    while len(heap) > 0 and expansions < budget and n + n_act <= cap:
        item = heapq.heappop(heap)
        idx = item[3]
        if node_depth[idx] >= horizon or node_av[idx, A_STATUS] == WON:
            heapq.heappush(heap, item)
            best = idx
            break
        node_open[idx] = False
        expansions += 1
        for ai in range(n_act):
            c = n
            g, owned, ticks = _expand_child(node_av, node_ents, c, idx, grids, node_grid[idx],
                                            actions[ai], cfg, repeat, scratch)
            if node_av[c, A_STATUS] == LOST:
                continue
            gi = len(grids) if owned else node_grid[idx]
            sk = _state_key(node_av[c], gi)
            t = node_av[c, A_TICK]
            if sk in visited and visited[sk] <= t:
                continue
            visited[sk] = t
            if owned:
                grids.append(g)
            node_grid[c] = gi
            node_parent[c] = idx
            node_action[c] = ai
            node_first[c] = ai if idx == 0 else node_first[idx]
            node_depth[c] = node_depth[idx] + ticks
            node_open[c] = True
            node_rand[c] = np.random.random()
            heapq.heappush(heap, (_key(node_av[c], cfg, quantum), node_av[c, A_JUMPS], node_rand[c], c))
            n += 1
    if best < 0:
        best = 0
        for i in range(1, n):
            if node_av[i, A_X] > node_av[best, A_X]:
                best = i
    return best, n


@njit(cache=True)
def _reroot(heap, grids, keep_first, n, cfg, quantum, node_av, node_ents, node_grid,
            node_parent, node_action, node_first, node_depth, node_open, node_rand, visited):
    """Keep only the subtree under the root child reached by ``keep_first``."""
    remap = np.full(n, -1, dtype=np.int64)
    gmap = np.full(len(grids), -1, dtype=np.int64)
    new_grids = List()
    m = 0
    base_depth = 0
    for i in range(1, n):
        if node_first[i] != keep_first:
            continue
        remap[i] = m
        if m == 0:
            base_depth = node_depth[i]
        if m != i:
            node_av[m, :] = node_av[i, :]
            node_ents[m, :, :] = node_ents[i, :, :]
        gi = node_grid[i]
        if gmap[gi] < 0:
            new_grids.append(grids[gi])
            gmap[gi] = len(new_grids) - 1
        node_grid[m] = gmap[gi]
        p = remap[node_parent[i]] if m > 0 else -1
        node_parent[m] = p
        node_action[m] = node_action[i]
        node_depth[m] = node_depth[i] - base_depth
        node_open[m] = node_open[i]
        node_rand[m] = node_rand[i]
        if m == 0:
            node_first[m] = -1
        elif p == 0:
            node_first[m] = node_action[m]
        else:
            node_first[m] = node_first[p]
        m += 1
    heap.clear()
    visited.clear()
    for i in range(m):
        visited[_state_key(node_av[i], node_grid[i])] = node_av[i, A_TICK]
        if node_open[i]:
            heap.append((_key(node_av[i], cfg, quantum), node_av[i, A_JUMPS], node_rand[i], i))
    heapq.heapify(heap)
    grids.clear()
    for g in new_grids:
        grids.append(g)
    return m


@njit(cache=True)
def play(grid, av, ents, cfg, actions, horizon, budget, repeat, quantum, patience, seed,
         default_action):
    """Run the replanning agent to a terminal state.

    The search tree under the committed action survives into the next slice,
    so each slice only extends the frontier. Returns ``(events, avatar, actions)``
    where event rows are ``(kind, tick, x)``,
    plus the committed action bits for every tick played.
    """
    np.random.seed(seed)
    grid = grid.copy()
    av = av.copy()
    ents = ents.copy()
    owned = True
    ev = np.zeros((256, 3))
    nev = 0
    log = np.zeros(int(av[A_MAXTICKS]) + repeat + 1, dtype=np.int64)
    cap = 2 * budget * actions.shape[0] + 1
    node_av = np.empty((cap, NA))
    node_ents = np.empty((cap, ents.shape[0], NE_COLS))
    node_grid = np.empty(cap, dtype=np.int64)
    node_parent = np.empty(cap, dtype=np.int64)
    node_action = np.empty(cap, dtype=np.int64)
    node_first = np.empty(cap, dtype=np.int64)
    node_depth = np.empty(cap, dtype=np.int64)
    node_open = np.empty(cap, dtype=np.bool_)
    node_rand = np.empty(cap)
    scratch = np.zeros((64, 3))
    grids = List()
    heap = [(0.0, 0.0, 0.0, 0)]
    visited = Dict.empty(key_type=_SKEY, value_type=types.float64)
    n = 0
    best_x = av[A_FURTHEST]
    last_gain = av[A_TICK]
    while av[A_STATUS] == RUNNING:
        if n == 0:
            grids.clear()
            grids.append(grid.copy())
            node_av[0, :] = av
            node_ents[0, :, :] = ents
            node_grid[0] = 0
            node_parent[0] = -1
            node_action[0] = -1
            node_first[0] = -1
            node_depth[0] = 0
            node_open[0] = True
            node_rand[0] = np.random.random()
            heap.clear()
            heap.append((0.0, 0.0, node_rand[0], 0))
            visited.clear()
            n = 1
        best, n = _search(heap, grids, cfg, actions, horizon, budget, repeat, quantum, n,
                          node_av, node_ents, node_grid, node_parent, node_action,
                          node_first, node_depth, node_open, node_rand, scratch, visited)
        ai = node_first[best] if best > 0 else -1
        a = default_action if ai < 0 else actions[ai]
        for _k in range(repeat):
            if nev > ev.shape[0] - 32:
                bigger = np.zeros((ev.shape[0] * 2, 3))
                bigger[: ev.shape[0]] = ev
                ev = bigger
            t = int(av[A_TICK])
            if t < log.shape[0]:
                log[t] = a
            grid, owned, nev = step(grid, owned, av, ents, a, cfg, ev, nev)
            if av[A_STATUS] != RUNNING:
                break
        if ai >= 0 and av[A_STATUS] == RUNNING:
            n = _reroot(heap, grids, ai, n, cfg, quantum, node_av, node_ents, node_grid,
                        node_parent, node_action, node_first, node_depth, node_open, node_rand,
                        visited)
        else:
            n = 0
        if av[A_FURTHEST] > best_x + 1e-9:
            best_x = av[A_FURTHEST]
            last_gain = av[A_TICK]
        elif av[A_STATUS] == RUNNING and av[A_TICK] - last_gain > patience:
            av[A_STATUS] = LOST
    return ev[:nev], av, log[: int(av[A_TICK])]
