"""Stochastic stand-ins.  All randomness comes from the state's own splitmix counter."""

from __future__ import annotations

from rhea.core import Action, Status
from rhea.games.base import GLYPHS, Game, GameState, draw_lanes, prob16

_MOVES = (Action.UP, Action.DOWN, Action.LEFT, Action.RIGHT, Action.NIL)


def _legend(*glyphs: str) -> dict[str, str]:
    return {g: GLYPHS[g] for g in ("w", ".", "A") + glyphs}


class AliensState(GameState):
    __slots__ = ("aliens", "direction", "bombs", "shot")
    _entity_fields = ("aliens", "direction", "bombs", "shot")

    def __init__(self, game, tick, status, score, avatar, rng, aliens, direction, bombs, shot):
        super().__init__(game, tick, status, score, avatar, rng)
        self.aliens = aliens
        self.direction = direction
        self.bombs = bombs
        self.shot = shot


class Aliens(Game):
    """A marching alien block drops bombs; the avatar shoots upwards.

    Each tick: the avatar moves or fires (one shot in flight at a time), the
    shot climbs one row, the block marches every ``period`` ticks (stepping
    down and reversing at walls), bombs fall one row, then every alien drops
    a bomb with probability ``p``.  A bomb on the avatar, or an alien reaching
    the avatar's row, loses and costs a point.
    """

    game_id = "s-aliens"
    title = "S-Aliens"
    stochastic = True
    legal_actions = (Action.LEFT, Action.RIGHT, Action.USE, Action.NIL)
    legend = _legend("e")
    score_deltas = frozenset({-1, 0, 1})
    render_order = (("e", "alien"),)
    params_defaults = {"p": 0.05, "period": 3}

    def __init__(self, level, max_ticks=None):
        super().__init__(level, max_ticks)
        self.bomb_threshold = prob16(self.params["p"])
        self.period = max(1, int(self.params["period"]))

    def initial_state(self, seed=0):
        lv = self.level
        return AliensState(
            self, 0, Status.ONGOING, 0.0, lv.positions("A")[0], self._rng0(seed),
            tuple(lv.positions("e")), 1, (), -1,
        )

    def advance(self, state, action):
        if state.status or not self.legal_mask[action]:
            self._check(state, action)
        w = self.width
        wall = self.wall
        pos = state.avatar
        shot = state.shot
        aliens = state.aliens
        direction = state.direction
        score = state.score
        if action == Action.USE:
            if shot < 0:
                shot = pos
        elif action != Action.NIL:
            nxt = pos + self.delta[action]
            if not wall[nxt]:
                pos = nxt
        if shot >= 0:
            shot -= w
            if wall[shot]:
                shot = -1
            elif shot in aliens:
                aliens = tuple(a for a in aliens if a != shot)
                score += 1.0
                shot = -1
        tick = state.tick + 1
        if aliens and tick % self.period == 0:
            step = direction
            for a in aliens:
                if wall[a + direction]:
                    step = w
                    direction = -direction
                    break
            aliens = tuple(a + step for a in aliens)
            if shot >= 0 and shot in aliens:
                aliens = tuple(a for a in aliens if a != shot)
                score += 1.0
                shot = -1
        rng = state.rng
        bombs = state.bombs
        if not aliens:
            return AliensState(self, tick, Status.WIN, score, pos, rng, aliens, direction, (), shot)
        if bombs:
            bombs = tuple(b + w for b in bombs if not wall[b + w])
        rng, lanes = draw_lanes(rng, len(aliens))
        thr = self.bomb_threshold
        dropped = [a + w for a, lane in zip(aliens, lanes) if lane < thr and not wall[a + w]]
        if dropped:
            bombs = tuple(sorted(set(bombs).union(dropped)))
        status = Status.ONGOING
        row = pos // w
        if pos in bombs or any(a // w >= row for a in aliens):
            status = Status.LOSS
            score -= 1.0
        return AliensState(self, tick, self._finish(tick, status), score, pos, rng, aliens, direction, bombs, shot)

    def entities(self, state):
        return {"e": state.aliens, "A": (state.avatar,)}


class ButterfliesState(GameState):
    __slots__ = ("butterflies",)
    _entity_fields = ("butterflies",)

    def __init__(self, game, tick, status, score, avatar, rng, butterflies):
        super().__init__(game, tick, status, score, avatar, rng)
        self.butterflies = butterflies


class Butterflies(Game):
    """Catch every butterfly before time runs out.

    Butterflies flutter with probability ``p`` per tick to a uniformly random
    neighbouring cell, never into walls, each other or the avatar.
    """

    game_id = "s-butterflies"
    title = "S-Butterflies"
    stochastic = True
    legal_actions = _MOVES
    legend = _legend("b")
    score_deltas = frozenset({0, 2})
    render_order = (("b", "butterfly"),)
    params_defaults = {"p": 0.5}

    def __init__(self, level, max_ticks=None):
        super().__init__(level, max_ticks)
        self.move_threshold = prob16(self.params["p"])

    def initial_state(self, seed=0):
        lv = self.level
        return ButterfliesState(self, 0, Status.ONGOING, 0.0, lv.positions("A")[0], self._rng0(seed), tuple(lv.positions("b")))

    def advance(self, state, action):
        if state.status or not self.legal_mask[action]:
            self._check(state, action)
        pos = state.avatar
        nxt = pos + self.delta[action]
        if not self.wall[nxt]:
            pos = nxt
        flock = state.butterflies
        score = state.score
        if pos in flock:
            flock = tuple(b for b in flock if b != pos)
            score += 2.0
        tick = state.tick + 1
        rng = state.rng
        if not flock:
            return ButterfliesState(self, tick, Status.WIN, score, pos, rng, flock)
        rng, lanes = draw_lanes(rng, 2 * len(flock))
        thr = self.move_threshold
        delta = self.delta
        wall = self.wall
        occupied = set(flock)
        moved = []
        for i, b in enumerate(flock):
            if lanes[2 * i] < thr:
                nb = b + delta[lanes[2 * i + 1] >> 14]
                if not wall[nb] and nb != pos and nb not in occupied:
                    occupied.discard(b)
                    occupied.add(nb)
                    b = nb
            moved.append(b)
        moved.sort()
        return ButterfliesState(self, tick, self._finish(tick, Status.ONGOING), score, pos, rng, tuple(moved))

    def entities(self, state):
        return {"b": state.butterflies, "A": (state.avatar,)}


class ZombiesState(GameState):
    __slots__ = ("zombies", "honey")
    _entity_fields = ("zombies", "honey")

    def __init__(self, game, tick, status, score, avatar, rng, zombies, honey):
        super().__init__(game, tick, status, score, avatar, rng)
        self.zombies = zombies
        self.honey = honey


def chase_direction(zombie: int, target: int, width: int) -> Action:
    """Greedy step along the axis with the larger gap (horizontal on ties)."""
    dx = target % width - zombie % width
    dy = target // width - zombie // width
    if dx and abs(dx) >= abs(dy):
        return Action.RIGHT if dx > 0 else Action.LEFT
    return Action.DOWN if dy > 0 else Action.UP


class Zombies(Game):
    """Survive until time runs out; honey is worth a point, being caught costs one.

    Every ``period`` ticks each zombie takes the greedy step towards the
    avatar with probability ``beta``, otherwise a uniformly random step among
    the four directions.  Walls block zombies; zombies may share cells.
    """

    game_id = "s-zombies"
    title = "S-Zombies"
    stochastic = True
    win_at_timeout = True
    legal_actions = _MOVES
    legend = _legend("z", "h")
    score_deltas = frozenset({-1, 0, 1})
    render_order = (("h", "honey"), ("z", "zombie"))
    params_defaults = {"beta": 0.3, "period": 2}

    def __init__(self, level, max_ticks=None):
        super().__init__(level, max_ticks)
        self.chase_threshold = prob16(self.params["beta"])
        self.period = max(1, int(self.params["period"]))

    def initial_state(self, seed=0):
        lv = self.level
        return ZombiesState(
            self, 0, Status.ONGOING, 0.0, lv.positions("A")[0], self._rng0(seed),
            tuple(lv.positions("z")), frozenset(lv.positions("h")),
        )

    def advance(self, state, action):
        if state.status or not self.legal_mask[action]:
            self._check(state, action)
        pos = state.avatar
        nxt = pos + self.delta[action]
        if not self.wall[nxt]:
            pos = nxt
        score = state.score
        honey = state.honey
        if pos in honey:
            honey = honey - {pos}
            score += 1.0
        tick = state.tick + 1
        zombies = state.zombies
        rng = state.rng
        if pos in zombies:
            return ZombiesState(self, tick, Status.LOSS, score - 1.0, pos, rng, zombies, honey)
        if tick % self.period:
            return ZombiesState(self, tick, self._finish(tick, Status.ONGOING), score, pos, rng, zombies, honey)
        rng, lanes = draw_lanes(rng, 2 * len(zombies))
        w = self.width
        thr = self.chase_threshold
        delta = self.delta
        wall = self.wall
        moved = []
        for i, z in enumerate(zombies):
            if lanes[2 * i] < thr:
                d = chase_direction(z, pos, w)
            else:
                d = lanes[2 * i + 1] >> 14
            nz = z + delta[d]
            moved.append(z if wall[nz] else nz)
        zombies = tuple(moved)
        status = Status.ONGOING
        if pos in zombies:
            status = Status.LOSS
            score -= 1.0
        return ZombiesState(self, tick, self._finish(tick, status), score, pos, rng, zombies, honey)

    def entities(self, state):
        return {"h": tuple(sorted(state.honey)), "z": state.zombies, "A": (state.avatar,)}
