"""Deterministic stand-ins: maze escape, a race against a scripted rival, missile defence."""

from __future__ import annotations

from rhea.core import Action, Status
from rhea.games.base import GLYPHS, Game, GameState

_MOVES = (Action.UP, Action.DOWN, Action.LEFT, Action.RIGHT, Action.NIL)


def _legend(*glyphs: str) -> dict[str, str]:
    return {g: GLYPHS[g] for g in ("w", ".", "A") + glyphs}


class EscapeState(GameState):
    __slots__ = ()


class Escape(Game):
    """Walk the avatar to an exit cell."""

    game_id = "d-escape"
    title = "D-Escape"
    legal_actions = _MOVES
    legend = _legend("x")
    score_deltas = frozenset({0, 1})
    render_order = (("x", "exit"),)

    def __init__(self, level, max_ticks=None):
        super().__init__(level, max_ticks)
        self.exits = frozenset(level.positions("x"))

    def initial_state(self, seed=0):
        return EscapeState(self, 0, Status.ONGOING, 0.0, self.level.positions("A")[0], 0)

    def advance(self, state, action):
        if state.status or not self.legal_mask[action]:
            self._check(state, action)
        pos = state.avatar
        nxt = pos + self.delta[action]
        if not self.wall[nxt]:
            pos = nxt
        score = state.score
        status = Status.ONGOING
        if pos in self.exits:
            score += 1.0
            status = Status.WIN
        tick = state.tick + 1
        return EscapeState(self, tick, self._finish(tick, status), score, pos, 0)

    def entities(self, state):
        return {"x": tuple(sorted(self.exits)), "A": (state.avatar,)}


class RaceState(GameState):
    __slots__ = ("racer",)
    _entity_fields = ("racer",)

    def __init__(self, game, tick, status, score, avatar, rng, racer):
        super().__init__(game, tick, status, score, avatar, rng)
        self.racer = racer


class Race(Game):
    """First to the rightmost open column wins.

    The avatar scores a point each time it enters a column further right than
    it has been before, so the score is its progress.  The rival steps right
    once every ``period`` ticks and waits when a wall is in its way.  Both
    reaching the line on the same tick counts for the avatar, which moves
    first.
    """

    game_id = "d-race"
    title = "D-Race"
    legal_actions = _MOVES
    legend = _legend("r")
    score_deltas = frozenset({0, 1})
    render_order = (("r", "racer"),)
    params_defaults = {"period": 2}

    def __init__(self, level, max_ticks=None):
        super().__init__(level, max_ticks)
        racers = level.positions("r")
        if len(racers) != 1:
            raise ValueError(f"{self.game_id} needs exactly one racer 'r', found {len(racers)}")
        self.racer0 = racers[0]
        self.start_x = level.positions("A")[0] % self.width
        self.finish_x = self.width - 2
        self.period = max(1, int(self.params["period"]))

    def initial_state(self, seed=0):
        return RaceState(self, 0, Status.ONGOING, 0.0, self.level.positions("A")[0], 0, self.racer0)

    def advance(self, state, action):
        if state.status or not self.legal_mask[action]:
            self._check(state, action)
        w = self.width
        pos = state.avatar
        nxt = pos + self.delta[action]
        if not self.wall[nxt]:
            pos = nxt
        tick = state.tick + 1
        score = state.score
        racer = state.racer
        status = Status.ONGOING
        x = pos % w
        if x - self.start_x > score:
            score += 1.0
        if x == self.finish_x:
            status = Status.WIN
        else:
            if tick % self.period == 0 and not self.wall[racer + 1]:
                racer += 1
            if racer % w == self.finish_x:
                status = Status.LOSS
        return RaceState(self, tick, self._finish(tick, status), score, pos, 0, racer)

    def entities(self, state):
        return {"r": (state.racer,), "A": (state.avatar,)}


class MissilesState(GameState):
    __slots__ = ("missiles", "cities")
    _entity_fields = ("missiles", "cities")

    def __init__(self, game, tick, status, score, avatar, rng, missiles, cities):
        super().__init__(game, tick, status, score, avatar, rng)
        self.missiles = missiles
        self.cities = cities


class Missiles(Game):
    """Missiles fall one row every ``period`` ticks; USE destroys one adjacent missile.

    A missile entering a city destroys it; one entering a wall is spent.
    Cities block the avatar.  Losing every city loses the game; clearing the
    sky with a city standing wins it.
    """

    game_id = "d-missiles"
    title = "D-Missiles"
    legal_actions = (Action.UP, Action.DOWN, Action.LEFT, Action.RIGHT, Action.USE, Action.NIL)
    legend = _legend("m", "c")
    score_deltas = frozenset({0, 2})
    render_order = (("c", "city"), ("m", "missile"))
    params_defaults = {"period": 2}

    def __init__(self, level, max_ticks=None):
        super().__init__(level, max_ticks)
        w = self.width
        self.period = max(1, int(self.params["period"]))
        self.neighbourhood = tuple(dy * w + dx for dy in (-1, 0, 1) for dx in (-1, 0, 1))

    def initial_state(self, seed=0):
        lv = self.level
        return MissilesState(
            self, 0, Status.ONGOING, 0.0, lv.positions("A")[0], 0,
            tuple(lv.positions("m")), frozenset(lv.positions("c")),
        )

    def advance(self, state, action):
        if state.status or not self.legal_mask[action]:
            self._check(state, action)
        pos = state.avatar
        missiles = state.missiles
        cities = state.cities
        score = state.score
        if action == Action.USE:
            near = [pos + d for d in self.neighbourhood]
            for m in missiles:
                if m in near:
                    missiles = tuple(x for x in missiles if x != m)
                    score += 2.0
                    break
        else:
            nxt = pos + self.delta[action]
            if not self.wall[nxt] and nxt not in cities:
                pos = nxt
        tick = state.tick + 1
        if tick % self.period == 0 and missiles:
            w = self.width
            fallen = []
            hit = set()
            for m in missiles:
                m += w
                if m in cities:
                    hit.add(m)
                elif not self.wall[m]:
                    fallen.append(m)
            missiles = tuple(fallen)
            if hit:
                cities = cities - hit
        status = Status.ONGOING
        if not cities:
            status = Status.LOSS
        elif not missiles:
            status = Status.WIN
        return MissilesState(self, tick, self._finish(tick, status), score, pos, 0, missiles, cities)

    def entities(self, state):
        return {"c": tuple(sorted(state.cities)), "m": state.missiles, "A": (state.avatar,)}
