"""Level parsing, immutable grid game states and the forward-model base class."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar

from rhea.core import Action, GameOutcome, Status, initial_state, splitmix_next

DEFAULT_MAX_TICKS = 500

GLYPHS = {
    "w": "wall",
    ".": "floor",
    "A": "avatar",
    "x": "exit",
    "c": "city",
    "m": "missile",
    "e": "alien",
    "b": "butterfly",
    "z": "zombie",
    "h": "honey",
    "r": "racer",
}


class LevelError(ValueError):
    """A level file failed to parse; carries the 1-based line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line else ""
        super().__init__(message + where)


class TerminalStateError(RuntimeError):
    pass


class IllegalActionError(ValueError):
    pass


@dataclass(frozen=True)
class LevelMap:
    width: int
    height: int
    cells: tuple[str, ...]
    legend: dict[str, str]
    header: dict[str, str] = field(default_factory=dict)

    def positions(self, glyph: str) -> list[int]:
        w = self.width
        return [y * w + x for y, row in enumerate(self.cells) for x, g in enumerate(row) if g == glyph]

    def render(self) -> str:
        lines = [f"#{k}={v}" for k, v in self.header.items()]
        lines.extend(self.cells)
        return "\n".join(lines) + "\n"


def parse_level(text: str, legend: dict[str, str]) -> LevelMap:
    header: dict[str, str] = {}
    rows: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if line.startswith("#"):
            if rows:
                raise LevelError("header line after grid", lineno, 1)
            key, sep, value = line[1:].partition("=")
            if not sep or not key.strip():
                raise LevelError(f"malformed header {line!r}", lineno, 1)
            header[key.strip()] = value.strip()
            continue
        rows.append((lineno, line))
    if not rows:
        raise LevelError("empty grid")
    width = len(rows[0][1])
    height = len(rows)
    if width < 3 or height < 3:
        raise LevelError(f"grid must be at least 3x3, got {width}x{height}", rows[0][0], 1)
    avatar_at: tuple[int, int] | None = None
    for y, (lineno, row) in enumerate(rows):
        if len(row) != width:
            raise LevelError(f"non-rectangular grid: expected width {width}, got {len(row)}", lineno, min(len(row), width) + 1)
        for x, g in enumerate(row):
            if g not in legend:
                raise LevelError(f"unknown glyph {g!r}", lineno, x + 1)
            border = x in (0, width - 1) or y in (0, height - 1)
            if border and g != "w":
                raise LevelError("border cells must be walls 'w'", lineno, x + 1)
            if g == "A":
                if avatar_at is not None:
                    raise LevelError(f"duplicate avatar (first at line {avatar_at[0]}, column {avatar_at[1]})", lineno, x + 1)
                avatar_at = (lineno, x + 1)
    if avatar_at is None:
        raise LevelError("no avatar 'A' in grid")
    return LevelMap(width, height, tuple(r for _, r in rows), dict(legend), header)


class GameState:
    """Immutable snapshot.  Subclasses add entity slots listed in ``_entity_fields``.

    ``advance`` always builds a new state, so a state may be shared freely and
    ``copy`` is shallow.
    """

    __slots__ = ("game", "tick", "status", "score", "avatar", "rng")
    _entity_fields: ClassVar[tuple[str, ...]] = ()

    def __init__(self, game, tick, status, score, avatar, rng):
        self.game = game
        self.tick = tick
        self.status = status
        self.score = score
        self.avatar = avatar
        self.rng = rng

    def _fields(self) -> tuple:
        return ("tick", "status", "score", "avatar", "rng") + self._entity_fields

    def key(self) -> tuple:
        return (self.game.game_id,) + tuple(getattr(self, f) for f in self._fields())

    def __eq__(self, other) -> bool:
        return type(other) is type(self) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        parts = ", ".join(f"{f}={getattr(self, f)!r}" for f in self._fields())
        return f"{type(self).__name__}({self.game.game_id}: {parts})"

    def replace(self, **changes) -> "GameState":
        new = object.__new__(type(self))
        for name in ("game",) + self._fields():
            setattr(new, name, changes.pop(name, getattr(self, name)))
        if changes:
            raise TypeError(f"unknown fields {sorted(changes)}")
        return new

    copy = replace

    def reseeded(self, seed: int) -> "GameState":
        """Same state with a fresh environment stream (no-op for deterministic games)."""
        if not self.game.stochastic:
            return self
        return self.replace(rng=initial_state(seed, 0))

    @property
    def outcome(self) -> GameOutcome:
        return GameOutcome(Status(self.status), self.score, self.tick)

    @property
    def terminal(self) -> bool:
        return self.status != Status.ONGOING

    @property
    def position(self) -> tuple[int, int]:
        w = self.game.width
        return self.avatar % w, self.avatar // w


def draw_lanes(rng: int, k: int) -> tuple[int, list[int]]:
    """``k`` 16-bit uniform lanes, four per 64-bit draw."""
    lanes: list[int] = []
    while len(lanes) < k:
        rng, u = splitmix_next(rng)
        lanes.extend((u >> 48, (u >> 32) & 0xFFFF, (u >> 16) & 0xFFFF, u & 0xFFFF))
    return rng, lanes[:k]


def prob16(p: float) -> int:
    """Threshold so that ``lane < prob16(p)`` has probability ``round(p * 65536) / 65536``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    return int(round(p * 65536))


class Game:
    """Static level data plus the forward model for one game on one level."""

    game_id: ClassVar[str] = ""
    title: ClassVar[str] = ""
    stochastic: ClassVar[bool] = False
    legal_actions: ClassVar[tuple[Action, ...]] = ()
    legend: ClassVar[dict[str, str]] = {}
    score_deltas: ClassVar[frozenset[float]] = frozenset({0})
    win_at_timeout: ClassVar[bool] = False
    # glyph draw order for rendering; later entries overwrite earlier
    render_order: ClassVar[tuple[tuple[str, str], ...]] = ()
    params_defaults: ClassVar[dict[str, float]] = {}

    def __init__(self, level: LevelMap, max_ticks: int | None = None) -> None:
        self.level = level
        self.width = w = level.width
        self.height = level.height
        self.wall = bytes(1 if g == "w" else 0 for row in level.cells for g in row)
        self.delta = (-w, w, -1, 1, 0, 0, 0)
        self.legal_mask = tuple(a in self.legal_actions for a in Action)
        if max_ticks is None:
            max_ticks = int(level.header.get("max-ticks", DEFAULT_MAX_TICKS))
        if max_ticks < 1:
            raise LevelError(f"max-ticks must be >= 1, got {max_ticks}")
        self.max_ticks = max_ticks
        self.params = {}
        for key, default in self.params_defaults.items():
            try:
                self.params[key] = float(level.header.get(key, default))
            except ValueError:
                raise LevelError(f"header {key} is not a number: {level.header[key]!r}") from None

    def initial_state(self, seed: int = 0) -> GameState:
        raise NotImplementedError

    def advance(self, state: GameState, action: Action) -> GameState:
        raise NotImplementedError

    def _check(self, state: GameState, action: int) -> None:
        if state.status:
            raise TerminalStateError(f"{self.game_id}: advance on terminal state at tick {state.tick}")
        if not (0 <= action < 7 and self.legal_mask[action]):
            raise IllegalActionError(f"{self.game_id}: illegal action {action!r}")

    def _finish(self, tick: int, status: int) -> int:
        if status == Status.ONGOING and tick >= self.max_ticks:
            return Status.WIN if self.win_at_timeout else Status.LOSS
        return status

    def _rng0(self, seed: int) -> int:
        return initial_state(seed, 0) if self.stochastic else 0

    def entities(self, state: GameState) -> dict[str, tuple[int, ...]]:
        """glyph -> positions, for rendering."""
        raise NotImplementedError

    def render(self, state: GameState, header: bool = True) -> str:
        w = self.width
        grid = [["w" if self.wall[y * w + x] else "." for x in range(w)] for y in range(self.height)]
        ents = self.entities(state)
        for glyph in [g for g, _ in self.render_order] + ["A"]:
            for pos in ents.get(glyph, ()):
                grid[pos // w][pos % w] = glyph
        lines = [f"#{k}={v}" for k, v in self.level.header.items()] if header else []
        lines.extend("".join(row) for row in grid)
        return "\n".join(lines) + "\n"
