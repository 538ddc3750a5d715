"""Six grid games with forward models, and the level loader."""

from __future__ import annotations

from importlib import resources

from rhea.games.base import (
    DEFAULT_MAX_TICKS,
    Game,
    GameState,
    IllegalActionError,
    LevelError,
    LevelMap,
    TerminalStateError,
    parse_level,
)
from rhea.games.deterministic import Escape, Missiles, Race
from rhea.games.stochastic import Aliens, Butterflies, Zombies, chase_direction

GAMES: dict[str, type[Game]] = {
    cls.game_id: cls for cls in (Escape, Race, Missiles, Aliens, Butterflies, Zombies)
}
GAME_IDS: tuple[str, ...] = tuple(GAMES)
LEVELS_PER_GAME = 5


def game_class(game_id: str) -> type[Game]:
    try:
        return GAMES[game_id]
    except KeyError:
        raise KeyError(f"unknown game {game_id!r}; known: {', '.join(GAMES)}") from None


def build_game(text: str, game_id: str, max_ticks: int | None = None) -> Game:
    cls = game_class(game_id)
    return cls(parse_level(text, cls.legend), max_ticks)


def load_level(text: str, game_id: str, seed: int = 0, max_ticks: int | None = None) -> GameState:
    """Parse level text for ``game_id`` and return its tick-0 state."""
    return build_game(text, game_id, max_ticks).initial_state(seed)


def level_text(game_id: str, level: int) -> str:
    game_class(game_id)
    name = f"{game_id}_{level}.txt"
    ref = resources.files("rhea.games") / "levels" / name
    if not ref.is_file():
        raise FileNotFoundError(f"no level file {name}")
    return ref.read_text()


def load_builtin(game_id: str, level: int, seed: int = 0, max_ticks: int | None = None) -> GameState:
    return load_level(level_text(game_id, level), game_id, seed, max_ticks)


__all__ = [
    "DEFAULT_MAX_TICKS", "GAMES", "GAME_IDS", "LEVELS_PER_GAME",
    "Game", "GameState", "LevelMap", "LevelError", "IllegalActionError", "TerminalStateError",
    "Escape", "Race", "Missiles", "Aliens", "Butterflies", "Zombies",
    "build_game", "chase_direction", "game_class", "level_text", "load_builtin", "load_level", "parse_level",
]
