"""Shared vocabulary: actions, outcomes, forward-model budget and seeded randomness."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
DEFAULT_BUDGET = 900


class Action(IntEnum):
    """Discrete avatar moves, in canonical order."""

    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    USE = 4
    NIL = 5
    ESCAPE = 6

    @classmethod
    def parse(cls, token: str | int) -> "Action":
        if isinstance(token, int):
            return cls(token)
        try:
            return cls[token.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown action {token!r}") from None


ALL_ACTIONS: tuple[Action, ...] = tuple(Action)
MOVES: dict[Action, tuple[int, int]] = {
    Action.UP: (0, -1),
    Action.DOWN: (0, 1),
    Action.LEFT: (-1, 0),
    Action.RIGHT: (1, 0),
}


class Status(IntEnum):
    ONGOING = 0
    WIN = 1
    LOSS = 2


@dataclass(frozen=True)
class GameOutcome:
    status: Status
    score: float
    tick: int

    @property
    def terminal(self) -> bool:
        return self.status is not Status.ONGOING


class BudgetExhausted(Exception):
    """Raised when a forward-model call would overrun the decision budget."""


@dataclass
class BudgetMeter:
    """Counts forward-model calls charged to one decision."""

    limit: int = DEFAULT_BUDGET
    used: int = 0

    def __post_init__(self) -> None:
        if self.limit < 0:
            raise ValueError("budget limit must be non-negative")

    @property
    def remaining(self) -> int:
        return self.limit - self.used

    @property
    def exhausted(self) -> bool:
        return self.used >= self.limit

    def consume(self, n: int = 1) -> int:
        """Charge ``n`` calls; raise :class:`BudgetExhausted` (leaving ``used`` untouched) on overrun."""
        if n < 1:
            raise ValueError("consume requires n >= 1")
        if self.used + n > self.limit:
            raise BudgetExhausted(f"{self.used}+{n} > {self.limit}")
        self.used += n
        return self.used

    def reset(self) -> None:
        self.used = 0


# --- splitmix64 -----------------------------------------------------------
#
# The generator is SplitMix64 (Steele, Lea & Flood 2014): a Weyl sequence
# with increment GOLDEN fed through the mix64 finaliser.  It is tiny, has no
# platform-dependent behaviour and is trivial to port.


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix_next(state: int) -> tuple[int, int]:
    """Pure step: returns ``(new_state, output)``."""
    state = (state + GOLDEN) & MASK64
    return state, mix64(state)


def initial_state(seed: int, stream: int) -> int:
    return mix64((seed & MASK64) ^ mix64((stream * GOLDEN + 1) & MASK64))


class SeededRng:
    """Reproducible random stream identified by ``(seed, stream)``.

    ``split(child)`` depends only on ``(seed, stream, child)``, never on how
    many values the parent has already produced.
    """

    __slots__ = ("seed", "stream", "_state")

    def __init__(self, seed: int, stream: int = 0) -> None:
        self.seed = seed & MASK64
        self.stream = stream & MASK64
        self._state = initial_state(self.seed, self.stream)

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, stream={self.stream})"

    def copy(self) -> "SeededRng":
        twin = SeededRng.__new__(SeededRng)
        twin.seed, twin.stream, twin._state = self.seed, self.stream, self._state
        return twin

    def split(self, child_id: int) -> "SeededRng":
        child_stream = mix64(self.stream ^ mix64((child_id & MASK64) + GOLDEN))
        return SeededRng(self.seed, child_stream)

    def next_u64(self) -> int:
        self._state = z = (self._state + GOLDEN) & MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        self._state = z = (self._state + GOLDEN) & MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return ((z ^ (z >> 31)) >> 11) * (1.0 / 9007199254740992.0)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by multiply-shift (bias below n / 2**64)."""
        if n <= 0:
            raise ValueError("randbelow requires n >= 1")
        self._state = z = (self._state + GOLDEN) & MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return ((z ^ (z >> 31)) * n) >> 64

    def choice(self, items: Sequence):
        return items[self.randbelow(len(items))]

    def sample(self, items: Sequence, k: int) -> list:
        """``k`` distinct elements, partial Fisher-Yates."""
        pool = list(items)
        if k > len(pool):
            raise ValueError("sample larger than population")
        for i in range(k):
            j = i + self.randbelow(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]


def rng_split(parent: SeededRng, child_id: int) -> SeededRng:
    return parent.split(child_id)
