"""Descriptive statistics, Formula-1 style ranking points and the Mann-Whitney U test."""

from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from rhea.core import SeededRng

F1_POINTS: tuple[int, ...] = (25, 18, 15, 12)
# standard motor-racing continuation, used when more than four agents are ranked
F1_POINTS_EXTENDED: tuple[int, ...] = (25, 18, 15, 12, 10, 8, 6, 4, 2, 1)
ALPHA = 0.05
EXACT_MAX_N = 10


@dataclass(frozen=True)
class SampleSummary:
    n: int
    mean: float
    sd: float

    def __str__(self) -> str:
        return f"{self.mean:.3f} (±{self.sd:.3f})"


def describe(values: Iterable[float]) -> SampleSummary:
    """Mean and population standard deviation."""
    xs = list(values)
    if not xs:
        raise ValueError("empty sample")
    return SampleSummary(len(xs), statistics.fmean(xs), statistics.pstdev(xs) if len(xs) > 1 else 0.0)


def f1_points_for_game(
    win_rates: Mapping[str, float],
    scores: Mapping[str, float] | None = None,
    rng: SeededRng | None = None,
    points: Sequence[int] | None = None,
) -> dict[str, int]:
    """Rank agents on one game by win rate, then mean score, then a seeded coin toss."""
    agents = sorted(win_rates)
    if points is None:
        points = F1_POINTS if len(agents) <= len(F1_POINTS) else F1_POINTS_EXTENDED
    if len(agents) > len(points):
        raise ValueError(f"{len(agents)} agents but only {len(points)} point values")
    scores = scores or {}
    rng = rng or SeededRng(0)
    toss = {a: rng.next_u64() for a in agents}
    order = sorted(agents, key=lambda a: (-win_rates[a], -scores.get(a, 0.0), toss[a]))
    return {a: points[i] for i, a in enumerate(order)}


def f1_aggregate(assignments: Sequence[Mapping[str, int]]) -> dict[str, int]:
    totals: dict[str, int] = {}
    names: frozenset[str] | None = None
    for i, game in enumerate(assignments):
        these = frozenset(game)
        if names is None:
            names = these
        elif these != names:
            raise ValueError(f"assignment {i} ranks {sorted(these)}, expected {sorted(names)}")
        for agent, pts in game.items():
            totals[agent] = totals.get(agent, 0) + pts
    return totals


class UMethod(str, enum.Enum):
    EXACT = "exact"
    NORMAL = "normal-approx"


@dataclass(frozen=True)
class UTestResult:
    u: float
    p_value: float
    method: UMethod

    @property
    def significant(self) -> bool:
        return self.p_value < ALPHA


def midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        r = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = r
        i = j + 1
    return ranks


@lru_cache(maxsize=None)
def u_null_counts(n: int, m: int) -> tuple[int, ...]:
    """Number of rank arrangements giving U = 0..n*m, for samples of size n and m without ties."""
    if n == 0 or m == 0:
        return (1,)
    # an arrangement either ends in a sample-a item, which beats all m b items, or in a b item
    with_a_last = u_null_counts(n - 1, m)
    with_b_last = u_null_counts(n, m - 1)
    counts = [0] * (n * m + 1)
    for u, c in enumerate(with_a_last):
        counts[u + m] += c
    for u, c in enumerate(with_b_last):
        counts[u] += c
    return tuple(counts)


def exact_p_value(u: float, n: int, m: int) -> float:
    counts = u_null_counts(n, m)
    total = math.comb(n + m, n)
    k = int(round(u))
    lower = sum(counts[: k + 1])
    upper = sum(counts[k:])
    return min(1.0, 2 * min(lower, upper) / total)


def mann_whitney(a: Sequence[float], b: Sequence[float]) -> UTestResult:
    """Two-sided Mann-Whitney U test; U is reported for sample ``a``.

    Exact null distribution when both samples have at most 10 values and
    there are no ties, otherwise the normal approximation with tie and
    continuity corrections.
    """
    n, m = len(a), len(b)
    if n < 1 or m < 1:
        raise ValueError("both samples need at least one value")
    pooled = list(a) + list(b)
    ranks = midranks(pooled)
    u = sum(ranks[:n]) - n * (n + 1) / 2
    if len(set(pooled)) == 1:
        return UTestResult(u, 1.0, UMethod.NORMAL)
    ties = len(set(pooled)) < len(pooled)
    if not ties and n <= EXACT_MAX_N and m <= EXACT_MAX_N:
        return UTestResult(u, exact_p_value(u, n, m), UMethod.EXACT)
    N = n + m
    tie_term = 0
    for count in _multiplicities(pooled):
        tie_term += count**3 - count
    var = n * m / 12 * ((N + 1) - tie_term / (N * (N - 1)))
    if var <= 0:
        return UTestResult(u, 1.0, UMethod.NORMAL)
    z = max(0.0, abs(u - n * m / 2) - 0.5) / math.sqrt(var)
    return UTestResult(u, min(1.0, math.erfc(z / math.sqrt(2))), UMethod.NORMAL)


def _multiplicities(values: Sequence[float]) -> Iterable[int]:
    seen: dict[float, int] = {}
    for v in values:
        seen[v] = seen.get(v, 0) + 1
    return seen.values()
