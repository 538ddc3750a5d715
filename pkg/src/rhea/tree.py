"""Open-loop statistical tree over action sequences.

Nodes hold only (visits, cumulative reward) per action edge; no game state is
ever stored, so the tree stays valid when a stochastic forward model drifts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from rhea.core import Action, SeededRng


@dataclass(frozen=True)
class UcbParams:
    k: float = 1.0
    normalize: bool = True

    def __post_init__(self) -> None:
        if not self.k > 0:
            raise ValueError(f"UCB constant must be positive, got {self.k}")


class StatNode:
    __slots__ = ("action", "visits", "total", "children")

    def __init__(self, action: Action | None = None, visits: int = 0, total: float = 0.0) -> None:
        self.action = action
        self.visits = visits
        self.total = total
        self.children: dict[Action, StatNode] = {}

    @property
    def mean(self) -> float:
        if self.visits < 1:
            raise ValueError("mean reward undefined for an unvisited node")
        return self.total / self.visits

    def child(self, action: Action) -> "StatNode":
        node = self.children.get(action)
        if node is None:
            node = self.children[action] = StatNode(action)
        return node

    def walk(self) -> Iterator["StatNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children.values())

    def size(self) -> int:
        return sum(1 for _ in self.walk())

    def snapshot(self) -> tuple:
        """Structural value for equality checks: (action, visits, total, sorted children)."""
        return (
            self.action,
            self.visits,
            self.total,
            tuple(self.children[a].snapshot() for a in sorted(self.children)),
        )

    def __repr__(self) -> str:
        name = "root" if self.action is None else self.action.name
        return f"StatNode({name}, n={self.visits}, W={self.total}, children={len(self.children)})"


class StatTree:
    """Root node plus the reward bounds seen since the last re-root."""

    def __init__(self, params: UcbParams | None = None) -> None:
        self.params = params or UcbParams()
        self.root = StatNode()
        self.lo: float | None = None
        self.hi: float | None = None

    def backpropagate(self, path: Sequence[Action], fitness: float) -> None:
        """Add one visit and ``fitness`` to the root and to every node along ``path``."""
        if not path:
            raise ValueError("backpropagate needs a non-empty path")
        node = self.root
        node.visits += 1
        node.total += fitness
        for action in path:
            child = node.children.get(action)
            if child is None:
                child = node.children[action] = StatNode(action)
            child.visits += 1
            child.total += fitness
            node = child
        if self.lo is None or fitness < self.lo:
            self.lo = fitness
        if self.hi is None or fitness > self.hi:
            self.hi = fitness

    def reroot(self, fired: Action) -> None:
        """Promote the subtree reached by ``fired``; reset if there is none."""
        child = self.root.children.get(fired)
        if child is None:
            self.root = StatNode()
        else:
            child.action = None
            self.root = child
        self.lo = self.hi = None

    def reset(self) -> None:
        self.root = StatNode()
        self.lo = self.hi = None

    @property
    def bounds(self) -> tuple[float, float] | None:
        if self.lo is None or not self.params.normalize:
            return None
        return self.lo, self.hi

    def size(self) -> int:
        return self.root.size()

    def to_text(self) -> str:
        lines: list[str] = []

        def emit(node: StatNode, depth: int) -> None:
            name = "root" if node.action is None else node.action.name
            lines.append(f"{'  ' * depth}{name} n={node.visits} W={node.total!r}")
            for a in sorted(node.children):
                emit(node.children[a], depth + 1)

        emit(self.root, 0)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, params: UcbParams | None = None) -> "StatTree":
        tree = cls(params)
        stack: list[StatNode] = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            indent = len(line) - len(line.lstrip(" "))
            if indent % 2:
                raise ValueError(f"line {lineno}: odd indentation")
            depth = indent // 2
            name, n_tok, w_tok = line.split()
            node = StatNode(None if name == "root" else Action[name], int(n_tok[2:]), float(w_tok[2:]))
            if depth == 0:
                if stack:
                    raise ValueError(f"line {lineno}: second root")
                tree.root = node
                stack = [node]
                continue
            if depth > len(stack):
                raise ValueError(f"line {lineno}: indentation jumps a level")
            del stack[depth:]
            stack[-1].children[node.action] = node
            stack.append(node)
        return tree


def normalized_mean(node: StatNode, bounds: tuple[float, float] | None) -> float:
    mean = node.total / node.visits
    if bounds is None:
        return mean
    lo, hi = bounds
    if hi <= lo:
        return 0.5
    x = (mean - lo) / (hi - lo)
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def ucb1_value(
    parent_visits: int,
    child: StatNode,
    params: UcbParams,
    bounds: tuple[float, float] | None = None,
) -> float:
    """mean + 2K * sqrt(2 ln(n) / n_j); the mean is min-max scaled when ``bounds`` is given."""
    nj = child.visits
    if nj < 1:
        raise ValueError("UCB1 is undefined for unvisited children")
    if parent_visits < nj:
        raise ValueError(f"parent visits {parent_visits} < child visits {nj}")
    return normalized_mean(child, bounds) + 2.0 * params.k * math.sqrt(2.0 * math.log(parent_visits) / nj)


def select_child(
    node: StatNode,
    legal: Sequence[Action],
    params: UcbParams,
    rng: SeededRng,
    bounds: tuple[float, float] | None = None,
) -> tuple[Action, StatNode | None]:
    """Unvisited legal actions first (uniformly), else UCB1 argmax with random tie-break."""
    children = node.children
    unvisited = [a for a in legal if a not in children or children[a].visits == 0]
    if unvisited:
        a = unvisited[rng.randbelow(len(unvisited))] if len(unvisited) > 1 else unvisited[0]
        return a, children.get(a)
    n = node.visits
    best = -math.inf
    ties: list[Action] = []
    for a in legal:
        v = ucb1_value(n, children[a], params, bounds)
        if v > best:
            best = v
            ties = [a]
        elif v == best:
            ties.append(a)
    a = ties[0] if len(ties) == 1 else ties[rng.randbelow(len(ties))]
    return a, children[a]


def _pad(seq: list[Action], length: int, legal: Sequence[Action], rng: SeededRng) -> list[Action]:
    k = len(legal)
    while len(seq) < length:
        seq.append(legal[rng.randbelow(k)])
    return seq


def best_path(tree: StatTree, length: int, legal: Sequence[Action], rng: SeededRng) -> list[Action]:
    """Greedy descent on mean reward, padded with random legal actions to ``length``."""
    if length < 1:
        raise ValueError("length must be >= 1")
    seq: list[Action] = []
    node = tree.root
    while len(seq) < length:
        best = -math.inf
        ties: list[Action] = []
        for a in legal:
            c = node.children.get(a)
            if c is None or c.visits == 0:
                continue
            m = c.total / c.visits
            if m > best:
                best = m
                ties = [a]
            elif m == best:
                ties.append(a)
        if not ties:
            break
        a = ties[0] if len(ties) == 1 else ties[rng.randbelow(len(ties))]
        seq.append(a)
        node = node.children[a]
    return _pad(seq, length, legal, rng)


def sample_ucb1_sequence(tree: StatTree, length: int, legal: Sequence[Action], rng: SeededRng) -> list[Action]:
    """Descend with :func:`select_child`; pad randomly once past the expanded frontier."""
    if length < 1:
        raise ValueError("length must be >= 1")
    seq: list[Action] = []
    node: StatNode | None = tree.root
    bounds = tree.bounds
    params = tree.params
    while len(seq) < length and node is not None:
        a, child = select_child(node, legal, params, rng, bounds)
        seq.append(a)
        node = child if child is not None and child.visits > 0 else None
    return _pad(seq, length, legal, rng)
