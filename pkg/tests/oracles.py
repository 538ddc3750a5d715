"""Independent reference implementations and toy forward models for the test suite."""

from __future__ import annotations

import itertools
import math

import mpmath

from rhea.core import Action, SeededRng, Status, initial_state, splitmix_next
from rhea.tree import StatNode, StatTree


def ucb1_reference(mean, k, n, nj, digits=50):
    with mpmath.workdps(digits):
        return mpmath.mpf(mean) + 2 * mpmath.mpf(k) * mpmath.sqrt(2 * mpmath.log(n) / nj)


def argmax_mean_paths(root: StatNode, legal, max_len: int) -> set[tuple[Action, ...]]:
    """Every root-to-leaf path (cut at ``max_len``), kept only if each step is a maximal-mean sibling."""
    out = set()

    def all_paths(node, prefix):
        kids = [node.children[a] for a in legal if a in node.children and node.children[a].visits > 0]
        if not kids or len(prefix) == max_len:
            yield prefix
            return
        for c in kids:
            yield from all_paths(c, prefix + (c.action,))

    for path in all_paths(root, ()):
        node = root
        ok = True
        for a in path:
            kids = [c for b, c in node.children.items() if b in legal and c.visits > 0]
            top = max(c.total / c.visits for c in kids)
            if node.children[a].total / node.children[a].visits != top:
                ok = False
                break
            node = node.children[a]
        if ok:
            out.add(path)
    return out


def random_tree(rng: SeededRng, legal, max_nodes=200, max_depth=6, integer_rewards=True) -> StatTree:
    tree = StatTree()
    size = 1
    for _ in range(400):
        depth = 1 + rng.randbelow(max_depth)
        path = [legal[rng.randbelow(len(legal))] for _ in range(depth)]
        fitness = float(rng.randbelow(5)) if integer_rewards else rng.random() * 10 - 5
        node, new = tree.root, 0
        for a in path:
            node = node.children.get(a) if node is not None else None
            new += node is None
        if size + new > max_nodes:
            break
        size += new
        tree.backpropagate(path, fitness)
    return tree


def brute_u_distribution(n: int, m: int) -> dict[int, int]:
    """Count of U values over all placements of n 'a' ranks among n+m, by enumeration."""
    counts: dict[int, int] = {}
    for a_pos in itertools.combinations(range(n + m), n):
        # U for a = number of (a, b) pairs with a ranked above b
        u = sum(p - i for i, p in enumerate(a_pos))
        counts[u] = counts.get(u, 0) + 1
    return counts


def brute_two_sided_p(u: int, n: int, m: int) -> float:
    counts = brute_u_distribution(n, m)
    total = math.comb(n + m, n)
    lower = sum(c for v, c in counts.items() if v <= u)
    upper = sum(c for v, c in counts.items() if v >= u)
    return min(1.0, 2 * min(lower, upper) / total)


def gaussian_binomial_counts(n: int, m: int) -> list[int]:
    """Coefficients of the Gaussian binomial [n+m choose n]_q, i.e. the exact null counts of U."""
    poly = [1]
    for i in range(1, n + 1):
        # multiply by (1 - q^(m+i)) / (1 - q^i)
        num = poly + [0] * (m + i)
        for j in range(len(poly)):
            num[j + m + i] -= poly[j]
        out = [0] * (len(num) - i)
        carry = num[:]
        for j in range(len(out)):
            out[j] = carry[j]
            carry[j + i] += out[j]
        poly = out
        while len(poly) > 1 and poly[-1] == 0:
            poly.pop()
    return poly + [0] * (n * m + 1 - len(poly))


# --- toy forward models ------------------------------------------------------


class ToyGame:
    legal_actions = (Action.LEFT, Action.RIGHT)
    stochastic = False
    width = 1


class ToyState:
    """Minimal state accepted by the evolution and search code."""

    __slots__ = ("game", "tick", "status", "score", "rng")

    def __init__(self, game, tick=0, status=Status.ONGOING, score=0.0, rng=0):
        self.game = game
        self.tick = tick
        self.status = status
        self.score = score
        self.rng = rng

    def reseeded(self, seed):
        return ToyState(self.game, self.tick, self.status, self.score, initial_state(seed, 0))


class ConstantGame(ToyGame):
    """Every plan scores exactly ``value`` after its first step; never terminates."""

    def __init__(self, value: float) -> None:
        self.value = value

    def advance(self, s, a):
        return ToyState(self, s.tick + 1, Status.ONGOING, self.value)

    def root(self):
        return ToyState(self)


class BanditGame(ToyGame):
    """One-step two-armed bandit: LEFT pays 1 with probability ``p_left``, RIGHT with ``p_right``."""

    stochastic = True

    def __init__(self, p_left: float, p_right: float) -> None:
        self.p = {Action.LEFT: p_left, Action.RIGHT: p_right}

    def advance(self, s, a):
        rng, u = splitmix_next(s.rng)
        reward = 1.0 if (u >> 11) / 2**53 < self.p[a] else 0.0
        return ToyState(self, s.tick + 1, Status.WIN, s.score + reward, rng)

    def root(self, seed=0):
        return ToyState(self, rng=initial_state(seed, 0))
