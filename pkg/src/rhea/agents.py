"""Controllers: vanilla RHEA, shift buffer, statistical tree, tree-based population seeding, MCTS."""

from __future__ import annotations

import enum
from typing import Sequence

from rhea.core import Action, BudgetMeter, SeededRng
from rhea.evolution import (
    DecisionLog,
    EvoParams,
    Individual,
    Population,
    decide,
    evaluate,
    init_population,
    random_genome,
    shift_carryover,
)
from rhea.tree import StatTree, UcbParams, best_path, sample_ucb1_sequence, select_child


class AgentVariant(str, enum.Enum):
    VANILLA = "vanilla"
    SHIFT_BUFFER = "shift-buffer"
    STAT_TREE = "stat-tree"
    STAT_TREE_SEEDING = "stat-tree-seeding"
    MCTS = "mcts"

    @classmethod
    def parse(cls, name: "str | AgentVariant") -> "AgentVariant":
        try:
            return cls(name)
        except ValueError:
            known = ", ".join(v.value for v in cls)
            raise ValueError(f"unknown agent variant {name!r}; known: {known}") from None

    @property
    def uses_tree(self) -> bool:
        return self in (AgentVariant.STAT_TREE, AgentVariant.STAT_TREE_SEEDING, AgentVariant.MCTS)


RHEA_AGENTS = (
    AgentVariant.STAT_TREE_SEEDING,
    AgentVariant.STAT_TREE,
    AgentVariant.SHIFT_BUFFER,
    AgentVariant.VANILLA,
)


def seed_population_from_tree(
    tree: StatTree,
    params: EvoParams,
    root,
    meter: BudgetMeter,
    rng: SeededRng,
    log: DecisionLog | None = None,
) -> Population:
    """First member follows the best-mean path, the rest are UCB1 samples.

    Each member is evaluated (and so back-propagated) before the next one is
    sampled.  If the budget runs out, the remaining slots get random genomes
    that stay unevaluated.
    """
    legal = root.game.legal_actions
    L = params.genome_length
    members: list[Individual] = []
    for i in range(params.population_size):
        if meter.exhausted:
            members.append(Individual(random_genome(L, legal, rng)))
            continue
        if i == 0:
            genome = best_path(tree, L, legal, rng)
        else:
            genome = sample_ucb1_sequence(tree, L, legal, rng)
        members.append(evaluate(Individual(tuple(genome)), root, meter, tree, rng, params.win_bonus, log))
        if log is not None:
            log.seeded += 1
    return Population(members)


def inject_tree_individual(
    pop: Population,
    tree: StatTree,
    params: EvoParams,
    root,
    meter: BudgetMeter,
    rng: SeededRng,
    log: DecisionLog | None = None,
) -> Population:
    """Evaluate one UCB1-sampled plan; it replaces the worst member only if strictly fitter.

    Skipped outright when less than a full plan's worth of budget remains.
    The tree learns from the sample whether or not it is kept.
    """
    L = params.genome_length
    if meter.remaining < L:
        return pop
    genome = tuple(sample_ucb1_sequence(tree, L, root.game.legal_actions, rng))
    injected = evaluate(Individual(genome), root, meter, tree, rng, params.win_bonus, log)
    if log is not None:
        log.injections += 1
    worst = pop.worst_index()
    if worst is None or not injected.fitness > pop.members[worst].fitness:
        return pop
    members = list(pop.members)
    members[worst] = injected
    if log is not None:
        log.replacements += 1
    return Population(members, pop.generation)


def _most_visited(tree: StatTree, legal: Sequence[Action], rng: SeededRng) -> Action | None:
    best_key = None
    ties: list[Action] = []
    for a in legal:
        c = tree.root.children.get(a)
        if c is None or c.visits == 0:
            continue
        key = (c.visits, c.total / c.visits)
        if best_key is None or key > best_key:
            best_key = key
            ties = [a]
        elif key == best_key:
            ties.append(a)
    if not ties:
        return None
    return ties[0] if len(ties) == 1 else ties[rng.randbelow(len(ties))]


def mcts_decide(
    state,
    meter: BudgetMeter,
    tree: StatTree | None,
    rng: SeededRng,
    depth_limit: int = 14,
    params: UcbParams | None = None,
    log: DecisionLog | None = None,
) -> tuple[Action, StatTree]:
    """Open-loop UCT: select/expand inside the tree, random rollout to ``depth_limit`` plies from the root.

    Returns the most visited root action (ties: higher mean, then random) and
    the tree re-rooted on it.
    """
    if tree is None:
        tree = StatTree(params or UcbParams())
    game = state.game
    legal = game.legal_actions
    k = len(legal)
    advance = game.advance
    stochastic = game.stochastic
    if log is not None:
        log.tree_start = tree.root.visits
    while meter.remaining > 0:
        remaining = meter.remaining
        s = state.reseeded(rng.next_u64()) if stochastic else state
        node = tree.root
        path: list[Action] = []
        depth = 0
        bounds = tree.bounds
        while depth < depth_limit and depth < remaining:
            a, child = select_child(node, legal, tree.params, rng, bounds)
            s = advance(s, a)
            depth += 1
            path.append(a)
            if s.status or child is None or child.visits == 0:
                break
            node = child
        while not s.status and depth < depth_limit and depth < remaining:
            s = advance(s, legal[rng.randbelow(k)])
            depth += 1
        meter.consume(depth)
        tree.backpropagate(path, s.score)
        if log is not None:
            log.evaluations += 1
            log.depth += depth
    if log is not None:
        log.tree_end = tree.root.visits
    action = _most_visited(tree, legal, rng)
    if action is None:
        action = legal[rng.randbelow(k)]
    tree.reroot(action)
    return action, tree


class Agent:
    """A controller bound to one episode; ``carryover`` persists between ticks."""

    def __init__(self, variant: AgentVariant, params: EvoParams | None = None) -> None:
        self.variant = AgentVariant.parse(variant)
        self.params = params or EvoParams()
        self.carryover: Population | StatTree | None = None

    def reset(self) -> None:
        self.carryover = None

    def _tree(self) -> StatTree:
        if isinstance(self.carryover, StatTree):
            return self.carryover
        return StatTree(UcbParams(self.params.ucb_k))

    def act(self, state, meter: BudgetMeter, rng: SeededRng, log: DecisionLog | None = None) -> Action:
        variant = self.variant
        params = self.params
        legal = state.game.legal_actions

        if variant is AgentVariant.MCTS:
            action, self.carryover = mcts_decide(
                state, meter, self._tree(), rng, params.genome_length, UcbParams(params.ucb_k), log
            )
            return action

        if variant is AgentVariant.VANILLA:
            action, _ = decide(state, params, meter, rng, lambda: init_population(params, legal, rng), log=log)
            self.carryover = None
            return action

        if variant is AgentVariant.SHIFT_BUFFER:
            carried = self.carryover

            def initial() -> Population:
                if isinstance(carried, Population):
                    return carried
                return init_population(params, legal, rng)

            action, pop = decide(state, params, meter, rng, initial, log=log)
            self.carryover = shift_carryover(pop, legal, rng)
            return action

        tree = self._tree()
        if log is not None:
            log.tree_start = tree.root.visits
        if variant is AgentVariant.STAT_TREE:
            # the tree, not the fittest plan, recommends the move
            fallback, _ = decide(
                state, params, meter, rng, lambda: init_population(params, legal, rng), tree=tree, log=log
            )
            action = _most_visited(tree, legal, rng)
            if action is None:
                action = fallback
        else:
            action, _ = decide(
                state, params, meter, rng,
                lambda: seed_population_from_tree(tree, params, state, meter, rng, log),
                tree=tree,
                after_generation=lambda pop: inject_tree_individual(pop, tree, params, state, meter, rng, log),
                log=log,
            )
        if log is not None:
            log.tree_end = tree.root.visits
        tree.reroot(action)
        self.carryover = tree
        return action


def make_agent(variant: AgentVariant | str, params: EvoParams | None = None) -> Agent:
    return Agent(AgentVariant.parse(variant), params)
