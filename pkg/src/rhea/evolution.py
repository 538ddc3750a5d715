"""Generational RHEA core: genomes, variation, selection, budgeted evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from rhea.core import Action, BudgetMeter, SeededRng, Status
from rhea.tree import StatTree


@dataclass(frozen=True)
class EvoParams:
    population_size: int = 10
    genome_length: int = 14
    mutation_rate: float | None = None  # None -> 1 / genome_length
    tournament_size: int = 3
    elites: int = 1
    budget: int = 900
    win_bonus: float = 0.0
    ucb_k: float = 1.0

    def __post_init__(self) -> None:
        m = self.population_size
        if m < 2:
            raise ValueError("population size must be >= 2")
        if not 1 <= self.elites < m:
            raise ValueError("need 1 <= elites < population size")
        if not 1 <= self.tournament_size <= m:
            raise ValueError("need 1 <= tournament size <= population size")
        if self.genome_length < 1:
            raise ValueError("genome length must be >= 1")
        if self.mutation_rate is None:
            object.__setattr__(self, "mutation_rate", 1.0 / self.genome_length)
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation rate must be a probability")
        if self.budget < 0:
            raise ValueError("budget must be non-negative")
        if not self.ucb_k > 0:
            raise ValueError("ucb K must be positive")


@dataclass(frozen=True)
class Individual:
    genome: tuple[Action, ...]
    fitness: float | None = None
    depth: int = 0
    # evaluation stopped by the budget before the plan ended or the game did
    cut: bool = False
    # the rollout ended in a win after ``depth`` actions
    won: bool = False

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None

    def invalidated(self) -> "Individual":
        return Individual(self.genome)

    def rank_key(self) -> tuple[float, int]:
        """Sort key, smaller is better: higher fitness, then the earlier win."""
        return (-self.fitness, self.depth if self.won else len(self.genome) + 1)


@dataclass
class Population:
    members: list[Individual]
    generation: int = 0

    def __len__(self) -> int:
        return len(self.members)

    def best_index(self) -> int | None:
        """First member with the highest fitness (earlier win on ties), ignoring unevaluated ones."""
        best = None
        for i, ind in enumerate(self.members):
            if ind.fitness is not None and (best is None or ind.rank_key() < self.members[best].rank_key()):
                best = i
        return best

    def worst_index(self) -> int | None:
        """Last member with the lowest fitness."""
        worst = None
        for i, ind in enumerate(self.members):
            if ind.fitness is not None and (worst is None or ind.fitness <= self.members[worst].fitness):
                worst = i
        return worst


@dataclass
class DecisionLog:
    """Counters for one decision, used by the budget and tree audits."""

    evaluations: int = 0
    depth: int = 0
    generations: int = 0
    seeded: int = 0
    injections: int = 0
    replacements: int = 0
    tree_start: int | None = None
    tree_end: int | None = None
    plans: list[tuple[Action, ...]] = field(default_factory=list)
    record_plans: bool = False


def random_genome(length: int, legal: Sequence[Action], rng: SeededRng) -> tuple[Action, ...]:
    k = len(legal)
    return tuple(legal[rng.randbelow(k)] for _ in range(length))


def init_population(params: EvoParams, legal: Sequence[Action], rng: SeededRng) -> Population:
    return Population([Individual(random_genome(params.genome_length, legal, rng)) for _ in range(params.population_size)])


def evaluate(
    ind: Individual,
    root,
    meter: BudgetMeter,
    tree: StatTree | None,
    rng: SeededRng,
    win_bonus: float = 0.0,
    log: DecisionLog | None = None,
) -> Individual:
    """Roll the genome forward from ``root`` on a private copy.

    Stops at a terminal state or when the meter runs dry; fitness is the score
    of the last state reached.  With no budget left the individual comes back
    unevaluated.
    """
    remaining = meter.remaining
    if remaining <= 0:
        return ind
    game = root.game
    state = root.reseeded(rng.next_u64()) if game.stochastic else root
    advance = game.advance
    genome = ind.genome
    steps = len(genome) if len(genome) <= remaining else remaining
    depth = 0
    for i in range(steps):
        state = advance(state, genome[i])
        depth += 1
        if state.status:
            break
    meter.consume(depth)
    fitness = state.score
    if win_bonus and state.status == Status.WIN:
        fitness += win_bonus
    if tree is not None:
        tree.backpropagate(genome[:depth], fitness)
    if log is not None:
        log.evaluations += 1
        log.depth += depth
        if log.record_plans:
            log.plans.append(genome)
    cut = depth < len(genome) and not state.status
    return Individual(genome, fitness, depth, cut, state.status == Status.WIN)


def crossover_mask(length: int, rng: SeededRng) -> int:
    """Bit i set -> child takes gene i from the second parent."""
    mask = 0
    for shift in range(0, length, 64):
        mask |= rng.next_u64() << shift
    return mask & ((1 << length) - 1)


def apply_mask(a: Sequence[Action], b: Sequence[Action], mask: int) -> tuple[Action, ...]:
    return tuple(b[i] if (mask >> i) & 1 else a[i] for i in range(len(a)))


def uniform_crossover(a: Individual, b: Individual, rng: SeededRng) -> Individual:
    if len(a.genome) != len(b.genome):
        raise ValueError("parents differ in genome length")
    return Individual(apply_mask(a.genome, b.genome, crossover_mask(len(a.genome), rng)))


def mutate(ind: Individual, rate: float, legal: Sequence[Action], rng: SeededRng) -> Individual:
    """Resample each gene with probability ``rate`` (the draw may repeat the old gene)."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError("mutation rate must be a probability")
    k = len(legal)
    genome = list(ind.genome)
    for i in range(len(genome)):
        if rng.random() < rate:
            genome[i] = legal[rng.randbelow(k)]
    return Individual(tuple(genome))


def tournament_select(pop: Population, size: int, rng: SeededRng) -> Individual:
    members = pop.members
    if size > len(members):
        raise ValueError("tournament larger than population")
    drawn = rng.sample(range(len(members)), size)
    best = -float("inf")
    ties: list[int] = []
    for i in drawn:
        f = members[i].fitness
        if f is None:
            raise ValueError("tournament over unevaluated member")
        if f > best:
            best = f
            ties = [i]
        elif f == best:
            ties.append(i)
    return members[ties[0] if len(ties) == 1 else ties[rng.randbelow(len(ties))]]


def rank_by_fitness(pop: Population) -> list[Individual]:
    """Evaluated members best-first (fitness, then earlier win); stable among equals."""
    evaluated = [ind for ind in pop.members if ind.fitness is not None]
    return sorted(evaluated, key=Individual.rank_key)


def next_generation(
    pop: Population,
    params: EvoParams,
    root,
    meter: BudgetMeter,
    tree: StatTree | None,
    rng: SeededRng,
    legal: Sequence[Action],
    log: DecisionLog | None = None,
) -> Population:
    """Elites carried over, remaining slots filled by mutated crossover offspring.

    Offspring are evaluated as they are made.  Once the budget runs out, every
    slot still waiting keeps the previous occupant (previous population ordered
    best-first), so the result never mixes in unevaluated or truncated plans.
    """
    previous = rank_by_fitness(pop)
    if len(previous) != len(pop.members):
        raise ValueError("next_generation needs a fully evaluated population")
    m = params.population_size
    members = previous[: params.elites]
    for slot in range(params.elites, m):
        if meter.exhausted:
            members.extend(previous[slot:])
            break
        mum = tournament_select(pop, params.tournament_size, rng)
        dad = tournament_select(pop, params.tournament_size, rng)
        child = mutate(uniform_crossover(mum, dad, rng), params.mutation_rate, legal, rng)
        child = evaluate(child, root, meter, tree, rng, params.win_bonus, log)
        if child.cut:
            members.extend(previous[slot:])
            break
        members.append(child)
    if log is not None:
        log.generations += 1
    return Population(members, pop.generation + 1)


def evaluate_population(
    pop: Population,
    params: EvoParams,
    root,
    meter: BudgetMeter,
    tree: StatTree | None,
    rng: SeededRng,
    log: DecisionLog | None = None,
) -> Population:
    members = [
        ind if ind.evaluated else evaluate(ind, root, meter, tree, rng, params.win_bonus, log)
        for ind in pop.members
    ]
    return Population(members, pop.generation)


def evolve(
    pop: Population,
    params: EvoParams,
    root,
    meter: BudgetMeter,
    tree: StatTree | None,
    rng: SeededRng,
    legal: Sequence[Action],
    log: DecisionLog | None = None,
    after_generation: Callable[[Population], Population] | None = None,
) -> Population:
    """Run generations until the meter is spent."""
    if any(not ind.evaluated for ind in pop.members):
        return pop
    while not meter.exhausted:
        pop = next_generation(pop, params, root, meter, tree, rng, legal, log)
        if after_generation is not None:
            pop = after_generation(pop)
    return pop


def shift_carryover(pop: Population, legal: Sequence[Action], rng: SeededRng) -> Population:
    """Drop each plan's first action, append a random legal one, invalidate fitness."""
    k = len(legal)
    return Population(
        [Individual(ind.genome[1:] + (legal[rng.randbelow(k)],)) for ind in pop.members],
        pop.generation,
    )


def decide(
    state,
    params: EvoParams,
    meter: BudgetMeter,
    rng: SeededRng,
    initial: Callable[[], Population],
    tree: StatTree | None = None,
    after_generation: Callable[[Population], Population] | None = None,
    log: DecisionLog | None = None,
) -> tuple[Action, Population]:
    """One rolling-horizon decision: build a population, evolve it, fire the best plan's first action.

    ``initial`` returns the starting population; members it leaves unevaluated
    are evaluated here.  The search stops when the budget is spent.
    """
    legal = state.game.legal_actions
    pop = evaluate_population(initial(), params, state, meter, tree, rng, log)
    pop = evolve(pop, params, state, meter, tree, rng, legal, log, after_generation)
    best = pop.best_index()
    if best is None:
        return pop.members[0].genome[0], pop
    return pop.members[best].genome[0], pop
