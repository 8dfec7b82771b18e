"""The (mu + lambda) evolutionary loop with NSGA-II survivor selection.

Randomness is split into independent streams (initial population, parent
draws, operator choice, operator internals) spawned from one seed, so the
sequence of draws does not depend on how evaluation is scheduled.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Sequence

import numpy as np

from .graph import CausalGraph, Edge, check_graph
from .metrics import FrequencyTable, batch_fitness
from .model import Individual
from .operators import create_individual, crossover, mutate
from .pareto import EpsilonArchive, ParetoFront
from .selection import lexicographic_select, nsga2_select

log = logging.getLogger(__name__)

SELECTIONS = ("nsga2", "lexicographic")


@dataclass
class EvolutionConfig:
    mu: int = 300
    lambda_: int = 300
    p_crossover: float = 0.1
    p_mutation: float = 0.9
    mutation_sigma: float = 0.1
    generations: int = 400
    seed: int | None = None
    per_node_swap_prob: float = 0.5
    keep_both_offspring: bool = False
    selection: str = "nsga2"
    epsilon_abs: float = 1e-8
    epsilon_rel: float = 1e-5
    threads: int = 1
    checkpoint_every: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> "EvolutionConfig":
        if self.mu < 1 or self.lambda_ < 1:
            raise ValueError("mu and lambda must be positive")
        for name in ("p_crossover", "p_mutation", "per_node_swap_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.p_crossover + self.p_mutation > 1.0 + 1e-12:
            raise ValueError("p_crossover + p_mutation must not exceed 1")
        if self.mutation_sigma <= 0:
            raise ValueError("mutation_sigma must be positive")
        if self.generations < 0:
            raise ValueError("generations must be non-negative")
        if self.selection not in SELECTIONS:
            raise ValueError(f"selection must be one of {SELECTIONS}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        return self

    def replace(self, **changes) -> "EvolutionConfig":
        data = asdict(self)
        data.update(changes)
        return EvolutionConfig(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EvolutionConfig":
        data = dict(data)
        if "lambda" in data:
            data["lambda_"] = data.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields {sorted(unknown)}")
        return cls(**data)


class Evaluator:
    """Scores individuals against frequencies and counts evaluations.

    Fitness is ``(TVD, C_e1, C_e2, ...)`` over `edges` (default: the graph's
    penalized edges).  Batches are split across `threads` workers; results
    do not depend on the split.
    """

    def __init__(self, graph: CausalGraph, freq: FrequencyTable,
                 edges: Sequence[Edge] | None = None, threads: int = 1):
        check_graph(graph)
        self.graph = graph
        self.freq = freq
        self.edges = tuple(graph.penalized_edges if edges is None else edges)
        self.target = freq.aligned(graph.observables)
        expected = tuple(graph.cardinality(v) for v in graph.observables)
        if self.target.shape != expected:
            raise ValueError(f"frequency table shape {self.target.shape} does not match graph {expected}")
        self.threads = threads
        self.n_evaluations = 0
        self._pool = ThreadPoolExecutor(threads) if threads > 1 else None

    def _score(self, chunk: Sequence[Individual]) -> np.ndarray:
        stacked = [np.stack(ts) for ts in zip(*(ind.tensors for ind in chunk))]
        return batch_fitness(self.graph, stacked, self.target, self.edges)

    def __call__(self, individuals: Sequence[Individual]) -> np.ndarray:
        individuals = list(individuals)
        if not individuals:
            return np.empty((0, 1 + len(self.edges)))
        for ind in individuals:
            if ind.graph != self.graph:
                raise ValueError("individual belongs to a different graph")
        if self._pool is None or len(individuals) < 2 * self.threads:
            scores = self._score(individuals)
        else:
            chunks = np.array_split(np.arange(len(individuals)), self.threads)
            parts = self._pool.map(self._score, [[individuals[i] for i in c] for c in chunks])
            scores = np.vstack(list(parts))
        for ind, f in zip(individuals, scores):
            f.flags.writeable = False
            ind.fitness = f
        self.n_evaluations += len(individuals)
        return scores

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()


def evaluate(individual: Individual, freq: FrequencyTable, penalized: Sequence[Edge] | None = None) -> np.ndarray:
    """Fitness vector of one individual (also cached on ``individual.fitness``)."""
    return Evaluator(individual.graph, freq, penalized)([individual])[0]


def fitness_matrix(individuals: Sequence[Individual]) -> np.ndarray:
    return np.vstack([ind.fitness for ind in individuals])


@dataclass
class EvolutionResult:
    front: ParetoFront
    archive: EpsilonArchive
    population: list[Individual]
    n_evaluations: int
    history: list[dict] = field(default_factory=list)
    interrupted: bool = False


def make_streams(seed: int | None) -> tuple[int, dict[str, np.random.Generator]]:
    """Independent generators for each consumer of randomness.

    Returns the seed actually used (drawn from entropy when `seed` is None).
    """
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (2**63))
    children = np.random.SeedSequence(seed).spawn(4)
    names = ("init", "parents", "choice", "operators")
    return seed, {n: np.random.default_rng(c) for n, c in zip(names, children)}


def run_evolution(
    graph: CausalGraph,
    freq: FrequencyTable,
    config: EvolutionConfig,
    initial_population: Sequence[Individual] | None = None,
    evaluator: Evaluator | None = None,
    front: ParetoFront | None = None,
    archive: EpsilonArchive | None = None,
    callback: Callable[[int, EvolutionResult], None] | None = None,
    checkpoint: Callable[[int, EvolutionResult], None] | None = None,
) -> EvolutionResult:
    """Evolve a population for ``config.generations`` generations.

    Each generation draws ``lambda`` offspring: two parents are picked
    uniformly with replacement, crossed over with probability
    ``p_crossover``, otherwise the first is mutated with probability
    ``p_mutation``, otherwise passed through; only the first child is kept
    unless ``keep_both_offspring`` is set.  Survivors are the best ``mu`` of
    parents plus offspring.  Every generated individual is offered to the
    epsilon archive and every survivor to the global Pareto front.

    Passing `front` / `archive` / `evaluator` lets several runs share them.
    """
    check_graph(graph)
    config.validate()
    _, rng = make_streams(config.seed)
    own_evaluator = evaluator is None
    if evaluator is None:
        evaluator = Evaluator(graph, freq, threads=config.threads)
    front = ParetoFront() if front is None else front
    archive = EpsilonArchive(config.epsilon_abs, config.epsilon_rel) if archive is None else archive
    select = nsga2_select if config.selection == "nsga2" else lexicographic_select
    start = evaluator.n_evaluations

    if initial_population is None:
        population = [create_individual(graph, rng["init"]) for _ in range(config.mu)]
    else:
        population = list(initial_population)
        if not population:
            raise ValueError("initial population is empty")
    pending = [ind for ind in population if ind.fitness is None]
    evaluator(pending)
    archive.offer_many((ind.fitness for ind in population), population)
    front.update((ind.fitness for ind in population), population)
    offered = {id(ind) for ind in population}

    result = EvolutionResult(front, archive, population, 0)
    pc, pm = config.p_crossover, config.p_mutation
    try:
        for gen in range(1, config.generations + 1):
            offspring: list[Individual] = []
            unevaluated: list[Individual] = []
            while len(offspring) < config.lambda_:
                i, j = rng["parents"].integers(len(population), size=2)
                i1, i2 = population[i], population[j]
                u = rng["choice"].random()
                if u < pc:
                    c1, c2 = crossover(i1, i2, rng["operators"], config.per_node_swap_prob)
                    offspring.append(c1)
                    unevaluated.append(c1)
                    if config.keep_both_offspring and len(offspring) < config.lambda_:
                        offspring.append(c2)
                        unevaluated.append(c2)
                elif u < pc + pm:
                    c1 = mutate(i1, config.mutation_sigma, rng["operators"])
                    offspring.append(c1)
                    unevaluated.append(c1)
                else:
                    offspring.append(Individual(graph, i1.tensors, i1.fitness))
            evaluator(unevaluated)
            archive.offer_many((ind.fitness for ind in offspring), offspring)

            pool = population + offspring
            keep = select(fitness_matrix(pool), config.mu)
            population = [pool[k] for k in keep]
            fresh = [ind for ind in population if id(ind) not in offered]
            front.update((ind.fitness for ind in fresh), fresh)
            offered = {id(ind) for ind in population}

            result.population = population
            result.n_evaluations = evaluator.n_evaluations - start
            f = fitness_matrix(population)
            result.history.append({
                "generation": gen,
                "best": f.min(axis=0).tolist(),
                "front_size": len(front),
                "archive_size": len(archive),
                "evaluations": result.n_evaluations,
            })
            if callback is not None:
                callback(gen, result)
            if checkpoint is not None and config.checkpoint_every and gen % config.checkpoint_every == 0:
                checkpoint(gen, result)
    except KeyboardInterrupt:
        log.warning("evolution interrupted; returning the current front")
        result.interrupted = True
    finally:
        if own_evaluator:
            evaluator.close()
    result.population = population
    result.n_evaluations = evaluator.n_evaluations - start
    return result
