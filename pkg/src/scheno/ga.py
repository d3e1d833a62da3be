"""Genetic search over noise sets, with the SCHENO score as fitness.

Each generation grows the population tenfold (6P mutants, 3P children, plus
the P current members) and keeps the best P, so strong members survive
indefinitely.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .aut_engine import DEFAULT_BUDGET, BudgetExceeded
from .graph_core import Graph, NodePairSet, Pair, max_pairs, pair_rank, pair_unrank
from .metric import Decomposition, NoiseParam, choose_p, decompose, score

log = logging.getLogger(__name__)

@dataclass(frozen=True)
class GAConfig:
    population_size_override: int | None = None
    swap_prob: float = 0.6
    add_prob: float = 0.2
    remove_prob: float = 0.2
    keep_prob: float = 0.5
    max_generations: int = 500
    patience: int = 50
    seed: int = 0
    workers: int = 1
    mutation_events: int = 1
    budget: int = DEFAULT_BUDGET

    def __post_init__(self) -> None:
        probs = (self.swap_prob, self.add_prob, self.remove_prob)
        if any(p < 0 for p in probs) or not math.isclose(sum(probs), 1.0):
            raise ValueError("mutation probabilities must be non-negative and sum to 1")
        if not 0.0 <= self.keep_prob <= 1.0:
            raise ValueError("keep_prob must lie in [0, 1]")
        if self.population_size_override is not None and self.population_size_override < 2:
            raise ValueError("population size must be at least 2")
        if self.workers < 1 or self.mutation_events < 1:
            raise ValueError("workers and mutation_events must be positive")

    def population_size(self, n: int) -> int:
        if self.population_size_override is not None:
            return self.population_size_override
        return max(2, math.floor((n + 400) ** 1.4))


@dataclass
class PopulationMember:
    genome: NodePairSet
    fitness: float | None = None


@dataclass(frozen=True)
class Checkpoint:
    """Enough state to continue a run: the generation just finished and its population."""

    generation: int
    best_fitness: float
    stale: int
    population: tuple[frozenset, ...]


@dataclass
class GenerationStats:
    generation: int
    best_fitness: float
    best_noise_size: int
    budget_failures: int


# ---------------------------------------------------------------------------
# variation operators


SWAP, ADD, REMOVE = "swap", "add", "remove"


def _random_absent(genome: frozenset, n: int, directed: bool, rng: np.random.Generator) -> Pair:
    big_m = max_pairs(n, directed)
    if len(genome) * 2 < big_m:
        while True:
            pair = pair_unrank(int(rng.integers(big_m)), n, directed)
            if pair not in genome:
                return pair
    taken = {pair_rank(a, b, n, directed) for a, b in genome}
    free = [k for k in range(big_m) if k not in taken]
    return pair_unrank(free[int(rng.integers(len(free)))], n, directed)


def mutation_event(genome: frozenset, big_m: int, rng: np.random.Generator, config: GAConfig) -> str:
    """Draw swap/add/remove, applying the fallbacks for empty and full genomes."""
    u = rng.random()
    if u < config.swap_prob:
        event = SWAP
    elif u < config.swap_prob + config.add_prob:
        event = ADD
    else:
        event = REMOVE
    if not genome and event in (SWAP, REMOVE):
        return ADD
    if len(genome) >= big_m and event in (SWAP, ADD):
        return REMOVE
    return event


def _mutate_genome(genome: frozenset, n: int, directed: bool, rng: np.random.Generator, config: GAConfig) -> frozenset:
    big_m = max_pairs(n, directed)
    for _ in range(config.mutation_events):
        event = mutation_event(genome, big_m, rng, config)
        if event == ADD:
            genome = genome | {_random_absent(genome, n, directed, rng)}
            continue
        members = sorted(genome)
        victim = members[int(rng.integers(len(members)))]
        if event == REMOVE:
            genome = genome - {victim}
        else:
            fresh = _random_absent(genome, n, directed, rng)
            genome = (genome - {victim}) | {fresh}
    return genome


def mutate(parent: PopulationMember, rng: np.random.Generator, config: GAConfig = GAConfig()) -> PopulationMember:
    """One mutation event: swap (0.6), add (0.2) or remove (0.2) a pair."""
    g = parent.genome
    return PopulationMember(g.with_pairs(_mutate_genome(g.pairs, g.n, g.directed, rng, config)))


def _mate_genomes(a: frozenset, b: frozenset, rng: np.random.Generator, keep_prob: float) -> frozenset:
    either = sorted(a ^ b)
    draws = rng.random(len(either))
    return (a & b) | {pair for pair, u in zip(either, draws) if u < keep_prob}


def mate(a: PopulationMember, b: PopulationMember, rng: np.random.Generator, keep_prob: float = 0.5) -> PopulationMember:
    """Keep pairs shared by both parents; keep each other pair with ``keep_prob``."""
    if (a.genome.n, a.genome.directed) != (b.genome.n, b.genome.directed):
        raise ValueError("parents belong to different graphs")
    return PopulationMember(a.genome.with_pairs(_mate_genomes(a.genome.pairs, b.genome.pairs, rng, keep_prob)))


# ---------------------------------------------------------------------------
# fitness


def fitness(g: Graph, genome: NodePairSet, param: NoiseParam, budget: int = DEFAULT_BUDGET) -> float:
    return score(g, genome, param, budget).total


_worker_state: dict = {}


def _init_worker(g: Graph, param: NoiseParam, budget: int) -> None:
    _worker_state.update(graph=g, param=param, budget=budget)


def _score_pairs(pairs: Sequence[Pair]) -> float:
    g: Graph = _worker_state["graph"]
    try:
        return fitness(g, NodePairSet(g.n, g.directed, frozenset(pairs)), _worker_state["param"], _worker_state["budget"])
    except BudgetExceeded:
        return -math.inf


class SchenoGA:
    """Runs the search; keeps a fitness cache, statistics and budget-failure count."""

    def __init__(self, g: Graph, config: GAConfig = GAConfig(), param: NoiseParam | None = None):
        self.graph = g
        self.config = config
        self.param = param if param is not None else choose_p(g.n, g.directed)
        self.big_m = max_pairs(g.n, g.directed)
        self.pop_size = config.population_size(g.n)
        self.cache: dict[frozenset, float] = {}
        self.order_keys: dict[frozenset, tuple] = {}
        self.budget_failures = 0
        self.history: list[GenerationStats] = []
        self.population: list[frozenset] = []
        self.checkpoint: Checkpoint | None = None

    # scoring ------------------------------------------------------------

    def _evaluate(self, genomes: Sequence[frozenset], pool: ProcessPoolExecutor | None) -> list[float]:
        todo = list(dict.fromkeys(x for x in genomes if x not in self.cache))
        if todo:
            if pool is None:
                _init_worker(self.graph, self.param, self.config.budget)
                results = [_score_pairs(tuple(sorted(x))) for x in todo]
            else:
                chunk = max(1, len(todo) // (4 * self.config.workers))
                results = list(pool.map(_score_pairs, [tuple(sorted(x)) for x in todo], chunksize=chunk))
            for genome, value in zip(todo, results):
                if value == -math.inf:
                    self.budget_failures += 1
                self.cache[genome] = value
        return [self.cache[x] for x in genomes]

    def _order_key(self, genome: frozenset) -> tuple:
        key = self.order_keys.get(genome)
        if key is None:
            key = self.order_keys[genome] = (len(genome), tuple(sorted(genome)))
        return key

    def _select(self, pool: list[frozenset], scores: list[float]) -> tuple[list[frozenset], list[float]]:
        ranked = sorted(range(len(pool)), key=lambda i: (-scores[i], self._order_key(pool[i])))[: self.pop_size]
        return [pool[i] for i in ranked], [scores[i] for i in ranked]

    # main loop ----------------------------------------------------------

    def _initial_population(self) -> list[frozenset]:
        rng = np.random.default_rng((self.config.seed, 0))
        g = self.graph
        pop = [frozenset()]
        while len(pop) < self.pop_size:
            k = int(rng.integers(self.big_m)) if self.big_m else 0
            pop.append(frozenset({pair_unrank(k, g.n, g.directed)}) if self.big_m else frozenset())
        return pop

    def _offspring(self, population: list[frozenset], generation: int) -> list[frozenset]:
        cfg = self.config
        g = self.graph
        rng = np.random.default_rng((cfg.seed, generation))
        p = self.pop_size
        mutants = [
            _mutate_genome(population[int(rng.integers(p))], g.n, g.directed, rng, cfg) for _ in range(6 * p)
        ]
        parents = population + mutants
        children = []
        for _ in range(3 * p):
            a = parents[int(rng.integers(len(parents)))]
            b = parents[int(rng.integers(len(parents)))]
            children.append(_mate_genomes(a, b, rng, cfg.keep_prob))
        return mutants + children

    def run(
        self,
        progress: Callable[[GenerationStats], None] | None = None,
        resume: "Checkpoint | None" = None,
    ) -> Decomposition:
        cfg = self.config
        pool = None
        if cfg.workers > 1:
            pool = ProcessPoolExecutor(
                cfg.workers, initializer=_init_worker, initargs=(self.graph, self.param, cfg.budget)
            )
        try:
            if resume is None:
                population = self._initial_population()
                population, scores = self._select(population, self._evaluate(population, pool))
                best, stale, start = scores[0], 0, 1
            else:
                population = list(resume.population)
                if len(population) != self.pop_size:
                    raise ValueError("checkpoint population size does not match the configuration")
                scores = self._evaluate(population, pool)
                best, stale, start = resume.best_fitness, resume.stale, resume.generation + 1
            self.population = population
            for generation in range(start, cfg.max_generations + 1):
                if stale >= cfg.patience:
                    break
                candidates = population + self._offspring(population, generation)
                assert len(candidates) == 10 * self.pop_size
                population, scores = self._select(candidates, self._evaluate(candidates, pool))
                if scores[0] > best:
                    best, stale = scores[0], 0
                else:
                    stale += 1
                self.population = population
                self.checkpoint = Checkpoint(generation, best, stale, tuple(population))
                stats = GenerationStats(generation, scores[0], len(population[0]), self.budget_failures)
                self.history.append(stats)
                if progress is not None:
                    progress(stats)
        finally:
            if pool is not None:
                pool.shutdown()
        if self.budget_failures:
            log.warning("%d candidate(s) exceeded the automorphism budget", self.budget_failures)
        g = self.graph
        winner = NodePairSet(g.n, g.directed, population[0])
        return decompose(g, winner, self.param, cfg.budget)


def evolve(
    g: Graph,
    config: GAConfig = GAConfig(),
    progress: Callable[[GenerationStats], None] | None = None,
) -> Decomposition:
    """Search noise sets of ``g`` for the best-scoring decomposition."""
    return SchenoGA(g, config).run(progress)
