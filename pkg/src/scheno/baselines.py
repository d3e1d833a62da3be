"""Baseline decompositions: k-truss, externally supplied schemas, ranked-edge sweeps."""

from __future__ import annotations

import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .aut_engine import DEFAULT_BUDGET
from .graph_core import Graph, GraphError, NodePairSet, Pair, canonical_pair
from .metric import NoiseParam, ScoreBreakdown, gain_over_random, mean_std, score

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# k-truss


def _undirected_truss(adj: dict[int, set[int]], k: int) -> set[Pair]:
    support: dict[Pair, int] = {}
    for a in adj:
        for b in adj[a]:
            if a < b:
                support[(a, b)] = len(adj[a] & adj[b])
    need = k - 2
    doomed = [e for e, s in support.items() if s < need]
    alive = set(support)
    while doomed:
        a, b = doomed.pop()
        if (a, b) not in alive:
            continue
        alive.discard((a, b))
        for c in adj[a] & adj[b]:
            for e in ((min(a, c), max(a, c)), (min(b, c), max(b, c))):
                if e in alive:
                    support[e] -= 1
                    if support[e] == need - 1:
                        doomed.append(e)
        adj[a].discard(b)
        adj[b].discard(a)
    return alive


def _adjacency(g: Graph) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = defaultdict(set)
    for a, b in g.edges:
        adj[a].add(b)
        adj[b].add(a)
    return adj


def k_truss(g: Graph, k: int) -> NodePairSet:
    """Largest edge set where every edge lies in at least k-2 triangles of the set.

    Directed graphs are peeled on their underlying undirected graph; the result
    keeps each directed edge whose underlying pair survives.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    alive = _undirected_truss(_adjacency(g), k)
    return NodePairSet(g.n, g.directed, frozenset(e for e in g.edges if canonical_pair(*e, False) in alive))


def max_truss(g: Graph) -> int:
    """Largest k whose k-truss is non-empty (2 for a triangle-free graph with edges, 0 if edgeless)."""
    if not g.edges:
        return 0
    k = 2
    while _undirected_truss(_adjacency(g), k + 1):
        k += 1
    return k


# ---------------------------------------------------------------------------
# external schemas


@dataclass(frozen=True)
class ExternalReport:
    breakdown: ScoreBreakdown
    gain_over_all_structure: float
    gain_over_random: float
    random_mean: float
    random_std: float


def noise_for_schema(g: Graph, schema_edges: NodePairSet) -> NodePairSet:
    if not schema_edges.compatible_with(g):
        raise GraphError("schema and graph disagree on node count or directedness")
    return NodePairSet(g.n, g.directed, g.edges ^ schema_edges.pairs)


def score_external(
    g: Graph,
    schema_edges: NodePairSet,
    param: NoiseParam,
    trials: int = 20,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> ExternalReport:
    """Score a schema produced elsewhere (SUBDUE, VoG, k-truss, ...)."""
    noise = noise_for_schema(g, schema_edges)
    breakdown = score(g, noise, param, budget)
    base = score(g, NodePairSet.empty(g.n, g.directed), param, budget).total
    gain_r, mean, std = gain_over_random(g, noise, param, trials, seed, budget)
    return ExternalReport(breakdown, breakdown.total - base, gain_r, mean, std)


# ---------------------------------------------------------------------------
# ranking sweeps


@dataclass(frozen=True)
class SweepRow:
    k: int
    fraction: float  # k / |E|
    total: float
    gain_structure: float
    gain_random_mean: float
    gain_random_std: float


def check_ranking(g: Graph, ranking: Sequence[Pair]) -> list[Pair]:
    out, seen = [], set()
    for a, b in ranking:
        if not (0 <= a < g.n and 0 <= b < g.n) or a == b:
            raise GraphError(f"ranking pair ({a}, {b}) is not a valid pair for this graph")
        pair = canonical_pair(a, b, g.directed)
        if pair in seen:
            raise GraphError(f"ranking lists pair {pair} twice")
        seen.add(pair)
        out.append(pair)
    return out


def sweep_ks(m: int, steps: int, available: int) -> list[int]:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    top = 2 * m
    if available < top:
        log.warning("ranking has %d pairs, fewer than 2|E| = %d; sweep truncated", available, top)
        top = available
    if top == 0:
        return [0]
    ks = {int(k) for k in np.rint(np.linspace(0, 2 * m, steps)) if k <= top}
    if top < 2 * m:
        ks.add(top)
    return sorted(ks)


def matched_random_noise(g: Graph, n_add: int, n_del: int, rng: np.random.Generator) -> NodePairSet:
    """Noise that deletes ``n_del`` random edges and adds ``n_add`` random non-edges."""
    edges = sorted(g.edges)
    non_edges = [p for p in g.all_pairs() if p not in g.edges]
    pick_d = rng.choice(len(edges), size=n_del, replace=False) if n_del else []
    pick_a = rng.choice(len(non_edges), size=n_add, replace=False) if n_add else []
    return NodePairSet(g.n, g.directed, frozenset([edges[i] for i in pick_d] + [non_edges[i] for i in pick_a]))


def _sweep_row(args) -> SweepRow:
    g, ranking, k, param, trials, seed, budget = args
    schema = frozenset(ranking[:k])
    noise = NodePairSet(g.n, g.directed, g.edges ^ schema)
    base = score(g, NodePairSet.empty(g.n, g.directed), param, budget).total
    total = score(g, noise, param, budget).total
    n_add = len(schema - g.edges)
    n_del = len(g.edges - schema)
    rng = np.random.default_rng((seed, k))
    mean, std = mean_std(
        [score(g, matched_random_noise(g, n_add, n_del, rng), param, budget).total - base for _ in range(trials)]
    )
    fraction = k / g.m if g.m else 0.0
    return SweepRow(k, fraction, total, total - base, mean, std)


def ranking_sweep(
    g: Graph,
    ranking: Sequence[Pair],
    param: NoiseParam,
    steps: int = 41,
    trials: int = 20,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
) -> list[SweepRow]:
    """Score the top-k prefixes of a ranking for k spread over [0, 2|E|].

    The random baseline adds and deletes exactly as many pairs as each
    prefix schema does.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    pairs = check_ranking(g, ranking)
    jobs = [(g, pairs, k, param, trials, seed, budget) for k in sweep_ks(g.m, steps, len(pairs))]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_sweep_row, jobs))
    return [_sweep_row(job) for job in jobs]
