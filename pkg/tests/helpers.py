"""Small graph families shared by the tests."""

from __future__ import annotations

import itertools
import random
from pathlib import Path

from scheno.graph_core import ColoredGraph, Graph, NodePairSet

DATA = Path(__file__).parent / "data"


def complete(n: int) -> Graph:
    return Graph.from_edges(n, itertools.combinations(range(n), 2))


def cycle(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + inner + [(i, i + 5) for i in range(5)])


def johnson(n: int, k: int) -> Graph:
    subsets = list(itertools.combinations(range(n), k))
    return Graph.from_edges(
        len(subsets),
        [(i, j) for i, j in itertools.combinations(range(len(subsets)), 2) if len(set(subsets[i]) & set(subsets[j])) == k - 1],
    )


def seven_node_graph() -> Graph:
    # 1-based labels shifted to 0..6
    return Graph.from_edges(7, [(a - 1, b - 1) for a, b in [(1, 5), (2, 5), (5, 6), (6, 7), (7, 3), (7, 4)]])


# 5-node example: nodes a..e as 0..4
EXAMPLE5 = Graph.from_edges(5, [(0, 1), (0, 3), (1, 2), (1, 4), (3, 4)])
EXAMPLE5_NOISE = {
    "empty": [],
    "N1": [(1, 2)],
    "N2": [(2, 3)],
    "N3": sorted(EXAMPLE5.edges),
    "N4": [(0, 2)],
    "N5": [(0, 4)],
}


def without(g: Graph, pair) -> Graph:
    return Graph(g.n, g.directed, g.edges - {pair})


def toggle(g: Graph, pairs) -> Graph:
    return Graph(g.n, g.directed, g.edges ^ frozenset(pairs))


def pairs_of(g: Graph, pairs) -> NodePairSet:
    return NodePairSet(g.n, g.directed, frozenset(pairs))


def random_graph(rng: random.Random, n: int, directed: bool, density: float | None = None) -> Graph:
    q = rng.random() if density is None else density
    return Graph.from_edges(n, [p for p in Graph(n, directed).all_pairs() if rng.random() < q], directed)


def random_colored(rng: random.Random, n: int, directed: bool) -> ColoredGraph:
    g = random_graph(rng, n, directed)
    if rng.random() < 0.5:
        return ColoredGraph(g)
    return ColoredGraph.from_labels(g, [rng.randrange(rng.choice([1, 2, 3])) for _ in range(n)])


def random_pair_subset(rng: random.Random, g: Graph, max_size: int) -> NodePairSet:
    pairs = list(g.all_pairs())
    k = rng.randint(0, min(max_size, len(pairs)))
    return pairs_of(g, rng.sample(pairs, k))
