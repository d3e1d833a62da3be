"""Graphs, node-pair sets, permutations and the xor edit operation.

Node ids are dense integers ``0..n-1``. Undirected pairs are stored as
``(a, b)`` with ``a < b``; directed pairs are ordered. Self-loops are rejected
everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

Pair = tuple[int, int]


class GraphError(ValueError):
    """Raised for malformed graphs, pair sets or permutations."""


def canonical_pair(a: int, b: int, directed: bool) -> Pair:
    if a == b:
        raise GraphError(f"self-loop ({a}, {b}) is not allowed")
    if directed or a < b:
        return (a, b)
    return (b, a)


def max_pairs(n: int, directed: bool) -> int:
    """M: the number of possible edges on ``n`` nodes."""
    return n * (n - 1) if directed else n * (n - 1) // 2


def _check_pairs(pairs: Iterable[Pair], n: int, directed: bool) -> frozenset[Pair]:
    out = set()
    for a, b in pairs:
        a, b = int(a), int(b)
        if not (0 <= a < n and 0 <= b < n):
            raise GraphError(f"pair ({a}, {b}) has an endpoint outside 0..{n - 1}")
        out.add(canonical_pair(a, b, directed))
    return frozenset(out)


@dataclass(frozen=True)
class NodePairSet:
    """A set of node pairs (edges and/or non-edges) on ``n`` nodes."""

    n: int
    directed: bool
    pairs: frozenset[Pair] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", _check_pairs(self.pairs, self.n, self.directed))

    @classmethod
    def empty(cls, n: int, directed: bool = False) -> "NodePairSet":
        return cls(n, directed, frozenset())

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Pair]:
        return iter(sorted(self.pairs))

    def __contains__(self, pair: object) -> bool:
        return pair in self.pairs

    def compatible_with(self, g: "Graph") -> bool:
        return self.n == g.n and self.directed == g.directed

    def with_pairs(self, pairs: Iterable[Pair]) -> "NodePairSet":
        return NodePairSet(self.n, self.directed, frozenset(pairs))


@dataclass(frozen=True)
class Graph:
    """A simple graph on nodes ``0..n-1``."""

    n: int
    directed: bool = False
    edges: frozenset[Pair] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise GraphError("node count must be non-negative")
        object.__setattr__(self, "edges", _check_pairs(self.edges, self.n, self.directed))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], directed: bool = False) -> "Graph":
        return cls(n, directed, frozenset((int(a), int(b)) for a, b in edges))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def max_edges(self) -> int:
        return max_pairs(self.n, self.directed)

    @cached_property
    def out_neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Successor lists; for undirected graphs, plain neighbor lists."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in self.edges:
            adj[a].append(b)
            if not self.directed:
                adj[b].append(a)
        return tuple(tuple(sorted(x)) for x in adj)

    @cached_property
    def in_neighbors(self) -> tuple[tuple[int, ...], ...]:
        if not self.directed:
            return self.out_neighbors
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in self.edges:
            adj[b].append(a)
        return tuple(tuple(sorted(x)) for x in adj)

    def has_edge(self, a: int, b: int) -> bool:
        if not self.directed and a > b:
            a, b = b, a
        return (a, b) in self.edges

    def pair_set(self) -> NodePairSet:
        return NodePairSet(self.n, self.directed, self.edges)

    def all_pairs(self) -> Iterator[Pair]:
        """Every possible pair in canonical form, in rank order."""
        n = self.n
        if self.directed:
            return ((a, b) for a in range(n) for b in range(n) if a != b)
        return ((a, b) for a in range(n) for b in range(a + 1, n))

    def as_undirected(self) -> "Graph":
        if not self.directed:
            return self
        return Graph(self.n, False, frozenset(canonical_pair(a, b, False) for a, b in self.edges))

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, m={self.m}, {kind})"


def _check_compatible(g: Graph, noise: NodePairSet) -> None:
    if noise.directed != g.directed:
        raise GraphError("pair set and graph disagree on directedness")
    if noise.n != g.n:
        raise GraphError(f"pair set is on {noise.n} nodes but the graph has {g.n}")


def xor_apply(g: Graph, noise: NodePairSet) -> Graph:
    """Return ``g`` with every pair of ``noise`` toggled (edge <-> non-edge)."""
    _check_compatible(g, noise)
    return Graph(g.n, g.directed, g.edges.symmetric_difference(noise.pairs))


def split_noise(g: Graph, noise: NodePairSet) -> tuple[NodePairSet, NodePairSet]:
    """Split ``noise`` into (added, deleted) relative to the data graph ``g``.

    Added pairs are absent from ``g`` and present in the schema ``g ⊕ noise``;
    deleted pairs are edges of ``g`` that the schema drops.
    """
    _check_compatible(g, noise)
    deleted = noise.pairs & g.edges
    added = noise.pairs - deleted
    return noise.with_pairs(added), noise.with_pairs(deleted)


@dataclass(frozen=True)
class Permutation:
    """A bijection on ``0..n-1`` in one-line notation: ``i -> mapping[i]``."""

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        mapping = tuple(int(x) for x in self.mapping)
        if sorted(mapping) != list(range(len(mapping))):
            raise GraphError("mapping is not a bijection on 0..n-1")
        object.__setattr__(self, "mapping", mapping)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    def __len__(self) -> int:
        return len(self.mapping)

    def __call__(self, i: int) -> int:
        return self.mapping[i]

    def compose(self, other: "Permutation") -> "Permutation":
        """``self ∘ other``: apply ``other`` first."""
        if len(other) != len(self):
            raise GraphError("cannot compose permutations of different sizes")
        return Permutation(tuple(self.mapping[j] for j in other.mapping))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.mapping)
        for i, j in enumerate(self.mapping):
            inv[j] = i
        return Permutation(tuple(inv))

    def map_pairs(self, pairs: NodePairSet) -> NodePairSet:
        f = self.mapping
        return pairs.with_pairs((f[a], f[b]) for a, b in pairs.pairs)


def apply_permutation(g: Graph, f: Permutation) -> Graph:
    if len(f) != g.n:
        raise GraphError(f"permutation on {len(f)} points applied to a graph on {g.n} nodes")
    m = f.mapping
    return Graph(g.n, g.directed, frozenset(canonical_pair(m[a], m[b], g.directed) for a, b in g.edges))


@dataclass(frozen=True)
class ColoredGraph:
    """A graph with a vertex colouring; colour ids are dense from 0."""

    graph: Graph
    colors: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        colors = tuple(int(c) for c in self.colors) if self.colors else (0,) * self.graph.n
        if len(colors) != self.graph.n:
            raise GraphError("colour list length must equal the node count")
        if colors and set(colors) != set(range(max(colors) + 1)):
            raise GraphError("colour ids must be dense from 0")
        object.__setattr__(self, "colors", colors)

    @classmethod
    def from_labels(cls, graph: Graph, labels: Sequence[object]) -> "ColoredGraph":
        """Build a colouring from arbitrary sortable labels (sorted order gives ids)."""
        ids = {lab: i for i, lab in enumerate(sorted(set(labels)))}
        return cls(graph, tuple(ids[lab] for lab in labels))

    @property
    def n(self) -> int:
        return self.graph.n


# ---------------------------------------------------------------------------
# pair ranking: index <-> pair over the M possible pairs


def pair_rank(a: int, b: int, n: int, directed: bool) -> int:
    if directed:
        return a * (n - 1) + (b if b < a else b - 1)
    if a > b:
        a, b = b, a
    return a * (2 * n - a - 1) // 2 + (b - a - 1)


def pair_unrank(k: int, n: int, directed: bool) -> Pair:
    if directed:
        a, r = divmod(k, n - 1)
        return (a, r if r < a else r + 1)
    # largest a with offset(a) <= k, offset(a) = a(2n-a-1)/2
    a = int((2 * n - 1 - math.sqrt((2 * n - 1) ** 2 - 8 * k)) // 2)
    a = max(0, min(a, n - 2))
    while a > 0 and a * (2 * n - a - 1) // 2 > k:
        a -= 1
    while (a + 1) * (2 * n - a - 2) // 2 <= k:
        a += 1
    return (a, k - a * (2 * n - a - 1) // 2 + a + 1)
