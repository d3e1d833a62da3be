"""Exact automorphism counting for vertex-coloured (di)graphs.

The count comes from an individualization-refinement search. A first path of
individualized vertices ``v1, v2, ...`` descends to a discrete partition (the
first leaf). At each level ``k`` the orbit of ``v_k`` under the pointwise
stabilizer of ``v1..v_{k-1}`` is computed by searching the sibling subtrees for
a leaf equivalent to the first leaf. The group order is the product of these
orbit sizes, which is what :class:`AutomorphismReport` stores as ``factors``.

Refinement is an ordered colour refinement (1-WL), with (in, out) neighbour
counts on digraphs. Every refinement step records a label-invariant trace, and
sibling subtrees whose traces diverge from the first path are pruned. Found
automorphisms are kept in a union-find structure, which skips candidates
already known to be (or not to be) in an orbit.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph_core import ColoredGraph, Graph, GraphError, NodePairSet, canonical_pair

DEFAULT_BUDGET = 10_000_000
BRUTE_FORCE_MAX_N = 9


class BudgetExceeded(RuntimeError):
    """The search visited more tree nodes than its budget allows."""


@dataclass(frozen=True)
class AutomorphismReport:
    factors: tuple[int, ...]
    log2_count: float
    exact_count: int

    @classmethod
    def from_factors(cls, factors: Iterable[int]) -> "AutomorphismReport":
        factors = tuple(int(f) for f in factors)
        if any(f < 1 for f in factors):
            raise ValueError("factors must be positive")
        return cls(factors, math.fsum(math.log2(f) for f in factors), math.prod(factors))


class _Partition:
    """Ordered partition: ``lab`` lists vertices, cells are contiguous runs.

    ``cell_of[v]`` is the start index of v's cell and ``cend[s]`` the end
    (exclusive) of the cell starting at ``s``.
    """

    __slots__ = ("lab", "cell_of", "cend", "ncells")

    def __init__(self, lab: list[int], cell_of: list[int], cend: list[int], ncells: int):
        self.lab = lab
        self.cell_of = cell_of
        self.cend = cend
        self.ncells = ncells

    def copy(self) -> "_Partition":
        return _Partition(self.lab[:], self.cell_of[:], self.cend[:], self.ncells)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra < rb:
                self.parent[rb] = ra
            else:
                self.parent[ra] = rb


class _Search:
    def __init__(
        self,
        n: int,
        directed: bool,
        out: Sequence[Sequence[int]],
        inn: Sequence[Sequence[int]],
        colors: Sequence[int],
        edge_codes: set[int],
        budget: int,
    ):
        self.n = n
        self.directed = directed
        self.out = out
        self.inn = inn
        self.colors = colors
        self.edge_codes = edge_codes
        self.budget = budget
        self.visited = 0

    # -- refinement -------------------------------------------------------

    def _refine(self, p: _Partition, queue: list[int], expected: list | None) -> list | None:
        """Refine ``p`` in place; return its trace, or None on divergence."""
        self.visited += 1
        if self.visited > self.budget:
            raise BudgetExceeded(f"automorphism search exceeded {self.budget} tree nodes")
        n = self.n
        lab, cell_of, cend = p.lab, p.cell_of, p.cend
        out, inn = self.out, self.inn
        directed = self.directed
        in_bump = n + 1
        q = deque(queue)
        in_q = set(queue)
        trace: list = []
        pos = 0
        while q and p.ncells < n:
            w = q.popleft()
            in_q.discard(w)
            cnt: dict[int, int] = {}
            get = cnt.get
            if directed:
                for u in lab[w:cend[w]]:
                    for v in inn[u]:
                        cnt[v] = get(v, 0) + 1
                    for v in out[u]:
                        cnt[v] = get(v, 0) + in_bump
            else:
                for u in lab[w:cend[w]]:
                    for v in out[u]:
                        cnt[v] = get(v, 0) + 1
            touched: dict[int, list[int]] = {}
            for v in cnt:
                s = cell_of[v]
                if cend[s] - s > 1:
                    lst = touched.get(s)
                    if lst is None:
                        touched[s] = [v]
                    else:
                        lst.append(v)
            for s in sorted(touched):
                e = cend[s]
                vs = touched[s]
                groups: dict[int, list[int]] = {}
                for v in vs:
                    c = cnt[v]
                    g = groups.get(c)
                    if g is None:
                        groups[c] = [v]
                    else:
                        g.append(v)
                if len(vs) < e - s:
                    groups[0] = [v for v in lab[s:e] if v not in cnt]
                if len(groups) == 1:
                    continue
                keys = sorted(groups)
                frags = []
                i = s
                for k in keys:
                    members = groups[k]
                    frags.append((i, len(members)))
                    for v in members:
                        lab[i] = v
                        i += 1
                for fs, fl in frags:
                    fe = fs + fl
                    cend[fs] = fe
                    for j in range(fs, fe):
                        cell_of[lab[j]] = fs
                p.ncells += len(frags) - 1
                item = (w, s, tuple(keys), tuple(fl for _, fl in frags))
                if expected is not None:
                    if pos >= len(expected) or expected[pos] != item:
                        return None
                trace.append(item)
                pos += 1
                if s in in_q:
                    for fs, _ in frags[1:]:
                        q.append(fs)
                        in_q.add(fs)
                else:
                    big = 0
                    for j in range(1, len(frags)):
                        if frags[j][1] > frags[big][1]:
                            big = j
                    for j, (fs, _) in enumerate(frags):
                        if j != big:
                            q.append(fs)
                            in_q.add(fs)
        if expected is not None and pos != len(expected):
            return None
        return trace

    def _root(self) -> tuple[_Partition, list]:
        n = self.n
        colors = self.colors
        lab = sorted(range(n), key=lambda v: (colors[v], v))
        cell_of = [0] * n
        cend = [0] * n
        starts = []
        i = 0
        while i < n:
            j = i
            while j < n and colors[lab[j]] == colors[lab[i]]:
                j += 1
            starts.append(i)
            cend[i] = j
            for t in range(i, j):
                cell_of[lab[t]] = i
            i = j
        p = _Partition(lab, cell_of, cend, len(starts))
        # every cell is a splitter initially
        trace = self._refine(p, starts, None)
        return p, trace

    def _individualize(self, parent: _Partition, t: int, v: int, expected: list | None):
        p = parent.copy()
        lab, cell_of, cend = p.lab, p.cell_of, p.cend
        e = cend[t]
        i = lab.index(v, t, e)
        lab[t], lab[i] = lab[i], lab[t]
        cend[t] = t + 1
        cend[t + 1] = e
        for j in range(t + 1, e):
            cell_of[lab[j]] = t + 1
        cell_of[v] = t
        p.ncells += 1
        trace = self._refine(p, [t], expected)
        if trace is None:
            return None, None
        return p, trace

    @staticmethod
    def _target(p: _Partition) -> int:
        """First non-singleton cell of smallest size (position order)."""
        best, best_size = -1, None
        s = 0
        n = len(p.lab)
        cend = p.cend
        while s < n:
            size = cend[s] - s
            if size > 1 and (best_size is None or size < best_size):
                best, best_size = s, size
                if size == 2:
                    break
            s = cend[s]
        return best

    # -- search -----------------------------------------------------------

    def _is_automorphism(self, gamma: list[int]) -> bool:
        colors = self.colors
        if any(colors[gamma[v]] != colors[v] for v in range(self.n)):
            return False
        n = self.n
        codes = self.edge_codes
        for code in codes:
            a, b = divmod(code, n)
            if gamma[a] * n + gamma[b] not in codes:
                return False
        return True

    def _find_leaf(self, child: _Partition, depth: int) -> list[int] | None:
        """DFS below ``child`` (at ``depth``) for a leaf equivalent to the first leaf."""
        leaf_depth = len(self.targets)
        stack: list[tuple[_Partition, int, int]] = [(child, depth, 0)]
        while stack:
            p, d, idx = stack.pop()
            if d == leaf_depth:
                gamma = [0] * self.n
                for a, b in zip(self.zeta, p.lab):
                    gamma[a] = b
                if self._is_automorphism(gamma):
                    return gamma
                continue
            t = self.targets[d]
            e = p.cend[t]
            if t + idx >= e:
                continue
            stack.append((p, d, idx + 1))
            u = p.lab[t + idx]
            nxt, _ = self._individualize(p, t, u, self.traces[d + 1])
            if nxt is not None:
                stack.append((nxt, d + 1, 0))
        return None

    def run(self) -> tuple[int, ...]:
        root, root_trace = self._root()
        self.path = [root]
        self.traces = [root_trace]
        self.targets: list[int] = []
        self.path_vertices: list[int] = []
        p = root
        while p.ncells < self.n:
            t = self._target(p)
            v = p.lab[t]
            p, trace = self._individualize(p, t, v, None)
            self.targets.append(t)
            self.path_vertices.append(v)
            self.path.append(p)
            self.traces.append(trace)
        self.zeta = p.lab[:]

        uf = _UnionFind(self.n)
        factors = []
        for k in reversed(range(len(self.targets))):
            parent = self.path[k]
            t = self.targets[k]
            cell = parent.lab[t:parent.cend[t]]
            v = self.path_vertices[k]
            rejected: list[int] = []
            for w in cell:
                if w == v or uf.find(w) == uf.find(v):
                    continue
                rw = uf.find(w)
                if any(uf.find(r) == rw for r in rejected):
                    continue
                child, _ = self._individualize(parent, t, w, self.traces[k + 1])
                gamma = self._find_leaf(child, k + 1) if child is not None else None
                if gamma is None:
                    rejected.append(w)
                    continue
                for a in range(self.n):
                    if gamma[a] != a:
                        uf.union(a, gamma[a])
            rv = uf.find(v)
            factors.append(sum(1 for w in cell if uf.find(w) == rv))
        factors.reverse()
        return tuple(factors)


def _search_for(g: Graph, colors: Sequence[int], budget: int) -> _Search:
    n = g.n
    codes = set()
    for a, b in g.edges:
        codes.add(a * n + b)
        if not g.directed:
            codes.add(b * n + a)
    return _Search(n, g.directed, g.out_neighbors, g.in_neighbors, colors, codes, budget)


def count_automorphisms(g: ColoredGraph | Graph, budget: int = DEFAULT_BUDGET) -> AutomorphismReport:
    """Exact ``|Aut(g)|`` respecting vertex colours.

    Raises:
        BudgetExceeded: when the search tree grows past ``budget`` nodes.
    """
    if isinstance(g, Graph):
        g = ColoredGraph(g)
    if g.n == 0:
        return AutomorphismReport.from_factors(())
    return AutomorphismReport.from_factors(_search_for(g.graph, g.colors, budget).run())


# ---------------------------------------------------------------------------
# stabilizers of pair sets


def _noise_augmented(g: Graph, x: NodePairSet) -> ColoredGraph:
    """``g`` plus one extra vertex per pair of ``x``, wired to its endpoints.

    Automorphisms of the result restricted to the original vertices are
    exactly the automorphisms of ``g`` mapping ``x`` onto itself.
    """
    n = g.n
    edges = set(g.edges)
    for i, (a, b) in enumerate(sorted(x.pairs)):
        aux = n + i
        if g.directed:
            edges.add((a, aux))
            edges.add((aux, b))
        else:
            edges.add(canonical_pair(a, aux, False))
            edges.add(canonical_pair(aux, b, False))
    big = Graph(n + len(x), g.directed, frozenset(edges))
    return ColoredGraph(big, (0,) * n + (1,) * len(x))


def pair_set_stabilizer(g: Graph, x: NodePairSet, budget: int = DEFAULT_BUDGET) -> AutomorphismReport:
    """``|Stab_g(x)|``: automorphisms of ``g`` that map the pair set onto itself."""
    if not x.compatible_with(g):
        raise GraphError("pair set is not compatible with the graph")
    if not x.pairs:
        return count_automorphisms(g, budget)
    return count_automorphisms(_noise_augmented(g, x), budget)


def orbit_size_of_pair_set(g: Graph, x: NodePairSet, budget: int = DEFAULT_BUDGET) -> float:
    """log2 of the automorphism-orbit size of the pair set ``x`` in ``g``."""
    if not x.pairs:
        if not x.compatible_with(g):
            raise GraphError("pair set is not compatible with the graph")
        return 0.0
    aut = count_automorphisms(g, budget)
    stab = pair_set_stabilizer(g, x, budget)
    return math.log2(aut.exact_count // stab.exact_count)


NODE, ADDED, DELETED, UNMODIFIED = 0, 1, 2, 3


def stabilizer_count(
    g: Graph, added: NodePairSet, deleted: NodePairSet, budget: int = DEFAULT_BUDGET
) -> AutomorphismReport:
    """Stabilizer of a noise set, via the edge-node augmented graph.

    Every pair of ``E(g) ∪ added ∪ deleted`` becomes an auxiliary vertex
    coloured ADDED, DELETED or UNMODIFIED, joined to its two endpoints; the
    original edges do not appear directly. On digraphs each unordered pair
    becomes a path ``a - c1 - c2 - b`` whose two colours record the status of
    ``a -> b`` and ``b -> a`` as seen from each end.

    With ``g`` the data graph and ``added``/``deleted`` from
    :func:`~scheno.graph_core.split_noise`, the count is ``|Stab_H(N)|``
    for the schema ``H = g ⊕ N``.
    """
    for s in (added, deleted):
        if not s.compatible_with(g):
            raise GraphError("pair set is not compatible with the graph")
    if added.pairs & deleted.pairs:
        raise GraphError("added and deleted pairs must be disjoint")
    status: dict[tuple[int, int], int] = {e: UNMODIFIED for e in g.edges}
    status.update({e: ADDED for e in added.pairs})
    status.update({e: DELETED for e in deleted.pairs})

    n = g.n
    labels: list[tuple[int, int, int]] = [(0, 0, 0)] * n
    edges: list[tuple[int, int]] = []
    if not g.directed:
        for a, b in sorted(status):
            c = len(labels)
            labels.append((1, status[(a, b)], 0))
            edges += [(a, c), (b, c)]
    else:
        unordered = sorted({canonical_pair(a, b, False) for a, b in status})
        for a, b in unordered:
            ab = status.get((a, b), 0)
            ba = status.get((b, a), 0)
            c1, c2 = len(labels), len(labels) + 1
            labels += [(1, ab, ba), (1, ba, ab)]
            edges += [(a, c1), (c1, c2), (c2, b)]
    aug = Graph.from_edges(len(labels), edges, directed=False)
    return count_automorphisms(ColoredGraph.from_labels(aug, labels), budget)


# ---------------------------------------------------------------------------
# brute-force oracles


def _all_automorphisms(g: ColoredGraph) -> np.ndarray:
    n = g.n
    if n > BRUTE_FORCE_MAX_N:
        raise GraphError(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}")
    if n == 0:
        return np.zeros((1, 0), dtype=np.intp)
    adj = np.zeros((n, n), dtype=bool)
    for a, b in g.graph.edges:
        adj[a, b] = True
        if not g.graph.directed:
            adj[b, a] = True
    colors = np.asarray(g.colors)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    ok = np.all(colors[perms] == colors, axis=1)
    perms = perms[ok]
    ok = np.ones(len(perms), dtype=bool)
    for i in range(n):
        ok &= np.all(adj[perms[:, i][:, None], perms] == adj[i], axis=1)
    return perms[ok]


def brute_force_aut(g: ColoredGraph | Graph) -> int:
    """``|Aut(g)|`` by checking all ``n!`` permutations (``n <= 9``)."""
    if isinstance(g, Graph):
        g = ColoredGraph(g)
    return len(_all_automorphisms(g))


def brute_force_orbit_size(g: Graph, x: NodePairSet) -> int:
    """Number of distinct images of the pair set ``x`` under ``Aut(g)``."""
    images = set()
    for perm in _all_automorphisms(ColoredGraph(g)):
        images.add(frozenset(canonical_pair(int(perm[a]), int(perm[b]), g.directed) for a, b in x.pairs))
    return len(images)
