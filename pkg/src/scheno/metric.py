"""The SCHENO score, the noise probability p, and the sum-of-automorphisms tables."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Literal

import numpy as np

from .aut_engine import DEFAULT_BUDGET, count_automorphisms, pair_set_stabilizer
from .graph_core import Graph, GraphError, NodePairSet, max_pairs, pair_unrank, xor_apply

LOG2E = 1.0 / math.log(2.0)
EXACT_LIMITS = {False: 9, True: 7}
TABLE_RESOURCE = "sumaut_exact.tsv"


def log2_factorial(n: int) -> float:
    return math.lgamma(n + 1) * LOG2E


@dataclass(frozen=True)
class SumAutValue:
    """Σ|Aut(G')| over one representative G' of each isomorphism class on n nodes."""

    n: int
    directed: bool
    log2_sum: float
    exact: int | None = None


@dataclass(frozen=True)
class NoiseParam:
    n: int
    directed: bool
    p: float
    log2_p: float
    log2_1mp: float
    source: Literal["exact-table", "asymptotic-estimate"]

    def __post_init__(self) -> None:
        # p == 1/2 only occurs for the 2-node undirected case
        if not 0.0 < self.p <= 0.5:
            raise ValueError(f"noise probability must lie in (0, 1/2], got {self.p}")

    @property
    def M(self) -> int:
        return max_pairs(self.n, self.directed)


@dataclass(frozen=True)
class ScoreBreakdown:
    log2_aut_H: float
    log2_orbit_N: float
    noise_size: int
    M: int
    noise_term: float
    total: float


@dataclass(frozen=True)
class Decomposition:
    graph: Graph
    noise: NodePairSet
    schema: Graph
    score: ScoreBreakdown


# ---------------------------------------------------------------------------
# exact sums (oracle + shipped table)


def _cycle_type_representatives(n: int):
    """Yield (representative permutation, conjugacy class size) for S_n."""
    def partitions(k: int, largest: int):
        if k == 0:
            yield ()
            return
        for part in range(min(k, largest), 0, -1):
            for rest in partitions(k - part, part):
                yield (part,) + rest

    fact = math.factorial(n)
    for shape in partitions(n, n):
        perm = list(range(n))
        start = 0
        for length in shape:
            for i in range(length):
                perm[start + i] = start + (i + 1) % length
            start += length
        centralizer = 1
        for length, mult in ((l, shape.count(l)) for l in set(shape)):
            centralizer *= length**mult * math.factorial(mult)
        yield tuple(perm), fact // centralizer


def sum_aut_exact(n: int, directed: bool = False) -> SumAutValue:
    """Exact Σ|Aut| by double Burnside counting.

    Σ_classes |Aut(G)| = (1/n!) Σ_labelled |Aut(g)|² counts triples (g, σ, τ)
    with σ, τ ∈ Aut(g); swapping the order of summation gives
    (1/n!) Σ_{σ,τ ∈ S_n} 2^{#orbits of <σ,τ> on the node pairs}.
    σ runs over one representative per cycle type, τ over all of S_n
    (vectorised), so no graph is ever enumerated.
    """
    limit = EXACT_LIMITS[directed]
    if not 1 <= n <= limit:
        raise ValueError(f"exact mode supports 1 <= n <= {limit} ({'directed' if directed else 'undirected'})")
    big_m = max_pairs(n, directed)
    if big_m == 0:
        return SumAutValue(n, directed, 0.0, 1)
    if directed:
        pairs = np.array([(a, b) for a in range(n) for b in range(n) if a != b])
    else:
        pairs = np.array([(a, b) for a in range(n) for b in range(a + 1, n)])
    lookup = np.full((n, n), -1, dtype=np.int16)
    lookup[pairs[:, 0], pairs[:, 1]] = np.arange(big_m)
    if not directed:
        lookup[pairs[:, 1], pairs[:, 0]] = np.arange(big_m)

    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int16)
    images = lookup[perms[:, pairs[:, 0]], perms[:, pairs[:, 1]]].astype(np.intp)

    total = 0
    for rep, class_size in _cycle_type_representatives(n):
        s = lookup[np.array(rep)[pairs[:, 0]], np.array(rep)[pairs[:, 1]]].astype(np.intp)
        # min-label propagation over the orbit graph of <σ, τ>, with pointer jumping
        labels = np.broadcast_to(np.arange(big_m, dtype=np.intp), images.shape).copy()
        while True:
            nxt = np.minimum(labels, labels[:, s])
            nxt = np.minimum(nxt, np.take_along_axis(nxt, images, axis=1))
            nxt = np.take_along_axis(nxt, nxt, axis=1)
            if np.array_equal(nxt, labels):
                break
            labels = nxt
        orbits = np.count_nonzero(labels == np.arange(big_m), axis=1)
        hist = np.bincount(orbits, minlength=big_m + 1)
        total += class_size * sum(int(c) << k for k, c in enumerate(hist) if c)
    exact, rem = divmod(total, math.factorial(n))
    if rem:
        raise ArithmeticError("double Burnside sum is not divisible by n!")
    return SumAutValue(n, directed, math.log2(exact), exact)


def format_table(values: list[SumAutValue]) -> str:
    lines = ["# exact sum of |Aut| over isomorphism classes", "# n\tdirected\tsum_aut"]
    lines += [f"{v.n}\t{int(v.directed)}\t{v.exact}" for v in values]
    return "\n".join(lines) + "\n"


def generate_table() -> list[SumAutValue]:
    return [sum_aut_exact(n, d) for d in (False, True) for n in range(1, EXACT_LIMITS[d] + 1)]


def parse_table(text: str) -> dict[tuple[int, bool], int]:
    table = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        n, d, value = line.split()
        table[(int(n), bool(int(d)))] = int(value)
    return table


@lru_cache(maxsize=None)
def exact_table() -> dict[tuple[int, bool], int]:
    """The shipped table, keyed by (n, directed)."""
    return parse_table(resources.files("scheno.data").joinpath(TABLE_RESOURCE).read_text())


# ---------------------------------------------------------------------------
# estimate for larger n


def _falling4(n: int) -> int:
    return n * (n - 1) * (n - 2) * (n - 3) if n >= 4 else 0


def _pow2(x: float) -> float:
    return 0.0 if x < -1070 else 2.0**x


def class_count_bracket(n: int, directed: bool = False) -> float:
    """Truncated correction factor B with |𝒢| ≈ 2^M / n! · B."""
    if directed:
        e1, e2 = 2 * n - 2, 4 * n - 7
    else:
        e1, e2 = n - 1, 2 * n - 3
    b = 1.0 + n * (n - 1) * _pow2(-e1)
    ff = _falling4(n)
    if ff:
        b += ff * ((3 * n - 7) / (3 * n - 9)) * _pow2(-e2)
    return b


def sum_aut_estimate(n: int, directed: bool = False) -> SumAutValue:
    """Estimate Σ|Aut| as |𝒢|² / (2^M / n!), assuming every class has equal |Aut|."""
    if n < 1:
        raise ValueError("n must be positive")
    big_m = max_pairs(n, directed)
    log2_classes = big_m - log2_factorial(n) + math.log2(class_count_bracket(n, directed))
    return SumAutValue(n, directed, 2.0 * log2_classes - (big_m - log2_factorial(n)))


def sum_aut(n: int, directed: bool = False) -> tuple[SumAutValue, str]:
    exact = exact_table().get((n, directed))
    if exact is not None:
        return SumAutValue(n, directed, math.log2(exact), exact), "exact-table"
    return sum_aut_estimate(n, directed), "asymptotic-estimate"


def _param_from_sum(n: int, directed: bool, value: SumAutValue, source: str) -> NoiseParam:
    big_m = max_pairs(n, directed)
    if value.exact is not None:
        ratio = Fraction(math.factorial(n), value.exact)
        log2_1mp = math.log2(ratio) / big_m
        p = 1.0 - float(ratio) ** (1.0 / big_m)
    else:
        log2_1mp = (log2_factorial(n) - value.log2_sum) / big_m
        p = -math.expm1(log2_1mp / LOG2E)
    return NoiseParam(n, directed, p, math.log2(p), log2_1mp, source)  # type: ignore[arg-type]


@lru_cache(maxsize=None)
def choose_p(n: int, directed: bool = False) -> NoiseParam:
    """Noise probability p with (1-p)^M = n! / Σ|Aut|.

    This p makes the all-structure and all-noise hypotheses score in the same
    ratio as the schema and chaos distributions explain the graph.
    """
    if n < 2:
        raise ValueError("choose_p needs at least two nodes")
    value, source = sum_aut(n, directed)
    return _param_from_sum(n, directed, value, source)


def estimated_p(n: int, directed: bool = False) -> NoiseParam:
    """p from the class-count estimate, even where an exact value exists."""
    return _param_from_sum(n, directed, sum_aut_estimate(n, directed), "asymptotic-estimate")


def estimate_p_raw(n: int, directed: bool = False) -> float:
    """Unvalidated p from the estimate; negative where the estimate overshoots n! (small n)."""
    value = sum_aut_estimate(n, directed)
    return -math.expm1((log2_factorial(n) - value.log2_sum) / max_pairs(n, directed) / LOG2E)


def schema_probability(g: Graph) -> Fraction:
    """P_S(g) = |Aut(g)| / Σ|Aut|, exact (needs an exact table entry)."""
    value, source = sum_aut(g.n, g.directed)
    if value.exact is None:
        raise ValueError(f"no exact Σ|Aut| for n={g.n}")
    return Fraction(count_automorphisms(g).exact_count, value.exact)


# ---------------------------------------------------------------------------
# scoring


def _check_param(g: Graph, param: NoiseParam) -> None:
    if (param.n, param.directed) != (g.n, g.directed):
        raise ValueError(
            f"noise parameter is for n={param.n}, directed={param.directed}; "
            f"graph has n={g.n}, directed={g.directed}"
        )


def score(g: Graph, noise: NodePairSet, param: NoiseParam, budget: int = DEFAULT_BUDGET) -> ScoreBreakdown:
    """Log2 SCHENO score of the decomposition ``g = (g ⊕ noise) ⊕ noise``.

    ``total = log2|Aut(H)| + log2|AO_H(N)| + |N| log2 p + (M - |N|) log2(1 - p)``;
    the normalising constant Σ|Aut| is dropped.
    """
    _check_param(g, param)
    schema = xor_apply(g, noise)
    aut = count_automorphisms(schema, budget)
    if noise.pairs:
        stab = pair_set_stabilizer(schema, noise, budget)
        log2_orbit = math.log2(aut.exact_count // stab.exact_count)
    else:
        log2_orbit = 0.0
    k = len(noise)
    big_m = param.M
    noise_term = k * param.log2_p + (big_m - k) * param.log2_1mp
    return ScoreBreakdown(aut.log2_count, log2_orbit, k, big_m, noise_term, aut.log2_count + log2_orbit + noise_term)


def decompose(g: Graph, noise: NodePairSet, param: NoiseParam, budget: int = DEFAULT_BUDGET) -> Decomposition:
    return Decomposition(g, noise, xor_apply(g, noise), score(g, noise, param, budget))


def gain_over_all_structure(g: Graph, noise: NodePairSet, param: NoiseParam, budget: int = DEFAULT_BUDGET) -> float:
    """Bits gained over the trivial decomposition (schema = g, no noise)."""
    base = score(g, NodePairSet.empty(g.n, g.directed), param, budget).total
    return score(g, noise, param, budget).total - base


def random_pair_set(n: int, directed: bool, k: int, rng: np.random.Generator) -> NodePairSet:
    """Uniform k-subset of all M possible pairs."""
    big_m = max_pairs(n, directed)
    if k > big_m:
        raise GraphError(f"cannot draw {k} pairs out of {big_m}")
    idx = rng.choice(big_m, size=k, replace=False) if k else ()
    return NodePairSet(n, directed, frozenset(pair_unrank(int(i), n, directed) for i in idx))


def gain_over_random(
    g: Graph,
    noise: NodePairSet,
    param: NoiseParam,
    trials: int = 20,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> tuple[float, float, float]:
    """Score of ``noise`` minus the mean score of random same-size noise sets.

    Returns ``(gain, baseline_mean, baseline_std)`` in bits.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if len(noise) > param.M:
        raise GraphError("noise set is larger than the number of possible pairs")
    total = score(g, noise, param, budget).total
    rng = np.random.default_rng(seed)
    mean, std = mean_std(
        [score(g, random_pair_set(g.n, g.directed, len(noise), rng), param, budget).total for _ in range(trials)]
    )
    return total - mean, mean, std


def mean_std(values) -> tuple[float, float]:
    """Population mean and std; identical samples give their value back exactly."""
    arr = np.asarray(values, dtype=float)
    if np.all(arr == arr[0]):
        return float(arr[0]), 0.0
    return float(arr.mean()), float(arr.std())
