"""Command-line interface.

Exit codes: 0 success, 2 usage error (argparse), 3 input parse error,
4 automorphism budget exceeded, 5 configuration error, 6 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from .aut_engine import DEFAULT_BUDGET, BudgetExceeded, count_automorphisms
from .baselines import k_truss, max_truss, ranking_sweep, score_external
from .formats import (
    LabeledGraph,
    ParseError,
    export_annotated,
    graph_to_image,
    image_to_graph,
    read_decomposition,
    read_edge_list,
    read_pgm,
    read_ranking,
    write_decomposition,
    write_edge_list,
    write_mapping,
    write_pgm,
    write_sumaut_table,
    write_sweep_csv,
)
from .ga import Checkpoint, GAConfig, SchenoGA
from .graph_core import Graph, GraphError, NodePairSet
from .metric import (
    EXACT_LIMITS,
    choose_p,
    gain_over_all_structure,
    gain_over_random,
    score,
    sum_aut_exact,
)

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_BUDGET, EXIT_CONFIG, EXIT_IO = 0, 2, 3, 4, 5, 6

log = logging.getLogger("scheno")


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def _emit(args, record: dict) -> None:
    if args.json:
        print(json.dumps(record, sort_keys=False))
        return
    for key, value in record.items():
        if isinstance(value, float):
            value = f"{value:.6f}"
        print(f"{key}: {value}")


def _load_graph(args) -> LabeledGraph:
    lg = read_edge_list(args.graph, directed=args.directed)
    if lg.labels != tuple(str(i) for i in range(lg.graph.n)):
        if getattr(args, "mapping", None):
            write_mapping(lg.labels, args.mapping)
            print(f"note: labels remapped to dense ids; mapping written to {args.mapping}", file=sys.stderr)
        else:
            print("note: labels remapped to dense ids (pass --mapping FILE to save the mapping)", file=sys.stderr)
    return lg


def _pairs_from_file(path: str, lg: LabeledGraph) -> NodePairSet:
    g = lg.graph
    return NodePairSet(g.n, g.directed, frozenset(read_ranking(path, lg.labels)))


def _breakdown_record(b) -> dict:
    return {
        "log2_aut_H": b.log2_aut_H,
        "log2_orbit_N": b.log2_orbit_N,
        "noise_size": b.noise_size,
        "M": b.M,
        "noise_term": b.noise_term,
        "total": b.total,
    }


def _param_record(param) -> dict:
    return {
        "n": param.n,
        "directed": param.directed,
        "p": param.p,
        "log2_p": param.log2_p,
        "log2_1mp": param.log2_1mp,
        "source": param.source,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_param(args) -> int:
    if args.n < 2:
        raise ConfigError("n must be at least 2")
    param = choose_p(args.n, args.directed)
    rec = _param_record(param)
    if args.json:
        _emit(args, rec)
    else:
        print(f"p: {param.p:.9f}")
        for k in ("log2_p", "log2_1mp", "source"):
            print(f"{k}: {rec[k]}")
    return EXIT_OK


def cmd_score(args) -> int:
    lg = _load_graph(args)
    g = lg.graph
    if args.decomposition:
        g, noise = read_decomposition(args.decomposition)
    elif args.noise in (None, "empty"):
        noise = NodePairSet.empty(g.n, g.directed)
    else:
        noise = _pairs_from_file(args.noise, lg)
    param = choose_p(g.n, g.directed)
    b = score(g, noise, param, args.budget)
    gain_r, mean, std = gain_over_random(g, noise, param, args.trials, args.seed, args.budget)
    rec = _breakdown_record(b)
    rec.update(
        gain_over_all_structure=gain_over_all_structure(g, noise, param, args.budget),
        gain_over_random=gain_r,
        random_mean=mean,
        random_std=std,
        p=param.p,
    )
    _emit(args, rec)
    return EXIT_OK


def _write_checkpoint(path: str, g: Graph, seed: int, cp: Checkpoint) -> None:
    record = {
        "version": 1,
        "n": g.n,
        "directed": g.directed,
        "seed": seed,
        "generation": cp.generation,
        "best_fitness": cp.best_fitness,
        "stale": cp.stale,
        "population": [sorted(genome) for genome in cp.population],
    }
    tmp = Path(path).with_suffix(".tmp")
    tmp.write_text(json.dumps(record))
    tmp.replace(path)


def read_checkpoint(path: str, g: Graph) -> Checkpoint:
    try:
        record = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None
    if record.get("version") != 1 or record["n"] != g.n or record["directed"] != g.directed:
        raise ConfigError(f"checkpoint {path} does not belong to this graph")
    population = tuple(frozenset(tuple(p) for p in genome) for genome in record["population"])
    return Checkpoint(record["generation"], record["best_fitness"], record["stale"], population)


def cmd_search(args) -> int:
    lg = _load_graph(args)
    g = lg.graph
    try:
        config = GAConfig(
            population_size_override=args.population,
            max_generations=args.generations,
            patience=args.patience,
            seed=args.seed,
            workers=args.workers,
            mutation_events=args.mutation_events,
            budget=args.budget,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    resume = read_checkpoint(args.resume, g) if args.resume else None
    ga = SchenoGA(g, config)

    def progress(stats) -> None:
        if not args.quiet:
            print(
                f"gen {stats.generation}: best {stats.best_fitness:.4f} |N|={stats.best_noise_size}",
                file=sys.stderr,
            )
        if args.checkpoint:
            _write_checkpoint(args.checkpoint, g, args.seed, ga.checkpoint)

    try:
        d = ga.run(progress, resume)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.out:
        write_decomposition(args.out, g, d.noise)
    if args.dot:
        export_annotated(d, args.dot, lg.labels)
    added = sorted(d.noise.pairs - g.edges)
    deleted = sorted(d.noise.pairs & g.edges)
    rec = _breakdown_record(d.score)
    rec.update(
        gain_over_all_structure=gain_over_all_structure(g, d.noise, ga.param, args.budget),
        generations=len(ga.history),
        budget_failures=ga.budget_failures,
        added=" ".join(f"{lg.labels[a]}-{lg.labels[b]}" for a, b in added),
        deleted=" ".join(f"{lg.labels[a]}-{lg.labels[b]}" for a, b in deleted),
    )
    _emit(args, rec)
    return EXIT_OK


def _external_record(report) -> dict:
    rec = _breakdown_record(report.breakdown)
    rec.update(
        gain_over_all_structure=report.gain_over_all_structure,
        gain_over_random=report.gain_over_random,
        random_mean=report.random_mean,
        random_std=report.random_std,
    )
    return rec


def cmd_ktruss(args) -> int:
    lg = _load_graph(args)
    g = lg.graph
    top = max_truss(g)
    if args.max_truss:
        ks = [top] if top >= 2 else []
    elif args.k is not None:
        ks = [args.k]
    else:
        ks = list(range(3, top + 1))
    if not ks:
        raise ConfigError("graph has no edges, so no truss exists")
    if any(k < 2 for k in ks):
        raise ConfigError("k must be at least 2")
    if g.directed:
        print("note: truss computed on the underlying undirected graph", file=sys.stderr)
    param = choose_p(g.n, g.directed)
    for k in ks:
        truss = k_truss(g, k)
        report = score_external(g, truss, param, args.trials, args.seed, args.budget)
        rec = {"k": k, "truss_edges": len(truss), "decompositions": f"2^{param.M}"}
        rec.update(_external_record(report))
        _emit(args, rec)
        if args.out and len(ks) == 1:
            write_decomposition(args.out, g, NodePairSet(g.n, g.directed, g.edges ^ truss.pairs))
    return EXIT_OK


def cmd_score_ext(args) -> int:
    lg = _load_graph(args)
    g = lg.graph
    schema = _pairs_from_file(args.schema, lg)
    param = choose_p(g.n, g.directed)
    _emit(args, _external_record(score_external(g, schema, param, args.trials, args.seed, args.budget)))
    return EXIT_OK


def cmd_sweep(args) -> int:
    lg = _load_graph(args)
    g = lg.graph
    ranking = read_ranking(args.ranking, lg.labels)
    param = choose_p(g.n, g.directed)
    rows = ranking_sweep(g, ranking, param, args.steps, args.trials, args.seed, args.budget, args.workers)
    write_sweep_csv(rows, args.out or sys.stdout)
    return EXIT_OK


def cmd_mnist_encode(args) -> int:
    img = read_pgm(args.image)
    g = image_to_graph(img)
    if args.out:
        write_edge_list(g, args.out)
    else:
        print(*(f"{a} {b}" for a, b in sorted(g.edges)), sep="\n")
    print(f"note: {img.width}x{img.height} image -> directed graph on {g.n} nodes, {g.m} edges", file=sys.stderr)
    return EXIT_OK


def cmd_mnist_decode(args) -> int:
    if args.decomposition:
        g, noise = read_decomposition(args.decomposition)
        if args.part == "schema":
            g = Graph(g.n, g.directed, g.edges ^ noise.pairs)
    else:
        lg = read_edge_list(args.graph, directed=True)
        g = Graph(lg.graph.n, True, frozenset((int(lg.labels[a]), int(lg.labels[b])) for a, b in lg.graph.edges))
    try:
        img = graph_to_image(g, args.width, args.height)
    except GraphError as exc:
        raise ConfigError(str(exc)) from None
    write_pgm(img, args.out, binary=args.binary)
    return EXIT_OK


def cmd_oracle_sumaut(args) -> int:
    if args.write_table:
        values = [
            sum_aut_exact(n, d) for d in (False, True) for n in range(1, min(args.n, EXACT_LIMITS[d]) + 1)
        ]
        write_sumaut_table(values, args.write_table)
    value = sum_aut_exact(args.n, args.directed)
    if args.json:
        _emit(args, {"n": args.n, "directed": args.directed, "sum_aut": value.exact})
    else:
        print(value.exact)
    return EXIT_OK


def cmd_aut(args) -> int:
    g = _load_graph(args).graph
    report = count_automorphisms(g, args.budget)
    _emit(args, {"aut": report.exact_count, "log2_aut": report.log2_count})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, graph: bool = True) -> None:
    if graph:
        p.add_argument("graph", help="edge list file")
        p.add_argument("--directed", action="store_true")
        p.add_argument("--mapping", help="write the label -> dense id mapping here")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20, help="random-baseline samples")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search-tree node budget")
    p.add_argument("--json", action="store_true", help="one JSON object per result")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scheno", description="Schema/noise decomposition of graphs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("param", help="noise probability p for n nodes")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--directed", action="store_true")
    _common(p, graph=False)
    p.set_defaults(func=cmd_param)

    p = sub.add_parser("score", help="score one decomposition")
    _common(p)
    p.add_argument("--noise", help="pair file, or 'empty' (default)")
    p.add_argument("--decomposition", help="KEEP/ADD/DEL file (overrides graph and --noise)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("search", help="genetic search for the best decomposition")
    _common(p)
    p.add_argument("--population", type=int, help="override the population size")
    p.add_argument("--generations", type=int, default=500)
    p.add_argument("--patience", type=int, default=50)
    p.add_argument("--mutation-events", type=int, default=1)
    p.add_argument("--out", help="write the decomposition file here")
    p.add_argument("--dot", help="write an annotated DOT file here")
    p.add_argument("--checkpoint", help="save the population after every generation")
    p.add_argument("--resume", help="continue from a checkpoint")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("ktruss", help="score k-truss decompositions")
    _common(p)
    p.add_argument("-k", type=int)
    p.add_argument("--max-truss", action="store_true", help="use the largest k with a non-empty truss")
    p.add_argument("--out", help="decomposition file (single k only)")
    p.set_defaults(func=cmd_ktruss)

    p = sub.add_parser("score-ext", help="score an externally produced schema")
    _common(p)
    p.add_argument("schema", help="schema edge list, in the graph's labels")
    p.set_defaults(func=cmd_score_ext)

    p = sub.add_parser("sweep", help="score top-k prefixes of an edge ranking")
    _common(p)
    p.add_argument("ranking", help="ranking file, best pair first")
    p.add_argument("--steps", type=int, default=41)
    p.add_argument("--out", help="CSV output (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("aut", help="automorphism group order")
    _common(p)
    p.set_defaults(func=cmd_aut)

    mnist = sub.add_parser("mnist", help="binary image <-> directed graph")
    msub = mnist.add_subparsers(dest="mnist_command", required=True)
    p = msub.add_parser("encode")
    p.add_argument("image", help="PGM file (P2 or P5)")
    p.add_argument("--out")
    _common(p, graph=False)
    p.set_defaults(func=cmd_mnist_encode)
    p = msub.add_parser("decode")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="directed edge list with integer node ids")
    src.add_argument("--decomposition")
    p.add_argument("--part", choices=("schema", "graph"), default="schema")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int)
    p.add_argument("--binary", action="store_true", help="write P5 instead of P2")
    p.add_argument("--out", required=True)
    _common(p, graph=False)
    p.set_defaults(func=cmd_mnist_decode)

    oracle = sub.add_parser("oracle", help="brute-force reference computations")
    osub = oracle.add_subparsers(dest="oracle_command", required=True)
    p = osub.add_parser("sumaut", help="exact sum of |Aut| over isomorphism classes")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--directed", action="store_true")
    p.add_argument("--write-table", help="also write the exact table for 1..n")
    _common(p, graph=False)
    p.set_defaults(func=cmd_oracle_sumaut)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if getattr(args, "trials", 1) < 1 or getattr(args, "workers", 1) < 1 or getattr(args, "budget", 1) < 1:
            raise ConfigError("--trials, --workers and --budget must be positive")
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetExceeded as exc:
        print(f"error: automorphism budget exceeded ({exc}); raise --budget", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
