"""File formats: edge lists, label mappings, decomposition files, rankings,
sweep CSVs, PGM images (and the image <-> graph encoding), DOT export."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .graph_core import Graph, GraphError, NodePairSet, Pair, canonical_pair
from .metric import Decomposition, SumAutValue, format_table, parse_table

PathLike = str | os.PathLike
DECOMP_VERSION = 1


class ParseError(ValueError):
    def __init__(self, path: object, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


def _data_lines(path: PathLike):
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line


# ---------------------------------------------------------------------------
# edge lists and label mappings


@dataclass(frozen=True)
class LabeledGraph:
    graph: Graph
    labels: tuple[str, ...]  # labels[i] is the original label of node i

    def index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}


def _label_order(labels: Iterable[str]) -> list[str]:
    labels = set(labels)
    if all(lab.lstrip("-").isdigit() for lab in labels):
        return sorted(labels, key=lambda lab: (int(lab), lab))
    return sorted(labels)


def read_edge_list(path: PathLike, directed: bool = False) -> LabeledGraph:
    """Whitespace-separated pairs, one per line; ``#`` starts a comment.

    A line holding a single label declares an isolated node. Labels become
    dense ids in numeric order when all are integers, string order otherwise.
    """
    raw: list[tuple[int, str, str]] = []
    nodes: set[str] = set()
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) == 1:
            nodes.add(parts[0])
            continue
        if len(parts) != 2:
            raise ParseError(path, lineno, f"expected two labels, got {len(parts)} fields")
        a, b = parts
        if a == b:
            raise ParseError(path, lineno, f"self-loop on node {a!r}")
        nodes.update(parts)
        raw.append((lineno, a, b))
    labels = _label_order(nodes)
    ids = {lab: i for i, lab in enumerate(labels)}
    edges = {canonical_pair(ids[a], ids[b], directed) for _, a, b in raw}
    return LabeledGraph(Graph(len(labels), directed, frozenset(edges)), tuple(labels))


def write_edge_list(g: Graph, path: PathLike, labels: Sequence[str] | None = None) -> None:
    name = (lambda i: labels[i]) if labels is not None else str
    used = {v for e in g.edges for v in e}
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# {g.n} nodes, {g.m} {'directed' if g.directed else 'undirected'} edges\n")
        for v in range(g.n):
            if v not in used:
                f.write(f"{name(v)}\n")
        for a, b in sorted(g.edges):
            f.write(f"{name(a)} {name(b)}\n")


def write_mapping(labels: Sequence[str], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("# id\tlabel\n")
        for i, lab in enumerate(labels):
            f.write(f"{i}\t{lab}\n")


def read_mapping(path: PathLike) -> tuple[str, ...]:
    out: dict[int, str] = {}
    for lineno, line in _data_lines(path):
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) != 2 or not parts[0].isdigit():
            raise ParseError(path, lineno, "expected '<id> <label>'")
        out[int(parts[0])] = parts[1].strip()
    if sorted(out) != list(range(len(out))):
        raise GraphError(f"{path}: ids are not dense from 0")
    return tuple(out[i] for i in range(len(out)))


# ---------------------------------------------------------------------------
# decomposition files


def write_decomposition(path: PathLike, g: Graph, noise: NodePairSet) -> None:
    """KEEP = E \\ N, DEL = E ∩ N, ADD = N \\ E."""
    if not noise.compatible_with(g):
        raise GraphError("noise and graph disagree on node count or directedness")
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# scheno decomposition v{DECOMP_VERSION}\n")
        f.write(f"n {g.n}\ndirected {int(g.directed)}\n")
        for tag, pairs in (("KEEP", g.edges - noise.pairs), ("DEL", g.edges & noise.pairs), ("ADD", noise.pairs - g.edges)):
            for a, b in sorted(pairs):
                f.write(f"{tag} {a} {b}\n")


def read_decomposition(path: PathLike) -> tuple[Graph, NodePairSet]:
    header: dict[str, int] = {}
    tagged: dict[str, set[Pair]] = {"KEEP": set(), "DEL": set(), "ADD": set()}
    seen: set[Pair] = set()
    for lineno, line in _data_lines(path):
        parts = line.split()
        if parts[0] in ("n", "directed") and len(parts) == 2:
            header[parts[0]] = int(parts[1])
            continue
        if parts[0] not in tagged or len(parts) != 3:
            raise ParseError(path, lineno, f"unrecognised line {line!r}")
        if "n" not in header or "directed" not in header:
            raise ParseError(path, lineno, "pair line before the n/directed header")
        try:
            a, b = int(parts[1]), int(parts[2])
            pair = canonical_pair(a, b, bool(header["directed"]))
        except (ValueError, GraphError) as exc:
            raise ParseError(path, lineno, str(exc)) from None
        if not (0 <= a < header["n"] and 0 <= b < header["n"]):
            raise ParseError(path, lineno, f"node outside 0..{header['n'] - 1}")
        if pair in seen:
            raise ParseError(path, lineno, f"pair {pair} listed twice")
        seen.add(pair)
        tagged[parts[0]].add(pair)
    if "n" not in header or "directed" not in header:
        raise ParseError(path, 0, "missing n/directed header")
    n, directed = header["n"], bool(header["directed"])
    g = Graph(n, directed, frozenset(tagged["KEEP"] | tagged["DEL"]))
    return g, NodePairSet(n, directed, frozenset(tagged["ADD"] | tagged["DEL"]))


# ---------------------------------------------------------------------------
# rankings, sweep CSV, exact tables


def read_ranking(path: PathLike, labels: Sequence[str] | None = None) -> list[Pair]:
    """One pair per line, best first. Labels are translated through ``labels`` if given."""
    ids = {lab: i for i, lab in enumerate(labels)} if labels is not None else None
    out = []
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(path, lineno, "expected two node ids")
        try:
            out.append(tuple(ids[x] if ids is not None else int(x) for x in parts))
        except (KeyError, ValueError):
            raise ParseError(path, lineno, f"unknown node in {line!r}") from None
    return out


SWEEP_COLUMNS = ("k", "k_over_E", "total", "gain_structure", "gain_random_mean", "gain_random_std")


def write_sweep_csv(rows, out: PathLike | TextIO) -> None:
    if not hasattr(out, "write"):
        with open(out, "w", newline="", encoding="utf-8") as f:
            return write_sweep_csv(rows, f)
    w = csv.writer(out)
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([getattr(row, fl.name) for fl in fields(row)])


def write_sumaut_table(values: list[SumAutValue], path: PathLike) -> None:
    Path(path).write_text(format_table(values), encoding="utf-8")


def read_sumaut_table(path: PathLike) -> dict[tuple[int, bool], int]:
    return parse_table(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# PGM images


@dataclass(frozen=True)
class ImageGrid:
    width: int
    height: int
    pixels: tuple[tuple[bool, ...], ...]  # pixels[i][j]: row i, column j; True = white

    def __post_init__(self) -> None:
        if len(self.pixels) != self.height or any(len(r) != self.width for r in self.pixels):
            raise ValueError("pixel rows do not match width x height")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[bool]]) -> "ImageGrid":
        rows = tuple(tuple(bool(x) for x in r) for r in rows)
        return cls(len(rows[0]) if rows else 0, len(rows), rows)


def _pgm_tokens(data: bytes, count: int, start: int) -> tuple[list[int], int]:
    out, i = [], start
    while len(out) < count:
        while i < len(data) and (data[i : i + 1].isspace() or data[i : i + 1] == b"#"):
            if data[i : i + 1] == b"#":
                while i < len(data) and data[i : i + 1] != b"\n":
                    i += 1
            else:
                i += 1
        j = i
        while j < len(data) and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
            j += 1
        if j == i:
            raise ValueError("truncated PGM file")
        out.append(int(data[i:j]))
        i = j
    return out, i


def read_pgm(path: PathLike) -> ImageGrid:
    """Read an ASCII (P2) or binary (P5) PGM; white means value > maxval / 2."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a P2/P5 PGM file")
    (w, h, maxval), pos = _pgm_tokens(data, 3, 2)
    if magic == b"P2":
        values, _ = _pgm_tokens(data, w * h, pos)
    else:
        raster = data[pos + 1 :]
        size = 1 if maxval < 256 else 2
        if len(raster) < w * h * size:
            raise ValueError(f"{path}: truncated PGM raster")
        values = [int.from_bytes(raster[k * size : (k + 1) * size], "big") for k in range(w * h)]
    rows = tuple(tuple(v * 2 > maxval for v in values[r * w : (r + 1) * w]) for r in range(h))
    return ImageGrid(w, h, rows)


def write_pgm(img: ImageGrid, path: PathLike, binary: bool = False) -> None:
    head = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n255\n".encode()
    if binary:
        body = bytes(255 if px else 0 for row in img.pixels for px in row)
    else:
        body = "".join(" ".join("255" if px else "0" for px in row) + "\n" for row in img.pixels).encode()
    Path(path).write_bytes(head + body)


def image_to_graph(img: ImageGrid) -> Graph:
    """Treat the image as a shifted adjacency matrix on width+1 nodes.

    White (i, j) becomes edge (i, j) below the diagonal and (i, j+1) on or
    above it, so no pixel maps to a self-loop.
    """
    n = max(img.width + 1, img.height)
    edges = set()
    for i, row in enumerate(img.pixels):
        for j, white in enumerate(row):
            if white:
                edges.add((i, j) if j < i else (i, j + 1))
    return Graph(n, True, frozenset(edges))


def graph_to_image(g: Graph, width: int, height: int | None = None) -> ImageGrid:
    height = width if height is None else height
    rows = [[False] * width for _ in range(height)]
    for i, j in g.edges:
        col = j if j < i else j - 1
        if not (0 <= i < height and 0 <= col < width):
            raise GraphError(f"edge ({i}, {j}) does not fit a {width}x{height} image")
        rows[i][col] = True
    return ImageGrid.from_rows(rows) if height else ImageGrid(width, 0, ())


# ---------------------------------------------------------------------------
# DOT export

KEPT_COLOR, ADDED_COLOR, DELETED_COLOR = "gray20", "teal", "red"


def export_annotated(d: Decomposition, path: PathLike, labels: Sequence[str] | None = None) -> None:
    """Write the union of data and schema edges as DOT, coloured by status."""
    g = d.graph
    arrow = "->" if g.directed else "--"
    name = (lambda v: labels[v]) if labels is not None else str
    lines = [f"{'digraph' if g.directed else 'graph'} decomposition {{", "  node [shape=circle];"]
    lines += [f'  {v} [label="{name(v)}"];' for v in range(g.n)]
    for a, b in sorted(g.edges | d.noise.pairs):
        if (a, b) not in d.noise:
            color, status = KEPT_COLOR, "kept"
        elif (a, b) in g.edges:
            color, status = DELETED_COLOR, "deleted"
        else:
            color, status = ADDED_COLOR, "added"
        lines.append(f'  {a} {arrow} {b} [color="{color}", status="{status}"];')
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
