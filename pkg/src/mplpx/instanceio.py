"""Instance file formats and seeded synthetic generators.

Two formats are supported: a line-oriented native text format with exact
round-tripping, and UAI MARKOV import for pairwise networks (probabilities
are mapped to log-space on the way in). The generators produce the desk-scale
instance families used throughout the test suite: random trees, Potts and
spin-glass grids, and random complete graphs.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .model import PairwiseModel

MAGIC = "MRFLOG 1"
DEFAULT_ZERO_FLOOR = -1e6
GENERATOR_KINDS = ("tree", "grid_potts", "spin_glass_grid", "random_complete")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_native(model: PairwiseModel) -> str:
    """Serialize a model; decimal with 17 significant digits, so
    ``parse_native(write_native(m))`` reproduces every value exactly."""
    lines = [MAGIC, str(model.num_vars)]
    lines.append(" ".join(str(int(k)) for k in model.cardinalities))
    for pot in model.node_potentials:
        lines.append(" ".join(_fmt(x) for x in pot))
    lines.append(str(model.num_edges))
    for (i, j), table in zip(model.edges, model.edge_potentials):
        lines.append(f"{i} {j}")
        lines.append(" ".join(_fmt(x) for x in table.ravel()))
    return "\n".join(lines) + "\n"


class _Lines:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def next(self, what: str) -> tuple[str, int]:
        while self.pos < len(self.lines) and not self.lines[self.pos].strip():
            self.pos += 1
        if self.pos >= len(self.lines):
            raise ParseError(f"unexpected end of file, expected {what}",
                             line=len(self.lines))
        self.pos += 1
        return self.lines[self.pos - 1], self.pos


def _parse_floats(line: str, count: int, what: str, lineno: int) -> np.ndarray:
    parts = line.split()
    if len(parts) != count:
        raise ParseError(f"{what}: expected {count} values, got {len(parts)}",
                         line=lineno)
    try:
        vals = np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ParseError(f"{what}: {exc}", line=lineno) from None
    if not np.all(np.isfinite(vals)):
        raise ParseError(f"{what}: non-finite value", line=lineno)
    return vals


def _parse_ints(line: str, count: int, what: str, lineno: int) -> list[int]:
    parts = line.split()
    if len(parts) != count:
        raise ParseError(f"{what}: expected {count} integers, got {len(parts)}",
                         line=lineno)
    try:
        return [int(p) for p in parts]
    except ValueError as exc:
        raise ParseError(f"{what}: {exc}", line=lineno) from None


def parse_native(text: str) -> PairwiseModel:
    """Parse the native format; errors carry the offending line number."""
    src = _Lines(text)
    header, lineno = src.next("header")
    if header.strip() != MAGIC:
        raise ParseError(f"expected header {MAGIC!r}, got {header.strip()!r}",
                         line=lineno)
    line, lineno = src.next("variable count")
    (n,) = _parse_ints(line, 1, "variable count", lineno)
    if n < 0:
        raise ParseError(f"variable count {n} is negative", line=lineno)
    line, lineno = src.next("cardinalities")
    cards = _parse_ints(line, n, "cardinalities", lineno)
    if any(k < 1 for k in cards):
        raise ParseError("cardinality below 1", line=lineno)
    node_pots = []
    for i in range(n):
        line, lineno = src.next(f"node potential {i}")
        node_pots.append(_parse_floats(line, cards[i], f"node potential {i}", lineno))
    line, lineno = src.next("edge count")
    (m,) = _parse_ints(line, 1, "edge count", lineno)
    edges = []
    tables = []
    for e in range(m):
        line, lineno = src.next(f"edge {e} endpoints")
        i, j = _parse_ints(line, 2, f"edge {e} endpoints", lineno)
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"edge {e}: endpoint out of range ({i}, {j})",
                             line=lineno)
        if i == j:
            raise ParseError(f"edge {e}: self-loop on variable {i}", line=lineno)
        line, lineno = src.next(f"edge ({i}, {j}) table")
        flat = _parse_floats(
            line, cards[i] * cards[j], f"edge ({i}, {j}) table", lineno
        )
        edges.append((i, j))
        tables.append(flat.reshape(cards[i], cards[j]))
    return PairwiseModel(cards, node_pots, edges, tables)


def parse_uai(text: str, zero_floor: float = DEFAULT_ZERO_FLOOR) -> PairwiseModel:
    """Import a pairwise UAI MARKOV network.

    Probability entries ``p`` become ``ln p``; exact zeros become
    ``zero_floor`` (a large finite negative energy) so the model stays
    finite. Variables without a unary factor get zero node potentials.
    Only scopes of size one or two are supported, at most one factor per
    scope.
    """
    tokens = text.split()
    if not tokens:
        raise ParseError("empty file")
    if tokens[0] != "MARKOV":
        raise ParseError(f"expected MARKOV preamble, got {tokens[0]!r}")
    pos = 1

    def take(what: str) -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError(f"unexpected end of file, expected {what}")
        pos += 1
        return tokens[pos - 1]

    def take_int(what: str) -> int:
        tok = take(what)
        try:
            return int(tok)
        except ValueError:
            raise ParseError(f"{what}: not an integer: {tok!r}") from None

    n = take_int("variable count")
    cards = [take_int(f"cardinality of variable {i}") for i in range(n)]
    if any(k < 1 for k in cards):
        raise ParseError("cardinality below 1")
    nfactors = take_int("factor count")
    scopes = []
    for f in range(nfactors):
        size = take_int(f"scope size of factor {f}")
        if size not in (1, 2):
            raise ParseError(
                f"factor {f}: unsupported scope of size {size} (pairwise only)"
            )
        scope = [take_int(f"scope variable of factor {f}") for _ in range(size)]
        for v in scope:
            if not (0 <= v < n):
                raise ParseError(f"factor {f}: variable {v} out of range")
        if size == 2 and scope[0] == scope[1]:
            raise ParseError(f"factor {f}: repeated variable {scope[0]} in scope")
        scopes.append(tuple(scope))

    seen_unary: dict[int, int] = {}
    seen_pair: dict[tuple[int, int], int] = {}
    for f, scope in enumerate(scopes):
        if len(scope) == 1:
            if scope[0] in seen_unary:
                raise ParseError(
                    f"factor {f}: duplicate unary factor for variable {scope[0]}"
                )
            seen_unary[scope[0]] = f
        else:
            key = (min(scope), max(scope))
            if key in seen_pair:
                raise ParseError(f"factor {f}: duplicate factor over pair {key}")
            seen_pair[key] = f

    def to_log(values: np.ndarray, f: int) -> np.ndarray:
        if np.any(values < 0):
            raise ParseError(f"factor {f}: negative probability entry")
        out = np.full(values.shape, float(zero_floor))
        mask = values > 0
        out[mask] = np.log(values[mask])
        return out

    node_pots: list[np.ndarray | None] = [None] * n
    pair_tables: dict[tuple[int, int], np.ndarray] = {}
    for f, scope in enumerate(scopes):
        size = take_int(f"table size of factor {f}")
        expected = math.prod(cards[v] for v in scope)
        if size != expected:
            raise ParseError(
                f"factor {f}: table size {size}, expected {expected} for scope {scope}"
            )
        try:
            values = np.array([float(take(f"table entry of factor {f}"))
                               for _ in range(size)])
        except ParseError:
            raise
        if not np.all(np.isfinite(values)):
            raise ParseError(f"factor {f}: non-finite table entry")
        logs = to_log(values, f)
        if len(scope) == 1:
            node_pots[scope[0]] = logs
        else:
            u, v = scope
            table = logs.reshape(cards[u], cards[v])
            if u > v:
                u, v = v, u
                table = table.T
            pair_tables[(u, v)] = table

    for i in range(n):
        if node_pots[i] is None:
            node_pots[i] = np.zeros(cards[i])
    edges = sorted(pair_tables)
    return PairwiseModel(cards, node_pots, edges, [pair_tables[e] for e in edges])


@dataclass(frozen=True)
class GeneratorSpec:
    """Seeded synthetic instance description.

    ``states`` is either a fixed cardinality or an inclusive ``(lo, hi)``
    range sampled per variable. ``coupling``/``field`` are ``(lo, hi)``
    ranges; for ``spin_glass_grid`` the coupling range gives the magnitude
    and each edge draws a random sign. The seed fully determines the output.
    """

    kind: str
    n: int = 0
    rows: int = 0
    cols: int = 0
    states: int | tuple[int, int] = 2
    coupling: tuple[float, float] = (-1.0, 1.0)
    field: tuple[float, float] = (-1.0, 1.0)
    seed: int = 0


def _draw_cards(spec: GeneratorSpec, n: int, rng) -> np.ndarray:
    if isinstance(spec.states, tuple):
        lo, hi = spec.states
        if lo < 2 or hi < lo:
            raise ValueError(f"bad states range {spec.states}")
        return rng.integers(lo, hi + 1, size=n).astype(np.int32)
    if spec.states < 2:
        raise ValueError(f"states must be >= 2, got {spec.states}")
    return np.full(n, spec.states, dtype=np.int32)


def _prufer_tree(n: int, rng) -> list[tuple[int, int]]:
    # decode a uniform Prufer sequence; uniform over labeled trees
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    seq = [int(x) for x in rng.integers(0, n, size=n - 2)]
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    edges = []
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    for v in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, v), max(leaf, v)))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, v)
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((min(u, v), max(u, v)))
    return edges


def _grid_edges(rows: int, cols: int) -> list[tuple[int, int]]:
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return edges


def generate(spec: GeneratorSpec) -> PairwiseModel:
    """Deterministic synthetic instance for a spec; always validates.

    Draw order is fixed: cardinalities, topology, node fields in variable
    order, then edge couplings in edge order.
    """
    if spec.kind not in GENERATOR_KINDS:
        raise ValueError(f"unknown generator kind {spec.kind!r}")
    rng = np.random.default_rng(spec.seed)

    if spec.kind in ("tree", "random_complete"):
        n = spec.n
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        cards = _draw_cards(spec, n, rng)
        if spec.kind == "tree":
            edges = _prufer_tree(n, rng)
        else:
            edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        rows, cols = spec.rows, spec.cols
        if rows < 1 or cols < 1:
            raise ValueError(f"grid size must be positive, got {rows}x{cols}")
        n = rows * cols
        cards = _draw_cards(spec, n, rng)
        edges = _grid_edges(rows, cols)

    f_lo, f_hi = spec.field
    node_pots = [rng.uniform(f_lo, f_hi, size=int(cards[i])) for i in range(n)]

    c_lo, c_hi = spec.coupling
    tables = []
    for i, j in edges:
        ki, kj = int(cards[i]), int(cards[j])
        if spec.kind in ("tree", "random_complete"):
            tables.append(rng.uniform(c_lo, c_hi, size=(ki, kj)))
        elif spec.kind == "grid_potts":
            c = rng.uniform(c_lo, c_hi)
            table = np.zeros((ki, kj))
            np.fill_diagonal(table, c)
            tables.append(table)
        else:  # spin_glass_grid
            if c_lo < 0:
                raise ValueError(
                    f"spin glass coupling range is a magnitude, got {spec.coupling}"
                )
            mag = rng.uniform(c_lo, c_hi)
            sign = 1.0 if rng.integers(0, 2) else -1.0
            coupling = sign * mag
            table = np.full((ki, kj), -coupling)
            np.fill_diagonal(table, coupling)
            tables.append(table)

    return PairwiseModel(cards, node_pots, edges, tables)
