"""Graph representation, DIMACS I/O, random instances, and independent-set sampling."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class DimacsError(ValueError):
    """Raised for malformed DIMACS .col input; message names the line number."""


class Graph:
    """Undirected simple graph on vertices 0..n-1.

    Adjacency is stored both as per-vertex frozensets and as integer bitmasks;
    the bitmasks carry the hot set operations (intersection tests in pricing).
    Instances are immutable after construction and safe to share across runs.
    """

    __slots__ = ("n", "edges", "adjacency", "degree", "density", "adj_bits")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 1:
            raise ValueError("graph needs at least one vertex")
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            seen.add((u, v) if u < v else (v, u))
        self.n = n
        self.edges = sorted(seen)
        bits = [0] * n
        deg = [0] * n
        for u, v in self.edges:
            bits[u] |= 1 << v
            bits[v] |= 1 << u
            deg[u] += 1
            deg[v] += 1
        self.adj_bits = bits
        self.degree = deg
        self.adjacency = [frozenset(_bits_to_list(b)) for b in bits]
        self.density = 2.0 * len(self.edges) / (n * (n - 1)) if n > 1 else 0.0

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj_bits[u] >> v & 1)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={len(self.edges)})"


def _bits_to_list(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class Column:
    """A maximal independent set, stored as a sorted vertex tuple."""

    vertices: tuple[int, ...]
    mask: int = field(compare=False, repr=False, default=0)

    def __post_init__(self):
        verts = tuple(sorted(self.vertices))
        object.__setattr__(self, "vertices", verts)
        m = 0
        for v in verts:
            m |= 1 << v
        object.__setattr__(self, "mask", m)

    def __hash__(self) -> int:
        return hash(self.vertices)

    def weight(self, weights: Sequence[float]) -> float:
        return float(sum(weights[v] for v in self.vertices))

    def is_independent(self, g: Graph) -> bool:
        return all(g.adj_bits[v] & self.mask == 0 for v in self.vertices)

    def is_maximal(self, g: Graph) -> bool:
        if not self.is_independent(g):
            return False
        for v in range(g.n):
            if not (self.mask >> v & 1) and g.adj_bits[v] & self.mask == 0:
                return False
        return True

    def validate(self, g: Graph) -> None:
        if self.vertices and not (0 <= self.vertices[0] and self.vertices[-1] < g.n):
            raise ValueError(f"column {self.vertices} out of range for n={g.n}")
        if not self.is_independent(g):
            raise ValueError(f"column {self.vertices} is not an independent set")
        if not self.is_maximal(g):
            raise ValueError(f"column {self.vertices} is not maximal")


def extend_to_maximal(g: Graph, mask: int) -> int:
    """Greedily add non-adjacent vertices in ascending index until maximal."""
    for v in range(g.n):
        if not (mask >> v & 1) and g.adj_bits[v] & mask == 0:
            mask |= 1 << v
    return mask


def column_from_mask(mask: int) -> Column:
    return Column(tuple(_bits_to_list(mask)))


def parse_dimacs(text) -> Graph:
    """Parse DIMACS .col text: `c` comments, one `p edge <n> <m>` header, `e <u> <v>` lines.

    Accepts a string or a readable text stream. Vertices are 1-based in the
    file and converted to 0-based; duplicate edges and reversed orientations
    are deduplicated.
    """
    if hasattr(text, "read"):
        text = text.read()
    n = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if n is not None:
                raise DimacsError(f"line {lineno}: duplicate problem header")
            if len(parts) != 4 or parts[1] != "edge":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                n = int(parts[2])
                int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: non-integer header fields") from None
            if n < 1:
                raise DimacsError(f"line {lineno}: vertex count must be positive")
        elif parts[0] == "e":
            if n is None:
                raise DimacsError(f"line {lineno}: edge before problem header")
            if len(parts) != 3:
                raise DimacsError(f"line {lineno}: malformed edge line {line!r}")
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise DimacsError(f"line {lineno}: non-integer vertex index") from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise DimacsError(f"line {lineno}: vertex index out of range [1,{n}]")
            if u == v:
                raise DimacsError(f"line {lineno}: self-loop at vertex {u}")
            edges.append((u - 1, v - 1))
        else:
            raise DimacsError(f"line {lineno}: unknown line type {parts[0]!r}")
    if n is None:
        raise DimacsError("missing problem header")
    return Graph(n, edges)


def generate_random_graph(n: int, p: float, seed: int) -> Graph:
    """G(n, p): each unordered pair is an edge independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("edge probability must be in [0, 1]")
    rng = random.Random(seed)
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.append((u, v))
    return Graph(n, edges)


def mis_from_order(g: Graph, order: Sequence[int], anchor: int | None = None) -> Column:
    """Greedy maximal independent set: visit `order`, add every compatible vertex."""
    mask = 0
    blocked = 0
    if anchor is not None:
        mask = 1 << anchor
        blocked = g.adj_bits[anchor]
    for v in order:
        bit = 1 << v
        if mask & bit or blocked & bit:
            continue
        mask |= bit
        blocked |= g.adj_bits[v]
    return column_from_mask(mask)


def sample_random_mis(g: Graph, seed: int, anchor: int | None = None) -> Column:
    """Sample a maximal independent set from a seeded random vertex permutation."""
    if anchor is not None and not 0 <= anchor < g.n:
        raise ValueError(f"anchor {anchor} out of range")
    order = list(range(g.n))
    random.Random(seed).shuffle(order)
    return mis_from_order(g, order, anchor)


def greedy_coloring(g: Graph, rng: random.Random) -> list[int]:
    """Color vertices in descending-degree order (random tie-breaks), smallest feasible color."""
    order = list(range(g.n))
    rng.shuffle(order)
    order.sort(key=lambda v: -g.degree[v])
    color = [-1] * g.n
    for v in order:
        used = {color[u] for u in g.adjacency[v] if color[u] >= 0}
        c = 0
        while c in used:
            c += 1
        color[v] = c
    return color


def warm_start_columns(g: Graph, restarts: int = 10, seed: int = 0) -> list[Column]:
    """Initial column set from the best of `restarts` randomized greedy colorings.

    Each color class of the best coloring is extended to a maximal independent
    set; the result covers all vertices.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = random.Random(seed)
    best: list[int] | None = None
    best_count = g.n + 1
    for _ in range(restarts):
        color = greedy_coloring(g, rng)
        count = max(color) + 1
        if count < best_count:
            best, best_count = color, count
    assert best is not None
    masks = [0] * best_count
    for v, c in enumerate(best):
        masks[c] |= 1 << v
    columns: list[Column] = []
    seen: set[int] = set()
    for m in masks:
        full = extend_to_maximal(g, m)
        if full not in seen:
            seen.add(full)
            columns.append(column_from_mask(full))
    return columns


def dual_seeded_columns(g: Graph, yhat: Sequence[float], k: int, seed: int) -> list[Column]:
    """Up to k distinct columns with small reduced cost 1 - sum(yhat) under `yhat`.

    Repeated heuristic max-weight searches; after each find, the heaviest
    member is excluded from later searches to force diversity. Results are
    sorted by (reduced cost, vertex tuple).
    """
    from .pricing import heuristic_search

    if k < 1:
        raise ValueError("k must be >= 1")
    weights = [float(y) for y in yhat]
    if len(weights) != g.n:
        raise ValueError("yhat length must equal vertex count")
    rng = random.Random(seed)
    found: dict[int, Column] = {}
    excluded = 0
    for attempt in range(4 * k):
        if excluded == g.full_mask:
            break
        mask, _ = heuristic_search(g, weights, effort=40 * g.n, seed=rng.randrange(2**31), excluded=excluded)
        mask = extend_to_maximal(g, mask)
        if mask not in found:
            found[mask] = column_from_mask(mask)
        if len(found) >= k:
            break
        members = _bits_to_list(mask & ~excluded)
        if not members:
            members = _bits_to_list(mask)
        exclude_v = max(members, key=lambda v: (weights[v], -v))
        excluded |= 1 << exclude_v
    cols = sorted(found.values(), key=lambda c: (1.0 - c.weight(weights), c.vertices))
    return cols[:k]
