"""Graph representation, Hamming geometry, Frechet means, and file I/O.

A graph on N labeled nodes is stored as the half-vectorization of its
adjacency matrix: a length M = N(N-1)/2 bit vector in lower-triangular
row-major order, i.e. pairs (2,1), (3,1), (3,2), (4,1), ... in 1-based
node labels.  This bit order is part of the package contract and is
stable across versions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_NODES = 4096  # keeps edge indices comfortably within 32 bits


class GraphFormatError(ValueError):
    """Parse or validation error in a graph file; carries a line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def n_pairs(n_nodes: int) -> int:
    return n_nodes * (n_nodes - 1) // 2


def pair_index(u: int, v: int) -> int:
    """Edge-bit index of the unordered node pair {u, v}, 0-based nodes."""
    if u == v:
        raise ValueError("self-loops are not representable")
    if u > v:
        u, v = v, u
    return v * (v - 1) // 2 + u


def index_pair(idx: int) -> tuple[int, int]:
    """Inverse of :func:`pair_index`: bit index -> (u, v) with u < v."""
    v = int((1 + np.sqrt(1 + 8 * idx)) // 2)
    while v * (v - 1) // 2 > idx:
        v -= 1
    u = idx - v * (v - 1) // 2
    return u, v


@dataclass(eq=False)
class Graph:
    """Fixed-N labeled undirected simple graph as an M-bit edge vector.

    Immutable after construction; safe to share across threads.
    """

    n_nodes: int
    edges: np.ndarray

    def __post_init__(self):
        if not (2 <= self.n_nodes <= MAX_NODES):
            raise ValueError(f"n_nodes must be in [2, {MAX_NODES}], got {self.n_nodes}")
        edges = np.ascontiguousarray(self.edges, dtype=np.uint8)
        if edges.shape != (n_pairs(self.n_nodes),):
            raise ValueError(
                f"edge vector has shape {edges.shape}, expected ({n_pairs(self.n_nodes)},)"
            )
        if edges.max(initial=0) > 1:
            raise ValueError("edge vector entries must be 0 or 1")
        edges.flags.writeable = False
        object.__setattr__(self, "edges", edges)

    @property
    def m(self) -> int:
        return self.edges.shape[0]

    @property
    def n_edges(self) -> int:
        return int(self.edges.sum())

    @classmethod
    def empty(cls, n_nodes: int) -> "Graph":
        return cls(n_nodes, np.zeros(n_pairs(n_nodes), dtype=np.uint8))

    @classmethod
    def complete(cls, n_nodes: int) -> "Graph":
        return cls(n_nodes, np.ones(n_pairs(n_nodes), dtype=np.uint8))

    @classmethod
    def from_adjacency(cls, adj: np.ndarray) -> "Graph":
        adj = np.asarray(adj)
        n = adj.shape[0]
        if adj.shape != (n, n):
            raise ValueError("adjacency matrix must be square")
        if np.any(np.diag(adj) != 0):
            raise ValueError("nonzero diagonal: self-loops are not allowed")
        if np.any(adj != adj.T):
            raise ValueError("adjacency matrix is not symmetric")
        rows, cols = np.tril_indices(n, k=-1)
        return cls(n, adj[rows, cols].astype(np.uint8))

    def to_adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n_nodes, self.n_nodes), dtype=np.uint8)
        rows, cols = np.tril_indices(self.n_nodes, k=-1)
        adj[rows, cols] = self.edges
        adj[cols, rows] = self.edges
        return adj

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.edges[pair_index(u, v)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n_nodes == other.n_nodes and np.array_equal(self.edges, other.edges)

    def __hash__(self) -> int:
        return hash((self.n_nodes, self.edges.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


@dataclass
class GraphPopulation:
    """Ordered collection of graphs over a common node set."""

    n_nodes: int
    graphs: list[Graph]
    _edge_matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if len(self.graphs) < 1:
            raise ValueError("population must contain at least one graph")
        for g in self.graphs:
            if g.n_nodes != self.n_nodes:
                raise ValueError(
                    f"graph with {g.n_nodes} nodes in a population over {self.n_nodes} nodes"
                )

    def __len__(self) -> int:
        return len(self.graphs)

    def __getitem__(self, i: int) -> Graph:
        return self.graphs[i]

    def edge_matrix(self) -> np.ndarray:
        """(n, M) uint8 matrix of stacked edge vectors (cached)."""
        if self._edge_matrix is None:
            self._edge_matrix = np.stack([g.edges for g in self.graphs])
        return self._edge_matrix


def hamming(g1: Graph, g2: Graph) -> int:
    """Number of differing edge indicators between two graphs."""
    if g1.n_nodes != g2.n_nodes:
        raise ValueError(f"node-count mismatch: {g1.n_nodes} vs {g2.n_nodes}")
    return int(np.count_nonzero(g1.edges != g2.edges))


def frechet_mean(pop: GraphPopulation, tie_rule: str = "present") -> Graph:
    """Majority-vote graph: edge present iff it appears in >= 50% of members.

    With ``tie_rule="present"`` (default) an edge occurring in exactly half
    of the graphs is kept; ``"absent"`` requires a strict majority.
    """
    if tie_rule not in ("present", "absent"):
        raise ValueError(f"unknown tie_rule {tie_rule!r}")
    counts = pop.edge_matrix().sum(axis=0, dtype=np.int64)
    n = len(pop)
    if tie_rule == "present":
        bits = (2 * counts >= n).astype(np.uint8)
    else:
        bits = (2 * counts > n).astype(np.uint8)
    return Graph(pop.n_nodes, bits)


# ---------------------------------------------------------------------------
# File formats.
#
# adjacency-text: one graph is N lines of N whitespace-separated {0,1};
#   graphs are separated by one or more blank lines.
# edge-list: per graph, a header "graph <id> n=<N>" followed by lines
#   "i j" with 1-based node labels, i != j.
# ---------------------------------------------------------------------------

FORMATS = ("adjacency-text", "edge-list")


def _parse_adjacency_text(lines: list[str]) -> list[Graph]:
    graphs = []
    block: list[tuple[int, list[str]]] = []

    def flush():
        if not block:
            return
        n = len(block[0][1])
        if len(block) != n:
            raise GraphFormatError(
                f"adjacency block has {len(block)} rows but {n} columns", block[0][0]
            )
        adj = np.zeros((n, n), dtype=np.int64)
        for row, (lineno, tokens) in enumerate(block):
            if len(tokens) != n:
                raise GraphFormatError(f"expected {n} entries, found {len(tokens)}", lineno)
            for col, tok in enumerate(tokens):
                if tok not in ("0", "1"):
                    raise GraphFormatError(f"entry {tok!r} is not 0 or 1", lineno)
                adj[row, col] = int(tok)
        first_line = block[0][0]
        if np.any(np.diag(adj) != 0):
            raise GraphFormatError("nonzero diagonal entry", first_line)
        if np.any(adj != adj.T):
            raise GraphFormatError("asymmetric adjacency matrix", first_line)
        graphs.append(Graph.from_adjacency(adj))
        block.clear()

    for lineno, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped:
            flush()
            continue
        block.append((lineno, stripped.split()))
    flush()
    if not graphs:
        raise GraphFormatError("no graphs found in file")
    return graphs


def _parse_edge_list(lines: list[str]) -> list[Graph]:
    graphs = []
    n = None
    bits = None

    def flush():
        nonlocal bits
        if bits is not None:
            graphs.append(Graph(n, bits))
            bits = None

    for lineno, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if tokens[0] == "graph":
            if len(tokens) != 3 or not tokens[2].startswith("n="):
                raise GraphFormatError("malformed graph header, expected 'graph <id> n=<N>'", lineno)
            flush()
            try:
                new_n = int(tokens[2][2:])
            except ValueError:
                raise GraphFormatError(f"bad node count {tokens[2][2:]!r}", lineno) from None
            if n is not None and new_n != n:
                raise GraphFormatError(f"node count {new_n} differs from earlier {n}", lineno)
            n = new_n
            if not (2 <= n <= MAX_NODES):
                raise GraphFormatError(f"node count {n} out of range", lineno)
            bits = np.zeros(n_pairs(n), dtype=np.uint8)
        elif len(tokens) == 2:
            if bits is None:
                raise GraphFormatError("edge line before any graph header", lineno)
            try:
                i, j = int(tokens[0]), int(tokens[1])
            except ValueError:
                raise GraphFormatError(f"bad edge line {stripped!r}", lineno) from None
            if i == j:
                raise GraphFormatError("self-loop in edge list", lineno)
            if not (1 <= i <= n and 1 <= j <= n):
                raise GraphFormatError(f"node index out of range 1..{n}", lineno)
            bits[pair_index(i - 1, j - 1)] = 1
        else:
            raise GraphFormatError(f"unknown directive {tokens[0]!r}", lineno)
    flush()
    if not graphs:
        raise GraphFormatError("no graphs found in file")
    return graphs


def read_population(path, fmt: str = "adjacency-text") -> GraphPopulation:
    """Read a graph population from ``path`` in the given format."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}, expected one of {FORMATS}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    if fmt == "adjacency-text":
        graphs = _parse_adjacency_text(lines)
    else:
        graphs = _parse_edge_list(lines)
    n_nodes = graphs[0].n_nodes
    for g in graphs:
        if g.n_nodes != n_nodes:
            raise GraphFormatError("graphs in one population must share the node count")
    return GraphPopulation(n_nodes, graphs)


def write_population(pop: GraphPopulation, path, fmt: str = "adjacency-text") -> None:
    """Write a graph population to ``path`` in the given format."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}, expected one of {FORMATS}")
    with open(path, "w", encoding="utf-8") as fh:
        if fmt == "adjacency-text":
            for g in pop.graphs:
                adj = g.to_adjacency()
                for row in adj:
                    fh.write(" ".join(str(int(x)) for x in row) + "\n")
                fh.write("\n")
        else:
            for gid, g in enumerate(pop.graphs, start=1):
                fh.write(f"graph {gid} n={g.n_nodes}\n")
                for idx in np.flatnonzero(g.edges):
                    u, v = index_pair(int(idx))
                    fh.write(f"{u + 1} {v + 1}\n")
