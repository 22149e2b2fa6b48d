"""Undirected graph container, edge-list I/O, random generators and
spectral/degree utilities.

Graphs are stored in compressed (CSR-style) adjacency form with nodes
relabelled to 0..n-1.  The original labels are retained so results can be
reported against the input file's identifiers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class GraphError(ValueError):
    """Invalid graph input (parse error, infeasible parameters, ...)."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph in compressed adjacency form."""

    n: int
    indptr: np.ndarray   # shape (n+1,), int64
    indices: np.ndarray  # shape (2m,), int64, sorted within each row
    labels: tuple = ()   # original node labels, index -> label
    dropped_self_loops: int = 0
    dropped_duplicates: int = 0

    @property
    def m(self) -> int:
        """Number of undirected edges."""
        return len(self.indices) // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def adjacency(self) -> sp.csr_matrix:
        """Sparse adjacency matrix A."""
        data = np.ones(len(self.indices))
        return sp.csr_matrix((data, self.indices, self.indptr),
                             shape=(self.n, self.n))

    def laplacian(self) -> sp.csr_matrix:
        """Graph Laplacian L = D - A."""
        return sp.diags(self.degrees.astype(float)) - self.adjacency()

    def edges(self) -> np.ndarray:
        """Array of undirected edges (u, v) with u < v, shape (m, 2)."""
        src = np.repeat(np.arange(self.n), self.degrees)
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    def content_hash(self) -> str:
        """Stable hash of the topology, for run manifests."""
        import hashlib
        h = hashlib.sha256()
        h.update(np.int64(self.n).tobytes())
        h.update(self.indptr.tobytes())
        h.update(self.indices.tobytes())
        return h.hexdigest()


def from_edges(edges, labels=None, n=None) -> Graph:
    """Build a Graph from an iterable of (u, v) integer pairs.

    Self-loops and duplicate edges are dropped and counted.
    """
    edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    if n is None:
        n = int(edges.max()) + 1 if len(edges) else 0
    self_loops = int(np.sum(edges[:, 0] == edges[:, 1])) if len(edges) else 0
    edges = edges[edges[:, 0] != edges[:, 1]] if len(edges) else edges
    if len(edges):
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        keys = np.unique(lo * np.int64(n) + hi)
        dups = len(edges) - len(keys)
        lo, hi = keys // n, keys % n
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
    else:
        dups = 0
        src = dst = np.empty(0, dtype=np.int64)
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    indptr = np.cumsum(indptr)
    if labels is None:
        labels = tuple(str(i) for i in range(n))
    return Graph(n=n, indptr=indptr, indices=dst, labels=tuple(labels),
                 dropped_self_loops=self_loops, dropped_duplicates=dups)


def load_edge_list(path) -> Graph:
    """Read a graph from a text edge list.

    One edge per line, two whitespace-separated node labels; lines starting
    with '#' are ignored.  Labels may be arbitrary strings and are mapped
    to dense integers (mapping kept in ``Graph.labels``).
    """
    label_to_id: dict = {}
    labels: list = []
    edges: list = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            tokens = stripped.split()
            if len(tokens) != 2:
                raise GraphError(
                    f"{path}: line {lineno}: expected 2 tokens, got {len(tokens)}"
                )
            pair = []
            for tok in tokens:
                if tok not in label_to_id:
                    label_to_id[tok] = len(labels)
                    labels.append(tok)
                pair.append(label_to_id[tok])
            edges.append(pair)
    return from_edges(edges, labels=labels, n=len(labels))


def save_edge_list(g: Graph, path) -> None:
    """Write the graph as a text edge list using its original labels."""
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in g.edges():
            fh.write(f"{g.labels[u]} {g.labels[v]}\n")


def generate_random_regular(n: int, degree: int, seed=None) -> Graph:
    """Sample a simple random regular graph by the configuration model.

    Stubs are paired uniformly at random; self-loops and multi-edges are
    repaired by double-edge swaps (bounded at 200*m swaps), falling back to
    a full resample.  Deterministic given ``seed``.
    """
    if (n * degree) % 2 != 0:
        raise GraphError(f"n*degree must be even, got n={n}, degree={degree}")
    if degree >= n:
        raise GraphError(f"degree must be < n, got n={n}, degree={degree}")
    if degree < 0 or n <= 0:
        raise GraphError("n must be positive and degree nonnegative")
    rng = np.random.default_rng(seed)
    m = n * degree // 2
    for _ in range(100):
        stubs = np.repeat(np.arange(n, dtype=np.int64), degree)
        rng.shuffle(stubs)
        pairs = stubs.reshape(m, 2)
        edges = _repair_to_simple(pairs, n, rng, max_swaps=200 * max(m, 1))
        if edges is not None:
            return from_edges(edges, n=n)
    raise GraphError("failed to generate a simple regular graph")


def _repair_to_simple(pairs, n, rng, max_swaps):
    """Double-edge-swap repair of a stub pairing; None if budget exceeded."""
    n = np.int64(n)
    edge_set = set()
    bad = []
    good = []
    for u, v in pairs:
        if u == v:
            bad.append((int(u), int(v)))
            continue
        key = (min(u, v)) * n + max(u, v)
        if key in edge_set:
            bad.append((int(u), int(v)))
        else:
            edge_set.add(key)
            good.append((int(u), int(v)))
    swaps = 0
    while bad:
        u, v = bad.pop()
        placed = False
        while swaps < max_swaps and not placed:
            swaps += 1
            j = rng.integers(len(good))
            x, y = good[j]
            # Swap (u,v),(x,y) -> (u,x),(v,y); valid iff both new edges are
            # non-loop and absent from the current edge set.
            if u == x or v == y:
                continue
            k1 = min(u, x) * n + max(u, x)
            k2 = min(v, y) * n + max(v, y)
            if k1 == k2 or k1 in edge_set or k2 in edge_set:
                continue
            edge_set.discard(min(x, y) * n + max(x, y))
            edge_set.add(k1)
            edge_set.add(k2)
            good[j] = (u, x)
            good.append((v, y))
            placed = True
        if not placed:
            return None
    return good


def generate_gnp(n: int, p: float, seed=None) -> Graph:
    """Erdos-Renyi G(n, p) graph."""
    if not (0.0 <= p <= 1.0):
        raise GraphError(f"p must be in [0,1], got {p}")
    if n <= 0:
        raise GraphError("n must be positive")
    rng = np.random.default_rng(seed)
    edges = []
    for u in range(n - 1):
        hits = np.nonzero(rng.random(n - u - 1) < p)[0]
        for v in hits:
            edges.append((u, u + 1 + int(v)))
    return from_edges(edges, n=n)


def spectral_radius(g: Graph, tol: float = 1e-12) -> float:
    """Largest adjacency eigenvalue via power iteration.

    The all-ones start vector is nonnegative, so the iteration converges to
    the global maximum even on disconnected graphs.
    """
    if g.n == 0:
        raise GraphError("empty graph")
    if tol <= 0:
        raise GraphError("tol must be positive")
    if g.m == 0:
        return 0.0
    A = g.adjacency()
    x = np.ones(g.n) / np.sqrt(g.n)
    lam_prev = 0.0
    # iterate with A + I: the +1 shift makes the top eigenvalue strictly
    # dominant in magnitude even on bipartite graphs (spectrum symmetric
    # about 0), where plain power iteration oscillates
    for _ in range(100_000):
        y = A @ x
        lam = float(x @ y)  # Rayleigh quotient of A
        y = y + x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        x = y / norm
        if abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
            return lam
        lam_prev = lam
    return lam_prev


def mean_excess_degree(g: Graph) -> float:
    """q = (mean degree) - 1 = 2m/n - 1."""
    if g.n == 0:
        raise GraphError("empty graph")
    return 2.0 * g.m / g.n - 1.0


@dataclass(frozen=True, eq=False)
class DirectedEdgeIndex:
    """Dense indexing of the 2m directed edges of a graph.

    Directed edge e = (j -> k) is identified with the CSR slot of k in j's
    neighbor list, so e runs over 0..2m-1 with ``src[e] = j`` and
    ``dst[e] = k``.  ``rev[e]`` is the index of (k -> j).
    """

    n: int
    indptr: np.ndarray
    src: np.ndarray   # (2m,) row of each slot
    dst: np.ndarray   # (2m,) alias of graph.indices
    rev: np.ndarray   # (2m,) index of the reversed edge
    undirected: np.ndarray  # (m,) one slot per undirected edge (the one with src < dst)

    @property
    def n_directed(self) -> int:
        return len(self.src)

    def index_of(self, j: int, k: int) -> int:
        lo, hi = self.indptr[j], self.indptr[j + 1]
        pos = lo + np.searchsorted(self.dst[lo:hi], k)
        if pos >= hi or self.dst[pos] != k:
            raise KeyError(f"({j},{k}) is not an edge")
        return int(pos)

    def endpoints(self, e: int) -> tuple:
        return int(self.src[e]), int(self.dst[e])


def directed_edge_index(g: Graph) -> DirectedEdgeIndex:
    src = np.repeat(np.arange(g.n, dtype=np.int64), g.degrees)
    dst = g.indices
    # rev via binary search in the destination row (rows are sorted).
    rev = np.empty(len(src), dtype=np.int64)
    for e in range(len(src)):
        j, k = src[e], dst[e]
        lo, hi = g.indptr[k], g.indptr[k + 1]
        rev[e] = lo + np.searchsorted(dst[lo:hi], j)
    undirected = np.nonzero(src < dst)[0]
    return DirectedEdgeIndex(n=g.n, indptr=g.indptr, src=src, dst=dst,
                             rev=rev, undirected=undirected)
