"""Sparse similarity graphs over document embeddings.

The sparsifier keeps the union of the cosine-similarity minimum spanning
tree (on distance 1 - s) and the directed k-nearest-neighbor edges, which
yields a connected graph with at most (N - 1) + N * k undirected edges.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ._kernels import kruskal_select
from .features import EmbeddingMatrix, l2_normalize
from .validation import check_matrix

DEFAULT_K = 13
WEIGHT_FLOOR = 1e-6


class GraphConnectivityError(ValueError):
    """Raised when an operation requires a connected graph."""


@dataclass
class SimilarityGraph:
    """Undirected weighted graph stored as canonical edge arrays.

    Edges are stored once with ``edge_i < edge_j``, sorted lexicographically.
    Weights must be strictly positive. Unless ``validate=False``, construction
    checks the edge invariants and connectivity.
    """

    n_nodes: int
    edge_i: np.ndarray
    edge_j: np.ndarray
    weights: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.edge_i = np.asarray(self.edge_i, dtype=np.int64)
        self.edge_j = np.asarray(self.edge_j, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if not self.validate:
            return
        if self.n_nodes < 1:
            raise ValueError("graph needs at least one node")
        if not (self.edge_i.shape == self.edge_j.shape == self.weights.shape):
            raise ValueError("edge arrays must have identical length")
        if self.n_edges:
            if self.edge_i.min() < 0 or self.edge_j.max() >= self.n_nodes:
                raise ValueError("edge endpoint out of range")
            if np.any(self.edge_i >= self.edge_j):
                raise ValueError("edges must satisfy i < j (no self-loops)")
            keys = self.edge_i * self.n_nodes + self.edge_j
            if np.any(np.diff(keys) <= 0):
                raise ValueError("edges must be unique and sorted by (i, j)")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights <= 0):
            raise ValueError("edge weights must be finite and positive")
        if not self.is_connected():
            raise GraphConnectivityError(
                "graph is disconnected; every node must be reachable"
            )

    @property
    def n_edges(self) -> int:
        return int(self.edge_i.shape[0])

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric weighted adjacency matrix (no self-loops)."""
        rows = np.concatenate([self.edge_i, self.edge_j])
        cols = np.concatenate([self.edge_j, self.edge_i])
        vals = np.concatenate([self.weights, self.weights])
        a = sp.coo_matrix(
            (vals, (rows, cols)), shape=(self.n_nodes, self.n_nodes)
        )
        return a.tocsr()

    def degrees(self) -> np.ndarray:
        """Weighted degree of every node."""
        d = np.zeros(self.n_nodes)
        np.add.at(d, self.edge_i, self.weights)
        np.add.at(d, self.edge_j, self.weights)
        return d

    @property
    def total_weight(self) -> float:
        """Sum of degrees (twice the sum of edge weights)."""
        return float(2.0 * self.weights.sum())

    def is_connected(self) -> bool:
        if self.n_nodes == 1:
            return True
        if self.n_edges < self.n_nodes - 1:
            return False
        n_comp, _ = connected_components(self.adjacency(), directed=False)
        return n_comp == 1


def cosine_similarity_matrix(embedding) -> np.ndarray:
    """Dense pairwise cosine similarity with unit diagonal.

    Rows with zero norm get similarity 0 to everything else. Accepts an
    EmbeddingMatrix or any (sparse) 2d array.
    """
    if isinstance(embedding, EmbeddingMatrix):
        normed = embedding if embedding.l2_normalized else l2_normalize(embedding)
        x = normed.matrix
    else:
        x = check_matrix(embedding, name="embedding")
        x = l2_normalize(
            EmbeddingMatrix([f"r{i}" for i in range(x.shape[0])], x)
        ).matrix
    if sp.issparse(x):
        sims = (x @ x.T).toarray()
    else:
        sims = x @ x.T
    np.clip(sims, -1.0, 1.0, out=sims)
    np.fill_diagonal(sims, 1.0)
    return sims


def minimum_spanning_tree(similarities: np.ndarray) -> np.ndarray:
    """MST edges on distance 1 - similarity, as an (n-1, 2) array with i < j.

    Kruskal with a stable sort over the row-major upper triangle, so equal
    distances are resolved in favor of the lexicographically smallest (i, j).
    """
    sims = np.asarray(similarities, dtype=np.float64)
    n = sims.shape[0]
    if sims.shape != (n, n):
        raise ValueError("similarity matrix must be square")
    if n == 1:
        return np.empty((0, 2), dtype=np.int64)
    iu, ju = np.triu_indices(n, k=1)
    dist = 1.0 - sims[iu, ju]
    order = np.argsort(dist, kind="stable")
    chosen = kruskal_select(order, iu, ju, n)
    if chosen.shape[0] != n - 1:
        raise GraphConnectivityError("similarity matrix produced no spanning tree")
    edges = np.stack([iu[chosen], ju[chosen]], axis=1)
    return edges[np.lexsort((edges[:, 1], edges[:, 0]))]


def knn_edges(similarities: np.ndarray, k: int) -> np.ndarray:
    """Undirected union of each node's k most similar neighbors.

    Ties in similarity favor the lower neighbor index. Result is an (E, 2)
    array with i < j, deduplicated and sorted.
    """
    sims = np.asarray(similarities, dtype=np.float64)
    n = sims.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    k_eff = min(k, n - 1)
    if k_eff == 0:
        return np.empty((0, 2), dtype=np.int64)
    pairs = np.empty((n * k_eff, 2), dtype=np.int64)
    for u in range(n):
        s = -sims[u].copy()
        s[u] = np.inf
        top = np.argsort(s, kind="stable")[:k_eff]
        pairs[u * k_eff:(u + 1) * k_eff, 0] = u
        pairs[u * k_eff:(u + 1) * k_eff, 1] = top
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    keys = np.unique(lo * n + hi)
    return np.stack([keys // n, keys % n], axis=1)


def mst_knn(embedding, k: int = DEFAULT_K, weight_floor: float = WEIGHT_FLOOR) -> SimilarityGraph:
    """Sparsify an embedding into the MST union kNN similarity graph.

    Edge weights are the cosine similarities, floored at ``weight_floor`` so
    the MST backbone never contributes non-positive weights.
    """
    sims = cosine_similarity_matrix(embedding)
    n = sims.shape[0]
    tree = minimum_spanning_tree(sims)
    near = knn_edges(sims, k)
    if tree.size:
        keys = np.unique(
            np.concatenate([tree[:, 0] * n + tree[:, 1], near[:, 0] * n + near[:, 1]])
        )
    else:
        keys = np.unique(near[:, 0] * n + near[:, 1])
    edge_i = keys // n
    edge_j = keys % n
    weights = np.maximum(sims[edge_i, edge_j], weight_floor)
    graph = SimilarityGraph(n, edge_i, edge_j, weights)
    if graph.n_edges > (n - 1) + n * k:
        raise AssertionError("sparsifier produced more edges than mst+knn bound")
    return graph


def save_graph(graph: SimilarityGraph, path) -> None:
    """Write a tab-separated edge list with a ``#nodes=<N>`` header."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#nodes={graph.n_nodes}\n")
        for i, j, w in zip(graph.edge_i, graph.edge_j, graph.weights):
            fh.write(f"{i}\t{j}\t{w:.17g}\n")


def load_graph(path) -> SimilarityGraph:
    """Read an edge-list TSV written by :func:`save_graph`."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("#nodes="):
            raise ValueError(f"{path}: expected '#nodes=<N>' header, got {header!r}")
        n_nodes = int(header[len("#nodes="):])
        ei, ej, ws = [], [], []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'i<TAB>j<TAB>weight'")
            ei.append(int(parts[0]))
            ej.append(int(parts[1]))
            ws.append(float(parts[2]))
    order = np.lexsort((np.array(ej), np.array(ei)))
    return SimilarityGraph(
        n_nodes,
        np.array(ei, dtype=np.int64)[order],
        np.array(ej, dtype=np.int64)[order],
        np.array(ws, dtype=np.float64)[order],
    )


def graph_from_edges(n_nodes: int, edges, weights=None) -> SimilarityGraph:
    """Build a graph from an iterable of (i, j) pairs, canonicalizing order.

    Duplicate pairs collapse to one edge (their weights must agree); weights
    default to 1.0.
    """
    arr = np.asarray(list(edges), dtype=np.int64)
    if arr.size == 0:
        return SimilarityGraph(n_nodes, [], [], [])
    if weights is None:
        w = np.ones(arr.shape[0])
    else:
        w = np.asarray(weights, dtype=np.float64)
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    if np.any(lo == hi):
        raise ValueError("self-loops are not allowed")
    keys = lo * n_nodes + hi
    uniq, inverse = np.unique(keys, return_inverse=True)
    out_w = np.full(uniq.shape[0], np.nan)
    for pos, src in enumerate(inverse):
        if np.isnan(out_w[src]):
            out_w[src] = w[pos]
        elif out_w[src] != w[pos]:
            raise ValueError("conflicting weights for a duplicate edge")
    return SimilarityGraph(n_nodes, uniq // n_nodes, uniq % n_nodes, out_w)
