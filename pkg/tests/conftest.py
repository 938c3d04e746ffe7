"""Shared test helpers: small random graphs, corpora, and partitions."""

import json

import numpy as np
import pytest

from graphtopics import Corpus, Document, SimilarityGraph, make_topic_corpus


def random_connected_graph(rng: np.random.Generator, n_nodes: int,
                           extra_edges: int | None = None) -> SimilarityGraph:
    """Random tree plus extra edges; connected by construction."""
    edges = {}
    for v in range(1, n_nodes):
        u = int(rng.integers(0, v))
        edges[(u, v)] = float(rng.uniform(0.1, 1.0))
    if extra_edges is None:
        extra_edges = n_nodes
    for _ in range(extra_edges):
        u, v = rng.integers(0, n_nodes, size=2)
        if u == v:
            continue
        key = (min(int(u), int(v)), max(int(u), int(v)))
        edges.setdefault(key, float(rng.uniform(0.1, 1.0)))
    pairs = sorted(edges)
    ei = np.array([p[0] for p in pairs], dtype=np.int64)
    ej = np.array([p[1] for p in pairs], dtype=np.int64)
    w = np.array([edges[p] for p in pairs])
    return SimilarityGraph(n_nodes, ei, ej, w)


def graph_adjacency_dense(g: SimilarityGraph) -> np.ndarray:
    a = np.zeros((g.n_nodes, g.n_nodes))
    a[g.edge_i, g.edge_j] = g.weights
    a[g.edge_j, g.edge_i] = g.weights
    return a


def two_cliques_bridge(size: int = 6) -> SimilarityGraph:
    """Two unit-weight cliques joined by a single edge."""
    ei, ej = [], []
    for block in (0, size):
        for i in range(size):
            for j in range(i + 1, size):
                ei.append(block + i)
                ej.append(block + j)
    ei.append(size - 1)
    ej.append(size)
    order = np.lexsort((ej, ei))
    ei = np.asarray(ei, dtype=np.int64)[order]
    ej = np.asarray(ej, dtype=np.int64)[order]
    return SimilarityGraph(2 * size, ei, ej, np.ones(ei.size))


def token_corpus(token_lists, prefix: str = "d") -> Corpus:
    docs = [
        Document(id=f"{prefix}{i}", date=None, raw_text=" ".join(toks), tokens=list(toks))
        for i, toks in enumerate(token_lists)
    ]
    return Corpus(documents=docs, provenance="test")


def random_labels(rng: np.random.Generator, n: int, max_clusters: int) -> np.ndarray:
    """Random label vector with every cluster in [0, C) non-empty."""
    c = int(rng.integers(1, max_clusters + 1))
    c = min(c, n)
    while True:
        labels = rng.integers(0, c, size=n)
        if np.unique(labels).size == c:
            return labels


def write_tiny_corpus(path, n_docs: int = 30, seed: int = 7) -> None:
    """Small synthetic corpus as raw-text jsonl, for end-to-end runs."""
    corpus, _ = make_topic_corpus(n_docs=n_docs, n_topics=3, seed=seed)
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus:
            fh.write(json.dumps({"id": doc.id, "text": doc.raw_text}) + "\n")


def tiny_pipeline_config(corpus_path, out_dir, **overrides) -> dict:
    """Config dict tuned so a full pipeline run finishes in seconds."""
    cfg = {
        "corpus_path": str(corpus_path),
        "corpus_format": "jsonl",
        "feature": "tfidf_lsa",
        "lsa_dim": 16,
        "k": 5,
        "t_min": 0.1,
        "t_max": 10.0,
        "n_times": 8,
        "n_runs": 2,
        "n_scales": 2,
        "top_words": 5,
        "wordcloud_words": 10,
        "seed": 0,
        "out_dir": str(out_dir),
    }
    cfg.update(overrides)
    return cfg


@pytest.fixture
def rng():
    return np.random.default_rng(20240816)
