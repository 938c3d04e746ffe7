"""Synthetic corpora and benchmark graphs with known ground truth.

Everything here is seeded and deterministic; these generators back the test
fixtures and give users something runnable without external data.
"""

from __future__ import annotations

import datetime

import numpy as np

from .corpus import Corpus, Document
from .graph import SimilarityGraph
from .partitions import Partition


def _zipf_weights(n: int) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1)
    return w / w.sum()


def make_topic_corpus(
    n_docs: int = 200,
    n_topics: int = 3,
    seed: int = 0,
    words_per_topic: int = 60,
    shared_words: int = 40,
    shared_fraction: float = 0.3,
    min_length: int = 45,
    max_length: int = 80,
) -> tuple[Corpus, Partition]:
    """Raw-text corpus with planted topics and the planted assignment.

    Every document draws most tokens from its topic's private vocabulary and
    the rest from a shared pool, both Zipf-weighted. Topics rotate over
    documents, so counts per topic are balanced. Dates cycle through months
    of one year.
    """
    if n_topics < 1 or n_docs < n_topics:
        raise ValueError("need n_docs >= n_topics >= 1")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    topic_vocab = [
        [f"topic{t}word{w:03d}" for w in range(words_per_topic)]
        for t in range(n_topics)
    ]
    shared_vocab = [f"common{w:03d}" for w in range(shared_words)]
    topic_p = _zipf_weights(words_per_topic)
    shared_p = _zipf_weights(shared_words)

    docs = []
    labels = np.empty(n_docs, dtype=np.int64)
    for i in range(n_docs):
        topic = i % n_topics
        labels[i] = topic
        length = int(rng.integers(min_length, max_length + 1))
        n_shared = int(rng.binomial(length, shared_fraction))
        own = rng.choice(topic_vocab[topic], size=length - n_shared, p=topic_p)
        mixed = rng.choice(shared_vocab, size=n_shared, p=shared_p)
        tokens = np.concatenate([own, mixed])
        rng.shuffle(tokens)
        docs.append(
            Document(
                id=f"doc{i:04d}",
                raw_text=" ".join(tokens.tolist()),
                date=datetime.date(2019, (i % 12) + 1, 1),
            )
        )
    return Corpus(docs, provenance="synthetic topic fixture"), Partition.from_labels(labels)


def make_sbm_graph(
    sizes, p_matrix, seed: int = 0
) -> tuple[SimilarityGraph, Partition]:
    """Stochastic block model with unit edge weights.

    ``sizes[b]`` nodes per block; an edge between nodes of blocks (a, b)
    appears independently with probability ``p_matrix[a][b]``. Raises if the
    sampled graph is disconnected (choose probabilities or seed accordingly).
    """
    sizes = [int(s) for s in sizes]
    if any(s < 1 for s in sizes):
        raise ValueError("every block needs at least one node")
    p = np.asarray(p_matrix, dtype=np.float64)
    n_blocks = len(sizes)
    if p.shape != (n_blocks, n_blocks):
        raise ValueError("p_matrix must be square with one row per block")
    if not np.allclose(p, p.T) or p.min() < 0 or p.max() > 1:
        raise ValueError("p_matrix must be symmetric with entries in [0, 1]")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    n = int(offsets[-1])
    labels = np.concatenate(
        [np.full(s, b, dtype=np.int64) for b, s in enumerate(sizes)]
    )
    edge_chunks = []
    for a in range(n_blocks):
        for b in range(a, n_blocks):
            prob = p[a, b]
            if prob == 0:
                continue
            if a == b:
                ii, jj = np.triu_indices(sizes[a], k=1)
                ii = ii + offsets[a]
                jj = jj + offsets[a]
            else:
                ii, jj = np.meshgrid(
                    np.arange(offsets[a], offsets[a + 1]),
                    np.arange(offsets[b], offsets[b + 1]),
                    indexing="ij",
                )
                ii = ii.ravel()
                jj = jj.ravel()
            keep = rng.random(ii.shape[0]) < prob
            if keep.any():
                edge_chunks.append(np.stack([ii[keep], jj[keep]], axis=1))
    if not edge_chunks:
        raise ValueError("sampled graph has no edges")
    edges = np.concatenate(edge_chunks)
    keys = np.unique(edges[:, 0] * n + edges[:, 1])
    graph = SimilarityGraph(
        n, keys // n, keys % n, np.ones(keys.shape[0])
    )
    return graph, Partition.from_labels(labels)


def make_hierarchical_benchmark(
    nodes_per_leaf: int = 27,
    leaves_per_group: int = 3,
    n_groups: int = 3,
    p_leaf: float = 0.9,
    p_group: float = 0.3,
    p_cross: float = 0.02,
    seed: int = 0,
) -> tuple[SimilarityGraph, Partition, Partition]:
    """Two-level planted hierarchy: dense leaves nested inside groups.

    Returns the graph, the leaf-level partition and the group-level
    partition. Defaults give 9 leaves of 27 nodes arranged in 3 groups.
    """
    n_leaves = leaves_per_group * n_groups
    sizes = [nodes_per_leaf] * n_leaves
    p = np.full((n_leaves, n_leaves), p_cross)
    for g in range(n_groups):
        lo, hi = g * leaves_per_group, (g + 1) * leaves_per_group
        p[lo:hi, lo:hi] = p_group
    np.fill_diagonal(p, p_leaf)
    graph, leaf_partition = make_sbm_graph(sizes, p, seed=seed)
    group_labels = leaf_partition.labels // leaves_per_group
    return graph, leaf_partition, Partition.from_labels(group_labels)
