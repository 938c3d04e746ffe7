"""Partition scoring: intrinsic topic coherence and external agreement.

Coherence follows the PMI recipe: each cluster is summarized by its most
frequent words, every unordered word pair is scored against document-level
co-occurrence counts from a reference corpus, and scores are averaged per
cluster and then across clusters. External agreement reuses the partition
metrics (NMI, ARI, VI) against categorical document labels.
"""

from __future__ import annotations

import csv
import warnings
from collections import Counter
from dataclasses import dataclass, field
from math import log

import numpy as np

from .corpus import Corpus
from .partitions import (
    Partition,
    adjusted_rand_index,
    normalized_mutual_information,
    variation_of_information,
)

PMI_SMOOTHING = 1.0
TOP_WORDS = 10


@dataclass
class ReferenceStats:
    """Document-level term and term-pair occurrence counts."""

    n_docs: int
    occur: dict[str, int]
    cooccur: dict[tuple[str, str], int]

    def __post_init__(self):
        if self.n_docs < 1:
            raise ValueError("reference statistics need at least one document")
        for (a, b), count in self.cooccur.items():
            if a >= b:
                raise ValueError("co-occurrence keys must be ordered pairs (a < b)")
            cap = min(self.occur.get(a, 0), self.occur.get(b, 0))
            if count > cap or cap > self.n_docs:
                raise ValueError(
                    f"impossible counts for pair ({a}, {b}): "
                    f"cooccur={count}, occur cap={cap}, n_docs={self.n_docs}"
                )

    def occurrences(self, term: str) -> int:
        return self.occur.get(term, 0)

    def pair_occurrences(self, a: str, b: str) -> int:
        key = (a, b) if a < b else (b, a)
        return self.cooccur.get(key, 0)


def build_reference_stats(
    reference_corpus: Corpus, vocabulary_cap: int | None = None
) -> ReferenceStats:
    """Count document-level occurrences and co-occurrences.

    With a cap, only the ``vocabulary_cap`` highest-document-frequency terms
    are tracked (ties broken lexicographically). Co-occurrence is per
    document: each unordered pair of distinct retained terms appearing in
    the same document counts once.
    """
    if not reference_corpus.documents:
        raise ValueError("reference corpus is empty")
    df = Counter()
    doc_terms = []
    for doc in reference_corpus.documents:
        terms = sorted(set(doc.tokens))
        doc_terms.append(terms)
        df.update(terms)
    if not df:
        raise ValueError("reference corpus has no tokens")
    if vocabulary_cap is not None:
        if vocabulary_cap < 1:
            raise ValueError("vocabulary_cap must be >= 1")
        kept = set(
            sorted(df, key=lambda w: (-df[w], w))[:vocabulary_cap]
        )
    else:
        kept = set(df)
    occur = {w: int(df[w]) for w in kept}
    cooccur: dict[tuple[str, str], int] = {}
    for terms in doc_terms:
        retained = [w for w in terms if w in kept]
        for i in range(len(retained)):
            for j in range(i + 1, len(retained)):
                key = (retained[i], retained[j])
                cooccur[key] = cooccur.get(key, 0) + 1
    return ReferenceStats(len(reference_corpus.documents), occur, cooccur)


def save_reference_stats(stats: ReferenceStats, path) -> None:
    """Write stats as TSV: a #ndocs line, term counts, then pair counts."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#ndocs\t{stats.n_docs}\n")
        for term in sorted(stats.occur):
            fh.write(f"{term}\t{stats.occur[term]}\n")
        for a, b in sorted(stats.cooccur):
            fh.write(f"{a}\t{b}\t{stats.cooccur[(a, b)]}\n")


def load_reference_stats(path) -> ReferenceStats:
    """Read the TSV written by :func:`save_reference_stats`."""
    n_docs = None
    occur: dict[str, int] = {}
    cooccur: dict[tuple[str, str], int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if parts[0] == "#ndocs":
                n_docs = int(parts[1])
            elif len(parts) == 2:
                occur[parts[0]] = int(parts[1])
            elif len(parts) == 3:
                cooccur[(parts[0], parts[1])] = int(parts[2])
            else:
                raise ValueError(f"{path}:{lineno}: expected 2 or 3 tab-separated fields")
    if n_docs is None:
        raise ValueError(f"{path}: missing #ndocs line")
    return ReferenceStats(n_docs, occur, cooccur)


def _cluster_token_counts(corpus: Corpus, partition: Partition, cluster_id: int) -> Counter:
    counts = Counter()
    for pos in partition.members(cluster_id):
        counts.update(corpus.documents[pos].tokens)
    return counts


def _check_alignment(corpus: Corpus, partition: Partition) -> None:
    if partition.n_items != len(corpus.documents):
        raise ValueError(
            f"partition covers {partition.n_items} items, corpus has "
            f"{len(corpus.documents)} documents"
        )


def top_words(
    corpus: Corpus, partition: Partition, cluster_id: int, n_words: int = TOP_WORDS
) -> list[str]:
    """Most frequent words over the cluster's documents, ties lexicographic.

    Returns every available word when the cluster has fewer than n_words
    distinct words; an empty list (with a warning) when it has no tokens.
    """
    _check_alignment(corpus, partition)
    if not 0 <= cluster_id < partition.n_clusters:
        raise ValueError(f"cluster {cluster_id} not in partition")
    counts = _cluster_token_counts(corpus, partition, cluster_id)
    if not counts:
        warnings.warn(f"cluster {cluster_id} has no tokens", stacklevel=2)
        return []
    ranked = sorted(counts, key=lambda w: (-counts[w], w))
    return ranked[:n_words]


def pmi_coherence(words, ref: ReferenceStats) -> float:
    """Mean PMI over unordered word pairs against the reference counts.

    PMI(a, b) = ln[(cooccur + 1) * n_docs / (occur(a) * occur(b))]. Pairs
    where either word never occurs in the reference are skipped with a
    warning; if no pair survives, raises.
    """
    words = list(words)
    if len(words) < 2:
        raise ValueError("coherence needs at least two words")
    scores = []
    skipped = 0
    for i in range(len(words)):
        for j in range(i + 1, len(words)):
            a, b = words[i], words[j]
            occ_a, occ_b = ref.occurrences(a), ref.occurrences(b)
            if occ_a == 0 or occ_b == 0:
                skipped += 1
                continue
            joint = ref.pair_occurrences(a, b) + PMI_SMOOTHING
            scores.append(log(joint * ref.n_docs / (occ_a * occ_b)))
    if skipped:
        warnings.warn(
            f"skipped {skipped} word pairs with no reference coverage",
            stacklevel=2,
        )
    if not scores:
        raise ValueError("no reference coverage for any word pair")
    return float(np.mean(scores))


@dataclass
class CoherenceReport:
    """Per-cluster top words and PMI, plus their unweighted mean."""

    cluster_words: list[list[str]]
    cluster_pmi: list[float | None]
    aggregate_pmi: float = field(default=np.nan)


def aggregate_pmi(
    corpus: Corpus,
    partition: Partition,
    ref: ReferenceStats,
    n_words: int = TOP_WORDS,
) -> CoherenceReport:
    """Score every cluster and average over those with a defined score.

    Clusters contribute when they have at least two reference-covered top
    words; others carry a None score. Raises when no cluster at all can be
    scored.
    """
    _check_alignment(corpus, partition)
    words_per_cluster = []
    pmi_per_cluster: list[float | None] = []
    for c in range(partition.n_clusters):
        words = top_words(corpus, partition, c, n_words=n_words)
        words_per_cluster.append(words)
        if len(words) < 2:
            pmi_per_cluster.append(None)
            continue
        try:
            pmi_per_cluster.append(pmi_coherence(words, ref))
        except ValueError:
            pmi_per_cluster.append(None)
    scored = [p for p in pmi_per_cluster if p is not None]
    if not scored:
        raise ValueError("no cluster produced a coherence score")
    return CoherenceReport(
        words_per_cluster, pmi_per_cluster, float(np.mean(scored))
    )


@dataclass
class ExternalLabels:
    """Categorical labels for a subset of corpus documents."""

    labels: dict[str, str]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("external labels are empty")

    @property
    def n_labeled(self) -> int:
        return len(self.labels)


def load_external_labels(path, corpus: Corpus | None = None) -> ExternalLabels:
    """Read a `doc_id,label` CSV; optionally check ids against a corpus."""
    labels: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["doc_id", "label"]:
            raise ValueError(f"{path}: expected 'doc_id,label' header")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected doc_id,label")
            doc_id = row[0].strip()
            if doc_id in labels:
                raise ValueError(f"{path}:{lineno}: duplicate doc_id {doc_id!r}")
            labels[doc_id] = row[1].strip()
    if corpus is not None:
        known = set(corpus.doc_ids)
        unknown = sorted(set(labels) - known)
        if unknown:
            raise ValueError(
                f"{path}: labels reference unknown doc ids: {', '.join(unknown[:5])}"
            )
    return ExternalLabels(labels)


def external_agreement(
    partition: Partition, corpus: Corpus, ext: ExternalLabels
) -> dict[str, float]:
    """NMI/ARI/VI between a partition and an external labeling.

    Both sides are restricted to the labeled documents; the number of
    covered documents is reported alongside the scores.
    """
    _check_alignment(corpus, partition)
    covered = [i for i, did in enumerate(corpus.doc_ids) if did in ext.labels]
    if len(covered) < 2:
        raise ValueError("need at least two labeled documents in the corpus")
    sub = Partition.from_labels(partition.labels[covered])
    classes = sorted({ext.labels[corpus.doc_ids[i]] for i in covered})
    index = {cls: pos for pos, cls in enumerate(classes)}
    truth = Partition.from_labels(
        np.array([index[ext.labels[corpus.doc_ids[i]]] for i in covered])
    )
    return {
        "nmi": normalized_mutual_information(sub, truth),
        "ari": adjusted_rand_index(sub, truth),
        "vi": variation_of_information(sub, truth),
        "n_covered": float(len(covered)),
    }
