"""Visualization-ready exports: multilevel Sankey flows and wordclouds.

Only data is produced (JSON); rendering is left to external tools. Flows
between consecutive levels are exact contingency-table counts, so they
conserve document totals by construction.
"""

from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import dataclass

from .corpus import Corpus
from .partitions import Partition, contingency_table

WORDCLOUD_WORDS = 50


@dataclass
class SankeyData:
    """Named partition levels and the document flows between them."""

    levels: list[dict]
    flows: list[dict]

    def as_dict(self) -> dict:
        return {"levels": self.levels, "flows": self.flows}


@dataclass
class WordcloudData:
    """Per-cluster word weight lists."""

    clusters: list[dict]

    def as_dict(self) -> dict:
        return {"clusters": self.clusters}


def export_sankey(named_partitions, path=None) -> SankeyData:
    """Build flow data between consecutive partitions of the same items.

    ``named_partitions`` is an ordered list of (name, Partition) pairs,
    typically finest to coarsest. Flow counts are the contingency-table
    entries between each adjacent pair. When ``path`` is given the data is
    also written as JSON.
    """
    named = list(named_partitions)
    if not named:
        raise ValueError("need at least one partition to export")
    n_items = named[0][1].n_items
    for name, part in named:
        if part.n_items != n_items:
            raise ValueError(
                f"partition {name!r} covers {part.n_items} items, expected {n_items}"
            )
    levels = []
    for name, part in named:
        sizes = part.sizes()
        levels.append(
            {
                "name": str(name),
                "clusters": [
                    {"id": int(c), "size": int(sizes[c])} for c in range(part.n_clusters)
                ],
            }
        )
    flows = []
    for lvl in range(len(named) - 1):
        counts, rows, cols = contingency_table(named[lvl][1], named[lvl + 1][1])
        for src, dst, k in sorted(zip(rows.tolist(), cols.tolist(), counts.tolist())):
            flows.append(
                {"from": [lvl, int(src)], "to": [lvl + 1, int(dst)], "count": int(k)}
            )
    data = SankeyData(levels, flows)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(data.as_dict(), fh, indent=2)
            fh.write("\n")
    return data


def export_wordclouds(
    corpus: Corpus,
    partition: Partition,
    n_words: int = WORDCLOUD_WORDS,
    path=None,
) -> WordcloudData:
    """Top words by within-cluster raw frequency, per cluster.

    Produces ``[word, count]`` pairs sorted by descending count (ties
    lexicographic). Clusters without tokens yield an empty list and a
    warning.
    """
    if partition.n_items != len(corpus.documents):
        raise ValueError(
            f"partition covers {partition.n_items} items, corpus has "
            f"{len(corpus.documents)} documents"
        )
    clusters = []
    for c in range(partition.n_clusters):
        counts = Counter()
        for pos in partition.members(c):
            counts.update(corpus.documents[pos].tokens)
        if not counts:
            warnings.warn(f"cluster {c} has no tokens", stacklevel=2)
            words: list[list] = []
        else:
            ranked = sorted(counts, key=lambda w: (-counts[w], w))[:n_words]
            words = [[w, int(counts[w])] for w in ranked]
        clusters.append({"id": int(c), "words": words})
    data = WordcloudData(clusters)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(data.as_dict(), fh, indent=2)
            fh.write("\n")
    return data


def load_sankey(path) -> SankeyData:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return SankeyData(raw["levels"], raw["flows"])


def load_wordclouds(path) -> WordcloudData:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return WordcloudData(raw["clusters"])
