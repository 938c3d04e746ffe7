"""Hard partitions of a document set and information-theoretic comparison metrics.

All metrics are computed from the exact contingency table of the two
partitions. Entropies and mutual information use natural logarithms, so
variation of information is reported in nats.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Partition:
    """Assignment of N items to clusters 0..n_clusters-1.

    Every cluster index in [0, n_clusters) must be used at least once.
    Use :meth:`from_labels` to build one from arbitrary label values.
    """

    labels: np.ndarray
    n_clusters: int = field(default=-1)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1 or labels.size == 0:
            raise ValueError("labels must be a non-empty 1-D array")
        n_clusters = self.n_clusters
        if n_clusters < 0:
            n_clusters = int(labels.max()) + 1
            object.__setattr__(self, "n_clusters", n_clusters)
        if labels.min() < 0 or labels.max() >= n_clusters:
            raise ValueError("cluster indices must lie in [0, n_clusters)")
        used = np.bincount(labels, minlength=n_clusters)
        if (used == 0).any():
            missing = int(np.flatnonzero(used == 0)[0])
            raise ValueError(f"cluster {missing} is empty; indices must be contiguous")

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        """Build a Partition from arbitrary hashable labels, canonically renumbered.

        Clusters are numbered 0.. in order of first appearance.
        """
        seen: dict = {}
        out = np.empty(len(labels), dtype=np.int64)
        for i, lab in enumerate(labels):
            key = lab.item() if isinstance(lab, np.generic) else lab
            if key not in seen:
                seen[key] = len(seen)
            out[i] = seen[key]
        return cls(out, len(seen))

    @property
    def n_items(self) -> int:
        return int(self.labels.size)

    def canonical(self) -> "Partition":
        """Relabel clusters by order of first appearance (canonical form)."""
        return Partition.from_labels(self.labels)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_clusters)

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster)

    def indicator(self):
        """N x C sparse indicator matrix H with H[i, c] = 1 iff item i is in c."""
        from scipy import sparse

        n = self.n_items
        return sparse.csr_matrix(
            (np.ones(n), (np.arange(n), self.labels)), shape=(n, self.n_clusters)
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.n_clusters == other.n_clusters and np.array_equal(
            self.labels, other.labels
        )


def _check_pair(p1: Partition, p2: Partition) -> int:
    if p1.n_items != p2.n_items:
        raise ValueError(
            f"partition length mismatch: {p1.n_items} vs {p2.n_items}"
        )
    return p1.n_items


def contingency_table(p1: Partition, p2: Partition):
    """Exact sparse contingency counts between two partitions.

    Returns (counts, rows, cols): counts[k] items fall in cluster rows[k] of p1
    and cluster cols[k] of p2. Only nonzero cells are listed.
    """
    _check_pair(p1, p2)
    keys = p1.labels.astype(np.int64) * np.int64(p2.n_clusters) + p2.labels
    uniq, counts = np.unique(keys, return_counts=True)
    rows = uniq // p2.n_clusters
    cols = uniq % p2.n_clusters
    return counts, rows, cols


def _entropy(sizes: np.ndarray, n: int) -> float:
    p = sizes[sizes > 0] / n
    return float(-(p * np.log(p)).sum())


def _mutual_information(p1: Partition, p2: Partition) -> float:
    n = p1.n_items
    counts, rows, cols = contingency_table(p1, p2)
    a = p1.sizes()
    b = p2.sizes()
    pij = counts / n
    # shared log(count/n) primitives so I(P,P) cancels against H(P) exactly
    log_pij = np.log(pij)
    log_ai = np.log(a[rows] / n)
    log_bj = np.log(b[cols] / n)
    return float((pij * (log_pij - log_ai - log_bj)).sum())


def variation_of_information(p1: Partition, p2: Partition) -> float:
    """VI(p1, p2) = H(p1) + H(p2) - 2 I(p1, p2), in nats.

    A metric on partitions: zero iff the partitions are equal up to
    relabeling, symmetric, and satisfying the triangle inequality.
    """
    n = _check_pair(p1, p2)
    h1 = _entropy(p1.sizes(), n)
    h2 = _entropy(p2.sizes(), n)
    vi = h1 + h2 - 2.0 * _mutual_information(p1, p2)
    return max(vi, 0.0)


def normalized_mutual_information(p1: Partition, p2: Partition) -> float:
    """NMI with arithmetic-mean normalization: 2 I / (H1 + H2).

    Defined as 1.0 when both partitions carry zero entropy (both trivial).
    """
    n = _check_pair(p1, p2)
    h1 = _entropy(p1.sizes(), n)
    h2 = _entropy(p2.sizes(), n)
    if h1 == 0.0 and h2 == 0.0:
        return 1.0
    return 2.0 * _mutual_information(p1, p2) / (h1 + h2)


def adjusted_rand_index(p1: Partition, p2: Partition) -> float:
    """ARI = (Index - Expected) / (Max - Expected) from pair counts.

    Returns 1.0 for the degenerate cases where Max equals Expected (both
    partitions trivial in the same way).
    """
    n = _check_pair(p1, p2)
    counts, _, _ = contingency_table(p1, p2)
    a = p1.sizes().astype(np.float64)
    b = p2.sizes().astype(np.float64)
    c = counts.astype(np.float64)
    sum_ij = (c * (c - 1) / 2.0).sum()
    sum_a = (a * (a - 1) / 2.0).sum()
    sum_b = (b * (b - 1) / 2.0).sum()
    total = n * (n - 1) / 2.0
    expected = sum_a * sum_b / total
    maximum = (sum_a + sum_b) / 2.0
    if maximum == expected:
        return 1.0
    return float((sum_ij - expected) / (maximum - expected))
