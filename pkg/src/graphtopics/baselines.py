"""Graph-less clustering baselines: k-means and Ward agglomeration.

Both operate on Euclidean distance over the rows they are given; pass
L2-normalized embeddings to approximate cosine geometry. Both produce
Partition objects interchangeable with the graph-based clusterings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import linkage
from sklearn.base import BaseEstimator, ClusterMixin

from .features import EmbeddingMatrix
from .partitions import Partition
from .validation import as_dense_rows

KMEANS_MAX_ITER = 300
KMEANS_TOL = 1e-6


def _points(m) -> np.ndarray:
    if isinstance(m, EmbeddingMatrix):
        return as_dense_rows(m.matrix)
    return as_dense_rows(m)


@dataclass
class KMeansResult:
    """Converged k-means state: assignment, centroids, objective."""

    partition: Partition
    centroids: np.ndarray
    inertia: float
    iterations: int

    def __post_init__(self):
        if self.inertia < 0:
            raise ValueError("inertia cannot be negative")
        counts = self.partition.sizes()
        if counts.shape[0] != self.centroids.shape[0] or np.any(counts == 0):
            raise ValueError("every centroid must own at least one point")


def _squared_distances(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d = (
        (x * x).sum(axis=1)[:, None]
        - 2.0 * (x @ centers.T)
        + (centers * centers).sum(axis=1)[None, :]
    )
    np.maximum(d, 0.0, out=d)
    return d


def _kmeans_plus_plus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    closest = _squared_distances(x, x[chosen[:1]])[:, 0]
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            # remaining points coincide with chosen centers; fill in order
            remaining = np.setdiff1d(np.arange(n), chosen[:c])
            chosen[c:] = remaining[: k - c]
            break
        chosen[c] = rng.choice(n, p=closest / total)
        closest = np.minimum(closest, _squared_distances(x, x[chosen[c : c + 1]])[:, 0])
    return x[chosen].copy()


def kmeans(
    m,
    k: int,
    seed: int = 0,
    max_iter: int = KMEANS_MAX_ITER,
    tol: float = KMEANS_TOL,
) -> KMeansResult:
    """Lloyd iterations from a k-means++ start on Euclidean distance.

    Stops when the largest centroid shift drops below ``tol`` or after
    ``max_iter`` rounds. Clusters emptied by an assignment step are repaired
    by seeding them with the points currently farthest from their centroids,
    so the result always has exactly k non-empty clusters. The objective is
    checked to be non-increasing at every iteration.
    """
    x = _points(m)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    centers = _kmeans_plus_plus(x, k, rng)
    prev_inertia = np.inf
    labels = np.zeros(n, dtype=np.int64)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        dists = _squared_distances(x, centers)
        labels = np.argmin(dists, axis=1)
        counts = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            assigned = dists[np.arange(n), labels]
            donors = np.argsort(-assigned, kind="stable")
            taken = 0
            for c in empty:
                while counts[labels[donors[taken]]] <= 1:
                    taken += 1
                p = donors[taken]
                taken += 1
                counts[labels[p]] -= 1
                labels[p] = c
                counts[c] = 1
        new_centers = np.zeros_like(centers)
        np.add.at(new_centers, labels, x)
        new_centers /= np.bincount(labels, minlength=k)[:, None]
        inertia = float(((x - new_centers[labels]) ** 2).sum())
        if inertia > prev_inertia + 1e-9 * max(1.0, prev_inertia):
            raise AssertionError(
                f"k-means objective increased: {prev_inertia} -> {inertia}"
            )
        shift = float(np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max())
        centers = new_centers
        prev_inertia = inertia
        if shift < tol:
            break
    part = Partition.from_labels(labels)
    remap = {}
    for lab in labels:
        if lab not in remap:
            remap[lab] = len(remap)
    centroids = np.empty_like(centers)
    for old, new in remap.items():
        centroids[new] = centers[old]
    return KMeansResult(part, centroids, prev_inertia, iterations)


@dataclass
class Dendrogram:
    """Agglomerative merge history over n_points items.

    ``merges`` follows the linkage convention: row r merges clusters a and b
    (ids < n_points are original points, n_points + r names the cluster made
    by row r) at the given height.
    """

    n_points: int
    merges: np.ndarray

    def __post_init__(self):
        self.merges = np.asarray(self.merges, dtype=np.float64).reshape(-1, 3)
        if self.merges.shape[0] != self.n_points - 1:
            raise ValueError("a full dendrogram has exactly n-1 merges")
        heights = self.merges[:, 2]
        if heights.size and np.any(np.diff(heights) < -1e-9):
            raise ValueError("merge heights must be non-decreasing")

    @property
    def heights(self) -> np.ndarray:
        return self.merges[:, 2]

    def cut(self, k: int) -> Partition:
        """Partition into exactly k clusters by undoing the last k-1 merges."""
        n = self.n_points
        if not 1 <= k <= n:
            raise ValueError(f"k must be in [1, {n}], got {k}")
        parent = list(range(2 * n - 1))

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for r in range(n - k):
            a, b = int(self.merges[r, 0]), int(self.merges[r, 1])
            parent[find(a)] = parent[find(b)] = n + r
        labels = np.array([find(i) for i in range(n)], dtype=np.int64)
        return Partition.from_labels(labels)


def ward_linkage(m) -> Dendrogram:
    """Full Ward dendrogram (nearest-neighbor-chain agglomeration)."""
    x = _points(m)
    if x.shape[0] < 2:
        return Dendrogram(x.shape[0], np.empty((0, 3)))
    z = linkage(x, method="ward")
    return Dendrogram(x.shape[0], z[:, :3])


def ward(m, k: int) -> Partition:
    """Ward agglomerative clustering cut at k clusters."""
    x = _points(m)
    if not 1 <= k <= x.shape[0]:
        raise ValueError(f"k must be in [1, {x.shape[0]}], got {k}")
    if x.shape[0] == 1:
        return Partition(np.zeros(1, dtype=np.int64))
    return ward_linkage(x).cut(k)


class KMeansClusterer(BaseEstimator, ClusterMixin):
    """Estimator facade over :func:`kmeans`."""

    def __init__(self, n_clusters: int = 8, max_iter: int = KMEANS_MAX_ITER,
                 tol: float = KMEANS_TOL, random_state: int = 0):
        self.n_clusters = n_clusters
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        result = kmeans(
            X, self.n_clusters, seed=self.random_state,
            max_iter=self.max_iter, tol=self.tol,
        )
        self.result_ = result
        self.cluster_centers_ = result.centroids
        self.inertia_ = result.inertia
        self.labels_ = result.partition.labels.copy()
        return self

    def predict(self, X) -> np.ndarray:
        x = _points(X)
        return np.argmin(_squared_distances(x, self.cluster_centers_), axis=1)


class WardClusterer(BaseEstimator, ClusterMixin):
    """Estimator facade over :func:`ward`."""

    def __init__(self, n_clusters: int = 2):
        self.n_clusters = n_clusters

    def fit(self, X, y=None):
        self.dendrogram_ = ward_linkage(X)
        self.labels_ = self.dendrogram_.cut(self.n_clusters).labels.copy()
        return self

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).labels_
