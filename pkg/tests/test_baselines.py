import numpy as np
import pytest

from graphtopics import (
    Dendrogram,
    EmbeddingMatrix,
    KMeansClusterer,
    Partition,
    WardClusterer,
    kmeans,
    ward,
    ward_linkage,
)
from oracles import best_two_cluster_inertia

FOUR_POINTS = np.array([[0.0], [1.0], [10.0], [11.0]])


def embedding(rows):
    rows = np.asarray(rows, dtype=np.float64)
    return EmbeddingMatrix([f"d{i}" for i in range(rows.shape[0])], rows)


class TestKMeans:
    def test_k_equals_n_singletons(self, rng):
        x = rng.normal(size=(6, 3))
        res = kmeans(embedding(x), k=6, seed=0)
        assert res.partition.n_clusters == 6
        assert res.inertia == 0.0

    def test_two_well_separated_pairs(self):
        res = kmeans(embedding(FOUR_POINTS), k=2, seed=0)
        assert res.partition == Partition.from_labels([0, 0, 1, 1])
        assert res.inertia == pytest.approx(1.0, abs=1e-12)
        # exhaustive check over all 2-subsets confirms this is the optimum
        best = best_two_cluster_inertia(FOUR_POINTS)
        assert best == pytest.approx(1.0, abs=1e-12)
        assert res.inertia <= best + 1e-12

    def test_k_above_n_rejected(self, rng):
        with pytest.raises(ValueError, match="k"):
            kmeans(embedding(rng.normal(size=(3, 2))), k=4)

    def test_k_one_centroid_is_mean(self, rng):
        x = rng.normal(size=(9, 4))
        res = kmeans(embedding(x), k=1, seed=0)
        assert np.abs(res.centroids[0] - x.mean(axis=0)).max() <= 1e-12
        assert res.partition.n_clusters == 1

    def test_inertia_matches_direct_recomputation(self, rng):
        x = rng.normal(size=(30, 5))
        res = kmeans(embedding(x), k=4, seed=1)
        direct = sum(
            ((x[i] - res.centroids[res.partition.labels[i]]) ** 2).sum()
            for i in range(30)
        )
        assert res.inertia == pytest.approx(direct, rel=1e-12)

    def test_centroids_are_cluster_means(self, rng):
        x = rng.normal(size=(25, 3))
        res = kmeans(embedding(x), k=3, seed=2)
        for c in range(3):
            members = res.partition.members(c)
            assert np.abs(res.centroids[c] - x[members].mean(axis=0)).max() <= 1e-9

    def test_deterministic_given_seed(self, rng):
        x = rng.normal(size=(40, 4))
        a = kmeans(embedding(x), k=5, seed=9)
        b = kmeans(embedding(x), k=5, seed=9)
        assert a.partition == b.partition
        assert np.array_equal(a.centroids, b.centroids)
        assert a.inertia == b.inertia

    def test_identical_points_repair_empty_clusters(self):
        x = np.ones((4, 2))
        res = kmeans(embedding(x), k=2, seed=0)
        assert res.partition.n_clusters == 2
        assert (res.partition.sizes() > 0).all()
        assert res.inertia == 0.0

    def test_beats_or_ties_random_assignments(self, rng):
        x = rng.normal(size=(20, 3))
        res = kmeans(embedding(x), k=3, seed=0)
        for _ in range(20):
            labels = rng.integers(0, 3, size=20)
            if np.unique(labels).size < 3:
                continue
            centers = np.vstack([x[labels == c].mean(axis=0) for c in range(3)])
            inertia = ((x - centers[labels]) ** 2).sum()
            assert res.inertia <= inertia + 1e-9

    def test_accepts_plain_arrays(self):
        res = kmeans(FOUR_POINTS, k=2, seed=0)
        assert res.partition.n_clusters == 2


class TestWard:
    def test_k_equals_n_singletons(self, rng):
        x = rng.normal(size=(5, 2))
        assert ward(embedding(x), k=5) == Partition.from_labels(range(5))

    def test_k_one_all_in_one(self, rng):
        x = rng.normal(size=(5, 2))
        assert ward(embedding(x), k=1) == Partition.from_labels([0] * 5)

    def test_first_merges_on_separated_pairs(self):
        dend = ward_linkage(embedding(FOUR_POINTS))
        first_two = {
            tuple(sorted(map(int, dend.merges[r, :2]))) for r in range(2)
        }
        assert first_two == {(0, 1), (2, 3)}
        # singleton merges at euclidean distance; the cross merge follows
        # the variance-increase rule: sqrt(2*2*2/4) * |0.5 - 10.5|
        assert dend.heights[0] == pytest.approx(1.0, abs=1e-12)
        assert dend.heights[1] == pytest.approx(1.0, abs=1e-12)
        assert dend.heights[2] == pytest.approx(10.0 * np.sqrt(2.0), rel=1e-12)

    def test_cut_two_recovers_pairs(self):
        assert ward(embedding(FOUR_POINTS), k=2) == Partition.from_labels([0, 0, 1, 1])

    def test_heights_monotone(self, rng):
        x = rng.normal(size=(20, 4))
        dend = ward_linkage(embedding(x))
        assert dend.merges.shape == (19, 3)
        assert (np.diff(dend.heights) >= -1e-9).all()

    def test_cut_sizes_and_nesting(self, rng):
        x = rng.normal(size=(15, 3))
        dend = ward_linkage(embedding(x))
        previous = None
        for k in (15, 8, 4, 2, 1):
            part = dend.cut(k)
            assert part.n_clusters == k
            if previous is not None:
                # a coarser cut only merges clusters of the finer one
                for c in range(part.n_clusters):
                    members = part.members(c)
                    fine = np.unique(previous.labels[members])
                    for f in fine:
                        assert set(previous.members(f)) <= set(members)
            previous = part

    def test_k_out_of_range_rejected(self, rng):
        x = rng.normal(size=(4, 2))
        with pytest.raises(ValueError):
            ward(embedding(x), k=5)
        with pytest.raises(ValueError):
            ward_linkage(embedding(x)).cut(0)

    def test_deterministic(self, rng):
        x = rng.normal(size=(25, 4))
        a = ward_linkage(embedding(x))
        b = ward_linkage(embedding(x))
        assert np.array_equal(a.merges, b.merges)


class TestDendrogramContainer:
    def test_wrong_merge_count_rejected(self):
        with pytest.raises(ValueError, match="n-1 merges"):
            Dendrogram(4, np.array([[0, 1, 1.0]]))

    def test_decreasing_heights_rejected(self):
        merges = np.array([[0, 1, 2.0], [2, 3, 1.0], [4, 5, 3.0]])
        with pytest.raises(ValueError, match="non-decreasing"):
            Dendrogram(4, merges)


class TestEstimatorFacades:
    def test_kmeans_facade(self):
        est = KMeansClusterer(n_clusters=2, random_state=0)
        labels = est.fit_predict(embedding(FOUR_POINTS))
        assert Partition.from_labels(labels) == Partition.from_labels([0, 0, 1, 1])
        assert est.get_params()["n_clusters"] == 2
        assert est.result_.inertia == pytest.approx(1.0, abs=1e-12)

    def test_ward_facade(self):
        est = WardClusterer(n_clusters=2)
        labels = est.fit_predict(embedding(FOUR_POINTS))
        assert Partition.from_labels(labels) == Partition.from_labels([0, 0, 1, 1])
