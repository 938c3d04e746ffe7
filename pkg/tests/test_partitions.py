import math

import numpy as np
import pytest

from graphtopics import (
    Partition,
    adjusted_rand_index,
    contingency_table,
    normalized_mutual_information,
    variation_of_information,
)
from oracles import ari_oracle, nmi_oracle, vi_oracle

from conftest import random_labels

# the worked 4-element pair used across metric checks:
# P1 groups items {0,1} and {2,3}; P2 groups {0} and {1,2,3}
P1 = Partition.from_labels([0, 0, 1, 1])
P2 = Partition.from_labels([0, 1, 1, 1])


def dense_contingency(p1: Partition, p2: Partition) -> np.ndarray:
    counts, rows, cols = contingency_table(p1, p2)
    out = np.zeros((p1.n_clusters, p2.n_clusters), dtype=np.int64)
    out[rows, cols] = counts
    return out


class TestPartition:
    def test_from_labels_first_appearance_order(self):
        p = Partition.from_labels(["b", "a", "b", "c"])
        assert list(p.labels) == [0, 1, 0, 2]
        assert p.n_clusters == 3

    def test_rejects_unused_cluster_index(self):
        with pytest.raises(ValueError):
            Partition(np.array([0, 2]), 3)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Partition.from_labels([])

    def test_canonical_is_relabeling_stable(self):
        p = Partition(np.array([2, 2, 0, 1]), 3)
        q = p.canonical()
        assert list(q.labels) == [0, 0, 1, 2]
        assert q.canonical() == q

    def test_sizes_and_members(self):
        assert list(P1.sizes()) == [2, 2]
        assert list(P2.members(1)) == [1, 2, 3]

    def test_indicator_one_hot(self):
        h = P2.indicator().toarray()
        assert h.shape == (4, 2)
        assert np.array_equal(h.sum(axis=1), np.ones(4))
        assert np.array_equal(h.sum(axis=0), [1, 3])

    def test_equality_ignores_label_names(self):
        assert Partition.from_labels([1, 1, 0]) == Partition.from_labels([5, 5, 9])
        assert Partition.from_labels([0, 1, 0]) != Partition.from_labels([0, 1, 1])


class TestContingency:
    def test_hand_pair_counts(self):
        assert np.array_equal(dense_contingency(P1, P2), [[1, 1], [0, 2]])

    def test_marginals_match_sizes(self, rng):
        for _ in range(20):
            a = Partition.from_labels(random_labels(rng, 15, 5))
            b = Partition.from_labels(random_labels(rng, 15, 4))
            t = dense_contingency(a, b)
            assert np.array_equal(t.sum(axis=1), a.sizes())
            assert np.array_equal(t.sum(axis=0), b.sizes())

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            contingency_table(P1, Partition.from_labels([0, 1]))


class TestVariationOfInformation:
    def test_identity_is_zero(self):
        assert variation_of_information(P1, P1) == 0.0

    def test_hand_pair(self):
        # hand contingency table [[1,1],[0,2]] gives VI = (3/4) ln 3
        v = variation_of_information(P1, P2)
        assert v == pytest.approx(0.75 * math.log(3.0), abs=1e-12)
        assert round(v, 4) == 0.8240

    def test_singletons_vs_all_in_one(self):
        for n in (2, 5, 9):
            s = Partition.from_labels(list(range(n)))
            one = Partition.from_labels([0] * n)
            assert variation_of_information(s, one) == pytest.approx(math.log(n), abs=1e-12)

    def test_symmetry_and_relabeling(self, rng):
        for _ in range(20):
            a = Partition.from_labels(random_labels(rng, 12, 4))
            b = Partition.from_labels(random_labels(rng, 12, 5))
            perm = rng.permutation(a.n_clusters)
            a_perm = Partition.from_labels(perm[a.labels])
            assert variation_of_information(a, b) == pytest.approx(
                variation_of_information(b, a), abs=1e-15)
            assert variation_of_information(a_perm, b) == pytest.approx(
                variation_of_information(a, b), abs=1e-15)

    def test_zero_iff_equal(self, rng):
        for _ in range(30):
            a = Partition.from_labels(random_labels(rng, 10, 4))
            b = Partition.from_labels(random_labels(rng, 10, 4))
            v = variation_of_information(a, b)
            if a == b:
                assert v == 0.0
            else:
                assert v > 1e-9


class TestNmi:
    def test_identity(self):
        assert normalized_mutual_information(P1, P1) == 1.0

    def test_hand_pair_matches_oracle(self):
        got = normalized_mutual_information(P1, P2)
        want = nmi_oracle([0, 0, 1, 1], [0, 1, 1, 1])
        assert got == pytest.approx(want, abs=1e-12)
        # closed form 2I/(H1+H2) = (3 ln 2 - 1.5 ln 3)/(3 ln 2 - 0.75 ln 3)
        closed = (3 * math.log(2) - 1.5 * math.log(3)) / (3 * math.log(2) - 0.75 * math.log(3))
        assert got == pytest.approx(closed, abs=1e-12)

    def test_both_entropies_zero(self):
        one = Partition.from_labels([0, 0, 0])
        assert normalized_mutual_information(one, one) == 1.0

    def test_range_and_relabeling(self, rng):
        for _ in range(20):
            a = Partition.from_labels(random_labels(rng, 14, 5))
            b = Partition.from_labels(random_labels(rng, 14, 5))
            v = normalized_mutual_information(a, b)
            assert -1e-15 <= v <= 1.0 + 1e-15
            perm = rng.permutation(b.n_clusters)
            b_perm = Partition.from_labels(perm[b.labels])
            assert normalized_mutual_information(a, b_perm) == pytest.approx(v, abs=1e-15)


class TestAri:
    def test_identity(self):
        assert adjusted_rand_index(P1, P1) == 1.0

    def test_hand_pair_is_zero(self):
        # pair counts put Index exactly on its expectation for this pair
        assert adjusted_rand_index(P1, P2) == pytest.approx(0.0, abs=1e-12)
        assert adjusted_rand_index(P1, P2) == pytest.approx(
            ari_oracle([0, 0, 1, 1], [0, 1, 1, 1]), abs=1e-15)

    def test_permuted_copy(self, rng):
        a = Partition.from_labels(random_labels(rng, 12, 4))
        perm = rng.permutation(a.n_clusters)
        assert adjusted_rand_index(a, Partition.from_labels(perm[a.labels])) == 1.0

    def test_degenerate_all_in_one_pair(self):
        one = Partition.from_labels([0] * 5)
        assert adjusted_rand_index(one, one) == 1.0


def test_metrics_match_oracle_spot(rng):
    for _ in range(50):
        n = int(rng.integers(2, 13))
        l1 = random_labels(rng, n, 4)
        l2 = random_labels(rng, n, 4)
        a, b = Partition.from_labels(l1), Partition.from_labels(l2)
        assert variation_of_information(a, b) == pytest.approx(vi_oracle(l1, l2), abs=1e-12)
        assert normalized_mutual_information(a, b) == pytest.approx(nmi_oracle(l1, l2), abs=1e-12)
        assert adjusted_rand_index(a, b) == pytest.approx(ari_oracle(l1, l2), abs=1e-12)
