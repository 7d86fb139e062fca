import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geocluster.graph import Individual, SocialMatrix, build_weight_matrix, normalize
from geocluster.spectral import (
    Partition,
    embed,
    kmeans,
    lloyd,
    relabel_first_occurrence,
    spectral_cluster,
)

from conftest import random_instance


def blob_individuals(rng, centers, per_blob, spread=1.0):
    inds = []
    for b, (cx, cy) in enumerate(centers):
        for _ in range(per_blob):
            inds.append(
                Individual(
                    f"p{len(inds)}",
                    float(cx + rng.normal(0, spread)),
                    float(cy + rng.normal(0, spread)),
                    gang=f"g{b}",
                )
            )
    return inds


class TestEmbed:
    def test_identity_graph_has_unit_spectrum(self):
        inds = [Individual(f"p{i}", 1000.0 * i, 0.0) for i in range(6)]
        g = build_weight_matrix(inds, SocialMatrix.from_pairs(6, []), 1.0, 100.0)
        emb = embed(g, 6)
        np.testing.assert_allclose(emb.eigenvalues, np.ones(6), atol=1e-12)

    def test_two_block_sign_split(self):
        inds = [Individual(f"a{i}", 0.0, 0.0) for i in range(4)]
        inds += [Individual(f"b{i}", 1e6, 0.0) for i in range(4)]
        inds = [Individual(p.id, p.x, p.y) for p in inds]
        g = build_weight_matrix(inds, SocialMatrix.from_pairs(8, []), 0.0, 100.0)
        emb = embed(g, 2)
        signs = np.sign(emb.coords[:, 1])
        assert len(set(signs[:4])) == 1 and len(set(signs[4:])) == 1
        assert signs[0] != signs[4]

    def test_residual_and_dense_oracle_agreement(self):
        rng = np.random.default_rng(7)
        inds, social = random_instance(rng, 30, contact_rate=0.15)
        g = build_weight_matrix(inds, social, 0.4, 800.0)
        t = normalize(g)
        emb = embed(g, 30)
        for i in range(30):
            v = emb.coords[:, i]
            resid = t @ v - emb.eigenvalues[i] * v
            assert np.abs(resid).max() <= 1e-8
        oracle = np.sort(np.linalg.eigvals(t).real)[::-1]
        np.testing.assert_allclose(emb.eigenvalues, oracle, atol=1e-8)

    def test_leading_pair_is_constant_vector(self):
        rng = np.random.default_rng(8)
        inds, social = random_instance(rng, 25)
        g = build_weight_matrix(inds, social, 0.6, 800.0)
        emb = embed(g, 3)
        assert abs(emb.eigenvalues[0] - 1.0) <= 1e-8
        v1 = emb.coords[:, 0]
        assert np.abs(v1 / v1[0] - 1.0).max() <= 1e-6

    def test_d_weighted_unit_norm_columns(self, small_graph):
        emb = embed(small_graph, 8)
        norms = (emb.coords**2 * small_graph.d[:, None]).sum(axis=0)
        np.testing.assert_allclose(norms, 1.0, atol=1e-10)

    def test_bad_k(self, small_graph):
        with pytest.raises(ValueError):
            embed(small_graph, 0)
        with pytest.raises(ValueError):
            embed(small_graph, small_graph.n + 1)


class TestKmeans:
    def test_single_cluster_objective_is_total_variance(self):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(40, 3))
        part = kmeans(pts, 1, seed=0)
        assert part.k == 1
        expected = ((pts - pts.mean(axis=0)) ** 2).sum()
        assert part.objective == pytest.approx(expected)

    def test_k_equals_n_gives_singletons(self):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(12, 2))
        part = kmeans(pts, 12, seed=3)
        assert part.k == 12
        assert part.objective == pytest.approx(0.0, abs=1e-20)

    def test_four_blobs_recovered_over_ten_seeds(self):
        rng = np.random.default_rng(2)
        centers = [(0, 0), (50, 0), (0, 50), (50, 50)]
        pts = np.concatenate(
            [rng.normal(0, 1.0, size=(20, 2)) + c for c in centers]
        )
        truth = np.repeat(np.arange(4), 20)
        for seed in range(10):
            part = kmeans(pts, 4, seed=seed)
            # exact recovery: each cluster maps to one blob
            mapping = {}
            for c, t in zip(part.assignment, truth):
                mapping.setdefault(c, t)
                assert mapping[c] == t

    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(3)
        pts = rng.normal(size=(60, 4))
        a = kmeans(pts, 5, seed=11)
        b = kmeans(pts, 5, seed=11)
        assert np.array_equal(a.assignment, b.assignment)
        assert a.objective == b.objective

    def test_degenerate_input_flagged(self):
        pts = np.ones((10, 2))
        part = kmeans(pts, 3, seed=0)
        assert part.degenerate
        assert part.k == 1
        assert part.objective == 0.0

    def test_duplicate_points_are_handled(self):
        pts = np.array([[0.0, 0.0]] * 3 + [[5.0, 5.0]])
        part = kmeans(pts, 3, seed=1)
        assert part.k == 3
        assert not part.degenerate

    def test_permutation_equivariance_via_lloyd(self):
        rng = np.random.default_rng(4)
        pts = rng.normal(size=(50, 3))
        centers = pts[rng.choice(50, size=4, replace=False)]
        base_assign, _, base_obj = lloyd(pts, centers)
        perm = rng.permutation(50)
        perm_assign, _, perm_obj = lloyd(pts[perm], centers)
        assert np.array_equal(perm_assign, base_assign[perm])
        assert perm_obj == pytest.approx(base_obj)


class TestSpectralCluster:
    def test_two_far_groups_exactly_recovered(self):
        rng = np.random.default_rng(5)
        inds = blob_individuals(rng, [(0, 0), (1e5, 0)], per_blob=10, spread=0.1)
        g = build_weight_matrix(
            inds, SocialMatrix.from_pairs(len(inds), []), 0.0, 50.0
        )
        part = spectral_cluster(g, 2, seed=0)
        truth = np.repeat([0, 1], 10)
        assert np.array_equal(part.assignment, truth) or np.array_equal(
            part.assignment, 1 - truth
        )

    def test_carries_kmeans_objective(self, small_graph):
        part = spectral_cluster(small_graph, 8, seed=0)
        assert part.objective is not None and part.objective > 0.0


class TestPartition:
    def test_requires_contiguous_ids(self):
        with pytest.raises(ValueError):
            Partition(np.array([0, 2, 2]))

    def test_from_labels_relabels_by_first_occurrence(self):
        part = Partition.from_labels(np.array([7, 3, 7, 9]))
        assert part.assignment.tolist() == [0, 1, 0, 2]

    @given(st.lists(st.integers(0, 5), min_size=1, max_size=40))
    @settings(max_examples=50, deadline=None)
    def test_relabel_first_occurrence_properties(self, raw):
        out = relabel_first_occurrence(np.array(raw))
        # same grouping, ids contiguous from 0 in order of appearance
        assert out[0] == 0
        assert set(out.tolist()) == set(range(out.max() + 1))
        for i in range(len(raw)):
            for j in range(len(raw)):
                assert (raw[i] == raw[j]) == (out[i] == out[j])
