import numpy as np
import pytest
from sklearn.neighbors import LocalOutlierFactor

from hybridad.baselines import (
    fit_isolation_forest,
    isolation_forest_scores,
    knn_outlier_scores,
    lof_scores,
    numeric_view,
    standardize,
)
from hybridad.data import ColumnKind, FeatureMatrix, FeatureSchema
from hybridad.errors import KTooLarge

from oracles import lof_reference


def cluster_with_outlier(seed, n=60):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, size=(n, 2))
    return np.vstack([x, [[8.0, 8.0]]])


class TestPreprocessing:
    def test_standardize(self, rng):
        z = standardize(rng.normal(3, 2, size=(100, 3)))
        np.testing.assert_allclose(z.mean(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose(z.std(axis=0), 1, atol=1e-12)

    def test_constant_column_becomes_zero(self):
        z = standardize([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
        assert np.all(z[:, 1] == 0)

    def test_one_hot(self):
        schema = FeatureSchema((("v", ColumnKind.NUMERIC), ("c", ColumnKind.CATEGORICAL)))
        x = FeatureMatrix.from_records([(1.0, "a"), (2.0, "b"), (3.0, "a")], schema)
        np.testing.assert_array_equal(
            numeric_view(x, scale=False), [[1, 1, 0], [2, 0, 1], [3, 1, 0]]
        )


class TestIsolationForest:
    def test_outlier_ranks_first(self):
        x = cluster_with_outlier(0)
        for seed in range(10):
            s = isolation_forest_scores(x, seed=seed).scores
            assert int(np.argmax(s)) == len(x) - 1

    def test_scores_in_unit_interval(self, rng):
        s = isolation_forest_scores(rng.normal(size=(80, 3)), seed=1).scores
        assert np.all((s > 0) & (s < 1))

    def test_full_subsample_sees_every_point(self, rng):
        x = rng.normal(size=(40, 2))
        model = fit_isolation_forest(x, trees=10, subsample=40, seed=0)
        assert all(len(set(idx)) == 40 for idx in model.estimators_samples_)

    def test_deterministic(self, rng):
        x = rng.normal(size=(50, 2))
        np.testing.assert_array_equal(
            isolation_forest_scores(x, seed=3).scores, isolation_forest_scores(x, seed=3).scores
        )


class TestKnn:
    def test_collinear(self):
        # distances to nearest neighbor: |0-1|, |1-0|, |10-1|
        np.testing.assert_array_equal(knn_outlier_scores([[0.0], [1.0], [10.0]], 1).scores, [1, 1, 9])

    def test_duplicate(self):
        s = knn_outlier_scores([[0.0], [0.0], [5.0]], 1).scores
        assert s[0] == 0 and s[1] == 0

    def test_farthest(self, rng):
        x = rng.normal(size=(10, 2))
        d = np.linalg.norm(x[:, None] - x[None], axis=-1)
        np.testing.assert_allclose(knn_outlier_scores(x, 9).scores, d.max(axis=1))

    def test_k_too_large(self):
        with pytest.raises(KTooLarge):
            knn_outlier_scores([[0.0], [1.0]], 2)


class TestLof:
    def test_grid_interior_near_one(self):
        g = np.array([(i, j) for i in range(10) for j in range(10)], dtype=float)
        s = lof_scores(g, 4).scores
        interior = [i * 10 + j for i in range(2, 8) for j in range(2, 8)]
        assert np.all(np.abs(s[interior] - 1) <= 0.2)

    def test_duplicated_point(self, rng):
        k = 3
        x = np.vstack([np.zeros((k + 1, 2)), rng.uniform(1, 3, size=(20, 2))])
        s = lof_scores(x, k).scores
        assert np.all(s[: k + 1] <= 1 + 1e-9)

    def test_far_outlier(self):
        x = cluster_with_outlier(1)
        s = lof_scores(x, 5).scores
        assert s[-1] > 2
        assert np.all(s > 0)

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_reference(self, seed):
        rng = np.random.default_rng(seed)
        x = np.round(rng.normal(size=(25, 2)), 1)  # rounding creates distance ties
        k = int(rng.integers(1, 6))
        np.testing.assert_allclose(lof_scores(x, k).scores, lof_reference(x.tolist(), k), rtol=1e-9)

    def test_matches_sklearn_without_ties(self, rng):
        x = rng.normal(size=(60, 3))
        ref = -LocalOutlierFactor(n_neighbors=5).fit(x).negative_outlier_factor_
        np.testing.assert_allclose(lof_scores(x, 5).scores, ref, rtol=1e-7)


@pytest.mark.parametrize(
    "fn", [lambda x: knn_outlier_scores(x, 3), lambda x: lof_scores(x, 3), lambda x: isolation_forest_scores(x, seed=2)]
)
def test_permutation_equivariance(fn, rng):
    x = rng.normal(size=(40, 3))
    perm = rng.permutation(40)
    np.testing.assert_allclose(fn(x).scores[perm], fn(x[perm]).scores, rtol=0, atol=1e-12)
