"""KNN production path against the exhaustive-scan oracle."""

import numpy as np
import pytest

from healthguard.classifiers.knn import KnnParams, brute_force_label, predict_knn


def _params(X, y):
    return KnnParams(
        train_x=np.asarray(X, dtype=np.float64),
        train_y=np.asarray(y, dtype=np.int64),
    )


def _embed(points):
    """Lift 1-D points into 20-dim vectors (first coordinate carries them)."""
    X = np.zeros((len(points), 20))
    X[:, 0] = points
    return X


class TestVotes:
    def test_three_neighbor_toy(self):
        params = _params(_embed([0.0, 1.0, 10.0]), [0, 0, 1])
        preds, scores = predict_knn(params, 3, _embed([0.5]), n_classes=2)
        assert preds[0] == 0
        assert scores[0, 0] == pytest.approx(2 / 3)
        assert brute_force_label(params, 3, _embed([0.5])[0], 2) == 0

    def test_k1_memorizes_distinct_training_points(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(40, 20))
        y = rng.integers(0, 5, size=40)
        params = _params(X, y)
        preds, _ = predict_knn(params, 1, X, n_classes=5)
        assert np.array_equal(preds, y)

    def test_k_equals_n_gives_global_majority(self):
        X = _embed([0.0, 1.0, 2.0, 3.0, 4.0])
        y = [1, 1, 1, 0, 0]
        params = _params(X, y)
        preds, _ = predict_knn(params, 5, _embed([-100.0, 100.0]), n_classes=2)
        assert np.array_equal(preds, [1, 1])

    def test_vote_tie_breaks_by_summed_distance(self):
        # k=2: one neighbor of each class; class 1 sits closer
        params = _params(_embed([0.0, 3.0]), [1, 0])
        preds, _ = predict_knn(params, 2, _embed([1.0]), n_classes=2)
        assert preds[0] == 1
        assert brute_force_label(params, 2, _embed([1.0])[0], 2) == 1

    def test_full_tie_breaks_by_lower_class_index(self):
        # equidistant neighbors, equal votes, equal summed distance
        params = _params(_embed([-1.0, 1.0]), [1, 0])
        preds, _ = predict_knn(params, 2, _embed([0.0]), n_classes=2)
        assert preds[0] == 0
        assert brute_force_label(params, 2, _embed([0.0])[0], 2) == 0

    def test_neighbor_tie_at_k_boundary_uses_lower_index(self):
        # three equidistant points; k=2 must keep training indices 0 and 1
        params = _params(_embed([1.0, -1.0, 1.0]), [1, 1, 0])
        preds, _ = predict_knn(params, 2, _embed([0.0]), n_classes=2)
        assert preds[0] == 1
        assert brute_force_label(params, 2, _embed([0.0])[0], 2) == 1


class TestOracleAgreement:
    def test_production_path_matches_brute_force(self):
        rng = np.random.default_rng(123)
        X = rng.normal(size=(800, 20))
        y = rng.integers(0, 15, size=800)
        params = _params(X, y)
        queries = rng.normal(size=(150, 20))
        preds, _ = predict_knn(params, 5, queries, n_classes=15)
        for i in range(queries.shape[0]):
            assert preds[i] == brute_force_label(params, 5, queries[i], 15)

    def test_agreement_with_duplicated_training_points(self):
        rng = np.random.default_rng(9)
        base = rng.normal(size=(50, 20))
        X = np.vstack([base, base, base])  # heavy exact ties
        y = rng.integers(0, 4, size=150)
        params = _params(X, y)
        queries = base[:20] + rng.normal(scale=1e-3, size=(20, 20))
        preds, _ = predict_knn(params, 7, queries, n_classes=4)
        for i in range(queries.shape[0]):
            assert preds[i] == brute_force_label(params, 7, queries[i], 4)
