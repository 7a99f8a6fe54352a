"""k-nearest-neighbor classifier with an exhaustive-scan oracle.

Neighbors are ordered by (squared Euclidean distance, training index);
votes resolve ties by smallest summed distance, then lowest class index.

The production path accelerates the scan with a matrix-product distance
expansion, but only to preselect candidates: a superset chosen with a
safety margin far wider than the expansion's rounding error is re-scored
with the same exact arithmetic the brute-force oracle uses, so both paths
agree query for query, ties included.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_CHUNK = 512          # queries per matrix-product block
_EXTRA_CANDIDATES = 8  # preselect k + this many before exact re-scoring
_TIE_MARGIN = 1e-6     # distance slack covering matrix-product rounding


@dataclass
class KnnParams:
    train_x: np.ndarray  # float64 (n, d), standardized
    train_y: np.ndarray  # int64 (n,)


def _exact_sq_distances(train_x: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Reference distance computation shared by both prediction paths."""
    return ((train_x - query) ** 2).sum(axis=1)


def _vote_rows(
    neighbor_labels: np.ndarray,
    neighbor_dists: np.ndarray,
    n_classes: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Majority vote per row with the deterministic tie rules."""
    m, k = neighbor_labels.shape
    rows = np.repeat(np.arange(m), k)
    flat_labels = neighbor_labels.ravel()
    votes = np.zeros((m, n_classes))
    np.add.at(votes, (rows, flat_labels), 1.0)
    dist_sums = np.zeros((m, n_classes))
    np.add.at(dist_sums, (rows, flat_labels), neighbor_dists.ravel())

    top = votes.max(axis=1, keepdims=True)
    tied = votes == top
    # Among tied classes prefer the smallest summed distance; argmin takes
    # the first (lowest class index) on residual ties.
    masked = np.where(tied, dist_sums, np.inf)
    preds = np.argmin(masked, axis=1)
    return preds.astype(np.int64), votes / k


def predict_knn(
    params: KnnParams,
    k: int,
    queries: np.ndarray,
    n_classes: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact k-NN prediction: (class codes, vote fractions)."""
    train_x, train_y = params.train_x, params.train_y
    n = train_x.shape[0]
    k = min(k, n)
    n_query = queries.shape[0]
    m = min(k + _EXTRA_CANDIDATES, n)
    sq_train = (train_x**2).sum(axis=1)

    labels = np.empty((n_query, k), dtype=np.int64)
    dists = np.empty((n_query, k))
    for start in range(0, n_query, _CHUNK):
        q = queries[start : start + _CHUNK]
        approx = sq_train[None, :] - 2.0 * (q @ train_x.T) + (q**2).sum(axis=1)[:, None]
        cutoff = np.partition(approx, m - 1, axis=1)[:, m - 1]
        margin = _TIE_MARGIN * (1.0 + np.abs(cutoff))
        for i in range(q.shape[0]):
            candidates = np.nonzero(approx[i] <= cutoff[i] + margin[i])[0]
            exact = _exact_sq_distances(train_x[candidates], q[i])
            # Stable sort on the ascending candidate indices realizes the
            # (distance, training index) ordering.
            order = np.argsort(exact, kind="stable")[:k]
            row = start + i
            labels[row] = train_y[candidates[order]]
            dists[row] = exact[order]
    return _vote_rows(labels, dists, n_classes)


def brute_force_label(params: KnnParams, k: int, query: np.ndarray, n_classes: int) -> int:
    """Reference prediction by exhaustive scan with plain-python voting."""
    n = params.train_x.shape[0]
    k = min(k, n)
    dists = _exact_sq_distances(params.train_x, query)
    ranked = sorted(range(n), key=lambda i: (dists[i], i))[:k]

    counts: dict[int, int] = {}
    sums: dict[int, float] = {}
    for i in ranked:
        label = int(params.train_y[i])
        counts[label] = counts.get(label, 0) + 1
        sums[label] = sums.get(label, 0.0) + float(dists[i])
    top = max(counts.values())
    tied = [label for label, c in counts.items() if c == top]
    tied.sort(key=lambda label: (sums[label], label))
    return tied[0]
