"""CART-style decision tree and bagged random forest, array-backed.

Trees are grown greedily by minimizing weighted Gini impurity over binary
threshold splits. Candidate thresholds are midpoints between consecutive
distinct sorted values; ties resolve to the lowest feature index, then the
lowest threshold, which makes training bit-reproducible. Nodes are stored
as flat arrays (feature, threshold, children, class counts) so prediction
is a vectorized traversal and serialization is trivial.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np


def gini(label_counts) -> float:
    """Gini impurity 1 - sum(p_c^2) of a count vector."""
    counts = np.asarray(label_counts, dtype=np.float64)
    if counts.size == 0 or np.any(counts < 0):
        raise ValueError("label counts must be nonnegative and nonempty")
    total = counts.sum()
    if total <= 0:
        raise ValueError("cannot compute impurity of an empty node")
    p = counts / total
    return float(1.0 - np.dot(p, p))


@dataclass
class TreeArrays:
    """Flat node storage; ``feature == -1`` marks a leaf."""

    feature: np.ndarray    # int32 (n_nodes,)
    threshold: np.ndarray  # float64 (n_nodes,)
    left: np.ndarray       # int32 (n_nodes,)
    right: np.ndarray      # int32 (n_nodes,)
    counts: np.ndarray     # int64 (n_nodes, n_classes)

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])


def _best_split(
    X: np.ndarray,
    y: np.ndarray,
    idx: np.ndarray,
    candidates: np.ndarray,
    n_classes: int,
) -> tuple[int, float] | None:
    """Lowest-weighted-Gini (feature, threshold) over candidate features."""
    n = idx.size
    y_sub = y[idx]
    total = np.bincount(y_sub, minlength=n_classes).astype(np.float64)
    best_w = np.inf
    best: tuple[int, float] | None = None
    for f in candidates:
        v = X[idx, f]
        order = np.argsort(v, kind="stable")
        v_sorted = v[order]
        boundaries = np.nonzero(v_sorted[1:] != v_sorted[:-1])[0]
        if boundaries.size == 0:
            continue
        one_hot = np.zeros((n, n_classes))
        one_hot[np.arange(n), y_sub[order]] = 1.0
        cum = np.cumsum(one_hot, axis=0)
        left_counts = cum[boundaries]
        right_counts = total - left_counts
        n_left = (boundaries + 1).astype(np.float64)
        n_right = n - n_left
        g_left = 1.0 - np.sum((left_counts / n_left[:, None]) ** 2, axis=1)
        g_right = 1.0 - np.sum((right_counts / n_right[:, None]) ** 2, axis=1)
        weighted = (n_left * g_left + n_right * g_right) / n
        j = int(np.argmin(weighted))  # first minimum -> lowest threshold
        if weighted[j] < best_w:
            best_w = float(weighted[j])
            pos = boundaries[j]
            best = (int(f), float((v_sorted[pos] + v_sorted[pos + 1]) / 2.0))
    return best


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    max_depth: int,
    min_samples_split: int = 2,
    feature_rng: np.random.Generator | None = None,
    features_per_split: int | None = None,
) -> TreeArrays:
    """Grow a tree depth-first (left child before right).

    When ``features_per_split`` is set, each node evaluates a sorted random
    subset of features drawn from ``feature_rng``; the fixed node visit
    order makes those draws reproducible.
    """
    n_features = X.shape[1]
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    counts: list[np.ndarray] = []

    # stack entries: (sample indices, depth, parent position, is_left_child)
    stack: list[tuple[np.ndarray, int, int, bool]] = [
        (np.arange(X.shape[0]), 0, -1, False)
    ]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        pos = len(feature)
        if parent >= 0:
            if is_left:
                left[parent] = pos
            else:
                right[parent] = pos
        node_counts = np.bincount(y[idx], minlength=n_classes).astype(np.int64)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(node_counts)

        pure = node_counts.max() == idx.size
        if pure or depth >= max_depth or idx.size < min_samples_split:
            continue
        if features_per_split is not None and features_per_split < n_features:
            cand = np.sort(
                feature_rng.choice(n_features, size=features_per_split, replace=False)
            )
        else:
            cand = np.arange(n_features)
        split = _best_split(X, y, idx, cand, n_classes)
        if split is None:
            continue
        f, thr = split
        go_left = X[idx, f] <= thr
        feature[pos] = f
        threshold[pos] = thr
        # Push right first so the left subtree is built first.
        stack.append((idx[~go_left], depth + 1, pos, False))
        stack.append((idx[go_left], depth + 1, pos, True))

    return TreeArrays(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        counts=np.asarray(counts, dtype=np.int64),
    )


def tree_leaf_indices(tree: TreeArrays, X: np.ndarray) -> np.ndarray:
    """Vectorized root-to-leaf traversal; returns each row's leaf node."""
    node = np.zeros(X.shape[0], dtype=np.int64)
    while True:
        feat = tree.feature[node]
        active = feat >= 0
        if not active.any():
            return node
        rows = np.nonzero(active)[0]
        f = feat[rows]
        thr = tree.threshold[node[rows]]
        go_left = X[rows, f] <= thr
        node[rows] = np.where(go_left, tree.left[node[rows]], tree.right[node[rows]])


def predict_tree(tree: TreeArrays, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(predicted class codes, leaf class frequencies) for each row."""
    leaves = tree_leaf_indices(tree, X)
    leaf_counts = tree.counts[leaves].astype(np.float64)
    scores = leaf_counts / leaf_counts.sum(axis=1, keepdims=True)
    preds = np.argmax(leaf_counts, axis=1)  # tie -> lowest class index
    return preds.astype(np.int64), scores


@dataclass
class ForestParams:
    trees: list[TreeArrays]


def _tree_seed(seed: int, tree_index: int) -> int:
    return (int(seed) ^ tree_index) & 0xFFFFFFFFFFFFFFFF


def build_forest(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    n_trees: int,
    max_depth: int,
    min_samples_split: int,
    features_per_split: int,
    seed: int,
    workers: int = 1,
) -> ForestParams:
    """Bootstrap-bagged trees with per-split feature subsampling.

    Tree t derives its RNG from ``seed XOR t`` and draws its bootstrap
    sample before any split draws, so the forest is reproducible no matter
    how many worker threads build it.
    """
    n = X.shape[0]

    def _one(tree_index: int) -> TreeArrays:
        rng = np.random.default_rng(_tree_seed(seed, tree_index))
        bootstrap = rng.integers(0, n, size=n)
        return build_tree(
            X[bootstrap],
            y[bootstrap],
            n_classes,
            max_depth,
            min_samples_split,
            feature_rng=rng,
            features_per_split=features_per_split,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trees = list(pool.map(_one, range(n_trees)))
    else:
        trees = [_one(t) for t in range(n_trees)]
    return ForestParams(trees=trees)


def predict_forest(forest: ForestParams, X: np.ndarray, n_classes: int) -> tuple[np.ndarray, np.ndarray]:
    """(plurality class codes, vote fractions) over all trees."""
    votes = np.zeros((X.shape[0], n_classes))
    rows = np.arange(X.shape[0])
    for tree in forest.trees:
        preds, _ = predict_tree(tree, X)
        votes[rows, preds] += 1.0
    scores = votes / len(forest.trees)
    preds = np.argmax(votes, axis=1)  # tie -> lowest class index
    return preds.astype(np.int64), scores
