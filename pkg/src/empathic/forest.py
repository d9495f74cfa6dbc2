"""Bagged CART forests for binary {-1, +1} classification.

Trees are stored as flat arrays (``feature``, ``threshold``, ``left``,
``right``, ``value``) so prediction is a vectorised walk.  Each tree draws
from its own RNG stream seeded by ``(seed, tree_index)``, which makes the
forest independent of the order (or parallelism) in which trees are grown.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import TrainingError, ValidationError

LEAF = -1


@dataclass(frozen=True)
class Hyperparams:
    n_trees: int = 100
    max_depth: int = 8
    min_leaf: int = 2
    features_per_split: int | None = None  # None -> ceil(sqrt(n_features))

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValidationError("n_trees must be >= 1")
        if self.max_depth < 0 or self.min_leaf < 1:
            raise ValidationError("max_depth must be >= 0 and min_leaf >= 1")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValidationError("features_per_split must be >= 1")

    def resolved_features(self, n_features: int) -> int:
        if self.features_per_split is None:
            return max(1, math.ceil(math.sqrt(n_features)))
        return min(self.features_per_split, n_features)

    def to_dict(self) -> dict:
        return asdict(self)


class Tree:
    """An axis-aligned binary decision tree.

    Internal node ``i`` sends ``x`` left when ``x[feature[i]] <= threshold[i]``.
    Leaves have ``feature == -1`` and carry a class vote in ``value``.
    """

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.int64)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            feat = self.feature[node]
            inner = feat != LEAF
            if not inner.any():
                return self.value[node]
            r, n, f = rows[inner], node[inner], feat[inner]
            go_left = X[r, f] <= self.threshold[n]
            node[inner] = np.where(go_left, self.left[n], self.right[n])

    def to_nested(self, i: int = 0) -> dict:
        if self.feature[i] == LEAF:
            return {"leaf": int(self.value[i])}
        return {
            "feature": int(self.feature[i]),
            "threshold": float(self.threshold[i]),
            "left": self.to_nested(int(self.left[i])),
            "right": self.to_nested(int(self.right[i])),
        }

    @classmethod
    def from_nested(cls, root: dict, n_features: int) -> "Tree":
        cols = {k: [] for k in cls.__slots__}

        def visit(node) -> int:
            idx = len(cols["feature"])
            for k in cls.__slots__:
                cols[k].append(0)
            if "leaf" in node:
                if node["leaf"] not in (-1, 1):
                    raise ValidationError(f"leaf vote must be -1 or +1, got {node['leaf']!r}")
                cols["feature"][idx] = LEAF
                cols["value"][idx] = int(node["leaf"])
                return idx
            feat = node["feature"]
            if not isinstance(feat, int) or not 0 <= feat < n_features:
                raise ValidationError(f"tree references unknown feature index {feat!r}")
            cols["feature"][idx] = feat
            cols["threshold"][idx] = float(node["threshold"])
            cols["left"][idx] = visit(node["left"])
            cols["right"][idx] = visit(node["right"])
            return idx

        visit(root)
        return cls(**cols)

    def __eq__(self, other):
        return isinstance(other, Tree) and all(
            np.array_equal(getattr(self, k), getattr(other, k)) for k in self.__slots__
        )


def _majority(y: np.ndarray) -> int:
    # ties go to +1
    return 1 if 2 * np.count_nonzero(y == 1) >= len(y) else -1


def _best_split(X, y, features, min_leaf):
    """Lowest weighted Gini split over ``features``; None if no legal split."""
    n = len(y)
    best = None
    best_score = np.inf
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        pos = np.cumsum(y[order] == 1)
        # candidate cut after position i (left = [0..i]) where values differ
        i = np.arange(min_leaf - 1, n - min_leaf)
        if i.size == 0:
            continue
        i = i[xs[i] < xs[i + 1]]
        if i.size == 0:
            continue
        n_left = i + 1.0
        n_right = n - n_left
        p_left = pos[i] / n_left
        p_right = (pos[-1] - pos[i]) / n_right
        gini = n_left * 2 * p_left * (1 - p_left) + n_right * 2 * p_right * (1 - p_right)
        k = int(np.argmin(gini))
        if gini[k] < best_score:
            best_score = gini[k]
            cut = i[k]
            best = (int(f), 0.5 * (xs[cut] + xs[cut + 1]), best_score)
    return best


def grow_tree(X: np.ndarray, y: np.ndarray, params: Hyperparams, rng: np.random.Generator) -> Tree:
    n_features = X.shape[1]
    k = params.resolved_features(n_features)
    cols = {name: [] for name in Tree.__slots__}

    def new_node():
        for name in Tree.__slots__:
            cols[name].append(0)
        return len(cols["feature"]) - 1

    def leaf(idx, labels):
        cols["feature"][idx] = LEAF
        cols["value"][idx] = _majority(labels)

    # explicit stack keeps node numbering in depth-first pre-order
    root = new_node()
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        idx, rows, depth = stack.pop()
        labels = y[rows]
        n = len(rows)
        pos = np.count_nonzero(labels == 1)
        if depth >= params.max_depth or n < 2 * params.min_leaf or pos in (0, n):
            leaf(idx, labels)
            continue
        features = rng.choice(n_features, size=k, replace=False)
        split = _best_split(X[rows], labels, np.sort(features), params.min_leaf)
        parent = n * 2 * (pos / n) * (1 - pos / n)
        if split is None or split[2] >= parent - 1e-12:
            leaf(idx, labels)
            continue
        f, thr, _ = split
        mask = X[rows, f] <= thr
        cols["feature"][idx] = f
        cols["threshold"][idx] = thr
        left, right = new_node(), new_node()
        cols["left"][idx] = left
        cols["right"][idx] = right
        stack.append((right, rows[~mask], depth + 1))
        stack.append((left, rows[mask], depth + 1))
    return Tree(**cols)


def stratified_bootstrap(y: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Resample with replacement within each class, keeping class counts."""
    parts = []
    for cls in (-1, 1):
        members = np.flatnonzero(y == cls)
        parts.append(rng.choice(members, size=len(members), replace=True))
    return np.sort(np.concatenate(parts))


def tree_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def fit_forest(X, y, params: Hyperparams = Hyperparams(), seed: int = 0) -> list[Tree]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValidationError("X must be (n_samples, n_features) matching y")
    if not np.isin(y, (-1, 1)).all():
        raise ValidationError("labels must be -1 or +1")
    counts = {c: int(np.count_nonzero(y == c)) for c in (-1, 1)}
    if min(counts.values()) == 0:
        raise TrainingError(f"training data has a single class (counts {counts})")
    if min(counts.values()) < 2:
        raise TrainingError(f"need at least 2 examples per class (counts {counts})")
    trees = []
    for t in range(params.n_trees):
        rng = tree_rng(seed, t)
        rows = stratified_bootstrap(y, rng)
        trees.append(grow_tree(X[rows], y[rows], params, rng))
    return trees


def forest_votes(trees: list[Tree], X: np.ndarray) -> np.ndarray:
    """Sum of tree votes per row, in ``[-n_trees, n_trees]``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    total = np.zeros(len(X), dtype=np.int64)
    for tree in trees:
        total += tree.predict(X)
    return total


def forest_predict(trees: list[Tree], X: np.ndarray) -> np.ndarray:
    # an even split of votes resolves to +1
    return np.where(forest_votes(trees, X) >= 0, 1, -1)
