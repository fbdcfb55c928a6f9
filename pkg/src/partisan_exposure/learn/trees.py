"""Least-squares gradient boosting with exact greedy regression trees."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..linalg import r_squared

DEFAULT_N_TREES = 300
DEFAULT_LEARNING_RATE = 0.1
DEFAULT_MAX_DEPTH = 3


@dataclass(frozen=True)
class RegressionTree:
    """Flat binary tree; ``feature[i] == -1`` marks a leaf.

    Rows with ``x[feature] <= threshold`` go left.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def depth(self) -> int:
        def walk(i):
            if self.feature[i] < 0:
                return 0
            return 1 + max(walk(self.left[i]), walk(self.right[i]))
        return walk(0)

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        node = np.zeros(len(X), dtype=int)
        active = self.feature[node] >= 0
        while np.any(active):
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active[idx] = self.feature[node[idx]] >= 0
        return self.value[node]


def _best_split(X, r, rows):
    """Best (gain, feature, threshold) over all features, or None."""
    xr = X[rows]
    rr = r[rows]
    n = len(rows)
    total = rr.sum()
    base = total * total / n
    best = None
    for j in range(X.shape[1]):
        order = np.argsort(xr[:, j], kind="stable")
        xs = xr[order, j]
        cs = np.cumsum(rr[order])
        # candidate cut after position i where xs[i] < xs[i + 1]
        cut = np.flatnonzero(xs[:-1] < xs[1:])
        if len(cut) == 0:
            continue
        nl = cut + 1.0
        sl = cs[cut]
        sr = total - sl
        gain = sl * sl / nl + sr * sr / (n - nl) - base
        i = int(np.argmax(gain))
        g = float(gain[i])
        if g > 1e-12 * max(1.0, float(rr @ rr)) and (best is None or g > best[0]):
            c = cut[i]
            thr = 0.5 * (xs[c] + xs[c + 1])
            # midpoint can round up onto the right value
            if not thr < xs[c + 1]:
                thr = xs[c]
            best = (g, j, float(thr))
    return best


def fit_tree(X, r, max_depth, rows=None) -> RegressionTree:
    X = np.asarray(X, dtype=float)
    r = np.asarray(r, dtype=float)
    rows = np.arange(len(r)) if rows is None else rows
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(r[idx].mean()))
        return len(feature) - 1

    root = new_node(rows)
    stack = [(root, rows, 0)]
    while stack:
        node, idx, depth = stack.pop()
        if depth >= max_depth or len(idx) < 2:
            continue
        split = _best_split(X, r, idx)
        if split is None:
            continue
        _, j, thr = split
        mask = X[idx, j] <= thr
        li = new_node(idx[mask])
        ri = new_node(idx[~mask])
        feature[node], threshold[node], left[node], right[node] = j, thr, li, ri
        stack.append((ri, idx[~mask], depth + 1))
        stack.append((li, idx[mask], depth + 1))
    return RegressionTree(
        np.array(feature, dtype=int), np.array(threshold), np.array(left, dtype=int),
        np.array(right, dtype=int), np.array(value),
    )


@dataclass(frozen=True)
class GbmModel:
    base: float
    trees: tuple
    learning_rate: float
    max_depth: int
    n_features: int
    train_loss: tuple  # training MSE after the base and after each tree

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def used_features(self) -> frozenset:
        return frozenset(int(f) for t in self.trees for f in t.feature if f >= 0)

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        out = np.full(len(X), self.base)
        for t in self.trees:
            out += self.learning_rate * t.predict(X)
        return out

    __call__ = predict

    def score(self, X, y):
        return r_squared(y, self.predict(X))


def fit_gbm(y, X, n_trees=DEFAULT_N_TREES, learning_rate=DEFAULT_LEARNING_RATE,
            max_depth=DEFAULT_MAX_DEPTH, seed=0, subsample=1.0) -> GbmModel:
    """Least-squares boosting: each tree fits the current residuals.

    ``subsample < 1`` draws a seeded row sample per tree (stochastic
    boosting); the default uses every row and no randomness. A response
    that is already fitted exactly stops adding trees.
    """
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = len(y)
    if n < 2:
        raise ValidationError("boosting needs at least two rows")
    if max_depth < 1:
        raise ValidationError("max_depth must be >= 1")
    if not 0.0 < subsample <= 1.0:
        raise ValidationError("subsample must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    base = float(y.mean())
    pred = np.full(n, base)
    resid = y - pred
    losses = [float(resid @ resid) / n]
    trees = []
    for _ in range(n_trees):
        if not np.any(resid) or learning_rate == 0.0:
            break
        rows = None
        if subsample < 1.0:
            rows = np.sort(rng.choice(n, size=max(2, int(subsample * n)), replace=False))
        tree = fit_tree(X, resid, max_depth, rows)
        pred = pred + learning_rate * tree.predict(X)
        resid = y - pred
        trees.append(tree)
        losses.append(float(resid @ resid) / n)
    return GbmModel(base, tuple(trees), float(learning_rate), int(max_depth), X.shape[1],
                    tuple(losses))
