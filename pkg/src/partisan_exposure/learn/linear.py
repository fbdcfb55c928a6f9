"""Train/test splitting and elastic net by cyclic coordinate descent.

The objective, on standardized features and a centered response, is

    (1 / 2n) ||y - X b||^2 + alpha * (l1_ratio ||b||_1 + (1 - l1_ratio) / 2 ||b||^2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConvergenceError, ValidationError
from ..linalg import r_squared

DEFAULT_ALPHAS = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0)
DEFAULT_L1_RATIOS = (0.1, 0.3, 0.5, 0.7, 0.9, 1.0)


def train_test_split(n, ratio=0.7, seed=0, rng=None):
    """Seeded shuffle of ``range(n)`` into (train, test) index arrays.

    The training part has floor(ratio * n) rows.
    """
    if not 0.0 < ratio < 1.0:
        raise ValidationError(f"split ratio must lie in (0, 1), got {ratio}")
    if n < 2:
        raise ValidationError("need at least two rows to split")
    rng = np.random.default_rng(seed) if rng is None else rng
    perm = rng.permutation(n)
    # guard against 0.7 * 10 landing a hair under 7
    n_train = int(math.floor(ratio * n + 1e-9))
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def soft_threshold(z, gamma):
    return math.copysign(max(abs(z) - gamma, 0.0), z)


@dataclass(frozen=True)
class ElasticNetFit:
    intercept: float
    coef: np.ndarray  # on the original feature scale
    coef_std: np.ndarray  # on standardized features
    alpha: float
    l1_ratio: float
    n_iter: int
    train_r2: float
    x_mean: np.ndarray
    x_scale: np.ndarray
    objective_path: tuple = field(repr=False, default=())

    def predict(self, X):
        return self.intercept + np.asarray(X, dtype=float) @ self.coef

    def score(self, X, y):
        return r_squared(y, self.predict(X))


def enet_objective(Xs, yc, b, alpha, l1_ratio):
    r = yc - Xs @ b
    n = len(yc)
    return (float(r @ r) / (2 * n)
            + alpha * (l1_ratio * float(np.abs(b).sum())
                       + 0.5 * (1 - l1_ratio) * float(b @ b)))


def fit_elastic_net(y, X, alpha=1e-5, l1_ratio=0.1, tol=1e-8, max_iter=10000) -> ElasticNetFit:
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    if alpha < 0:
        raise ValidationError("alpha must be >= 0")
    if not 0.0 <= l1_ratio <= 1.0:
        raise ValidationError("l1_ratio must lie in [0, 1]")
    x_mean = X.mean(axis=0)
    x_scale = X.std(axis=0)
    if np.any(x_scale == 0):
        j = int(np.flatnonzero(x_scale == 0)[0])
        raise ValidationError(f"feature {j} has zero variance")
    Xs = (X - x_mean) / x_scale
    y_mean = y.mean()
    yc = y - y_mean

    l1 = alpha * l1_ratio
    denom = 1.0 + alpha * (1.0 - l1_ratio)
    b = np.zeros(p)
    r = yc.copy()
    path = [enet_objective(Xs, yc, b, alpha, l1_ratio)]
    cols = [Xs[:, j] for j in range(p)]

    def result(n_iter):
        coef = b / x_scale
        return ElasticNetFit(
            intercept=float(y_mean - x_mean @ coef),
            coef=coef,
            coef_std=b.copy(),
            alpha=float(alpha),
            l1_ratio=float(l1_ratio),
            n_iter=n_iter,
            train_r2=r_squared(y, y_mean + Xs @ b),
            x_mean=x_mean,
            x_scale=x_scale,
            objective_path=tuple(path),
        )

    for it in range(1, max_iter + 1):
        max_change = 0.0
        for j in range(p):
            old = b[j]
            # columns are standardized, so (1/n) x_j'x_j = 1
            z = float(cols[j] @ r) / n + old
            new = soft_threshold(z, l1) / denom
            if new != old:
                r -= cols[j] * (new - old)
                b[j] = new
                max_change = max(max_change, abs(new - old))
        path.append(enet_objective(Xs, yc, b, alpha, l1_ratio))
        if max_change < tol:
            return result(it)
    raise ConvergenceError(
        f"coordinate descent did not converge in {max_iter} sweeps", last=result(max_iter)
    )


@dataclass(frozen=True)
class GridSearchResult:
    best_alpha: float
    best_l1_ratio: float
    alphas: tuple
    l1_ratios: tuple
    cv_r2: np.ndarray  # (len(alphas), len(l1_ratios)) mean held-out R2
    fit: ElasticNetFit


def kfold_indices(n, k, seed=0, rng=None):
    if k < 2:
        raise ValidationError("need at least two folds")
    rng = np.random.default_rng(seed) if rng is None else rng
    folds = np.array_split(rng.permutation(n), k)
    if any(len(f) < 2 for f in folds):
        raise ValidationError(f"{n} rows cannot fill {k} folds with two rows each")
    return [np.sort(f) for f in folds]


def cv_grid_search(y, X, alphas=DEFAULT_ALPHAS, l1_ratios=DEFAULT_L1_RATIOS, k=5, seed=0,
                   rng=None, tol=1e-8, max_iter=10000) -> GridSearchResult:
    """k-fold grid search over (alpha, l1_ratio), maximizing mean held-out R2.

    Ties go to the smaller alpha, then the smaller l1_ratio. The winning
    cell is refitted on all rows.
    """
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    alphas = tuple(float(a) for a in alphas)
    l1_ratios = tuple(float(r) for r in l1_ratios)
    if not alphas or not l1_ratios:
        raise ValidationError("grid search needs nonempty alpha and l1_ratio grids")
    folds = kfold_indices(len(y), k, seed, rng)
    scores = np.empty((len(alphas), len(l1_ratios)))
    for a_i, a in enumerate(alphas):
        for r_i, l1 in enumerate(l1_ratios):
            fold_r2 = []
            for f in folds:
                train = np.setdiff1d(np.arange(len(y)), f, assume_unique=True)
                m = fit_elastic_net(y[train], X[train], a, l1, tol, max_iter)
                fold_r2.append(m.score(X[f], y[f]))
            scores[a_i, r_i] = float(np.mean(fold_r2))
    best = None
    for a_i in sorted(range(len(alphas)), key=alphas.__getitem__):
        for r_i in sorted(range(len(l1_ratios)), key=l1_ratios.__getitem__):
            if best is None or scores[a_i, r_i] > scores[best]:
                best = (a_i, r_i)
    fit = fit_elastic_net(y, X, alphas[best[0]], l1_ratios[best[1]], tol, max_iter)
    return GridSearchResult(alphas[best[0]], l1_ratios[best[1]], alphas, l1_ratios, scores, fit)
