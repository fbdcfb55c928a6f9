"""Dominance analysis over all 2^p predictor subsets.

For predictor x and a subset S of the other predictors, the incremental
contribution is R2(S + x) - R2(S). Averaging those increments first within
each subset size and then across sizes gives the four reported statistics:

* individual: increment over the empty model
* interactional: increment over the model with every other predictor
* average partial: mean of the per-size means for sizes 1 .. p-2
* total: mean of the per-size means for sizes 0 .. p-1

Totals sum to the full-model R2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularDesignError, TooManyPredictorsError, ValidationError
from .linalg import RANK_TOL

MAX_PREDICTORS = 20


@dataclass(frozen=True)
class DominanceReport:
    names: tuple
    individual: np.ndarray
    interactional: np.ndarray
    average_partial: np.ndarray  # NaN when p < 3
    total: np.ndarray
    percent: np.ndarray
    full_model_r2: float
    n_models: int

    @property
    def p(self) -> int:
        return len(self.names)

    def rows(self):
        """Predictor rows in descending order of total dominance."""
        order = sorted(range(self.p), key=lambda j: (-self.total[j], j))
        for j in order:
            yield (self.names[j], self.interactional[j], self.individual[j],
                   self.average_partial[j], self.total[j], self.percent[j])


def combine_dominance_levels(individual, average_partial, interactional, p):
    """Total dominance from the three level statistics when p >= 3."""
    if p < 3:
        raise ValidationError("combining levels needs p >= 3 (no intermediate sizes below)")
    return (individual + (p - 2) * average_partial + interactional) / p


def percent_relative_importance(totals):
    totals = np.asarray(totals, dtype=float)
    return totals / totals.sum() * 100.0


def subset_r2(Xc, yc, tss, cols, names=None):
    """R2 of the intercept model on ``cols``; inputs are already centered.

    All-zero centered columns carry no information and are skipped; any
    other rank deficiency raises naming the subset.
    """
    if not cols:
        return 0.0
    sub = Xc[:, cols]
    keep = np.any(sub != 0.0, axis=0)
    sub = sub[:, keep]
    if sub.shape[1] == 0:
        return 0.0
    q, r = np.linalg.qr(sub, mode="reduced")
    d = np.abs(np.diag(r))
    if sub.shape[0] <= sub.shape[1] or d.min() < RANK_TOL * d.max():
        label = [names[c] for c in cols] if names else list(cols)
        raise SingularDesignError(f"sub-model {label} is rank deficient", subset=tuple(label))
    proj = q.T @ yc
    return float(proj @ proj) / tss


def dominance_analysis(y, X, names=None) -> DominanceReport:
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    names = tuple(names) if names is not None else tuple(f"x{j}" for j in range(1, p + 1))
    if len(names) != p:
        raise ValidationError(f"{len(names)} names for {p} predictors")
    if p < 1:
        raise ValidationError("dominance analysis needs at least one predictor")
    if p > MAX_PREDICTORS:
        raise TooManyPredictorsError(
            f"{p} predictors means {2 ** p} sub-models; the cap is {MAX_PREDICTORS}"
        )
    if len(y) != n:
        raise ValidationError(f"y has {len(y)} rows, X has {n}")
    yc = y - y.mean()
    tss = float(yc @ yc)
    if tss == 0.0:
        raise ValidationError("response has zero variance")
    Xc = X - X.mean(axis=0)

    n_models = 1 << p
    r2 = np.empty(n_models)
    for mask in range(n_models):
        cols = [j for j in range(p) if mask >> j & 1]
        r2[mask] = subset_r2(Xc, yc, tss, cols, names)

    masks = np.arange(n_models)
    sizes = np.array([bin(m).count("1") for m in range(n_models)])
    level_means = np.empty((p, p))
    for j in range(p):
        bit = 1 << j
        base = masks[(masks & bit) == 0]  # ascending bitmask order
        delta = r2[base | bit] - r2[base]
        sums = np.bincount(sizes[base], weights=delta, minlength=p)
        counts = np.bincount(sizes[base], minlength=p)
        level_means[j] = sums / counts

    individual = level_means[:, 0].copy()
    interactional = level_means[:, p - 1].copy()
    if p >= 3:
        average_partial = level_means[:, 1:p - 1].mean(axis=1)
    else:
        average_partial = np.full(p, np.nan)
    total = level_means.mean(axis=1)
    return DominanceReport(
        names=names,
        individual=individual,
        interactional=interactional,
        average_partial=average_partial,
        total=total,
        percent=percent_relative_importance(total),
        full_model_r2=float(r2[n_models - 1]),
        n_models=n_models,
    )
