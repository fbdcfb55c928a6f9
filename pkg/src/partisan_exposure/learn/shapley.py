"""Exact interventional Shapley values by coalition enumeration.

The value of a coalition S is the model's mean prediction over background
rows with the features in S replaced by the explained row's values.
Enumerating all 2^M coalitions is exact, so attributions satisfy
efficiency up to floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import TooManyFeaturesError, ValidationError

MAX_FEATURES = 12


@dataclass(frozen=True)
class ShapExplanation:
    names: tuple
    phi: np.ndarray  # (n_rows, M)
    base: float
    prediction: np.ndarray

    def mean_abs(self):
        return mean_abs_shap(self.phi, self.names)


def _coalition_weights(m):
    # weight of a coalition of size s that excludes the scored feature
    return np.array([math.factorial(s) * math.factorial(m - s - 1) / math.factorial(m)
                     for s in range(m)])


def coalition_values(model, x, background):
    """v(S) for every bitmask S over the features (bit j = feature j)."""
    background = np.asarray(background, dtype=float)
    x = np.asarray(x, dtype=float).ravel()
    nb, m = background.shape
    masks = np.arange(1 << m)
    inside = (masks[:, None] >> np.arange(m)) & 1  # (2^M, M)
    stacked = np.where(inside[:, None, :].astype(bool), x[None, None, :], background[None, :, :])
    preds = np.asarray(model(stacked.reshape(-1, m)), dtype=float).reshape(len(masks), nb)
    return preds.mean(axis=1)


def shapley_from_values(values, m):
    weights = _coalition_weights(m)
    sizes = np.array([bin(s).count("1") for s in range(1 << m)])
    phi = np.zeros(m)
    masks = np.arange(1 << m)
    for j in range(m):
        bit = 1 << j
        without = masks[(masks & bit) == 0]
        phi[j] = float(np.sum(weights[sizes[without]] * (values[without | bit] - values[without])))
    return phi


def shapley_values(model, X, background, names=None) -> ShapExplanation:
    """Explain each row of ``X`` (or a single observation) against ``background``.

    ``model`` is any callable mapping an (n, M) array to n predictions.
    """
    background = np.asarray(background, dtype=float)
    if background.ndim != 2 or len(background) == 0:
        raise ValidationError("background must be a nonempty 2-D array")
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    m = background.shape[1]
    if X.shape[1] != m:
        raise ValidationError(f"rows have {X.shape[1]} features, background has {m}")
    if m > MAX_FEATURES:
        raise TooManyFeaturesError(
            f"exact enumeration over {m} features needs {2 ** m} coalitions; "
            f"reduce to at most {MAX_FEATURES} features"
        )
    names = tuple(names) if names is not None else tuple(f"x{j}" for j in range(m))
    phi = np.empty((len(X), m))
    base = float(np.mean(np.asarray(model(background), dtype=float)))
    for i, x in enumerate(X):
        v = coalition_values(model, x, background)
        phi[i] = shapley_from_values(v, m)
    prediction = np.asarray(model(X), dtype=float)
    return ShapExplanation(names, phi, base, prediction)


def mean_abs_shap(phi, names=None):
    """(name, mean |phi|) pairs sorted by decreasing impact."""
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    if phi.shape[0] == 0:
        raise ValidationError("need at least one explanation")
    names = tuple(names) if names is not None else tuple(f"x{j}" for j in range(phi.shape[1]))
    impact = np.abs(phi).mean(axis=0)
    order = sorted(range(len(names)), key=lambda j: (-impact[j], j))
    return [(names[j], float(impact[j])) for j in order]
