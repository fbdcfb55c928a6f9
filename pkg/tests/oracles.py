"""Independent reference implementations used only by the tests."""

from itertools import combinations

import numpy as np


def r2_lstsq(y, X, cols):
    if not cols:
        return 0.0
    A = np.column_stack([np.ones(len(y))] + [X[:, c] for c in cols])
    beta, *_ = np.linalg.lstsq(A, y, rcond=None)
    e = y - A @ beta
    return 1.0 - (e @ e) / np.sum((y - y.mean()) ** 2)


def brute_force_dominance(y, X):
    """Dominance statistics straight from the subset definitions."""
    n, p = X.shape
    r2 = {}
    for s in range(p + 1):
        for sub in combinations(range(p), s):
            r2[sub] = r2_lstsq(y, X, list(sub))
    out = {"individual": [], "interactional": [], "average_partial": [], "total": []}
    for j in range(p):
        others = [c for c in range(p) if c != j]
        level_means = []
        for s in range(p):
            incs = [r2[tuple(sorted(S + (j,)))] - r2[S] for S in combinations(others, s)]
            level_means.append(np.mean(incs))
        out["individual"].append(level_means[0])
        out["interactional"].append(level_means[-1])
        out["average_partial"].append(np.mean(level_means[1:-1]) if p >= 3 else np.nan)
        out["total"].append(np.mean(level_means))
    out = {k: np.array(v) for k, v in out.items()}
    out["full"] = r2[tuple(range(p))]
    return out


def shapley_by_permutations(f, x, background):
    """Shapley values by averaging marginal contributions over all orderings."""
    from itertools import permutations

    m = len(x)

    def v(S):
        Z = background.copy()
        for j in S:
            Z[:, j] = x[j]
        return float(np.mean(f(Z)))

    phi = np.zeros(m)
    perms = list(permutations(range(m)))
    for order in perms:
        S = []
        for j in order:
            before = v(S)
            S.append(j)
            phi[j] += v(S) - before
    return phi / len(perms)
