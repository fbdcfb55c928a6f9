"""Least-squares kernel shared by OLS, SAR, dominance analysis and VIF."""

import numpy as np

from .errors import SingularDesignError

# |R_jj| below this fraction of the largest |R_ii| counts as rank deficient.
RANK_TOL = 1e-10


def qr_solve(X, y, label="design"):
    """Solve min ||X b - y|| via Householder QR.

    Returns ``(coef, r_inv)`` where ``r_inv`` is the inverse of the upper
    triangular factor, so ``(X'X)^-1 = r_inv @ r_inv.T``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    if n < k:
        raise SingularDesignError(f"{label}: {n} rows for {k} columns", subset=label)
    q, r = np.linalg.qr(X, mode="reduced")
    d = np.abs(np.diag(r))
    if k and (d.max() == 0 or d.min() < RANK_TOL * d.max()):
        raise SingularDesignError(f"{label}: design matrix is rank deficient", subset=label)
    coef = np.linalg.solve(r, q.T @ y) if k else np.zeros((0,) + y.shape[1:])
    r_inv = np.linalg.solve(r, np.eye(k)) if k else np.zeros((0, 0))
    return coef, r_inv


def add_intercept(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return np.column_stack([np.ones(len(X)), X])


def r_squared(y, fitted):
    """1 - RSS/TSS; defined as 0 when y has no variance."""
    y = np.asarray(y, dtype=float)
    tss = float(np.sum((y - y.mean()) ** 2))
    if tss == 0.0:
        return 0.0
    return 1.0 - float(np.sum((y - fitted) ** 2)) / tss
