"""Two-sample t tests, Pearson correlation and variance inflation factors.

Student-t tails use the lower tail of the distribution directly, so the
very small p-values (1e-90 and below) that large county samples produce
are not lost to cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DegenerateVarianceError, InfiniteVifError, ValidationError


def t_two_sided_p(t, df) -> float:
    """P(|T| >= |t|) for Student's t with (possibly fractional) df."""
    if df <= 0:
        raise ValidationError("degrees of freedom must be positive")
    if math.isnan(t):
        return math.nan
    return min(1.0, 2.0 * float(special.stdtr(df, -abs(t))))


def t_sf(t, df) -> float:
    """Upper tail P(T > t)."""
    half = 0.5 * t_two_sided_p(t, df)
    return half if t >= 0 else 1.0 - half


def significance_stars(p) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return "ns"


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class

    t_statistic: float
    df: float
    p_value: float

    @property
    def stars(self) -> str:
        return significance_stars(self.p_value)


def _sample(a, name):
    a = np.asarray(a, dtype=float).ravel()
    if len(a) < 2:
        raise ValidationError(f"sample {name} needs at least two observations")
    return a


def t_test_pooled(a, b) -> TestResult:
    """Classic equal-variance two-sample t test."""
    a, b = _sample(a, "a"), _sample(b, "b")
    na, nb = len(a), len(b)
    diff = a.mean() - b.mean()
    df = na + nb - 2
    sp2 = ((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1)) / df
    if sp2 == 0.0:
        if diff == 0.0:
            return TestResult(0.0, float(df), 1.0)
        raise DegenerateVarianceError("zero pooled variance with unequal means")
    t = diff / math.sqrt(sp2 * (1.0 / na + 1.0 / nb))
    return TestResult(float(t), float(df), t_two_sided_p(t, df))


def t_test_welch(a, b) -> TestResult:
    """Welch's unequal-variance t test with Welch-Satterthwaite df."""
    a, b = _sample(a, "a"), _sample(b, "b")
    na, nb = len(a), len(b)
    va, vb = a.var(ddof=1) / na, b.var(ddof=1) / nb
    if va == 0.0 or vb == 0.0:
        raise DegenerateVarianceError("Welch test needs positive variance in both samples")
    se2 = va + vb
    df = se2 * se2 / (va * va / (na - 1) + vb * vb / (nb - 1))
    t = (a.mean() - b.mean()) / math.sqrt(se2)
    return TestResult(float(t), float(df), t_two_sided_p(t, df))


def pearson_r(x, y) -> float:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if len(x) != len(y) or len(x) < 2:
        raise ValidationError("pearson_r needs two equal-length vectors of length >= 2")
    xc, yc = x - x.mean(), y - y.mean()
    sx, sy = math.sqrt(xc @ xc), math.sqrt(yc @ yc)
    if sx == 0.0 or sy == 0.0:
        raise DegenerateVarianceError("pearson_r of a constant vector")
    return float(np.clip((xc @ yc) / (sx * sy), -1.0, 1.0))


def vif(X, names=None) -> dict:
    """Variance inflation factor of every column against all the others."""
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    names = list(names) if names is not None else [f"x{j}" for j in range(p)]
    if n <= p:
        raise ValidationError(f"VIF needs more rows ({n}) than features ({p})")
    out = {}
    for j in range(p):
        target = X[:, j]
        others = np.column_stack([np.ones(n), np.delete(X, j, axis=1)])
        coef, *_ = np.linalg.lstsq(others, target, rcond=None)
        resid = target - others @ coef
        tss = float(np.sum((target - target.mean()) ** 2))
        if tss == 0.0:
            raise InfiniteVifError(names[j])
        r2 = 1.0 - float(resid @ resid) / tss
        if r2 >= 1.0 - 1e-12:
            raise InfiniteVifError(names[j])
        out[names[j]] = 1.0 / (1.0 - r2)
    return out
