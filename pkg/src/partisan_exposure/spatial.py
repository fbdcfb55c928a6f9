"""k-nearest-neighbour spatial weights, OLS and ML spatial lag regression.

The spatial lag model is y = rho W y + alpha + X beta + eps. It is fitted
by maximizing the log-likelihood concentrated in rho,

    L(rho) = -n/2 [ln(2 pi) + 1] - n/2 ln(e(rho)'e(rho) / n) + ln|I - rho W|,

with e(rho) = e_O - rho e_L, the residuals of two auxiliary regressions of
y and Wy on X. The log-Jacobian comes from a sparse LU factorization.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .data import CountyTable
from .errors import ConvergenceError, NumericalError, ValidationError
from .linalg import add_intercept, qr_solve, r_squared
from .stats import t_two_sided_p

log = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0088
RHO_EPS = 1e-6
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def haversine(lat1, lon1, lat2, lon2):
    """Great-circle distance in km between points given in degrees."""
    lat1, lon1, lat2, lon2 = map(np.radians, (lat1, lon1, lat2, lon2))
    a = (np.sin((lat2 - lat1) / 2.0) ** 2
         + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2.0) ** 2)
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


@dataclass(frozen=True)
class SpatialWeights:
    fips: tuple
    matrix: sparse.csr_matrix
    k: int
    metric: str = "haversine"

    def __len__(self):
        return len(self.fips)

    def lag(self, v):
        return self.matrix @ np.asarray(v, dtype=float)


def knn_weights(counties: CountyTable, k: int, chunk=1024) -> SpatialWeights:
    """Row-standardized k-NN weights on centroid great-circle distance.

    Exact distance ties are broken by ascending fips.
    """
    n = len(counties)
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    if k >= n:
        raise ValidationError(f"k={k} needs more than {k} counties, have {n}")
    order = np.argsort(np.array(counties.fips), kind="stable")
    lat = counties.lat[order]
    lon = counties.lon[order]
    if len({(a, b) for a, b in zip(lat, lon)}) < n:
        log.warning("duplicate centroids present; neighbour ties resolved by fips")
    cols = np.empty((n, k), dtype=int)
    for start in range(0, n, chunk):
        rows = np.arange(start, min(start + chunk, n))
        d = haversine(lat[rows, None], lon[rows, None], lat[None, :], lon[None, :])
        d[np.arange(len(rows)), rows] = np.inf
        cols[rows] = np.argsort(d, axis=1, kind="stable")[:, :k]
    # map back from fips-sorted positions to table positions
    inv_rows = np.repeat(order, k)
    inv_cols = order[cols.ravel()]
    m = sparse.csr_matrix(
        (np.full(n * k, 1.0 / k), (inv_rows, inv_cols)), shape=(n, n)
    )
    m.sort_indices()
    return SpatialWeights(counties.fips, m, int(k))


def _as_sparse(W):
    if isinstance(W, SpatialWeights):
        W = W.matrix
    return sparse.csr_matrix(W, dtype=float)


# --------------------------------------------------------------------------
# OLS


@dataclass(frozen=True)
class OlsFit:
    names: tuple
    coef: np.ndarray
    se: np.ndarray
    t: np.ndarray
    p: np.ndarray
    r2: float
    loglik: float
    aic: float
    n: int
    k_params: int
    sigma2: float
    fitted: np.ndarray

    @property
    def intercept(self) -> float:
        return float(self.coef[0])

    @property
    def slopes(self) -> np.ndarray:
        return self.coef[1:]


def _names(X, names):
    p = 1 if np.ndim(X) == 1 else np.shape(X)[1]
    if names is None:
        names = [f"x{j}" for j in range(1, p + 1)]
    if len(names) != p:
        raise ValidationError(f"{len(names)} names for {p} regressors")
    return ("intercept",) + tuple(names)


def fit_ols(y, X, names=None) -> OlsFit:
    """OLS with an intercept added to ``X``.

    The log-likelihood uses the ML variance RSS/n; standard errors use
    RSS/(n - k); AIC counts the coefficients plus the error variance.
    """
    y = np.asarray(y, dtype=float).ravel()
    Xd = add_intercept(X)
    n, kc = Xd.shape
    if len(y) != n:
        raise ValidationError(f"y has {len(y)} rows, X has {n}")
    if n <= kc:
        raise ValidationError(f"OLS needs more observations ({n}) than coefficients ({kc})")
    coef, r_inv = qr_solve(Xd, y, "OLS design")
    fitted = Xd @ coef
    resid = y - fitted
    rss = float(resid @ resid)
    s2 = rss / (n - kc)
    se = np.sqrt(s2 * np.sum(r_inv * r_inv, axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = coef / se
        loglik = -0.5 * n * (math.log(2.0 * math.pi) + 1.0 + np.log(rss / n))
    pvals = np.array([t_two_sided_p(float(v), n - kc) for v in t])
    k_params = kc + 1
    return OlsFit(
        names=_names(X, names),
        coef=coef,
        se=se,
        t=t,
        p=pvals,
        r2=r_squared(y, fitted),
        loglik=float(loglik),
        aic=float(2 * k_params - 2 * loglik),
        n=n,
        k_params=k_params,
        sigma2=rss / n,
        fitted=fitted,
    )


# --------------------------------------------------------------------------
# spatial lag


def _parity(perm) -> int:
    seen = np.zeros(len(perm), dtype=bool)
    cycles = 0
    for i in range(len(perm)):
        if not seen[i]:
            cycles += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
    return (len(perm) - cycles) % 2


def log_det_profile(W, rho) -> float:
    """ln|I - rho W| from a sparse LU factorization with partial pivoting."""
    rho = float(rho)
    if rho == 0.0:
        return 0.0
    Ws = _as_sparse(W)
    n = Ws.shape[0]
    A = (sparse.identity(n, format="csc") - rho * Ws).tocsc()
    try:
        lu = splu(A)
    except RuntimeError as exc:
        raise NumericalError(f"I - {rho} W is singular: {exc}") from None
    diag = lu.U.diagonal()
    if np.any(diag == 0):
        raise NumericalError(f"I - {rho} W is singular")
    negatives = int(np.sum(diag < 0)) + _parity(lu.perm_r) + _parity(lu.perm_c)
    if negatives % 2:
        raise NumericalError(f"det(I - {rho} W) is negative; rho is infeasible")
    return float(np.sum(np.log(np.abs(diag))))


@dataclass(frozen=True)
class SarFit:
    names: tuple
    rho: float
    rho_se: float
    coef: np.ndarray
    se: np.ndarray
    sigma2: float
    r2: float
    r2_variance_ratio: float
    loglik: float
    aic: float
    n: int
    k_params: int
    iterations: int

    @property
    def intercept(self) -> float:
        return float(self.coef[0])

    @property
    def slopes(self) -> np.ndarray:
        return self.coef[1:]

    @property
    def z(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.coef / self.se

    @property
    def p(self) -> np.ndarray:
        return np.array([_normal_two_sided(v) for v in self.z])

    @property
    def rho_p(self) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            return _normal_two_sided(np.float64(self.rho) / self.rho_se)


def _normal_two_sided(z) -> float:
    if math.isnan(z):
        return math.nan
    return math.erfc(abs(z) / math.sqrt(2.0))


def golden_section_max(f, lo, hi, tol=1e-9, max_iter=200):
    """Maximize a unimodal ``f`` on [lo, hi]; returns (argmax, iterations)."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for it in range(1, max_iter + 1):
        if b - a < tol:
            return 0.5 * (a + b), it
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    raise ConvergenceError(
        f"golden-section search did not reach tolerance {tol} in {max_iter} iterations",
        last=0.5 * (a + b),
    )


def sar_loglik(theta, y, Wy, Xd, logdet):
    """Full spatial-lag log-likelihood at theta = (rho, coefs..., sigma2)."""
    rho, coef, s2 = theta[0], theta[1:-1], theta[-1]
    if s2 <= 0:
        return -np.inf
    e = y - rho * Wy - Xd @ coef
    n = len(y)
    return -0.5 * n * math.log(2.0 * math.pi * s2) - float(e @ e) / (2.0 * s2) + logdet(rho)


def numerical_hessian(f, theta, rel_step=1e-4, min_step=1e-6, steps=None):
    theta = np.asarray(theta, dtype=float)
    m = len(theta)
    h = np.maximum(rel_step * np.abs(theta), min_step) if steps is None else np.asarray(steps)
    f0 = f(theta)
    H = np.empty((m, m))

    def shifted(i, si, j=None, sj=0.0):
        t = theta.copy()
        t[i] += si
        if j is not None:
            t[j] += sj
        return f(t)

    for i in range(m):
        H[i, i] = (shifted(i, h[i]) - 2.0 * f0 + shifted(i, -h[i])) / (h[i] * h[i])
        for j in range(i):
            v = (shifted(i, h[i], j, h[j]) - shifted(i, h[i], j, -h[j])
                 - shifted(i, -h[i], j, h[j]) + shifted(i, -h[i], j, -h[j]))
            H[i, j] = H[j, i] = v / (4.0 * h[i] * h[j])
    return H


def fit_spatial_lag(y, X, W, names=None, tol=1e-9, max_iter=200) -> SarFit:
    """Maximum-likelihood spatial lag model by concentrated likelihood.

    ``W`` may be a SpatialWeights instance or any (n, n) matrix. Standard
    errors come from a central-difference Hessian of the full likelihood.
    """
    y = np.asarray(y, dtype=float).ravel()
    Xd = add_intercept(X)
    n, kc = Xd.shape
    Ws = _as_sparse(W)
    if Ws.shape != (n, n):
        raise ValidationError(f"W has shape {Ws.shape}, expected {(n, n)}")
    if n <= kc + 1:
        raise ValidationError(f"spatial lag needs more than {kc + 1} observations")
    Wy = np.asarray(Ws @ y).ravel()
    b_o, _ = qr_solve(Xd, y, "SAR design")
    b_l, _ = qr_solve(Xd, Wy, "SAR design")
    e_o = y - Xd @ b_o
    e_l = Wy - Xd @ b_l

    cache = {}

    def logdet(rho):
        rho = float(rho)
        if rho not in cache:
            cache[rho] = log_det_profile(Ws, rho)
        return cache[rho]

    const = -0.5 * n * (math.log(2.0 * math.pi) + 1.0)

    def concentrated(rho):
        e = e_o - rho * e_l
        ee = max(float(e @ e), 1e-300)
        return const - 0.5 * n * math.log(ee / n) + logdet(rho)

    rho, iters = golden_section_max(concentrated, -1.0 + RHO_EPS, 1.0 - RHO_EPS, tol, max_iter)
    coef = b_o - rho * b_l
    e = e_o - rho * e_l
    s2 = float(e @ e) / n
    loglik = concentrated(rho)

    theta = np.concatenate([[rho], coef, [s2]])
    se_all = np.full(len(theta), np.nan)
    if s2 > 1e-14 * max(float(np.var(y)), 1e-300):
        steps = np.maximum(1e-4 * np.abs(theta), 1e-6)
        steps[-1] = 1e-4 * s2  # sigma2 must stay positive
        H = numerical_hessian(lambda t: sar_loglik(t, y, Wy, Xd, logdet), theta, steps=steps)
        try:
            if not np.all(np.isfinite(H)):
                raise np.linalg.LinAlgError("non-finite Hessian")
            cov = np.linalg.inv(-H)
            with np.errstate(invalid="ignore"):
                se_all = np.sqrt(np.diag(cov))
        except np.linalg.LinAlgError:
            log.warning("spatial lag Hessian is singular; standard errors unavailable")
    else:
        log.warning("spatial lag fit is exact (zero residual variance); no standard errors")

    A = (sparse.identity(n, format="csc") - rho * Ws).tocsc()
    yhat = splu(A).solve(Xd @ coef)
    yc, hc = y - y.mean(), yhat - yhat.mean()
    denom = float(yc @ yc) * float(hc @ hc)
    r2 = float((yc @ hc) ** 2 / denom) if denom > 0 else 0.0
    k_params = kc + 2
    return SarFit(
        names=_names(X, names),
        rho=float(rho),
        rho_se=float(se_all[0]),
        coef=coef,
        se=se_all[1:-1],
        sigma2=s2,
        r2=r2,
        r2_variance_ratio=r_squared(y, yhat),
        loglik=float(loglik),
        aic=float(2 * k_params - 2 * loglik),
        n=n,
        k_params=k_params,
        iterations=iters,
    )
