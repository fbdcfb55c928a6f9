"""Seeded synthetic data: spatial-lag draws and a complete county fixture."""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .data import CountyTable, make_county_table
from .errors import NumericalError, ValidationError
from .spatial import SpatialWeights, haversine, knn_weights


def stage_rng(seed: int, label: str) -> np.random.Generator:
    """Independent generator for one named stage of a seeded run."""
    return np.random.default_rng([int(seed), zlib.crc32(label.encode("utf-8"))])


@dataclass(frozen=True)
class SyntheticSpec:
    side: int = 20
    rho: float = 0.5
    beta: tuple = (1.2,)
    sigma: float = 0.2
    k: int = 5
    seed: int = 0
    intercept: float = 1.0
    spacing: float = 0.25  # lattice step in degrees

    def __post_init__(self):
        if not abs(self.rho) < 1:
            raise ValidationError(f"|rho| must be < 1, got {self.rho}")
        if self.sigma < 0:
            raise ValidationError("sigma must be >= 0")
        if self.side < 2:
            raise ValidationError("lattice side must be >= 2")


@dataclass(frozen=True)
class SyntheticSar:
    counties: CountyTable
    W: SpatialWeights
    X: np.ndarray
    y: np.ndarray


def lattice_counties(side, spacing=0.25, origin=(38.0, -95.0), population=None, rucc=None):
    n = side * side
    i, j = np.divmod(np.arange(n), side)
    return make_county_table(
        [f"{c + 1:05d}" for c in range(n)],
        origin[0] + spacing * i,
        origin[1] + spacing * j,
        np.full(n, 10000.0) if population is None else population,
        np.ones(n, dtype=int) if rucc is None else rucc,
    )


def generate_sar(spec: SyntheticSpec) -> SyntheticSar:
    """Draw y = (I - rho W)^-1 (alpha + X beta + eps) on a square lattice."""
    counties = lattice_counties(spec.side, spec.spacing)
    W = knn_weights(counties, spec.k)
    n = len(counties)
    rng = np.random.default_rng(spec.seed)
    beta = np.asarray(spec.beta, dtype=float)
    X = rng.standard_normal((n, len(beta)))
    eps = spec.sigma * rng.standard_normal(n)
    A = (sparse.identity(n, format="csc") - spec.rho * W.matrix).tocsc()
    try:
        y = splu(A).solve(spec.intercept + X @ beta + eps)
    except RuntimeError as exc:
        raise NumericalError(f"I - rho W is singular: {exc}") from None
    return SyntheticSar(counties, W, X, y)


# --------------------------------------------------------------------------
# fixture

FIXTURE_CONTROLS = (
    "pct_hispanic", "pct_african_american", "pct_graduated", "pct_unemployed", "pct_urban",
)
FIXTURE_YEARS = (2008, 2012, 2016, 2020)


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(r) + "\n")


def _edges(path, fips, w):
    src, dst = np.nonzero(w)
    _write_csv(path, ("src_fips", "dst_fips", "weight"),
               ((fips[a], fips[b], _fmt(w[a, b])) for a, b in zip(src, dst)))


FIXTURE_CONFIG = """\
# Synthetic 100-county fixture
[inputs]
counties = counties.csv
votes = votes.csv
covariates = covariates.csv
covariate_unit = fraction
network.offline = edges_colocation.csv
network.online = edges_friendship.csv
network.commuting = edges_commuting.csv
kind.offline = colocation
kind.online = friendship
kind.commuting = commuting
normalize.online = population
normalize.commuting = population

[elections]
normal_vote_years = 2012,2016,2020
swing_window = 2012

[spatial]
k = 5,7,10

[exposure]
exclude_self = false

[elasticnet]
alphas = 1e-05,0.001,0.1
l1_ratios = 0.1,0.5,1.0
folds = 5
train_ratio = 0.7

[gbm]
n_trees = 100
learning_rate = 0.1
max_depth = 3
train_ratio = 0.7
background_max = 128

[run]
seed = 7
"""


def make_fixture(out_dir, seed=7, side=10, zero_diagonal=False) -> Path:
    """Write a complete, internally consistent synthetic input set.

    Votes, covariates and three networks (co-location as probabilities,
    friendship and commuting as raw counts) are derived from one latent
    spatial field so that exposures carry real signal.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = side * side
    grid = lattice_counties(side)
    W = knn_weights(grid, 5)
    A = (sparse.identity(n, format="csc") - 0.6 * W.matrix).tocsc()
    lu = splu(A)

    rng = stage_rng(seed, "fixture:latent")
    field = lu.solve(rng.standard_normal(n))
    field = (field - field.mean()) / field.std()
    urban = 1.0 / (1.0 + np.exp(-(1.5 * field + 0.3 * rng.standard_normal(n))))
    pop = np.round(np.exp(9.0 + 2.5 * urban + 0.4 * rng.standard_normal(n))) + 1000.0
    rucc = np.clip(1 + np.floor((1.0 - urban) * 9.0), 1, 9).astype(int)
    counties = make_county_table(grid.fips, grid.lat, grid.lon, pop, rucc)

    rng = stage_rng(seed, "fixture:votes")
    lean = 0.5 - 0.22 * np.tanh(field + 0.5 * rng.standard_normal(n))
    year_shift = {2008: -0.04, 2012: -0.02, 2016: 0.035, 2020: 0.01}
    third = {2008: 0.02, 2012: 0.02, 2016: 0.05, 2020: 0.025}
    vote_rows = []
    shares = {}
    for y in FIXTURE_YEARS:
        rep = np.clip(lean + year_shift[y] + 0.035 * rng.standard_normal(n), 0.05, 0.93)
        rep = np.round(rep, 6)
        dem = np.round(1.0 - rep - third[y] * (1 + 0.3 * rng.random(n)), 6)
        dem[dem == rep] -= 1e-6
        shares[y] = (dem, rep)
        for f, d, r in zip(counties.fips, dem, rep):
            vote_rows.append((f, str(y), _fmt(d), _fmt(r)))
    _write_csv(out / "votes.csv", ("fips", "year", "dem_share", "rep_share"), vote_rows)
    with open(out / "counties.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("fips,lat,lon,pop,rucc\n")
        for row in zip(counties.fips, counties.lat, counties.lon, counties.population, counties.rucc):
            fh.write(f"{row[0]},{_fmt(row[1])},{_fmt(row[2])},{int(row[3])},{int(row[4])}\n")

    dem_nv = np.mean([shares[y][0] for y in (2012, 2016, 2020)], axis=0)
    rep_nv = np.mean([shares[y][1] for y in (2012, 2016, 2020)], axis=0)

    rng = stage_rng(seed, "fixture:networks")
    d = haversine(counties.lat[:, None], counties.lon[:, None],
                  counties.lat[None, :], counties.lon[None, :])
    off = ~np.eye(n, dtype=bool)
    jitter = lambda: np.exp(0.2 * rng.standard_normal((n, n)))
    coloc = np.where(off & (d < 70.0), np.exp(-d / 20.0), 0.0) * jitter()
    coloc_ext = coloc.sum(axis=1)
    np.fill_diagonal(coloc, coloc_ext / (0.27 * np.exp(0.3 * rng.standard_normal(n))))
    coloc *= 1e-3

    friend_p = np.where(off, np.exp(-d / 120.0) + 0.05, 0.0) * jitter()
    friend_ext = friend_p.sum(axis=1)
    np.fill_diagonal(friend_p, friend_ext / (1.2 * np.exp(0.3 * rng.standard_normal(n))))
    friend_counts = np.round(friend_p * 1e-4 * np.outer(pop, pop))

    commute = np.where(off & (d < 45.0), np.exp(-d / 15.0), 0.0) * jitter()
    commute *= (0.3 * pop / np.maximum(commute.sum(axis=1), 1e-12))[:, None]
    np.fill_diagonal(commute, 0.7 * pop)
    commute = np.round(commute)

    if zero_diagonal:
        for w in (coloc, friend_counts, commute):
            np.fill_diagonal(w, 0.0)
    _edges(out / "edges_colocation.csv", counties.fips, coloc)
    _edges(out / "edges_friendship.csv", counties.fips, friend_counts)
    _edges(out / "edges_commuting.csv", counties.fips, commute)

    rng = stage_rng(seed, "fixture:covariates")
    noise = lambda s: s * rng.standard_normal(n)
    cov = {
        "pct_hispanic": np.clip(0.08 + 0.05 * urban + noise(0.04), 0.0, 1.0),
        "pct_african_american": np.clip(0.05 + 0.25 * (dem_nv - 0.3) + noise(0.03), 0.0, 1.0),
        "pct_graduated": np.clip(0.15 + 0.25 * urban + noise(0.04), 0.0, 1.0),
        "pct_unemployed": np.clip(0.05 + 0.03 * (1 - urban) + noise(0.01), 0.0, 1.0),
        "pct_urban": np.clip(0.1 + 0.8 * urban + noise(0.05), 0.0, 1.0),
    }
    p_dem = np.clip(dem_nv + noise(0.03), 0.02, 0.95)
    p_rep = np.clip(rep_nv + noise(0.03), 0.02, 0.97 - p_dem)
    homophily = 0.6 + 0.3 * rng.random(n)
    rep_given_dem = np.clip(p_rep * homophily, 0.0, 1.0)
    # Bayes-consistent partner with multiplicative noise
    dem_given_rep = np.clip(rep_given_dem * p_dem / p_rep * np.exp(noise(0.05)), 1e-3, 1.0)
    cov.update(res_rep_given_dem=rep_given_dem, res_dem_given_rep=dem_given_rep,
               res_p_dem=p_dem, res_p_rep=p_rep)
    names = list(cov)
    _write_csv(out / "covariates.csv", ["fips"] + names,
               ([f] + [_fmt(round(float(cov[c][i]), 6)) for c in names]
                for i, f in enumerate(counties.fips)))
    (out / "config.ini").write_text(FIXTURE_CONFIG.replace("seed = 7", f"seed = {seed}"),
                                    encoding="utf-8")
    return out
