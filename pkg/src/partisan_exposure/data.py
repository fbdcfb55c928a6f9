"""County records, connectivity networks, election panels and covariates.

All loaders read UTF-8, comma-delimited CSV with a header row, parse numbers
with a dot decimal separator regardless of locale, and validate every row
eagerly. Row numbers in error messages count data rows from 1 (the header
is not counted).
"""

from __future__ import annotations

import csv
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import sparse

from .errors import (
    DuplicateKeyError,
    EmptyJoinError,
    MissingObservationError,
    TieError,
    UnknownCountyError,
    ValidationError,
)

log = logging.getLogger(__name__)

# Networks above this size are stored as CSR sparse matrices.
DENSE_MAX = 5000

NETWORK_KINDS = ("colocation", "friendship", "commuting", "custom")
METRO_CODES = frozenset({1, 2, 3})
_FIPS_RE = re.compile(r"^\d{5}$")


def _read_rows(path, required):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path}: empty file, header required") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise ValidationError(f"{path}: header lacks columns {missing}")
        rows = []
        for i, raw in enumerate(reader, start=1):
            if not raw or all(not c.strip() for c in raw):
                continue
            if len(raw) != len(header):
                raise ValidationError(
                    f"expected {len(header)} fields, found {len(raw)}", row=i
                )
            rows.append((i, dict(zip(header, (c.strip() for c in raw)))))
    return header, rows


def _float(value, name, row):
    # float() is locale independent; reject things like "1,5" or "".
    try:
        out = float(value)
    except ValueError:
        raise ValidationError(f"{name}={value!r} is not a number", row=row) from None
    if not math.isfinite(out):
        raise ValidationError(f"{name}={value!r} is not finite", row=row)
    return out


def _int(value, name, row):
    x = _float(value, name, row)
    if x != int(x):
        raise ValidationError(f"{name}={value!r} is not an integer", row=row)
    return int(x)


def _fips(value, row, name="fips"):
    if not _FIPS_RE.match(value):
        raise ValidationError(f"{name}={value!r} is not a 5-digit FIPS code", row=row)
    return value


# --------------------------------------------------------------------------
# counties


@dataclass(frozen=True)
class CountyTable:
    """Column-oriented table of county records, ordered by fips."""

    fips: tuple
    lat: np.ndarray
    lon: np.ndarray
    population: np.ndarray
    rucc: np.ndarray

    def __post_init__(self):
        for arr in (self.lat, self.lon, self.population, self.rucc):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.fips)

    def index_of(self) -> dict:
        return {f: i for i, f in enumerate(self.fips)}

    def subset(self, fips: Sequence[str]) -> "CountyTable":
        idx = self.index_of()
        take = np.array([idx[f] for f in fips], dtype=int)
        return CountyTable(
            tuple(fips),
            self.lat[take].copy(),
            self.lon[take].copy(),
            self.population[take].copy(),
            self.rucc[take].copy(),
        )


def make_county_table(fips, lat, lon, population, rucc) -> CountyTable:
    """Validate and sort raw columns into a CountyTable."""
    fips = [str(f) for f in fips]
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    population = np.asarray(population, dtype=float)
    rucc = np.asarray(rucc, dtype=int)
    seen = set()
    for i, f in enumerate(fips, start=1):
        _fips(f, i)
        if f in seen:
            raise DuplicateKeyError(f"duplicate fips {f}", row=i)
        seen.add(f)
        if not -90.0 <= lat[i - 1] <= 90.0:
            raise ValidationError(f"lat={lat[i - 1]} outside [-90, 90]", row=i)
        if not -180.0 < lon[i - 1] <= 180.0:
            raise ValidationError(f"lon={lon[i - 1]} outside (-180, 180]", row=i)
        if population[i - 1] < 1:
            raise ValidationError(f"pop={population[i - 1]} must be >= 1", row=i)
        if not 1 <= rucc[i - 1] <= 9:
            raise ValidationError(f"rucc={rucc[i - 1]} outside 1..9", row=i)
    order = sorted(range(len(fips)), key=fips.__getitem__)
    return CountyTable(
        tuple(fips[i] for i in order),
        lat[order],
        lon[order],
        population[order],
        rucc[order],
    )


def load_counties(path) -> CountyTable:
    _, rows = _read_rows(path, ("fips", "lat", "lon", "pop", "rucc"))
    fips, lat, lon, pop, rucc = [], [], [], [], []
    seen = {}
    for i, r in rows:
        f = _fips(r["fips"], i)
        if f in seen:
            raise DuplicateKeyError(f"duplicate fips {f} (first seen in row {seen[f]})", row=i)
        seen[f] = i
        la = _float(r["lat"], "lat", i)
        lo = _float(r["lon"], "lon", i)
        p = _float(r["pop"], "pop", i)
        c = _int(r["rucc"], "rucc", i)
        if not -90.0 <= la <= 90.0:
            raise ValidationError(f"lat={la} outside [-90, 90]", row=i)
        if not -180.0 < lo <= 180.0:
            raise ValidationError(f"lon={lo} outside (-180, 180]", row=i)
        if p < 1:
            raise ValidationError(f"pop={p} must be >= 1", row=i)
        if not 1 <= c <= 9:
            raise ValidationError(f"rucc={c} outside 1..9", row=i)
        fips.append(f)
        lat.append(la)
        lon.append(lo)
        pop.append(p)
        rucc.append(c)
    return make_county_table(fips, lat, lon, pop, rucc)


def partition_metro(counties: CountyTable) -> tuple[tuple, tuple]:
    """Split counties into (metro, non-metro) fips tuples by RUCC 1-3 vs 4-9."""
    metro = tuple(f for f, c in zip(counties.fips, counties.rucc) if int(c) in METRO_CODES)
    nonmetro = tuple(f for f, c in zip(counties.fips, counties.rucc) if int(c) not in METRO_CODES)
    return metro, nonmetro


# --------------------------------------------------------------------------
# networks


@dataclass(frozen=True)
class ConnectivityNetwork:
    """Square nonnegative connection matrix over an ordered set of counties.

    ``weights`` is a dense ndarray for small networks and a CSR matrix above
    ``DENSE_MAX`` counties. Use the methods here rather than touching the
    storage directly so both layouts behave the same.
    """

    county_index: tuple
    weights: object
    kind: str = "custom"

    def __post_init__(self):
        if self.kind not in NETWORK_KINDS:
            raise ValidationError(f"unknown network kind {self.kind!r}")
        w = self.weights
        n = len(self.county_index)
        if w.shape != (n, n):
            raise ValidationError(f"weights shape {w.shape} does not match {n} counties")
        vals = w.data if sparse.issparse(w) else w
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValidationError("network weights must be finite and nonnegative")
        if not sparse.issparse(w):
            w.setflags(write=False)

    def __len__(self):
        return len(self.county_index)

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.weights)

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=1), dtype=float).ravel()

    def diagonal(self) -> np.ndarray:
        return np.asarray(self.weights.diagonal(), dtype=float)

    def dot(self, v) -> np.ndarray:
        return np.asarray(self.weights @ np.asarray(v, dtype=float), dtype=float).ravel()

    def toarray(self) -> np.ndarray:
        return self.weights.toarray() if self.is_sparse else np.array(self.weights)

    def without_self_loops(self) -> "ConnectivityNetwork":
        if self.is_sparse:
            w = self.weights.tolil(copy=True)
            w.setdiag(0.0)
            w = w.tocsr()
            w.eliminate_zeros()
        else:
            w = np.array(self.weights)
            np.fill_diagonal(w, 0.0)
        return ConnectivityNetwork(self.county_index, w, self.kind)

    def subset(self, fips: Sequence[str]) -> "ConnectivityNetwork":
        idx = {f: i for i, f in enumerate(self.county_index)}
        take = np.array([idx[f] for f in fips], dtype=int)
        if self.is_sparse:
            w = self.weights[take][:, take].tocsr()
        else:
            w = np.array(self.weights[np.ix_(take, take)])
        return ConnectivityNetwork(tuple(fips), w, self.kind)


def _assemble(n, rows, cols, vals, dense):
    if dense:
        w = np.zeros((n, n))
        np.add.at(w, (rows, cols), vals)
        return w
    return sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def network_from_edges(src, dst, weight, counties: CountyTable, kind="custom", dense=None):
    """Place an edge list onto the county ordering; duplicates are summed."""
    idx = counties.index_of()
    n = len(counties)
    rows = np.empty(len(src), dtype=int)
    cols = np.empty(len(src), dtype=int)
    vals = np.asarray(weight, dtype=float)
    for e, (a, b) in enumerate(zip(src, dst)):
        if a not in idx:
            raise UnknownCountyError(f"src_fips {a} is not a known county", row=e + 1)
        if b not in idx:
            raise UnknownCountyError(f"dst_fips {b} is not a known county", row=e + 1)
        rows[e] = idx[a]
        cols[e] = idx[b]
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        bad = int(np.flatnonzero((vals < 0) | ~np.isfinite(vals))[0])
        raise ValidationError(f"weight={vals[bad]} must be finite and >= 0", row=bad + 1)
    keys = rows.astype(np.int64) * n + cols
    n_dup = len(keys) - len(np.unique(keys))
    if n_dup:
        log.warning("%s network: summed %d duplicate edge(s)", kind, n_dup)
    if dense is None:
        dense = n <= DENSE_MAX
    return ConnectivityNetwork(counties.fips, _assemble(n, rows, cols, vals, dense), kind)


def load_network_edges(path, counties: CountyTable, kind="custom", normalize=None, dense=None):
    """Load ``src_fips,dst_fips,weight`` into a ConnectivityNetwork.

    With ``normalize="population"`` each weight is treated as a raw count
    (friendships, commuting flows) and divided by ``pop_i * pop_j``.
    """
    _, rows = _read_rows(path, ("src_fips", "dst_fips", "weight"))
    src, dst, w = [], [], []
    idx = counties.index_of()
    for i, r in rows:
        a = _fips(r["src_fips"], i, "src_fips")
        b = _fips(r["dst_fips"], i, "dst_fips")
        for name, f in (("src_fips", a), ("dst_fips", b)):
            if f not in idx:
                raise UnknownCountyError(f"{name} {f} is not a known county", row=i)
        x = _float(r["weight"], "weight", i)
        if x < 0:
            raise ValidationError(f"weight={x} must be >= 0", row=i)
        if normalize == "population":
            x = connection_probability(
                x, counties.population[idx[a]], counties.population[idx[b]]
            )
        elif normalize is not None:
            raise ValidationError(f"unknown normalization {normalize!r}")
        src.append(a)
        dst.append(b)
        w.append(x)
    return network_from_edges(src, dst, w, counties, kind=kind, dense=dense)


def connection_probability(count, pop_i, pop_j):
    """Raw pairwise probability ``count / (pop_i * pop_j)``."""
    pop_i = np.asarray(pop_i, dtype=float)
    pop_j = np.asarray(pop_j, dtype=float)
    count = np.asarray(count, dtype=float)
    if np.any(pop_i < 1) or np.any(pop_j < 1):
        raise ValidationError("populations must be >= 1")
    if np.any(count < 0):
        raise ValidationError("counts must be nonnegative")
    out = count / (pop_i * pop_j)
    return float(out) if out.ndim == 0 else out


def friendship_probability(sci_count, pop_i, pop_j):
    """Friendship probability from a friendship count, with the 1e12 scale dropped."""
    return connection_probability(sci_count, pop_i, pop_j)


def commuting_probability(flow, pop_i, pop_j):
    """Commuting probability: total flow between two counties over their populations."""
    return connection_probability(flow, pop_i, pop_j)


# --------------------------------------------------------------------------
# elections


@dataclass(frozen=True)
class ElectionPanel:
    """Vote shares as (county x year) arrays; NaN marks a missing observation."""

    fips: tuple
    years: tuple
    dem: np.ndarray
    rep: np.ndarray

    def __post_init__(self):
        self.dem.setflags(write=False)
        self.rep.setflags(write=False)

    def subset(self, fips: Sequence[str]) -> "ElectionPanel":
        idx = {f: i for i, f in enumerate(self.fips)}
        take = np.array([idx[f] for f in fips], dtype=int)
        return ElectionPanel(tuple(fips), self.years, self.dem[take].copy(), self.rep[take].copy())

    def _cols(self, years):
        pos = {y: j for j, y in enumerate(self.years)}
        missing_years = [y for y in years if y not in pos]
        if missing_years:
            raise MissingObservationError(f"panel has no data for years {missing_years}")
        cols = [pos[y] for y in years]
        for j, y in zip(cols, years):
            gaps = np.flatnonzero(np.isnan(self.dem[:, j]))
            if len(gaps):
                raise MissingObservationError(
                    f"county {self.fips[gaps[0]]} has no result for {y}"
                )
        return cols


def make_panel(records) -> ElectionPanel:
    """Build a panel from (fips, year, dem_share, rep_share) tuples."""
    fips = sorted({r[0] for r in records})
    years = sorted({int(r[1]) for r in records})
    fi = {f: i for i, f in enumerate(fips)}
    yi = {y: j for j, y in enumerate(years)}
    dem = np.full((len(fips), len(years)), np.nan)
    rep = np.full_like(dem, np.nan)
    for f, y, d, r in records:
        i, j = fi[f], yi[int(y)]
        if not np.isnan(dem[i, j]):
            raise DuplicateKeyError(f"duplicate result for county {f} in {y}")
        dem[i, j] = d
        rep[i, j] = r
    return ElectionPanel(tuple(fips), tuple(years), dem, rep)


def load_votes(path) -> ElectionPanel:
    _, rows = _read_rows(path, ("fips", "year", "dem_share", "rep_share"))
    records = []
    seen = {}
    for i, r in rows:
        f = _fips(r["fips"], i)
        y = _int(r["year"], "year", i)
        d = _float(r["dem_share"], "dem_share", i)
        p = _float(r["rep_share"], "rep_share", i)
        if (f, y) in seen:
            raise DuplicateKeyError(
                f"duplicate result for county {f} in {y} (first in row {seen[f, y]})", row=i
            )
        seen[f, y] = i
        for name, v in (("dem_share", d), ("rep_share", p)):
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name}={v} outside [0, 1]", row=i)
        if d + p > 1.0 + 1e-9:
            raise ValidationError(f"dem_share + rep_share = {d + p} exceeds 1", row=i)
        records.append((f, y, d, p))
    return make_panel(records)


@dataclass(frozen=True)
class NormalVote:
    fips: tuple
    dem: np.ndarray
    rep: np.ndarray


def normal_vote(panel: ElectionPanel, years=(2012, 2016, 2020)) -> NormalVote:
    """Per-county mean party shares over the given elections."""
    cols = panel._cols(list(years))
    return NormalVote(
        panel.fips, panel.dem[:, cols].mean(axis=1), panel.rep[:, cols].mean(axis=1)
    )


def classify_swing(panel: ElectionPanel, years=(2012, 2016, 2020)) -> np.ndarray:
    """Boolean swing flag per county.

    A county swings when the strict-majority party differs between at least
    one pair of consecutive elections in ``years``. Exact ties raise.
    """
    years = list(years)
    if len(years) < 2:
        raise ValidationError("swing classification needs at least two elections")
    cols = panel._cols(years)
    dem = panel.dem[:, cols]
    rep = panel.rep[:, cols]
    ties = np.argwhere(dem == rep)
    if len(ties):
        i, j = ties[0]
        raise TieError(panel.fips[i], years[j])
    rep_major = rep > dem
    return np.any(rep_major[:, 1:] != rep_major[:, :-1], axis=1)


# --------------------------------------------------------------------------
# covariates

# Columns consumed by the residential exposure computation, not controls.
RESIDENTIAL_COLUMNS = ("res_rep_given_dem", "res_dem_given_rep", "res_p_dem", "res_p_rep")


@dataclass(frozen=True)
class CovariateTable:
    fips: tuple
    names: tuple
    values: np.ndarray
    unit: str = "fraction"

    def __post_init__(self):
        self.values.setflags(write=False)

    def column(self, name) -> np.ndarray:
        try:
            return self.values[:, self.names.index(name)]
        except ValueError:
            raise ValidationError(f"covariates have no column {name!r}") from None

    def matrix(self, names) -> np.ndarray:
        return np.column_stack([self.column(n) for n in names])

    @property
    def controls(self) -> tuple:
        return tuple(n for n in self.names if n not in RESIDENTIAL_COLUMNS)

    def subset(self, fips: Sequence[str]) -> "CovariateTable":
        idx = {f: i for i, f in enumerate(self.fips)}
        take = np.array([idx[f] for f in fips], dtype=int)
        return CovariateTable(tuple(fips), self.names, self.values[take].copy(), self.unit)


def load_covariates(path, unit="fraction", share_columns=None) -> CovariateTable:
    """Load ``fips,<name>...``.

    ``share_columns`` (default: every control column) are range checked
    against ``unit``: [0, 1] for "fraction", [0, 100] for "percent".
    Residential probability columns are always checked against [0, 1].
    """
    if unit not in ("fraction", "percent"):
        raise ValidationError(f"unknown covariate unit {unit!r}")
    header, rows = _read_rows(path, ("fips",))
    names = tuple(h for h in header if h != "fips")
    if not names:
        raise ValidationError(f"{path}: no covariate columns")
    if share_columns is None:
        share_columns = [n for n in names if n not in RESIDENTIAL_COLUMNS]
    upper = 1.0 if unit == "fraction" else 100.0
    fips, values = [], []
    seen = set()
    for i, r in rows:
        f = _fips(r["fips"], i)
        if f in seen:
            raise DuplicateKeyError(f"duplicate fips {f}", row=i)
        seen.add(f)
        vals = []
        for n in names:
            if r[n] == "":
                raise ValidationError(f"missing value for {n}", row=i)
            v = _float(r[n], n, i)
            hi = 1.0 if n in RESIDENTIAL_COLUMNS else upper
            if (n in share_columns or n in RESIDENTIAL_COLUMNS) and not 0.0 <= v <= hi:
                raise ValidationError(f"{n}={v} outside [0, {hi:g}]", row=i)
            vals.append(v)
        fips.append(f)
        values.append(vals)
    order = sorted(range(len(fips)), key=fips.__getitem__)
    arr = np.array(values, dtype=float).reshape(len(fips), len(names))[order]
    return CovariateTable(tuple(fips[i] for i in order), names, arr, unit)


# --------------------------------------------------------------------------
# alignment


@dataclass(frozen=True)
class AlignmentReport:
    kept: int
    dropped: tuple  # (fips, sources it was missing from)


@dataclass(frozen=True)
class AlignedDataset:
    counties: CountyTable
    networks: Mapping[str, ConnectivityNetwork]
    panel: ElectionPanel
    covariates: CovariateTable
    report: AlignmentReport = field(default_factory=lambda: AlignmentReport(0, ()))

    @property
    def fips(self) -> tuple:
        return self.counties.fips


def align_datasets(counties, networks, panel, covariates) -> AlignedDataset:
    """Restrict every input to the common counties, in ascending fips order."""
    sources = {"counties": set(counties.fips), "votes": set(panel.fips),
               "covariates": set(covariates.fips)}
    for name in sorted(networks):
        sources[f"network:{name}"] = set(networks[name].county_index)
    common = set.intersection(*sources.values())
    if not common:
        raise EmptyJoinError("inputs share no counties")
    every = set.union(*sources.values())
    dropped = tuple(
        (f, tuple(s for s in sources if f not in sources[s])) for f in sorted(every - common)
    )
    keep = tuple(sorted(common))
    if dropped:
        log.info("alignment dropped %d county(ies)", len(dropped))
    return AlignedDataset(
        counties=counties if counties.fips == keep else counties.subset(keep),
        networks={
            k: (v if v.county_index == keep else v.subset(keep))
            for k, v in sorted(networks.items())
        },
        panel=panel if panel.fips == keep else panel.subset(keep),
        covariates=covariates if covariates.fips == keep else covariates.subset(keep),
        report=AlignmentReport(len(keep), dropped),
    )


def realign(ds: AlignedDataset) -> AlignedDataset:
    return align_datasets(ds.counties, ds.networks, ds.panel, ds.covariates)
