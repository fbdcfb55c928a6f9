"""Partisan exposure, segregation, network diversity and extroversion."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .data import ConnectivityNetwork
from .errors import DegenerateError, DivisionByZeroError, IsolatedCountyError, ValidationError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExposureTable:
    dimension: str
    fips: tuple
    pe_dem: np.ndarray
    pe_rep: np.ndarray
    segregation: np.ndarray
    diversity: np.ndarray
    extroversion: np.ndarray

    COLUMNS = ("pe_dem", "pe_rep", "segregation", "diversity", "extroversion")


def _check_rows(net: ConnectivityNetwork, totals):
    bad = np.flatnonzero(~(totals > 0))
    if len(bad):
        raise IsolatedCountyError(net.county_index[bad[0]])


def partisan_exposure(net: ConnectivityNetwork, shares, exclude_self=False) -> np.ndarray:
    """Connection-weighted mean of partisan vote shares seen from each county.

    Each row of the network is normalized to sum to one and dotted with the
    per-county vote share vector. With ``exclude_self`` the self-loop is
    removed before normalizing.
    """
    shares = np.asarray(shares, dtype=float)
    if shares.shape != (len(net),):
        raise ValidationError(f"expected {len(net)} vote shares, got shape {shares.shape}")
    if exclude_self:
        net = net.without_self_loops()
    totals = net.row_sums()
    _check_rows(net, totals)
    return net.dot(shares) / totals


def residential_exposure(p_rep_given_dem, p_dem_given_rep, p_dem):
    """P(R) = P(R|D) P(D) / P(D|R)."""
    a = np.asarray(p_rep_given_dem, dtype=float)
    b = np.asarray(p_dem_given_rep, dtype=float)
    d = np.asarray(p_dem, dtype=float)
    for name, v in (("P(R|D)", a), ("P(D|R)", b), ("P(D)", d)):
        if np.any((v < 0) | (v > 1)):
            raise ValidationError(f"{name} must lie in [0, 1]")
    if np.any(b == 0):
        raise DivisionByZeroError("P(D|R) is zero")
    out = a * d / b
    return float(out) if out.ndim == 0 else out


def residential_exposure_dem(p_dem_given_rep, p_rep_given_dem, p_rep):
    """P(D) = P(D|R) P(R) / P(R|D); the role-swapped partner of the above."""
    return residential_exposure(p_dem_given_rep, p_rep_given_dem, p_rep)


def partisan_segregation(pe_rep, pe_dem):
    """Net exposure to Republicans rescaled onto [0, 1]; 0.5 is balanced."""
    out = (np.asarray(pe_rep, dtype=float) - np.asarray(pe_dem, dtype=float) + 1.0) / 2.0
    return float(out) if out.ndim == 0 else out


def row_entropy(q) -> float:
    """Shannon entropy (nats) of a probability vector; zeros contribute nothing."""
    q = np.asarray(q, dtype=float)
    q = q[q > 0]
    return float(-np.sum(q * np.log(q)))


def network_diversity(net: ConnectivityNetwork) -> np.ndarray:
    """Normalized entropy of each county's connection distribution."""
    k = len(net)
    if k < 2:
        raise DegenerateError("diversity needs at least two counties")
    totals = net.row_sums()
    _check_rows(net, totals)
    if net.is_sparse:
        w = net.weights
        rows = np.repeat(np.arange(k), np.diff(w.indptr))
        q = w.data / totals[rows]
        terms = np.where(q > 0, q * np.log(np.where(q > 0, q, 1.0)), 0.0)
        h = -np.bincount(rows, weights=terms, minlength=k)
    else:
        q = np.asarray(net.weights) / totals[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(q > 0, q * np.log(q), 0.0)
        h = -terms.sum(axis=1)
    return h / np.log(k)


def extroversion(net: ConnectivityNetwork, strict=True) -> np.ndarray:
    """External over internal connection mass, sum_{j != i} p_ij / p_ii.

    Counties without a self-loop raise, or get NaN when ``strict`` is false.
    """
    internal = net.diagonal()
    external = net.row_sums() - internal
    zero = np.flatnonzero(internal == 0)
    if len(zero):
        if strict:
            raise DivisionByZeroError(
                f"county {net.county_index[zero[0]]} has no self-loop"
            )
        log.warning("%d county(ies) without self-loop; extroversion set to NaN", len(zero))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = external / internal
    out[zero] = np.nan
    return out


def network_exposure_table(
    dimension, net: ConnectivityNetwork, dem_share, rep_share, exclude_self=False
) -> ExposureTable:
    """All per-county measures for one network dimension.

    Diversity and extroversion describe the network itself and always use
    the self-loops; ``exclude_self`` only affects the exposures.
    """
    pe_dem = partisan_exposure(net, dem_share, exclude_self)
    pe_rep = partisan_exposure(net, rep_share, exclude_self)
    return ExposureTable(
        dimension,
        net.county_index,
        pe_dem,
        pe_rep,
        partisan_segregation(pe_rep, pe_dem),
        network_diversity(net),
        extroversion(net, strict=False),
    )


def residential_exposure_table(fips, rep_given_dem, dem_given_rep, p_dem, p_rep) -> ExposureTable:
    pe_rep = np.asarray(residential_exposure(rep_given_dem, dem_given_rep, p_dem), dtype=float)
    pe_dem = np.asarray(residential_exposure_dem(dem_given_rep, rep_given_dem, p_rep), dtype=float)
    nan = np.full(len(fips), np.nan)
    return ExposureTable(
        "residential", tuple(fips), pe_dem, pe_rep,
        partisan_segregation(pe_rep, pe_dem), nan, nan.copy(),
    )
