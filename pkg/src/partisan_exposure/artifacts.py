"""Writers and readers for every file the pipeline emits.

Floats are written with ``repr`` so CSV files round-trip bit for bit.
JSON files replace non-finite numbers with null.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .dominance import DominanceReport
from .errors import ValidationError
from .exposure import ExposureTable
from .learn.shapley import ShapExplanation

TEST_COLUMNS = ("exposure_to", "dimension_1", "dimension_2", "t", "df", "p", "stars")
DOMINANCE_COLUMNS = ("predictor", "interactional", "individual", "average_partial", "total",
                     "percent")


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    return path


def read_csv(path):
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _floats(col):
    return np.array([float(v) for v in col])


# --------------------------------------------------------------------------
# exposure


def write_exposure(path, table: ExposureTable):
    cols = [getattr(table, c) for c in ExposureTable.COLUMNS]
    return write_csv(path, ("fips",) + ExposureTable.COLUMNS,
                     ([f] + [c[i] for c in cols] for i, f in enumerate(table.fips)))


def read_exposure(path, dimension=None) -> ExposureTable:
    header, rows = read_csv(path)
    if tuple(header) != ("fips",) + ExposureTable.COLUMNS:
        raise ValidationError(f"{path}: unexpected exposure header {header}")
    cols = list(zip(*rows)) if rows else [()] * len(header)
    if dimension is None:
        dimension = Path(path).stem.removeprefix("exposure_")
    return ExposureTable(dimension, tuple(cols[0]), *(_floats(c) for c in cols[1:]))


# --------------------------------------------------------------------------
# regression fits


def fit_record(model, fit, k=None, **extra) -> dict:
    """JSON-ready dict for an OlsFit or SarFit."""
    is_sar = hasattr(fit, "rho")
    stat = fit.z if is_sar else fit.t
    coefs = [
        {"name": n, "estimate": c, "se": s, "t": t, "p": p}
        for n, c, s, t, p in zip(fit.names, fit.coef, fit.se, stat, fit.p)
    ]
    rec = {
        "model": model,
        "k": k,
        "coefficients": coefs,
        "rho": fit.rho if is_sar else None,
        "r2": fit.r2,
        "loglik": fit.loglik,
        "aic": fit.aic,
        "n": fit.n,
        "k_params": fit.k_params,
        "sigma2": fit.sigma2,
    }
    if is_sar:
        rec["rho_se"] = fit.rho_se
        rec["rho_p"] = fit.rho_p
        if abs(fit.r2 - fit.r2_variance_ratio) > 1e-6:
            rec["r2_variance_ratio"] = fit.r2_variance_ratio
    rec.update(extra)
    return rec


def write_fit(path, model, fit, k=None, **extra):
    return write_json(path, fit_record(model, fit, k, **extra))


# --------------------------------------------------------------------------
# dominance


def write_dominance(path, report: DominanceReport):
    return write_csv(path, DOMINANCE_COLUMNS, report.rows())


def read_dominance(path) -> dict:
    header, rows = read_csv(path)
    if tuple(header) != DOMINANCE_COLUMNS:
        raise ValidationError(f"{path}: unexpected dominance header {header}")
    return {r[0]: dict(zip(DOMINANCE_COLUMNS[1:], map(float, r[1:]))) for r in rows}


# --------------------------------------------------------------------------
# shapley


def write_shap(path, fips, expl: ShapExplanation):
    header = ("fips",) + expl.names + ("base", "prediction")
    return write_csv(path, header, (
        [f] + list(expl.phi[i]) + [expl.base, expl.prediction[i]] for i, f in enumerate(fips)
    ))


def read_shap(path):
    header, rows = read_csv(path)
    if header[0] != "fips" or header[-2:] != ["base", "prediction"]:
        raise ValidationError(f"{path}: unexpected shap header {header}")
    names = tuple(header[1:-2])
    fips = tuple(r[0] for r in rows)
    phi = np.array([[float(v) for v in r[1:-2]] for r in rows]).reshape(len(rows), len(names))
    base = float(rows[0][-2]) if rows else math.nan
    pred = np.array([float(r[-1]) for r in rows])
    return fips, ShapExplanation(names, phi, base, pred)


def write_shap_impact(path, ranking):
    return write_csv(path, ("feature", "mean_abs_impact"), ranking)


def read_shap_impact(path):
    _, rows = read_csv(path)
    return [(r[0], float(r[1])) for r in rows]


# --------------------------------------------------------------------------
# t tests


def write_tests(path, rows):
    """``rows`` of (exposure_to, dimension_1, dimension_2, TestResult)."""
    return write_csv(path, TEST_COLUMNS, (
        (e, d1, d2, r.t_statistic, r.df, r.p_value, r.stars) for e, d1, d2, r in rows
    ))


def read_tests(path):
    header, rows = read_csv(path)
    if tuple(header) != TEST_COLUMNS:
        raise ValidationError(f"{path}: unexpected test header {header}")
    return [(r[0], r[1], r[2], float(r[3]), float(r[4]), float(r[5]), r[6]) for r in rows]
