"""Stage orchestration, run manifest and report emission.

A run is a fixed sequence of stages. Each stage writes its own files into
the output directory and is recorded in ``manifest.json`` together with a
SHA-256 per file. Stages that need upstream results recompute them in
memory, so any single stage can be run on its own against a config.
"""

from __future__ import annotations

import logging
import platform
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import artifacts as art
from .config import RunConfig
from .data import (
    RESIDENTIAL_COLUMNS,
    align_datasets,
    classify_swing,
    load_counties,
    load_covariates,
    load_network_edges,
    load_votes,
    normal_vote,
    partition_metro,
)
from .dominance import dominance_analysis
from .errors import IncompleteRunError, StageError, ToolkitError, ValidationError
from .exposure import network_exposure_table, residential_exposure_table
from .learn.linear import cv_grid_search, train_test_split
from .learn.shapley import shapley_values
from .learn.trees import fit_gbm
from .spatial import fit_ols, fit_spatial_lag, knn_weights
from .stats import pearson_r, t_test_pooled, t_test_welch, vif
from .synth import stage_rng

log = logging.getLogger(__name__)

STAGES = ("ingest", "exposure", "stats", "fit-sar", "fit-ols", "dominance", "elasticnet",
          "gbm-shap")
MAIN_DIMENSIONS = ("offline", "online", "residential")
PARTIES = ("rep", "dem")
SCOPES = ("all", "metro", "nonmetro", "swing", "nonswing")
MANIFEST = "manifest.json"


def order_dimensions(dims) -> tuple:
    """Main dimensions first in their canonical order, then the rest sorted."""
    dims = set(dims)
    return tuple(d for d in MAIN_DIMENSIONS if d in dims) + tuple(sorted(dims - set(MAIN_DIMENSIONS)))


class RunContext:
    """Lazily computed inputs shared by the stages of one run."""

    def __init__(self, config: RunConfig, out):
        self.config = config
        self.out = Path(out)

    @cached_property
    def dataset(self):
        cfg = self.config
        counties = load_counties(cfg.counties)
        networks = {
            dim: load_network_edges(net.path, counties, net.kind, net.normalize)
            for dim, net in cfg.networks.items()
        }
        panel = load_votes(cfg.votes)
        covariates = load_covariates(cfg.covariates, cfg.covariate_unit)
        return align_datasets(counties, networks, panel, covariates)

    @property
    def fips(self) -> tuple:
        return self.dataset.fips

    @cached_property
    def controls(self) -> tuple:
        cov = self.dataset.covariates
        names = self.config.controls if self.config.controls is not None else cov.controls
        for n in names:
            cov.column(n)
        return tuple(names)

    @cached_property
    def has_residential(self) -> bool:
        return all(c in self.dataset.covariates.names for c in RESIDENTIAL_COLUMNS)

    @cached_property
    def dimensions(self) -> tuple:
        available = set(self.dataset.networks)
        if self.has_residential:
            available.add("residential")
        if self.config.dimensions is None:
            return order_dimensions(available)
        missing = [d for d in self.config.dimensions if d not in available]
        if missing:
            raise ValidationError(f"dimensions without input data: {missing}")
        return order_dimensions(self.config.dimensions)

    @property
    def main_dimensions(self) -> tuple:
        return tuple(d for d in self.dimensions if d in MAIN_DIMENSIONS)

    @property
    def extra_dimensions(self) -> tuple:
        return tuple(d for d in self.dimensions if d not in MAIN_DIMENSIONS)

    @cached_property
    def vote(self):
        return normal_vote(self.dataset.panel, self.config.normal_vote_years)

    def party_share(self, party) -> np.ndarray:
        return self.vote.rep if party == "rep" else self.vote.dem

    @cached_property
    def metro(self) -> np.ndarray:
        metro_fips, _ = partition_metro(self.dataset.counties)
        m = set(metro_fips)
        return np.array([f in m for f in self.fips])

    @cached_property
    def swing(self) -> np.ndarray:
        return classify_swing(self.dataset.panel, self.config.swing_years)

    def scope_mask(self, scope) -> np.ndarray:
        n = len(self.fips)
        return {
            "all": np.ones(n, dtype=bool),
            "metro": self.metro,
            "nonmetro": ~self.metro,
            "swing": self.swing,
            "nonswing": ~self.swing,
        }[scope]

    @cached_property
    def exposures(self) -> dict:
        ds = self.dataset
        out = {}
        for dim in self.dimensions:
            if dim == "residential":
                cov = ds.covariates
                out[dim] = residential_exposure_table(
                    self.fips, *(cov.column(c) for c in RESIDENTIAL_COLUMNS)
                )
            else:
                out[dim] = network_exposure_table(
                    dim, ds.networks[dim], self.vote.dem, self.vote.rep, self.config.exclude_self
                )
        return out

    def exposure_of(self, party, dim) -> np.ndarray:
        t = self.exposures[dim]
        return t.pe_rep if party == "rep" else t.pe_dem

    def predictors(self, party, dims):
        names = tuple(f"pe_{d}" for d in dims) + self.controls
        cols = [self.exposure_of(party, d) for d in dims]
        cols += [self.dataset.covariates.column(c) for c in self.controls]
        return np.column_stack(cols), names

    def rng(self, label) -> np.random.Generator:
        return stage_rng(self.config.seed, label)


# --------------------------------------------------------------------------
# stages


@dataclass
class StageOutput:
    artifacts: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    def add(self, path):
        self.artifacts.append(Path(path))


def stage_ingest(ctx: RunContext) -> StageOutput:
    so = StageOutput()
    ds = ctx.dataset
    so.add(art.write_json(ctx.out / "ingest_report.json", {
        "n_counties": len(ctx.fips),
        "dropped": [{"fips": f, "missing_from": list(s)} for f, s in ds.report.dropped],
        "n_metro": int(ctx.metro.sum()),
        "n_swing": int(ctx.swing.sum()),
        "swing_years": list(ctx.config.swing_years),
        "normal_vote_years": list(ctx.config.normal_vote_years),
        "dimensions": list(ctx.dimensions),
        "controls": list(ctx.controls),
        "networks": {d: {"kind": n.kind, "sparse": n.is_sparse}
                     for d, n in sorted(ds.networks.items())},
    }))
    so.add(art.write_csv(
        ctx.out / "counties_labels.csv",
        ("fips", "population", "rucc", "metro", "swing", "dem_normal", "rep_normal"),
        zip(ctx.fips, ds.counties.population, ds.counties.rucc, ctx.metro, ctx.swing,
            ctx.vote.dem, ctx.vote.rep),
    ))
    return so


def stage_exposure(ctx: RunContext) -> StageOutput:
    so = StageOutput()
    for dim in ctx.dimensions:
        so.add(art.write_exposure(ctx.out / f"exposure_{dim}.csv", ctx.exposures[dim]))
    return so


def _label(dim):
    return dim.capitalize()


def _dimension_tests(ctx, mask, scope_label):
    rows = []
    for party in ("dem", "rep"):
        tag = party.upper() + scope_label
        for d1, d2 in combinations(ctx.dimensions, 2):
            a = ctx.exposure_of(party, d1)[mask]
            b = ctx.exposure_of(party, d2)[mask]
            rows.append((tag, _label(d1), _label(d2), t_test_pooled(a, b)))
    return rows


def stage_stats(ctx: RunContext) -> StageOutput:
    so = StageOutput()
    for scope, label in (("all", ""), ("metro", " - Metro"), ("nonmetro", " - Non-Metro")):
        mask = ctx.scope_mask(scope)
        if mask.sum() < 2:
            so.skipped.append(f"tests_dimensions_{scope}: fewer than two counties")
            continue
        so.add(art.write_tests(ctx.out / f"tests_dimensions_{scope}.csv",
                               _dimension_tests(ctx, mask, label)))
    if ctx.metro.sum() >= 2 and (~ctx.metro).sum() >= 2:
        rows = []
        for party in ("dem", "rep"):
            for d in ctx.dimensions:
                v = ctx.exposure_of(party, d)
                rows.append((party.upper(), f"{_label(d)} - Metro", f"{_label(d)} - Non-Metro",
                             t_test_welch(v[ctx.metro], v[~ctx.metro])))
        so.add(art.write_tests(ctx.out / "tests_metro_nonmetro.csv", rows))
    else:
        so.skipped.append("tests_metro_nonmetro: a scope has fewer than two counties")
    so.add(art.write_tests(ctx.out / "tests_segregation.csv", [
        ("segregation", _label(d1), _label(d2),
         t_test_pooled(ctx.exposures[d1].segregation, ctx.exposures[d2].segregation))
        for d1, d2 in combinations(ctx.dimensions, 2)
    ]))

    cov = ctx.dataset.covariates
    v = vif(cov.matrix(ctx.controls), ctx.controls)
    so.add(art.write_csv(ctx.out / "vif.csv", ("feature", "vif"),
                         ((n, v[n]) for n in ctx.controls)))

    rows = []
    nets = ctx.dataset.networks
    dims = [d for d in ctx.dimensions if d in nets]
    off = ~np.eye(len(ctx.fips), dtype=bool)
    for d1, d2 in combinations(dims, 2):
        a = nets[d1].toarray()[off]
        b = nets[d2].toarray()[off]
        rows.append((_label(d1), _label(d2), pearson_r(a, b), len(a)))
    so.add(art.write_csv(ctx.out / "network_correlation.csv",
                         ("dimension_1", "dimension_2", "r", "n_pairs"), rows))
    return so


def stage_fit_sar(ctx: RunContext) -> StageOutput:
    so = StageOutput()
    for k in ctx.config.k_sweep:
        W = knn_weights(ctx.dataset.counties, k)
        for party in PARTIES:
            y = ctx.party_share(party)
            for dim in ctx.dimensions:
                name = f"pe_{party}_{dim}"
                fit = fit_spatial_lag(y, ctx.exposure_of(party, dim)[:, None], W, [name])
                so.add(art.write_fit(ctx.out / f"fit_sar_k{k}_{party}_{dim}.json", "sar", fit,
                                     k=k, party=party, dimension=dim, scope="all"))
    return so


def stage_fit_ols(ctx: RunContext) -> StageOutput:
    so = StageOutput()
    for scope in SCOPES:
        mask = ctx.scope_mask(scope)
        if mask.sum() < 3:
            so.skipped.append(f"fit_ols_{scope}: {int(mask.sum())} counties")
            continue
        for party in PARTIES:
            y = ctx.party_share(party)[mask]
            for dim in ctx.dimensions:
                name = f"pe_{party}_{dim}"
                fit = fit_ols(y, ctx.exposure_of(party, dim)[mask][:, None], [name])
                so.add(art.write_fit(ctx.out / f"fit_ols_{scope}_{party}_{dim}.json", "ols", fit,
                                     party=party, dimension=dim, scope=scope))
    return so


def stage_dominance(ctx: RunContext) -> StageOutput:
    so = StageOutput()
    variants = [(scope, ctx.main_dimensions) for scope in SCOPES]
    if ctx.extra_dimensions:
        variants.append(("all_extended", ctx.dimensions))
    for scope, dims in variants:
        mask = ctx.scope_mask("all" if scope == "all_extended" else scope)
        for party in PARTIES:
            X, names = ctx.predictors(party, dims)
            if mask.sum() < len(names) + 2:
                so.skipped.append(
                    f"dominance_{party}_{scope}: {int(mask.sum())} counties for "
                    f"{len(names)} predictors"
                )
                continue
            rep = dominance_analysis(ctx.party_share(party)[mask], X[mask], names)
            so.add(art.write_dominance(ctx.out / f"dominance_{party}_{scope}.csv", rep))
    return so


def stage_elasticnet(ctx: RunContext) -> StageOutput:
    so = StageOutput()
    cfg = ctx.config
    for party in PARTIES:
        rng = ctx.rng(f"elasticnet:{party}")
        X, names = ctx.predictors(party, ctx.main_dimensions)
        y = ctx.party_share(party)
        train, test = train_test_split(len(y), cfg.en_train_ratio, rng=rng)
        gs = cv_grid_search(y[train], X[train], cfg.en_alphas, cfg.en_l1_ratios, cfg.en_folds,
                            rng=rng)
        fit = gs.fit
        so.add(art.write_json(ctx.out / f"elasticnet_{party}.json", {
            "party": party,
            "grid": {"alphas": list(gs.alphas), "l1_ratios": list(gs.l1_ratios),
                     "cv_r2": gs.cv_r2},
            "best": {"alpha": gs.best_alpha, "l1_ratio": gs.best_l1_ratio},
            "intercept": fit.intercept,
            "betas": [{"name": n, "coef": c, "coef_standardized": s}
                      for n, c, s in zip(names, fit.coef, fit.coef_std)],
            "train_r2": fit.train_r2,
            "test_r2": fit.score(X[test], y[test]),
            "n_train": len(train),
            "n_test": len(test),
            "n_iter": fit.n_iter,
        }))
    return so


def stage_gbm_shap(ctx: RunContext) -> StageOutput:
    so = StageOutput()
    cfg = ctx.config
    mask = ctx.metro
    if mask.sum() < 4:
        so.skipped.append(f"gbm-shap: {int(mask.sum())} metro counties")
        return so
    fips = tuple(f for f, m in zip(ctx.fips, mask) if m)
    X = ctx.dataset.covariates.matrix(ctx.controls)[mask]
    for dim in ctx.dimensions:
        rng = ctx.rng(f"gbm-shap:{dim}")
        y = ctx.exposures[dim].segregation[mask]
        train, test = train_test_split(len(y), cfg.gbm_train_ratio, rng=rng)
        model = fit_gbm(y[train], X[train], cfg.gbm_n_trees, cfg.gbm_learning_rate,
                        cfg.gbm_max_depth)
        bg = train
        if len(bg) > cfg.gbm_background_max:
            bg = np.sort(rng.choice(train, size=cfg.gbm_background_max, replace=False))
        expl = shapley_values(model, X, X[bg], ctx.controls)
        so.add(art.write_shap(ctx.out / f"shap_{dim}.csv", fips, expl))
        so.add(art.write_shap_impact(ctx.out / f"shap_impact_{dim}.csv", expl.mean_abs()))
        so.add(art.write_json(ctx.out / f"gbm_{dim}.json", {
            "dimension": dim,
            "scope": "metro",
            "features": list(ctx.controls),
            "n_trees": model.n_trees,
            "learning_rate": model.learning_rate,
            "max_depth": model.max_depth,
            "n_train": len(train),
            "n_test": len(test),
            "n_background": len(bg),
            "train_r2": model.score(X[train], y[train]),
            "test_r2": model.score(X[test], y[test]),
            "base": expl.base,
        }))
    return so


STAGE_FUNCS = {
    "ingest": stage_ingest,
    "exposure": stage_exposure,
    "stats": stage_stats,
    "fit-sar": stage_fit_sar,
    "fit-ols": stage_fit_ols,
    "dominance": stage_dominance,
    "elasticnet": stage_elasticnet,
    "gbm-shap": stage_gbm_shap,
}


# --------------------------------------------------------------------------
# manifest


def versions() -> dict:
    return {
        "partisan_exposure": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def _load_manifest(out, fingerprint):
    path = Path(out) / MANIFEST
    if path.is_file():
        m = art.read_json(path)
        if m.get("config_sha256") == fingerprint:
            return m
    return None


def _write_manifest(ctx, stages, failed=None):
    done = [s for s in STAGES if s in stages]
    status = "failed" if failed else ("complete" if len(done) == len(STAGES) else "partial")
    return art.write_json(ctx.out / MANIFEST, {
        "config_sha256": ctx.config.fingerprint(),
        "settings": ctx.config.settings(),
        "versions": versions(),
        "stages": {s: stages[s] for s in done},
        "status": status,
        "failed_stage": failed,
    })


def run_stages(config: RunConfig, out, stages=STAGES) -> Path:
    """Run ``stages`` in the declared order and update the manifest.

    An existing manifest for the same config fingerprint is extended, so
    stages may be run one command at a time. A failing stage writes a
    manifest naming it and raises StageError.
    """
    unknown = [s for s in stages if s not in STAGE_FUNCS]
    if unknown:
        raise ValidationError(f"unknown stage(s): {unknown}")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    ctx = RunContext(config, out)
    fingerprint = config.fingerprint()
    previous = _load_manifest(out, fingerprint)
    recorded = dict(previous["stages"]) if previous else {}
    for stage in [s for s in STAGES if s in stages]:
        log.info("stage %s", stage)
        try:
            so = STAGE_FUNCS[stage](ctx)
        except ToolkitError as exc:
            recorded.pop(stage, None)
            _write_manifest(ctx, recorded, failed=stage)
            raise StageError(stage, exc) from exc
        for msg in so.skipped:
            log.warning("%s: skipped %s", stage, msg)
        recorded[stage] = {
            "artifacts": {p.relative_to(out).as_posix(): art.sha256_file(p)
                          for p in sorted(so.artifacts)},
            "skipped": so.skipped,
        }
    return _write_manifest(ctx, recorded)


def run_pipeline(config: RunConfig, out, report=True) -> Path:
    manifest = run_stages(config, out, STAGES)
    if report:
        emit_report(out)
    return manifest


# --------------------------------------------------------------------------
# report


def _require(run_dir):
    """Manifest of a completed run; raises IncompleteRunError otherwise."""
    run_dir = Path(run_dir)
    path = run_dir / MANIFEST
    if not path.is_file():
        raise IncompleteRunError("ingest", "no manifest in run directory")
    m = art.read_json(path)
    if m.get("failed_stage"):
        raise IncompleteRunError(m["failed_stage"], "stage failed")
    for stage in STAGES:
        entry = m["stages"].get(stage)
        if entry is None:
            raise IncompleteRunError(stage, "stage not run")
        for rel, digest in entry["artifacts"].items():
            p = run_dir / rel
            if not p.is_file():
                raise IncompleteRunError(stage, f"missing {rel}")
            if art.sha256_file(p) != digest:
                raise IncompleteRunError(stage, f"{rel} changed since the run")
    return m


def _fit_summary(rec):
    c = rec["coefficients"][-1]
    return {
        "estimate": c["estimate"], "se": c["se"], "p": c["p"],
        "rho": rec["rho"], "r2": rec["r2"], "loglik": rec["loglik"], "aic": rec["aic"],
        "n": rec["n"],
    }


def emit_report(run_dir) -> Path:
    """Summaries and plot-ready CSV files under ``<run_dir>/report``."""
    run_dir = Path(run_dir)
    manifest = _require(run_dir)
    files = {rel for e in manifest["stages"].values() for rel in e["artifacts"]}
    ingest = art.read_json(run_dir / "ingest_report.json")
    dims = ingest["dimensions"]
    main = [d for d in dims if d in MAIN_DIMENSIONS]
    extra = [d for d in dims if d not in MAIN_DIMENSIONS]
    settings = manifest["settings"]
    rep_dir = run_dir / "report"

    families = [(f"sar_k{k}", lambda p, d, k=k: f"fit_sar_k{k}_{p}_{d}.json")
                for k in settings["k_sweep"]]
    families += [(f"ols_{s}", lambda p, d, s=s: f"fit_ols_{s}_{p}_{d}.json") for s in SCOPES]

    def table(dim_list):
        out = {}
        for fam, name in families:
            cols = []
            for party in PARTIES:
                for d in dim_list:
                    rel = name(party, d)
                    entry = {"party": party, "dimension": d}
                    if rel in files:
                        entry.update(_fit_summary(art.read_json(run_dir / rel)))
                    else:
                        entry["skipped"] = True
                    cols.append(entry)
            out[fam] = cols
        return out

    models = table(main)
    supplementary = table(extra) if extra else {}

    dominance = {}
    plot_dom = []
    for party in PARTIES:
        for scope in SCOPES + (("all_extended",) if extra else ()):
            rel = f"dominance_{party}_{scope}.csv"
            if rel not in files:
                continue
            d = art.read_dominance(run_dir / rel)
            dominance.setdefault(party, {})[scope] = {k: v["percent"] for k, v in d.items()}
            plot_dom += [(party, scope, k, v["total"], v["percent"]) for k, v in d.items()]

    labels_h, labels = art.read_csv(run_dir / "counties_labels.csv")
    pop = {r[0]: float(r[1]) for r in labels}
    metro = {r[0]: r[3] == "1" for r in labels}
    segregation = {}
    plot_seg = []
    for d in dims:
        t = art.read_exposure(run_dir / f"exposure_{d}.csv", d)
        w = np.array([pop[f] for f in t.fips])
        s = t.segregation
        segregation[d] = {
            "mean": float(np.mean(s)),
            "median": float(np.median(s)),
            "population_weighted_mean": float(np.sum(w * s) / np.sum(w)),
            "share_above_0_75": float(np.mean(s > 0.75)),
            "share_below_0_25": float(np.mean(s < 0.25)),
        }
        plot_seg += [(d, f, x, pop[f], metro[f]) for f, x in zip(t.fips, s)]

    shap = {}
    plot_shap = []
    for d in dims:
        rel = f"shap_impact_{d}.csv"
        if rel not in files:
            continue
        shap[d] = dict(art.read_shap_impact(run_dir / rel))
        fips, expl = art.read_shap(run_dir / f"shap_{d}.csv")
        for i, f in enumerate(fips):
            plot_shap += [(d, f, n, expl.phi[i, j]) for j, n in enumerate(expl.names)]

    elastic = {}
    for party in PARTIES:
        e = art.read_json(run_dir / f"elasticnet_{party}.json")
        elastic[party] = {"best": e["best"], "train_r2": e["train_r2"], "test_r2": e["test_r2"],
                          "betas": {b["name"]: b["coef"] for b in e["betas"]}}

    tests = {}
    for rel in sorted(f for f in files if f.startswith("tests_")):
        tests[Path(rel).stem] = [
            {"exposure_to": e, "dimension_1": a, "dimension_2": b, "t": t, "df": df, "p": p,
             "stars": s}
            for e, a, b, t, df, p, s in art.read_tests(run_dir / rel)
        ]

    summary = {
        "n_counties": ingest["n_counties"],
        "n_metro": ingest["n_metro"],
        "n_swing": ingest["n_swing"],
        "dimensions": dims,
        "model_columns": [f"{p}_{d}" for p in PARTIES for d in main],
        "models": models,
        "supplementary_models": supplementary,
        "dominance_percent": dominance,
        "segregation": segregation,
        "shap_impact": shap,
        "elasticnet": elastic,
        "tests": tests,
    }
    art.write_json(rep_dir / "summary.json", summary)

    r2_rows = []
    for group in (models, supplementary):
        for fam, cols in group.items():
            r2_rows += [(fam, c["party"], c["dimension"], c["r2"]) for c in cols if "r2" in c]
    art.write_csv(rep_dir / "plot_r2.csv", ("model", "party", "dimension", "r2"), r2_rows)
    art.write_csv(rep_dir / "plot_dominance.csv",
                  ("party", "scope", "predictor", "total", "percent"), plot_dom)
    art.write_csv(rep_dir / "plot_segregation.csv",
                  ("dimension", "fips", "segregation", "population", "metro"), plot_seg)
    art.write_csv(rep_dir / "plot_shap.csv", ("dimension", "fips", "feature", "phi"), plot_shap)
    (rep_dir / "summary.txt").write_text(_text_summary(summary), encoding="utf-8")
    return rep_dir / "summary.json"


def _num(x, spec=".3f"):
    return "n/a" if x is None else format(x, spec)


def _text_summary(s) -> str:
    lines = [
        f"counties: {s['n_counties']} (metro {s['n_metro']}, swing {s['n_swing']})",
        f"dimensions: {', '.join(s['dimensions'])}",
        "",
    ]

    def model_block(title, group):
        lines.append(title)
        for fam, cols in group.items():
            head = "  ".join(f"{c['party'] + '_' + c['dimension']:>15}" for c in cols)
            lines.append(f"  {fam:<13} {head}")
            for key in ("estimate", "rho", "r2", "aic"):
                vals = "  ".join(f"{_num(c.get(key)):>15}" for c in cols)
                lines.append(f"  {'':<6}{key:>7} {vals}")
        lines.append("")

    model_block("exposure models (estimate is the exposure slope)", s["models"])
    if s["supplementary_models"]:
        model_block("supplementary dimensions", s["supplementary_models"])
    lines.append("dominance, percent relative importance")
    for party, scopes in s["dominance_percent"].items():
        for scope, pct in scopes.items():
            ranked = ", ".join(f"{k} {v:.1f}" for k, v in pct.items())
            lines.append(f"  {party} {scope}: {ranked}")
    lines.append("")
    lines.append("segregation")
    for d, v in s["segregation"].items():
        lines.append(f"  {d}: mean {v['mean']:.3f}, weighted {v['population_weighted_mean']:.3f}, "
                     f"median {v['median']:.3f}")
    lines.append("")
    lines.append("mean |SHAP| (metro)")
    for d, imp in s["shap_impact"].items():
        lines.append(f"  {d}: " + ", ".join(f"{k} {v:.4f}" for k, v in imp.items()))
    lines.append("")
    lines.append("elastic net")
    for party, e in s["elasticnet"].items():
        lines.append(f"  {party}: alpha {e['best']['alpha']:g}, l1_ratio {e['best']['l1_ratio']:g}, "
                     f"test R2 {_num(e['test_r2'])}")
    lines.append("")
    lines.append("t tests")
    for name, rows in s["tests"].items():
        lines.append(f"  {name}")
        for r in rows:
            lines.append(f"    {r['exposure_to']:<18} {r['dimension_1']:>22} vs "
                         f"{r['dimension_2']:<22} t={_num(r['t'])} p={_num(r['p'], '.3g')} "
                         f"{r['stars']}")
    return "\n".join(lines) + "\n"
