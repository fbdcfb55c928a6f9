"""Run configuration read from a flat, sectioned INI file.

Relative input paths are resolved against the directory of the config
file. Lists are comma separated.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .errors import ValidationError
from .learn.linear import DEFAULT_ALPHAS, DEFAULT_L1_RATIOS
from .learn.trees import DEFAULT_LEARNING_RATE, DEFAULT_MAX_DEPTH, DEFAULT_N_TREES

SWING_WINDOWS = {2012: (2012, 2016, 2020), 2008: (2008, 2012, 2016, 2020)}


@dataclass(frozen=True)
class NetworkInput:
    path: Path
    kind: str = "custom"
    normalize: str | None = None


@dataclass(frozen=True)
class RunConfig:
    counties: Path
    votes: Path
    covariates: Path
    networks: dict = field(default_factory=dict)  # dimension -> NetworkInput
    covariate_unit: str = "fraction"
    controls: tuple | None = None
    dimensions: tuple | None = None
    normal_vote_years: tuple = (2012, 2016, 2020)
    swing_window: int = 2012
    k_sweep: tuple = (5, 7, 10)
    exclude_self: bool = False
    en_alphas: tuple = DEFAULT_ALPHAS
    en_l1_ratios: tuple = DEFAULT_L1_RATIOS
    en_folds: int = 5
    en_train_ratio: float = 0.7
    gbm_n_trees: int = DEFAULT_N_TREES
    gbm_learning_rate: float = DEFAULT_LEARNING_RATE
    gbm_max_depth: int = DEFAULT_MAX_DEPTH
    gbm_train_ratio: float = 0.7
    gbm_background_max: int = 128
    seed: int = 0

    @property
    def swing_years(self) -> tuple:
        return SWING_WINDOWS[self.swing_window]

    def validate(self) -> "RunConfig":
        if not self.k_sweep:
            raise ValidationError("k sweep is empty")
        if any(k < 1 for k in self.k_sweep):
            raise ValidationError(f"k values must be positive: {self.k_sweep}")
        if self.swing_window not in SWING_WINDOWS:
            raise ValidationError(f"swing window must be one of {sorted(SWING_WINDOWS)}")
        if not self.normal_vote_years:
            raise ValidationError("normal vote needs at least one election year")
        if not self.en_alphas or not self.en_l1_ratios:
            raise ValidationError("elastic net grids must be nonempty")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        for name in ("counties", "votes", "covariates"):
            p = getattr(self, name)
            if not Path(p).is_file():
                raise ValidationError(f"{name} file not found: {p}")
        for dim, net in self.networks.items():
            if not Path(net.path).is_file():
                raise ValidationError(f"network file for {dim!r} not found: {net.path}")
        return self

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def fingerprint(self) -> str:
        """SHA-256 over the settings and input file contents (not their paths)."""
        d = asdict(self)
        inputs = {}
        for name in ("counties", "votes", "covariates"):
            inputs[name] = hashlib.sha256(Path(d.pop(name)).read_bytes()).hexdigest()
        nets = {}
        for dim, net in sorted(self.networks.items()):
            nets[dim] = {"kind": net.kind, "normalize": net.normalize,
                         "sha256": hashlib.sha256(Path(net.path).read_bytes()).hexdigest()}
        d["networks"] = nets
        d["inputs"] = inputs
        blob = json.dumps(d, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def settings(self) -> dict:
        """Settings without filesystem paths, for the manifest."""
        d = asdict(self)
        for name in ("counties", "votes", "covariates"):
            d.pop(name)
        d["networks"] = {k: {"kind": v.kind, "normalize": v.normalize}
                         for k, v in sorted(self.networks.items())}
        return d


def _list(value, cast=str):
    items = [v.strip() for v in value.split(",") if v.strip()]
    try:
        return tuple(cast(v) for v in items)
    except ValueError:
        raise ValidationError(f"cannot parse list {value!r}") from None


def _bool(value):
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {value!r}")


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}") from None
    base = path.parent

    def get(section, key, default=None):
        if cp.has_option(section, key):
            return cp.get(section, key)
        return default

    if not cp.has_section("inputs"):
        raise ValidationError(f"{path}: missing [inputs] section")
    inp = cp["inputs"]
    for key in ("counties", "votes", "covariates"):
        if key not in inp:
            raise ValidationError(f"{path}: [inputs] lacks {key}")
    networks = {}
    for key, value in inp.items():
        if key.startswith("network."):
            dim = key.split(".", 1)[1]
            networks[dim] = NetworkInput(
                base / value,
                kind=inp.get(f"kind.{dim}", "custom"),
                normalize=inp.get(f"normalize.{dim}") or None,
            )

    kw = dict(
        counties=base / inp["counties"],
        votes=base / inp["votes"],
        covariates=base / inp["covariates"],
        networks=networks,
        covariate_unit=inp.get("covariate_unit", "fraction"),
    )
    try:
        if get("inputs", "controls"):
            kw["controls"] = _list(get("inputs", "controls"))
        if get("exposure", "dimensions"):
            kw["dimensions"] = _list(get("exposure", "dimensions"))
        if get("exposure", "exclude_self"):
            kw["exclude_self"] = _bool(get("exposure", "exclude_self"))
        if get("elections", "normal_vote_years"):
            kw["normal_vote_years"] = _list(get("elections", "normal_vote_years"), int)
        if get("elections", "swing_window"):
            kw["swing_window"] = int(get("elections", "swing_window"))
        if get("spatial", "k") is not None:
            kw["k_sweep"] = _list(get("spatial", "k"), int)
        for key, attr, cast in (
            ("alphas", "en_alphas", lambda v: _list(v, float)),
            ("l1_ratios", "en_l1_ratios", lambda v: _list(v, float)),
            ("folds", "en_folds", int),
            ("train_ratio", "en_train_ratio", float),
        ):
            if get("elasticnet", key):
                kw[attr] = cast(get("elasticnet", key))
        for key, attr, cast in (
            ("n_trees", "gbm_n_trees", int),
            ("learning_rate", "gbm_learning_rate", float),
            ("max_depth", "gbm_max_depth", int),
            ("train_ratio", "gbm_train_ratio", float),
            ("background_max", "gbm_background_max", int),
        ):
            if get("gbm", key):
                kw[attr] = cast(get("gbm", key))
        if get("run", "seed"):
            kw["seed"] = int(get("run", "seed"))
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    return RunConfig(**kw).validate()
