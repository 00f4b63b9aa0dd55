"""Plain-text configuration for the command line driver.

A config document is a YAML key/value tree. Indicator weights are given
as fraction strings ("1/12") so scheme weights stay exact; custom
schemes, capital groupings, model specs, pension parameters, and
generator settings all live in the same document.
"""

from __future__ import annotations

from fractions import Fraction

import yaml

from .errors import ConfigError
from .livelihoods import CapitalGrouping, six_capital_grouping
from .mpi import (IndicatorScheme, IndicatorSpec, Orientation, builtin_scheme)
from .olg import OlgParams
from .synth import DgpConfig, MpiSampleProfile


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from None
    if cfg is None:
        cfg = {}
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a mapping")
    return cfg


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"missing {key!r} in {where}")
    return d[key]


def keys_from_config(cfg: dict) -> dict:
    keys = cfg.get("keys", {})
    if not isinstance(keys, dict):
        raise ConfigError("'keys' must be a mapping")
    return {
        "entity": keys.get("entity", "household"),
        "time": keys.get("time", "wave"),
        "province": keys.get("province"),
        "district": keys.get("district"),
        "cluster": keys.get("cluster"),
    }


def _indicator_from_config(d: dict) -> IndicatorSpec:
    if not isinstance(d, dict):
        raise ConfigError("each indicator must be a mapping")
    weight = _require(d, "weight", "indicator")
    try:
        weight = Fraction(str(weight))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"bad weight {weight!r}; use a fraction string "
                          "like '1/12'") from None
    orientation = d.get("orientation", Orientation.BELOW.value)
    cutoff = d.get("cutoff")
    return IndicatorSpec(
        id=_require(d, "id", "indicator"),
        dimension=_require(d, "dimension", "indicator"),
        weight=weight,
        cutoff=float(cutoff) if cutoff is not None else None,
        orientation=orientation,
        column=d.get("column"),
    )


def scheme_from_config(cfg: dict, *, scheme_override: str | None = None,
                       k_override: float | None = None) -> IndicatorScheme:
    """Resolve the indicator scheme: built-in by name or a custom block.

    Cutoff resolution order: explicit override, then the config's `k`,
    then the scheme default.
    """
    name = scheme_override or cfg.get("scheme", "baseline")
    k = k_override if k_override is not None else cfg.get("k")
    if name == "custom":
        block = cfg.get("custom_scheme")
        if not isinstance(block, dict):
            raise ConfigError("scheme 'custom' needs a 'custom_scheme' mapping")
        indicators = tuple(_indicator_from_config(d)
                           for d in _require(block, "indicators", "custom_scheme"))
        k_final = k if k is not None else block.get("k", 0.33)
        return IndicatorScheme(indicators, poverty_cutoff_k=float(k_final))
    return builtin_scheme(name, float(k) if k is not None else None)


def grouping_from_config(cfg: dict) -> CapitalGrouping:
    block = cfg.get("capitals")
    if block is None:
        return six_capital_grouping()
    if not isinstance(block, dict):
        raise ConfigError("'capitals' must map capital names to column lists")
    capitals = {cap: tuple(cols) for cap, cols in block.items()}
    orientations = cfg.get("orientations", {})
    if not isinstance(orientations, dict):
        raise ConfigError("'orientations' must be a mapping")
    return CapitalGrouping(capitals=capitals, orientations=dict(orientations))


def model_from_config(d: dict, *, default_cluster: str | None = None):
    from .estimators import ModelSpec
    if not isinstance(d, dict):
        raise ConfigError("model spec must be a mapping")
    return ModelSpec(
        response=_require(d, "response", "model"),
        regressors=tuple(_require(d, "regressors", "model")),
        fixed_effects=tuple(d.get("fixed_effects", ())),
        cluster=d.get("cluster", default_cluster),
        family=d.get("family", "logit"),
        intercept=bool(d.get("intercept", True)),
    )


def olg_params_from_config(d: dict) -> OlgParams:
    if not isinstance(d, dict):
        raise ConfigError("'olg.params' must be a mapping")
    import dataclasses
    valid = {f.name for f in dataclasses.fields(OlgParams)}
    unknown = set(d) - valid
    if unknown:
        raise ConfigError(f"unknown pension parameters: {sorted(unknown)}")
    return OlgParams(**{k: float(v) for k, v in d.items()})


def dgp_from_config(d: dict, seed: int) -> DgpConfig:
    import dataclasses
    valid = {f.name for f in dataclasses.fields(DgpConfig)}
    unknown = set(d) - valid
    if unknown:
        raise ConfigError(f"unknown generator settings: {sorted(unknown)}")
    kwargs = dict(d)
    kwargs.setdefault("seed", seed)
    for key in ("covariate_effects", "participation_covariate_effects", "thresholds"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    try:
        return DgpConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad generator settings: {exc}") from None


def mpi_profile_from_config(d: dict, seed: int) -> MpiSampleProfile:
    import dataclasses
    valid = {f.name for f in dataclasses.fields(MpiSampleProfile)}
    unknown = set(d) - valid
    if unknown:
        raise ConfigError(f"unknown sample settings: {sorted(unknown)}")
    kwargs = dict(d)
    kwargs.setdefault("seed", seed)
    return MpiSampleProfile(**kwargs)
