"""Seeded synthetic panels for exercising every estimator and measure.

`generate_panel` builds a household panel with districts nested in
provinces, an ordinal pension-participation count driven by a district
adoption level plus a rising national trend (the variation a shift-share
instrument picks up), and binary and continuous outcomes whose latent
errors can correlate with the participation equation's. Latent errors
ship in the frame (underscore columns) so error-structure checks don't
have to re-derive them.

`generate_mpi_sample` builds raw indicator columns compatible with the
built-in deprivation schemes, plus livelihood-asset columns, from
per-indicator deprivation probabilities. Distributions are synthetic
throughout; only the requested moments are calibrated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DataError
from .panel import PanelDataset

DEFAULT_DEPRIVATION_PROBS = {
    "years_schooling": 0.45,
    "school_dropout": 0.10,
    "bmi_out_of_range": 0.30,
    "hospitalized": 0.12,
    "poor_self_health": 0.18,
    "no_health_insurance": 0.07,
    "dirty_cooking_fuel": 0.35,
    "unsafe_water": 0.20,
    "housing_space": 0.15,
    "no_electricity": 0.03,
    "durables_value": 0.30,
    "income_pc": 0.25,
}

# (cutoff, low draw range, high draw range) for cutoff-type indicators
_CUTOFF_RANGES = {
    "years_schooling": (9.0, (0.0, 8.5), (9.0, 16.0)),
    "housing_space": (12.0, (3.0, 11.5), (12.0, 60.0)),
    "durables_value": (1000.0, (0.0, 990.0), (1000.0, 20000.0)),
    "income_pc": (2300.0, (200.0, 2290.0), (2300.0, 30000.0)),
}

LIVELIHOOD_COLUMNS = (
    "education_years", "health_spending", "gift_income", "gift_spending",
    "social_status", "durables_spending", "necessities_spending",
    "deposits", "financial_products", "land_owned", "land_rent_paid",
    "life_satisfaction", "future_confidence",
)


@dataclass(frozen=True)
class DgpConfig:
    """Ground truth for the estimation panel generator.

    `participation_effect` is the outcome coefficient on the ordinal
    participation count; `rho` correlates the participation and outcome
    latent errors (requires normal errors). `cluster_sd` adds a
    household random effect to the outcomes, `drop_rate` knocks out
    household-waves at random.
    """

    n_households: int
    seed: int
    waves: int = 5
    n_provinces: int = 5
    n_districts: int = 20
    participation_effect: float = -0.5
    covariate_effects: tuple = (0.4, -0.3)
    participation_covariate_effects: tuple = (0.3, 0.2)
    adoption_strength: float = 1.0
    adoption_spread: float = 0.6
    national_trend: float = 0.35
    outcome_intercept: float = 0.0
    rho: float = 0.0
    cluster_sd: float = 0.0
    province_sd: float = 0.5
    wave_effect: float = 0.3
    error_family: str = "normal"
    thresholds: tuple = (0.0, 1.1, 2.2)
    drop_rate: float = 0.0

    def __post_init__(self):
        if self.n_households < 1 or self.waves < 1:
            raise DataError("need at least one household and one wave")
        if not (1 <= self.n_provinces <= self.n_districts <= self.n_households):
            raise DataError("need provinces <= districts <= households")
        if not (-1.0 < self.rho < 1.0):
            raise DataError("rho must lie in (-1, 1)")
        if self.error_family not in ("normal", "logistic"):
            raise DataError("error family must be 'normal' or 'logistic'")
        if self.error_family == "logistic" and self.rho != 0.0:
            raise DataError("correlated errors require the normal family")
        if len(self.thresholds) != 3 or not (self.thresholds[0] < self.thresholds[1]
                                             < self.thresholds[2]):
            raise DataError("thresholds must be three strictly increasing values")
        if not (0.0 <= self.drop_rate < 1.0):
            raise DataError("drop rate must lie in [0, 1)")


def generate_panel(config: DgpConfig) -> PanelDataset:
    """Simulate the estimation panel; ground truth lands in `.meta`.

    Columns: household, wave, province, district, x1, x2, participation
    (counts 0..3), poor (binary), y_linear (continuous outcome sharing
    the same error), and the latent errors _err_participation and
    _err_outcome. Identical config (seed included) reproduces the frame
    exactly.
    """
    rng = np.random.default_rng(config.seed)
    H, T = config.n_households, config.waves
    g1, g2 = config.participation_covariate_effects
    th1, th2 = config.covariate_effects

    district = np.arange(H) % config.n_districts
    province_of_district = np.arange(config.n_districts) % config.n_provinces
    province = province_of_district[district]

    province_effect = rng.normal(0.0, config.province_sd, config.n_provinces)
    district_level = rng.normal(0.0, config.adoption_spread, config.n_districts)
    household_effect = (rng.normal(0.0, config.cluster_sd, H)
                        if config.cluster_sd > 0 else np.zeros(H))

    x1 = rng.normal(0.0, 1.0, (H, T))
    x2 = rng.normal(0.0, 1.0, (H, T))
    u = rng.normal(0.0, 1.0, (H, T))
    if config.error_family == "normal":
        eps = config.rho * u + np.sqrt(1.0 - config.rho ** 2) * rng.normal(0.0, 1.0, (H, T))
    else:
        eps = rng.logistic(0.0, 1.0, (H, T))

    t_idx = np.arange(T, dtype=float)
    tau = config.wave_effect * (t_idx - (T - 1) / 2.0)
    national = config.national_trend * (t_idx - (T - 1) / 2.0)

    adoption = district_level[district][:, None] + national[None, :]
    latent_part = (config.adoption_strength * adoption + g1 * x1 + g2 * x2 + u)
    participation = ((latent_part > config.thresholds[0]).astype(int)
                     + (latent_part > config.thresholds[1])
                     + (latent_part > config.thresholds[2]))

    index = (config.outcome_intercept + config.participation_effect * participation
             + th1 * x1 + th2 * x2
             + province_effect[province][:, None] + tau[None, :]
             + household_effect[:, None])
    poor = (index + eps > 0.0).astype(int)
    y_linear = index + eps

    frame = pd.DataFrame({
        "household": np.repeat(np.arange(H), T),
        "wave": np.tile(np.arange(1, T + 1), H),
        "province": np.repeat(province, T),
        "district": np.repeat(district, T),
        "x1": x1.ravel(),
        "x2": x2.ravel(),
        "participation": participation.ravel(),
        "poor": poor.ravel(),
        "y_linear": y_linear.ravel(),
        "_err_participation": u.ravel(),
        "_err_outcome": eps.ravel(),
    })
    if config.drop_rate > 0:
        keep = rng.random(len(frame)) >= config.drop_rate
        if not keep.any():
            raise DataError("drop rate removed every row")
        frame = frame.loc[keep].reset_index(drop=True)

    meta = {
        "participation_effect": config.participation_effect,
        "covariate_effects": list(config.covariate_effects),
        "participation_covariate_effects": list(config.participation_covariate_effects),
        "rho": config.rho,
        "outcome_intercept": config.outcome_intercept,
        "wave_effects": tau.tolist(),
        "province_effects": province_effect.tolist(),
        "district_levels": district_level.tolist(),
        "error_family": config.error_family,
        "thresholds": list(config.thresholds),
        "seed": config.seed,
    }
    return PanelDataset(frame, entity="household", time="wave",
                        province="province", district="district",
                        cluster="household", meta=meta)


@dataclass(frozen=True)
class MpiSampleProfile:
    """Deprivation base rates and layout for the measurement generator."""

    n_households: int
    seed: int
    waves: int = 1
    rural_share: float = 0.5
    n_provinces: int = 4
    n_districts: int = 12
    deprivation_probs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_households < 1 or self.waves < 1:
            raise DataError("need at least one household and one wave")
        if not (0.0 <= self.rural_share <= 1.0):
            raise DataError("rural share must lie in [0, 1]")
        probs = dict(DEFAULT_DEPRIVATION_PROBS)
        unknown = set(self.deprivation_probs) - set(probs)
        if unknown:
            raise DataError(f"unknown indicators in deprivation probs: "
                            f"{sorted(unknown)}")
        probs.update(self.deprivation_probs)
        for ind, p in probs.items():
            if not (0.0 <= p <= 1.0):
                raise DataError(f"deprivation probability for {ind!r} must "
                                "lie in [0, 1]")
        object.__setattr__(self, "deprivation_probs", probs)


def generate_mpi_sample(profile: MpiSampleProfile) -> PanelDataset:
    """Simulate raw indicator and livelihood columns household by wave.

    Cutoff-type indicators draw a value strictly below the cutoff with
    the configured probability, at or above it otherwise; flag-type
    indicators are Bernoulli draws. Livelihood-asset columns are
    positive skewed draws with no relation to the deprivations.
    """
    rng = np.random.default_rng(profile.seed)
    H, T = profile.n_households, profile.waves
    n = H * T
    probs = profile.deprivation_probs

    district = np.arange(H) % profile.n_districts
    province = district % profile.n_provinces
    rural = (rng.random(H) < profile.rural_share).astype(int)

    data = {
        "household": np.repeat(np.arange(H), T),
        "wave": np.tile(np.arange(1, T + 1), H),
        "province": np.repeat(province, T),
        "district": np.repeat(district, T),
        "area": np.repeat(np.where(rural == 1, "rural", "urban"), T),
    }
    for ind, p in probs.items():
        deprived = rng.random(n) < p
        if ind in _CUTOFF_RANGES:
            _, lo_rng, hi_rng = _CUTOFF_RANGES[ind]
            low = rng.uniform(*lo_rng, n)
            high = rng.uniform(*hi_rng, n)
            data[ind] = np.where(deprived, low, high)
        else:
            data[ind] = deprived.astype(int)

    data["education_years"] = rng.uniform(0.0, 16.0, n)
    data["health_spending"] = rng.lognormal(6.0, 1.0, n)
    data["gift_income"] = rng.lognormal(4.0, 1.2, n)
    data["gift_spending"] = rng.lognormal(4.0, 1.2, n)
    data["social_status"] = rng.integers(1, 6, n)
    data["durables_spending"] = rng.lognormal(6.5, 1.0, n)
    data["necessities_spending"] = rng.lognormal(7.0, 0.7, n)
    data["deposits"] = rng.lognormal(8.0, 1.5, n)
    data["financial_products"] = rng.lognormal(7.0, 1.5, n) * (rng.random(n) < 0.3)
    data["land_owned"] = rng.uniform(0.0, 20.0, n) * (rng.random(n) < 0.7)
    data["land_rent_paid"] = rng.lognormal(3.0, 1.0, n) * (rng.random(n) < 0.3)
    data["life_satisfaction"] = rng.integers(1, 6, n)
    data["future_confidence"] = rng.integers(1, 6, n)
    data["participation"] = rng.integers(0, 4, n)

    frame = pd.DataFrame(data)
    meta = {"deprivation_probs": dict(probs), "rural_share": profile.rural_share,
            "seed": profile.seed}
    return PanelDataset(frame, entity="household", time="wave",
                        province="province", district="district",
                        cluster="household", meta=meta)
