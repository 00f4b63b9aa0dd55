"""Dual-cutoff counting measures of multidimensional poverty.

Pipeline: evaluate per-indicator deprivations against cutoffs, weight
them into a household deprivation score, identify the poor at a score
cutoff k, and aggregate into incidence H, intensity A, and the adjusted
headcount ratio M0 = H * A, with censored headcounts, contribution
shares, subgroup decomposition, and incidence curves over k.

Weights are held as exact rationals so a scheme's weights sum to one by
construction, not merely within tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np
import pandas as pd

from .errors import (DataError, MissingValueError, SchemeError,
                     UndefinedResultError)
from .panel import PanelDataset

DEFAULT_POVERTY_CUTOFF = 0.33
POVERTY_CUTOFF_PRESETS = (0.2, 0.33, 0.4)


class Orientation(str, Enum):
    """How a raw column maps to a deprivation flag."""

    BELOW = "deprived_if_below"     # numeric value under the cutoff
    FLAG = "deprived_if_flag_set"   # binary column, 1 marks deprivation


class MissingPolicy(str, Enum):
    """Treatment of rows with missing indicator values."""

    DROP = "drop"                   # listwise deletion (default)
    NONDEPRIVED = "nondeprived"     # missing counts as not deprived
    STRICT = "strict"               # any missing value is an error


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise SchemeError(f"weight must be an exact rational, got {value!r}; "
                      "pass a Fraction or a string like '1/12'")


@dataclass(frozen=True)
class IndicatorSpec:
    """One indicator: id, dimension, exact weight, cutoff, orientation.

    `column` names the panel column the indicator reads; it defaults to
    the indicator id.
    """

    id: str
    dimension: str
    weight: Fraction
    cutoff: float | None = None
    orientation: Orientation = Orientation.BELOW
    column: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "weight", _as_fraction(self.weight))
        object.__setattr__(self, "orientation", Orientation(self.orientation))
        if not (0 < self.weight <= 1):
            raise SchemeError(f"indicator {self.id!r}: weight must lie in (0, 1]")
        if self.orientation is Orientation.BELOW and self.cutoff is None:
            raise SchemeError(f"indicator {self.id!r}: cutoff required for "
                              f"{Orientation.BELOW.value}")
        if self.orientation is Orientation.FLAG and self.cutoff is not None:
            raise SchemeError(f"indicator {self.id!r}: flag indicators take no cutoff")

    @property
    def source_column(self) -> str:
        return self.column if self.column is not None else self.id


@dataclass(frozen=True)
class IndicatorScheme:
    """An ordered set of indicators whose weights sum to exactly one."""

    indicators: tuple[IndicatorSpec, ...]
    poverty_cutoff_k: float = DEFAULT_POVERTY_CUTOFF

    def __post_init__(self):
        object.__setattr__(self, "indicators", tuple(self.indicators))
        if not self.indicators:
            raise SchemeError("scheme has no indicators")
        ids = [s.id for s in self.indicators]
        if len(set(ids)) != len(ids):
            raise SchemeError("duplicate indicator ids in scheme")
        total = sum((s.weight for s in self.indicators), Fraction(0))
        if total != 1:
            raise SchemeError(f"indicator weights sum to {total}, expected 1")
        if not (0 < self.poverty_cutoff_k <= 1):
            raise SchemeError("poverty cutoff k must lie in (0, 1]")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.indicators)

    @property
    def dimensions(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for s in self.indicators:
            seen.setdefault(s.dimension, None)
        return tuple(seen)

    def weights(self) -> np.ndarray:
        """Weights as floats, in indicator order."""
        return np.array([float(s.weight) for s in self.indicators])


def _flag(id, dimension, weight):
    return IndicatorSpec(id, dimension, _as_fraction(weight),
                         orientation=Orientation.FLAG)


def baseline_scheme(k: float = DEFAULT_POVERTY_CUTOFF) -> IndicatorScheme:
    """Three-dimension scheme: education, health, living standards.

    Two education indicators at 1/6 each, four health at 1/12, five
    living-standard at 1/15; each dimension carries weight 1/3.
    """
    ind = (
        IndicatorSpec("years_schooling", "education", Fraction(1, 6), cutoff=9.0),
        _flag("school_dropout", "education", Fraction(1, 6)),
        _flag("bmi_out_of_range", "health", Fraction(1, 12)),
        _flag("hospitalized", "health", Fraction(1, 12)),
        _flag("poor_self_health", "health", Fraction(1, 12)),
        _flag("no_health_insurance", "health", Fraction(1, 12)),
        _flag("dirty_cooking_fuel", "living_standards", Fraction(1, 15)),
        _flag("unsafe_water", "living_standards", Fraction(1, 15)),
        IndicatorSpec("housing_space", "living_standards", Fraction(1, 15), cutoff=12.0),
        _flag("no_electricity", "living_standards", Fraction(1, 15)),
        IndicatorSpec("durables_value", "living_standards", Fraction(1, 15), cutoff=1000.0),
    )
    return IndicatorScheme(ind, poverty_cutoff_k=k)


def with_income_scheme(k: float = DEFAULT_POVERTY_CUTOFF) -> IndicatorScheme:
    """Four-dimension variant adding per-capita income under 2300 as a
    dimension of its own; each dimension carries weight 1/4."""
    ind = (
        IndicatorSpec("years_schooling", "education", Fraction(1, 8), cutoff=9.0),
        _flag("school_dropout", "education", Fraction(1, 8)),
        _flag("bmi_out_of_range", "health", Fraction(1, 16)),
        _flag("hospitalized", "health", Fraction(1, 16)),
        _flag("poor_self_health", "health", Fraction(1, 16)),
        _flag("no_health_insurance", "health", Fraction(1, 16)),
        _flag("dirty_cooking_fuel", "living_standards", Fraction(1, 20)),
        _flag("unsafe_water", "living_standards", Fraction(1, 20)),
        IndicatorSpec("housing_space", "living_standards", Fraction(1, 20), cutoff=12.0),
        _flag("no_electricity", "living_standards", Fraction(1, 20)),
        IndicatorSpec("durables_value", "living_standards", Fraction(1, 20), cutoff=1000.0),
        IndicatorSpec("income_pc", "income", Fraction(1, 4), cutoff=2300.0),
    )
    return IndicatorScheme(ind, poverty_cutoff_k=k)


BUILTIN_SCHEMES = {"baseline": baseline_scheme, "with_income": with_income_scheme}


def builtin_scheme(name: str, k: float | None = None) -> IndicatorScheme:
    try:
        factory = BUILTIN_SCHEMES[name]
    except KeyError:
        raise SchemeError(f"unknown scheme {name!r}; "
                          f"choose from {sorted(BUILTIN_SCHEMES)}") from None
    return factory() if k is None else factory(k)


@dataclass
class DeprivationMatrix:
    """Binary deprivation statuses, one row per household-wave."""

    values: np.ndarray                      # (n, d) of {0, 1}
    indicator_ids: tuple[str, ...]
    household_keys: list[tuple]             # (entity, time) per row
    group_labels: np.ndarray | None = None
    n_dropped: int = 0                      # rows removed for missing data
    rows: np.ndarray | None = None          # positions into the source frame

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.uint8)
        if self.values.ndim != 2:
            raise DataError("deprivation matrix must be two-dimensional")
        if self.values.shape[1] != len(self.indicator_ids):
            raise DataError("column count does not match indicator ids")
        if not np.isin(self.values, (0, 1)).all():
            raise DataError("deprivation statuses must be 0 or 1")
        if len(self.household_keys) != self.values.shape[0]:
            raise DataError("household keys do not match row count")
        if self.group_labels is not None and len(self.group_labels) != self.values.shape[0]:
            raise DataError("group labels do not match row count")

    @property
    def n(self) -> int:
        return self.values.shape[0]


def evaluate_deprivations(panel: PanelDataset, scheme: IndicatorScheme, *,
                          missing: MissingPolicy | str = MissingPolicy.DROP,
                          group_column: str | None = None) -> DeprivationMatrix:
    """Map raw indicator columns to a binary deprivation matrix.

    Numeric indicators are deprived strictly below their cutoff (a value
    exactly at the cutoff is not deprived). Flag indicators must be 0/1
    and are deprived where the flag is 1.

    Missing values follow `missing`: listwise deletion by default, or
    treat-missing-as-nondeprived, or raise.
    """
    missing = MissingPolicy(missing)
    cols = [s.source_column for s in scheme.indicators]
    panel.require_columns(cols)
    if group_column is not None:
        panel.require_columns([group_column])
        if panel.frame[group_column].isna().any():
            raise DataError(f"group column {group_column!r} contains missing values")

    raw = panel.frame[cols].to_numpy(dtype=float)
    na = np.isnan(raw)
    n_dropped = 0
    keep = np.ones(len(raw), dtype=bool)
    if na.any():
        if missing is MissingPolicy.STRICT:
            bad = int(na.any(axis=1).sum())
            raise MissingValueError(f"{bad} rows have missing indicator values")
        if missing is MissingPolicy.DROP:
            keep = ~na.any(axis=1)
            n_dropped = int((~keep).sum())
            raw = raw[keep]
            na = na[keep]
    if raw.shape[0] == 0:
        raise DataError("no rows remain after missing-value handling")

    g = np.zeros(raw.shape, dtype=np.uint8)
    for j, spec in enumerate(scheme.indicators):
        col = raw[:, j]
        obs = ~na[:, j]
        if spec.orientation is Orientation.BELOW:
            g[obs, j] = (col[obs] < spec.cutoff).astype(np.uint8)
        else:
            vals = col[obs]
            if not np.isin(vals, (0.0, 1.0)).all():
                raise DataError(f"flag indicator {spec.id!r} has values outside {{0, 1}}")
            g[obs, j] = (vals == 1.0).astype(np.uint8)
        # under NONDEPRIVED, unobserved entries stay 0 by construction

    sub = panel.frame.loc[keep] if n_dropped else panel.frame
    keys = list(zip(sub[panel.entity].tolist(), sub[panel.time].tolist()))
    groups = sub[group_column].to_numpy() if group_column is not None else None
    return DeprivationMatrix(g, scheme.ids, keys, group_labels=groups,
                             n_dropped=n_dropped, rows=np.flatnonzero(keep))


def _check_alignment(matrix: DeprivationMatrix, scheme: IndicatorScheme) -> None:
    if matrix.indicator_ids != scheme.ids:
        raise SchemeError("deprivation matrix indicators do not match scheme "
                          f"({matrix.indicator_ids} vs {scheme.ids})")


def deprivation_scores(matrix: DeprivationMatrix, scheme: IndicatorScheme) -> np.ndarray:
    """Weighted deprivation score per row, in [0, 1]."""
    _check_alignment(matrix, scheme)
    return matrix.values @ scheme.weights()


@dataclass
class MpiResult:
    """Aggregate poverty measures at cutoff k."""

    h: float                                # incidence, q / n
    a: float                                # mean score among the poor
    m0: float                               # censored mean score, H * A
    q: int
    n: int
    k_used: float
    indicator_ids: tuple[str, ...]
    censored_headcounts: np.ndarray         # poor-and-deprived count per indicator
    contributions: np.ndarray | None        # per-indicator share of M0, None if M0 == 0
    dimension_contributions: dict[str, float] | None = None

    def as_row(self) -> dict:
        """Flat mapping with fixed ordering: k, H, A, M0, q_*, C_*."""
        row = {"k": self.k_used, "H": self.h, "A": self.a, "M0": self.m0}
        for ind, q in zip(self.indicator_ids, self.censored_headcounts):
            row[f"q_{ind}"] = int(q)
        for i, ind in enumerate(self.indicator_ids):
            row[f"C_{ind}"] = float(self.contributions[i]) if self.contributions is not None else float("nan")
        return row


def compute_mpi(matrix: DeprivationMatrix, scheme: IndicatorScheme,
                k: float | None = None) -> MpiResult:
    """Identify the poor at cutoff k and aggregate H, A, and M0.

    A household is poor when its weighted score is at least k. With no
    poor households H, A, M0 are all zero and contribution shares are
    undefined (None).
    """
    _check_alignment(matrix, scheme)
    if k is None:
        k = scheme.poverty_cutoff_k
    if not (0 < k <= 1):
        raise ValueError("poverty cutoff k must lie in (0, 1]")
    if matrix.n == 0:
        raise DataError("empty deprivation matrix")

    w = scheme.weights()
    scores = matrix.values @ w
    poor = scores >= k
    n = matrix.n
    q = int(poor.sum())
    h = q / n
    a = float(scores[poor].mean()) if q else 0.0
    m0 = float(scores[poor].sum() / n)
    censored = matrix.values[poor].sum(axis=0).astype(int) if q else np.zeros(len(w), dtype=int)

    contributions = None
    dim_contrib = None
    if m0 > 0:
        contributions = censored * w / (n * m0)
        dim_contrib = {}
        for spec, c in zip(scheme.indicators, contributions):
            dim_contrib[spec.dimension] = dim_contrib.get(spec.dimension, 0.0) + float(c)
    return MpiResult(h=h, a=a, m0=m0, q=q, n=n, k_used=float(k),
                     indicator_ids=scheme.ids, censored_headcounts=censored,
                     contributions=contributions,
                     dimension_contributions=dim_contrib)


@dataclass
class ContributionBreakdown:
    indicator: dict[str, float]
    dimension: dict[str, float]


def dimensional_contributions(matrix: DeprivationMatrix, scheme: IndicatorScheme,
                              k: float | None = None) -> ContributionBreakdown:
    """Per-indicator and per-dimension shares of M0. Error when M0 = 0."""
    res = compute_mpi(matrix, scheme, k)
    if res.contributions is None:
        raise UndefinedResultError("contribution shares undefined: M0 is zero")
    return ContributionBreakdown(
        indicator={ind: float(c) for ind, c in zip(res.indicator_ids, res.contributions)},
        dimension=dict(res.dimension_contributions),
    )


@dataclass
class SubgroupDecomposition:
    total: MpiResult
    groups: dict                            # label -> MpiResult
    shares: dict                            # label -> population share

    def reconstructed_m0(self) -> float:
        return sum(self.shares[g] * self.groups[g].m0 for g in self.groups)


def subgroup_decompose(matrix: DeprivationMatrix, scheme: IndicatorScheme,
                       k: float | None = None,
                       group_labels=None) -> SubgroupDecomposition:
    """Population-share weighted decomposition of M0 across groups.

    Every row must carry a label; shares are n_g / n and the share
    weighted group M0 values sum back to the total.
    """
    if group_labels is None:
        group_labels = matrix.group_labels
    if group_labels is None:
        raise DataError("no group labels on matrix and none supplied")
    labels = np.asarray(group_labels)
    if len(labels) != matrix.n:
        raise DataError("group labels do not match row count")
    if pd.isna(labels).any():
        raise DataError("group labels contain missing values")

    total = compute_mpi(matrix, scheme, k)
    groups: dict = {}
    shares: dict = {}
    for lab in pd.unique(labels):
        sel = labels == lab
        sub = DeprivationMatrix(matrix.values[sel], matrix.indicator_ids,
                                [matrix.household_keys[i] for i in np.flatnonzero(sel)])
        groups[lab] = compute_mpi(sub, scheme, k)
        shares[lab] = float(sel.sum() / matrix.n)
    return SubgroupDecomposition(total=total, groups=groups, shares=shares)


def incidence_curve(matrix: DeprivationMatrix, scheme: IndicatorScheme,
                    k_grid) -> list[tuple[float, float, float]]:
    """(k, H, M0) at each cutoff of a strictly increasing grid in (0, 1]."""
    grid = [float(k) for k in k_grid]
    if not grid:
        raise ValueError("empty cutoff grid")
    if any(not (0 < k <= 1) for k in grid):
        raise ValueError("cutoff grid values must lie in (0, 1]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("cutoff grid must be strictly increasing")
    out = []
    for k in grid:
        res = compute_mpi(matrix, scheme, k)
        out.append((k, res.h, res.m0))
    return out
