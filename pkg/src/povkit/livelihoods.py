"""Entropy-weighted livelihood capital scores.

Indicators are min-max normalized to [0, 1], weighted by information
entropy within each capital, and summed into one score per capital; the
six capital scores add up to a composite in [0, 6].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DataError, DegenerateDataError, SchemeError, UnknownColumnError
from .panel import PanelDataset

CAPITAL_SCORE_COLUMNS = {
    "human": "HScore",
    "social": "SScore",
    "physical": "PHScore",
    "financial": "FScore",
    "natural": "NScore",
    "psychological": "PSScore",
}
COMPOSITE_COLUMN = "ZScore"


@dataclass(frozen=True)
class CapitalGrouping:
    """Assignment of indicator columns to named capitals.

    `orientations` maps a column to "benefit" (more is better, default)
    or "cost" (less is better), which controls the direction of min-max
    normalization.
    """

    capitals: dict
    orientations: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.capitals:
            raise SchemeError("no capitals defined")
        seen: dict[str, str] = {}
        for cap, cols in self.capitals.items():
            if len(cols) == 0:
                raise SchemeError(f"capital {cap!r} has no indicators")
            for c in cols:
                if c in seen:
                    raise SchemeError(f"indicator {c!r} assigned to both "
                                      f"{seen[c]!r} and {cap!r}")
                seen[c] = cap
        for col, orient in self.orientations.items():
            if orient not in ("benefit", "cost"):
                raise SchemeError(f"orientation for {col!r} must be 'benefit' or 'cost'")
            if col not in seen:
                raise SchemeError(f"orientation given for unknown indicator {col!r}")

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(c for cols in self.capitals.values() for c in cols)

    def orientation(self, column: str) -> str:
        return self.orientations.get(column, "benefit")


def six_capital_grouping() -> CapitalGrouping:
    """Default grouping: human, social, physical, financial, natural,
    psychological capital, two or three indicators each."""
    return CapitalGrouping(capitals={
        "human": ("education_years", "health_spending"),
        "social": ("gift_income", "gift_spending", "social_status"),
        "physical": ("durables_spending", "necessities_spending"),
        "financial": ("deposits", "financial_products"),
        "natural": ("land_owned", "land_rent_paid"),
        "psychological": ("life_satisfaction", "future_confidence"),
    })


def normalize_indicators(frame: pd.DataFrame, columns,
                         orientations: dict | None = None):
    """Min-max normalize columns to [0, 1].

    Benefit columns map x to (x - min) / (max - min); cost columns to
    (max - x) / (max - min). A constant column has no usable range: it
    comes back as zeros and is flagged degenerate.

    Returns (matrix, degenerate) where degenerate is a boolean mask per
    column.
    """
    orientations = orientations or {}
    columns = list(columns)
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise UnknownColumnError(f"columns not in data: {missing}")
    if len(frame) < 2:
        raise DataError("normalization needs at least two observations")
    out = np.empty((len(frame), len(columns)))
    degenerate = np.zeros(len(columns), dtype=bool)
    for j, col in enumerate(columns):
        x = frame[col].to_numpy(dtype=float)
        if np.isnan(x).any():
            raise DataError(f"column {col!r} contains missing values")
        lo, hi = x.min(), x.max()
        if hi == lo:
            out[:, j] = 0.0
            degenerate[j] = True
            continue
        if orientations.get(col, "benefit") == "cost":
            out[:, j] = (hi - x) / (hi - lo)
        else:
            out[:, j] = (x - lo) / (hi - lo)
    return out, degenerate


@dataclass
class EntropyWeights:
    """Entropy, divergence, and normalized weights per column."""

    columns: tuple[str, ...]
    entropy: np.ndarray          # e_j in [0, 1]
    divergence: np.ndarray       # d_j = 1 - e_j
    weights: np.ndarray          # sums to 1; zero on degenerate columns
    degenerate: np.ndarray       # boolean mask


def entropy_weights(normalized: np.ndarray, columns,
                    degenerate=None) -> EntropyWeights:
    """Entropy weights over normalized [0, 1] columns.

    Column shares p_ij = x_ij / sum_i x_ij (zero where the column sums
    to zero); entropy e_j = -(1/ln n) sum_i p_ij ln p_ij with 0 ln 0 = 0.
    Divergence d_j = 1 - e_j; weights are d_j over their sum. Degenerate
    columns are forced to weight zero and excluded from the sum.
    """
    x = np.asarray(normalized, dtype=float)
    if x.ndim != 2:
        raise DataError("normalized matrix must be two-dimensional")
    n, m = x.shape
    columns = tuple(columns)
    if len(columns) != m:
        raise DataError("column names do not match matrix width")
    if n < 2:
        raise DataError("entropy weights need at least two observations")
    if (x < 0).any() or (x > 1).any():
        raise DataError("normalized values must lie in [0, 1]")
    if degenerate is None:
        degenerate = x.max(axis=0) == x.min(axis=0)
    degenerate = np.asarray(degenerate, dtype=bool)

    colsum = x.sum(axis=0)
    safe = np.where(colsum > 0, colsum, 1.0)
    p = x / safe
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0, p * np.log(p), 0.0)
    e = -plogp.sum(axis=0) / np.log(n)
    e = np.clip(e, 0.0, 1.0)    # guard rounding at the boundaries
    d = 1.0 - e
    usable = ~degenerate
    if not usable.any():
        raise DegenerateDataError("every column is constant; weights undefined")
    mass = d[usable].sum()
    if mass <= 0:
        # all usable columns carry maximal entropy: fall back to equal weights
        w = np.where(usable, 1.0 / usable.sum(), 0.0)
    else:
        w = np.where(usable, d / mass, 0.0)
    return EntropyWeights(columns=columns, entropy=e, divergence=d,
                          weights=w, degenerate=degenerate)


@dataclass
class LivelihoodScores:
    """Per-row capital scores plus the weights behind them."""

    scores: pd.DataFrame                 # capital score columns + composite
    weights: dict                        # capital -> EntropyWeights (or wave -> capital -> ...)
    per_wave: bool = False


def _score_block(frame, grouping) -> tuple[pd.DataFrame, dict]:
    score_cols = {}
    weight_map = {}
    for cap, cols in grouping.capitals.items():
        orient = {c: grouping.orientation(c) for c in cols}
        normalized, degenerate = normalize_indicators(frame, cols, orient)
        if degenerate.all():
            raise DegenerateDataError(f"capital {cap!r}: every indicator is constant")
        ew = entropy_weights(normalized, cols, degenerate)
        weight_map[cap] = ew
        name = CAPITAL_SCORE_COLUMNS.get(cap, f"{cap}_score")
        score_cols[name] = normalized @ ew.weights
    scores = pd.DataFrame(score_cols, index=frame.index)
    scores[COMPOSITE_COLUMN] = scores.sum(axis=1)
    return scores, weight_map


def capital_scores(panel, grouping: CapitalGrouping, *,
                   per_wave: bool = False,
                   wave_column: str | None = None) -> LivelihoodScores:
    """Entropy-weighted capital scores for each row of a panel.

    Normalization and weights pool all waves by default, so scores are
    comparable across waves. With `per_wave=True` both are computed
    separately within each wave; scores are then comparable only within
    a wave.
    """
    if isinstance(panel, PanelDataset):
        frame = panel.frame
        wave_column = wave_column or panel.time
    else:
        frame = panel
    missing = [c for c in grouping.columns if c not in frame.columns]
    if missing:
        raise UnknownColumnError(f"columns not in panel: {missing}")

    if not per_wave:
        scores, weight_map = _score_block(frame, grouping)
        return LivelihoodScores(scores=scores, weights=weight_map)

    if wave_column is None:
        raise DataError("per-wave scoring needs a wave column")
    if wave_column not in frame.columns:
        raise UnknownColumnError(f"wave column {wave_column!r} not in panel")
    parts = []
    weights_by_wave = {}
    for wave, sub in frame.groupby(wave_column, sort=True):
        s, w = _score_block(sub, grouping)
        parts.append(s)
        weights_by_wave[wave] = w
    scores = pd.concat(parts).loc[frame.index]
    return LivelihoodScores(scores=scores, weights=weights_by_wave, per_wave=True)
