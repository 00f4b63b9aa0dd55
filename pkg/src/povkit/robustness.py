"""Robustness tools: winsorization, propensity matching, structural
break tests, and permutation inference."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.stats import norm

from .errors import DataError, UnknownColumnError
from .estimators import FitResult, ModelSpec, build_design, fit, fit_logit
from .panel import PanelDataset


def winsorize_bounds(values, lower: float = 0.01, upper: float = 0.99):
    """Order-statistic clipping bounds for `winsorize`.

    The lower bound is the order statistic at position ceil((n-1) *
    lower) of the sorted data, the upper bound the one at floor((n-1) *
    upper). Both bounds are existing data points, which makes clipping
    exactly idempotent: re-deriving the bounds on clipped data returns
    the same two points bit for bit.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise DataError("cannot winsorize an empty array")
    if np.isnan(x).any():
        raise DataError("winsorize input contains missing values")
    if not (0.0 <= lower < upper <= 1.0):
        raise ValueError("need 0 <= lower < upper <= 1")
    lo = np.quantile(x, lower, method="higher")
    hi = np.quantile(x, upper, method="lower")
    return float(lo), float(hi)


def winsorize(values, lower: float = 0.01, upper: float = 0.99) -> np.ndarray:
    """Clip values to the order-statistic bounds of `winsorize_bounds`.

    Values below the lower bound are set to it, values above the upper
    bound likewise. In the degenerate case where the window is narrower
    than one order-statistic gap (tiny samples), the bounds cross and
    the data come back unchanged.
    """
    x = np.asarray(values, dtype=float)
    lo, hi = winsorize_bounds(x, lower, upper)
    if lo > hi:
        return x.copy()
    return np.clip(x, lo, hi)


def winsorize_frame(frame: pd.DataFrame, columns, lower: float = 0.01,
                    upper: float = 0.99) -> pd.DataFrame:
    """Winsorize several columns of a table; returns a modified copy."""
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise UnknownColumnError(f"columns not in data: {missing}")
    out = frame.copy()
    for col in columns:
        out[col] = winsorize(out[col].to_numpy(dtype=float), lower, upper)
    return out


# ---------------------------------------------------------------------------
# propensity score matching


@dataclass
class MatchResult:
    """Greedy one-to-one nearest-neighbour matches on the logit score."""

    pairs: list                      # (treated_pos, control_pos, |score gap|)
    scores: np.ndarray               # propensity score per row
    balance: pd.DataFrame            # covariate, smd_before, smd_after
    n_treated: int
    n_control: int
    n_matched: int
    caliper: float | None

    def matched_positions(self):
        t = np.array([p[0] for p in self.pairs], dtype=int)
        c = np.array([p[1] for p in self.pairs], dtype=int)
        return t, c


def _smd(x_t, x_c) -> float:
    m_t, m_c = float(np.mean(x_t)), float(np.mean(x_c))
    v_t = float(np.var(x_t, ddof=1)) if len(x_t) > 1 else 0.0
    v_c = float(np.var(x_c, ddof=1)) if len(x_c) > 1 else 0.0
    denom = np.sqrt((v_t + v_c) / 2.0)
    if denom == 0.0:
        return 0.0 if m_t == m_c else float("inf")
    return (m_t - m_c) / denom


def propensity_match(data, treatment: str, covariates, *,
                     caliper: float | None = None) -> MatchResult:
    """Match each treated row to the nearest unmatched control row.

    Scores come from a logit of the treatment flag on the covariates.
    Treated rows are processed in row order; each takes the remaining
    control with the smallest absolute score gap, ties going to the
    lowest row position. With a caliper, treated rows whose nearest
    remaining control lies further than the caliper stay unmatched; it
    is an error if nothing matches at all.
    """
    frame = data.frame if isinstance(data, PanelDataset) else data
    covariates = tuple(covariates)
    cols = [treatment] + list(covariates)
    missing = [c for c in cols if c not in frame.columns]
    if missing:
        raise UnknownColumnError(f"columns not in data: {missing}")
    if frame[cols].isna().any().any():
        raise DataError("matching requires complete treatment and covariate "
                        "columns")
    t = frame[treatment].to_numpy(dtype=float)
    if not np.isin(t, (0.0, 1.0)).all():
        raise DataError("treatment must be binary 0/1")
    if t.min() == t.max():
        raise DataError("treatment has no variation")
    if caliper is not None and caliper < 0:
        raise ValueError("caliper must be nonnegative")

    ps_fit = fit_logit(frame, ModelSpec(treatment, covariates, family="logit"))
    design = build_design(frame, ps_fit.spec)
    scores = 1.0 / (1.0 + np.exp(-(design.X @ ps_fit.coef)))

    treated_pos = np.flatnonzero(t == 1.0)
    control_pos = np.flatnonzero(t == 0.0)
    available = np.ones(len(control_pos), dtype=bool)
    pairs = []
    for tp in treated_pos:
        if not available.any():
            break
        cand = np.flatnonzero(available)
        gaps = np.abs(scores[control_pos[cand]] - scores[tp])
        j = int(np.argmin(gaps))        # first minimum = lowest row position
        if caliper is not None and gaps[j] > caliper:
            continue
        pairs.append((int(tp), int(control_pos[cand[j]]), float(gaps[j])))
        available[cand[j]] = False
    if not pairs:
        raise DataError("no matches found" + (" within the caliper"
                                              if caliper is not None else ""))

    t_pos = np.array([p[0] for p in pairs], dtype=int)
    c_pos = np.array([p[1] for p in pairs], dtype=int)
    rows = []
    for cov in covariates:
        x = frame[cov].to_numpy(dtype=float)
        rows.append({"covariate": cov,
                     "smd_before": _smd(x[t == 1.0], x[t == 0.0]),
                     "smd_after": _smd(x[t_pos], x[c_pos])})
    balance = pd.DataFrame(rows)
    return MatchResult(pairs=pairs, scores=scores, balance=balance,
                       n_treated=int((t == 1.0).sum()),
                       n_control=int((t == 0.0).sum()),
                       n_matched=len(pairs), caliper=caliper)


# ---------------------------------------------------------------------------
# structural break (group interaction) tests


@dataclass
class ChowResult:
    """Per-regressor slope gaps between two groups, with Wald tests."""

    group: str
    group_high: object               # category coded 1
    table: pd.DataFrame              # regressor, estimate, se, z, p
    fit: FitResult

    def gap(self, regressor: str) -> float:
        row = self.table.loc[self.table["regressor"] == regressor]
        if row.empty:
            raise KeyError(regressor)
        return float(row["estimate"].iloc[0])


def chow_test(data, spec: ModelSpec, group: str) -> ChowResult:
    """Test slope equality across two groups via interactions.

    The pooled model gains the group indicator and group-times-regressor
    interactions; each interaction's coefficient is the group gap in
    that slope, tested with the model's (cluster-) robust covariance.
    Swapping the two group labels flips every gap's sign.
    """
    frame = (data.frame if isinstance(data, PanelDataset) else data)
    if group not in frame.columns:
        raise UnknownColumnError(f"group column {group!r} not in data")
    if frame[group].isna().any():
        raise DataError(f"group column {group!r} has missing values")
    cats = sorted(pd.unique(frame[group]))
    if len(cats) != 2:
        raise DataError(f"group column {group!r} must have exactly two "
                        f"categories, found {len(cats)}")
    g = (frame[group] == cats[1]).to_numpy(dtype=float)

    work = frame.copy()
    gcol = f"{group}__hi"
    work[gcol] = g
    inter = []
    for reg in spec.regressors:
        name = f"{gcol}_x_{reg}"
        work[name] = g * work[reg].to_numpy(dtype=float)
        inter.append(name)
    aug = ModelSpec(spec.response, spec.regressors + (gcol,) + tuple(inter),
                    spec.fixed_effects, spec.cluster, spec.family,
                    spec.intercept)
    result = fit(work, aug)

    rows = []
    for reg, name in zip(spec.regressors, inter):
        est = result[name]
        se = result.se_of(name)
        z = est / se
        rows.append({"regressor": reg, "estimate": est, "se": se, "z": z,
                     "p": float(2.0 * norm.sf(abs(z)))})
    return ChowResult(group=group, group_high=cats[1],
                      table=pd.DataFrame(rows), fit=result)


@dataclass
class PermutationResult:
    p_value: float
    observed: float
    replications: int
    regressor: str
    group: str


def permutation_test(data, spec: ModelSpec, group: str, *,
                     regressor: str | None = None,
                     replications: int = 199, seed: int = 0) -> PermutationResult:
    """Permutation p-value for one group-interaction coefficient.

    Group labels are permuted across rows; the two-sided p-value is
    (1 + #{|stat_perm| >= |stat_obs|}) / (replications + 1), which
    counts the identity permutation and so never falls below
    1 / (replications + 1). Deterministic for a given seed.
    """
    if replications < 100:
        raise ValueError("at least 100 replications are required")
    regressor = regressor or spec.regressors[0]
    if regressor not in spec.regressors:
        raise DataError(f"{regressor!r} is not a model regressor")
    frame = (data.frame if isinstance(data, PanelDataset) else data).copy()
    observed = chow_test(frame, spec, group).gap(regressor)

    rng = np.random.default_rng(seed)
    labels = frame[group].to_numpy()
    exceed = 0
    for _ in range(replications):
        frame[group] = rng.permutation(labels)
        stat = chow_test(frame, spec, group).gap(regressor)
        if abs(stat) >= abs(observed):
            exceed += 1
    p = (1.0 + exceed) / (replications + 1.0)
    return PermutationResult(p_value=p, observed=observed,
                             replications=replications, regressor=regressor,
                             group=group)
