"""Binary-response and linear estimators with cluster-robust covariance.

Fixed effects enter as explicit dummy blocks (reference category
dropped). Logit and probit are fit by Newton iterations with analytic
gradients and step-halving; covariance is the sandwich over per-cluster
score sums with no small-sample factor, so with every observation its
own cluster the estimate coincides with the heteroskedasticity-robust
form exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.stats import norm

from .errors import (DataError, NonConvergenceError, RankDeficiencyError,
                     SeparationError, SingleClusterError, UnknownColumnError)
from .panel import PanelDataset

FAMILIES = ("logit", "probit", "linear")

MAX_ITERATIONS = 100
SCORE_TOL = 1e-8
MAX_ABS_COEF = 30.0
MAX_HALVINGS = 5


@dataclass(frozen=True)
class ModelSpec:
    """Declarative model: response, regressors, fixed effects, cluster,
    family. The intercept is on by default."""

    response: str
    regressors: tuple[str, ...]
    fixed_effects: tuple[str, ...] = ()
    cluster: str | None = None
    family: str = "logit"
    intercept: bool = True

    def __post_init__(self):
        object.__setattr__(self, "regressors", tuple(self.regressors))
        object.__setattr__(self, "fixed_effects", tuple(self.fixed_effects))
        if self.family not in FAMILIES:
            raise DataError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.response in self.regressors:
            raise DataError("response cannot appear among the regressors")
        if len(set(self.regressors)) != len(self.regressors):
            raise DataError("duplicate regressor names")


@dataclass
class Design:
    """Materialized design matrix with bookkeeping for dropped rows."""

    X: np.ndarray
    y: np.ndarray
    names: list
    cluster_ids: np.ndarray | None
    rows: np.ndarray          # positions into the source frame
    n_dropped: int


def _frame_of(data) -> pd.DataFrame:
    return data.frame if isinstance(data, PanelDataset) else data


def build_design(data, spec: ModelSpec, extra_columns=()) -> Design:
    """Expand a ModelSpec against a panel into y, X, and names.

    Rows with missing response or regressor values are dropped
    (listwise). Fixed-effect and cluster columns must be complete. Each
    fixed effect becomes a dummy block with its first (sorted) category
    as the omitted reference. Raises on rank deficiency.
    """
    frame = _frame_of(data)
    extra = tuple(extra_columns)
    used = ([spec.response] + list(spec.regressors) + list(extra)
            + list(spec.fixed_effects) + ([spec.cluster] if spec.cluster else []))
    missing = [c for c in used if c not in frame.columns]
    if missing:
        raise UnknownColumnError(f"columns not in data: {missing}")
    for col in list(spec.fixed_effects) + ([spec.cluster] if spec.cluster else []):
        if frame[col].isna().any():
            raise DataError(f"column {col!r} used as a key has missing values")

    numeric = [spec.response] + list(spec.regressors) + list(extra)
    vals = frame[numeric].to_numpy(dtype=float)
    keep = ~np.isnan(vals).any(axis=1)
    n_dropped = int((~keep).sum())
    vals = vals[keep]
    if vals.shape[0] == 0:
        raise DataError("no complete rows for the requested model")

    y = vals[:, 0]
    blocks = []
    names: list = []
    if spec.intercept:
        blocks.append(np.ones((vals.shape[0], 1)))
        names.append("const")
    blocks.append(vals[:, 1:])
    names.extend(list(spec.regressors) + list(extra))

    sub = frame.loc[keep]
    for fe in spec.fixed_effects:
        cats = np.sort(pd.unique(sub[fe]))
        if len(cats) < 2:
            continue   # a single category adds nothing beyond the intercept
        codes = sub[fe].to_numpy()
        for cat in cats[1:]:
            blocks.append((codes == cat).astype(float)[:, None])
            names.append(f"{fe}={cat}")

    X = np.hstack(blocks)
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise RankDeficiencyError(
            f"design matrix is rank deficient ({X.shape[1]} columns, "
            f"rank {np.linalg.matrix_rank(X)})")
    cluster_ids = sub[spec.cluster].to_numpy() if spec.cluster else None
    return Design(X=X, y=y, names=names, cluster_ids=cluster_ids,
                  rows=np.flatnonzero(keep.to_numpy() if hasattr(keep, "to_numpy") else keep),
                  n_dropped=n_dropped)


# ---------------------------------------------------------------------------
# likelihood families


def logit_loglik(X, y, beta):
    """Log-likelihood, per-observation score factor, and weight vector.

    Returns (ll, u, w) with score = X' u and expected = observed
    information X' diag(w) X.
    """
    eta = X @ beta
    ll = float(np.sum(y * eta - np.logaddexp(0.0, eta)))
    p = 1.0 / (1.0 + np.exp(-eta))
    return ll, y - p, p * (1.0 - p)


def probit_loglik(X, y, beta):
    """As logit_loglik, with expected-information weights."""
    eta = X @ beta
    q = 2.0 * y - 1.0
    ll = float(np.sum(norm.logcdf(q * eta)))
    # d ll / d eta = q phi(eta) / Phi(q eta), computed on the log scale
    u = q * np.exp(norm.logpdf(eta) - norm.logcdf(q * eta))
    w = np.exp(2.0 * norm.logpdf(eta) - norm.logcdf(eta) - norm.logcdf(-eta))
    return ll, u, w


_FAMILY_EVAL = {"logit": logit_loglik, "probit": probit_loglik}


def _newton_binary(X, y, family: str):
    """Newton / Fisher-scoring MLE with step-halving.

    Convergence: max-norm of the score below SCORE_TOL. Separation is
    declared when a coefficient leaves [-30, 30] or a step fails to
    improve the objective through 5 halvings.
    """
    evaluate = _FAMILY_EVAL[family]
    if not np.isin(y, (0.0, 1.0)).all():
        raise DataError(f"{family} response must be binary 0/1")
    if y.min() == y.max():
        raise SeparationError("response is constant; no interior MLE exists")

    n, p = X.shape
    beta = np.zeros(p)
    ll, u, w = evaluate(X, y, beta)
    for it in range(1, MAX_ITERATIONS + 1):
        score = X.T @ u
        score_norm = float(np.max(np.abs(score)))
        if score_norm <= SCORE_TOL:
            return beta, ll, it - 1, score_norm, w, u
        H = X.T @ (X * w[:, None])
        try:
            step = np.linalg.solve(H, score)
        except np.linalg.LinAlgError:
            raise SeparationError("information matrix is singular away from "
                                  "the optimum; data are separable") from None
        # near the optimum a correct step improves ll by less than one ulp,
        # so non-worsening candidates must be accepted
        slack = 1e-12 * (1.0 + abs(ll))
        scale = 1.0
        for halving in range(MAX_HALVINGS + 1):
            cand = beta + scale * step
            cand_ll, cand_u, cand_w = evaluate(X, y, cand)
            if cand_ll >= ll - slack:
                break
            scale *= 0.5
        else:
            raise SeparationError("step-halving failed to improve the "
                                  "log-likelihood; data look separated")
        beta, ll, u, w = cand, cand_ll, cand_u, cand_w
        if np.max(np.abs(beta)) > MAX_ABS_COEF:
            raise SeparationError("coefficient magnitude exceeded 30; "
                                  "data look separated")
    raise NonConvergenceError(f"no convergence in {MAX_ITERATIONS} Newton iterations")


def cluster_robust_vcov(bread: np.ndarray, scores: np.ndarray,
                        cluster_ids=None) -> np.ndarray:
    """Sandwich covariance from per-observation scores.

    `bread` is the inverse information (or inverse X'X times sigma^2
    pieces for least squares callers that fold scale into the scores);
    `scores` holds one row per observation. With cluster ids the meat
    sums scores within cluster first; without, each observation is its
    own cluster. No small-sample correction is applied.
    """
    if cluster_ids is None:
        meat = scores.T @ scores
    else:
        ids = np.asarray(cluster_ids)
        if len(ids) != scores.shape[0]:
            raise DataError("cluster ids do not match score rows")
        if len(np.unique(ids)) < 2:
            raise SingleClusterError("cluster-robust covariance needs at least "
                                     "two clusters")
        order = np.argsort(ids, kind="stable")
        sorted_scores = scores[order]
        sorted_ids = ids[order]
        boundaries = np.flatnonzero(np.r_[True, sorted_ids[1:] != sorted_ids[:-1]])
        sums = np.add.reduceat(sorted_scores, boundaries, axis=0)
        meat = sums.T @ sums
    return bread @ meat @ bread


@dataclass
class FitResult:
    """Coefficients, sandwich covariance, and fit diagnostics."""

    names: list
    coef: np.ndarray
    vcov: np.ndarray
    se: np.ndarray
    family: str
    loglik: float | None
    rss: float | None
    iterations: int
    converged: bool
    score_norm: float | None
    n_obs: int
    n_clusters: int | None
    n_dropped: int
    spec: ModelSpec

    def __getitem__(self, name: str) -> float:
        return float(self.coef[self.names.index(name)])

    def se_of(self, name: str) -> float:
        return float(self.se[self.names.index(name)])

    def z_of(self, name: str) -> float:
        return self[name] / self.se_of(name)

    def table(self) -> pd.DataFrame:
        z = self.coef / self.se
        p = 2.0 * norm.sf(np.abs(z))
        return pd.DataFrame({"name": self.names, "estimate": self.coef,
                             "se": self.se, "z": z, "p": p})


def _finish(design, spec, coef, vcov, *, family, loglik=None, rss=None,
            iterations=0, score_norm=None) -> FitResult:
    n_clusters = (len(np.unique(design.cluster_ids))
                  if design.cluster_ids is not None else None)
    return FitResult(names=design.names, coef=coef, vcov=vcov,
                     se=np.sqrt(np.diag(vcov)), family=family, loglik=loglik,
                     rss=rss, iterations=iterations, converged=True,
                     score_norm=score_norm, n_obs=design.X.shape[0],
                     n_clusters=n_clusters, n_dropped=design.n_dropped, spec=spec)


def _fit_binary(data, spec: ModelSpec, family: str) -> FitResult:
    design = build_design(data, spec)
    beta, ll, iters, score_norm, w, u = _newton_binary(design.X, design.y, family)
    info = design.X.T @ (design.X * w[:, None])
    bread = np.linalg.inv(info)
    scores = design.X * u[:, None]
    vcov = cluster_robust_vcov(bread, scores, design.cluster_ids)
    return _finish(design, spec, beta, vcov, family=family, loglik=ll,
                   iterations=iters, score_norm=score_norm)


def fit_logit(data, spec: ModelSpec) -> FitResult:
    if spec.family != "logit":
        spec = ModelSpec(spec.response, spec.regressors, spec.fixed_effects,
                         spec.cluster, "logit", spec.intercept)
    return _fit_binary(data, spec, "logit")


def fit_probit(data, spec: ModelSpec) -> FitResult:
    if spec.family != "probit":
        spec = ModelSpec(spec.response, spec.regressors, spec.fixed_effects,
                         spec.cluster, "probit", spec.intercept)
    return _fit_binary(data, spec, "probit")


def fit_ols(data, spec: ModelSpec) -> FitResult:
    """Least squares with the same sandwich covariance machinery."""
    design = build_design(data, spec)
    X, y = design.X, design.y
    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    rss = float(resid @ resid)
    bread = np.linalg.inv(X.T @ X)
    scores = X * resid[:, None]
    vcov = cluster_robust_vcov(bread, scores, design.cluster_ids)
    return _finish(design, spec, coef, vcov, family="linear", rss=rss)


def fit(data, spec: ModelSpec) -> FitResult:
    """Dispatch on spec.family."""
    if spec.family == "logit":
        return fit_logit(data, spec)
    if spec.family == "probit":
        return fit_probit(data, spec)
    return fit_ols(data, spec)


def average_marginal_effects(result: FitResult, data) -> dict:
    """Average marginal effect of each regressor on the response
    probability.

    Continuous regressors: mean of beta times the link density at the
    fitted index. Binary regressors: mean discrete change in the fitted
    probability from switching the regressor 0 -> 1 for every row.
    """
    if result.family not in ("logit", "probit"):
        raise DataError("marginal effects are defined for binary-response fits")
    design = build_design(data, result.spec)
    if design.names != result.names:
        raise DataError("data do not reproduce the fitted design")
    X = design.X
    eta = X @ result.coef
    if result.family == "logit":
        cdf = lambda t: 1.0 / (1.0 + np.exp(-t))
        pdf = lambda t: cdf(t) * (1.0 - cdf(t))
    else:
        cdf, pdf = norm.cdf, norm.pdf

    out = {}
    for reg in result.spec.regressors:
        j = result.names.index(reg)
        col = X[:, j]
        if np.isin(col, (0.0, 1.0)).all():
            hi = eta + result.coef[j] * (1.0 - col)
            lo = eta - result.coef[j] * col
            out[reg] = float(np.mean(cdf(hi) - cdf(lo)))
        else:
            out[reg] = float(np.mean(result.coef[j] * pdf(eta)))
    return out
