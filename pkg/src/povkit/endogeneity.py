"""Shift-share instruments and a recursive two-equation MLE.

The instrument interacts a district's lagged participation share with
the national participation growth rate, so it varies only at the
district-wave level and is missing in the first observed wave.

The joint estimator stacks a first stage for the endogenous regressor
(linear or probit) with a probit outcome equation whose latent errors
correlate with the first stage's. The error correlation enters through
its inverse hyperbolic tangent, so the reported correlation always lies
in (-1, 1) and a Wald test on atanh(rho) = 0 is a test of exogeneity.
All gradients are analytic; covariance comes from the observed
information, or a clustered sandwich when a cluster key is given.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.optimize import minimize
from scipy.special import owens_t
from scipy.stats import norm

from .errors import (DataError, NonConvergenceError, RankDeficiencyError,
                     UnknownColumnError)
from .estimators import (ModelSpec, _newton_binary, build_design,
                         cluster_robust_vcov)
from .panel import PanelDataset, listwise_complete

_RHO_MAX = 1.0 - 1e-12
_TINY = 1e-300


@dataclass(frozen=True)
class BartikConfig:
    """Where to find the pieces of the shift-share instrument."""

    district: str
    time: str
    participation: tuple[str, ...]
    prefix: str = "bartik"

    def __post_init__(self):
        part = ((self.participation,) if isinstance(self.participation, str)
                else tuple(self.participation))
        object.__setattr__(self, "participation", part)
        if not part:
            raise DataError("at least one participation column is required")


def build_bartik_iv(data, config: BartikConfig) -> pd.DataFrame:
    """Lagged district share times national growth, one column per input.

    For wave t with predecessor t-1: the district's mean participation
    at t-1, multiplied by the national mean's growth rate from t-1 to t.
    First-wave rows come back missing. Errors if a district has no rows
    in the predecessor wave or the national mean at t-1 is zero.
    """
    frame = data.frame if isinstance(data, PanelDataset) else data
    for col in (config.district, config.time) + config.participation:
        if col not in frame.columns:
            raise UnknownColumnError(f"column {col!r} not in data")
    waves = sorted(pd.unique(frame[config.time]))
    if len(waves) < 2:
        raise DataError("shift-share instrument needs at least two waves")
    prev_of = {waves[i]: waves[i - 1] for i in range(1, len(waves))}

    wave_arr = frame[config.time].to_numpy()
    dist_arr = frame[config.district].to_numpy()
    has_prev = np.array([w in prev_of for w in wave_arr])
    prev_arr = np.array([prev_of[w] for w in wave_arr[has_prev]])

    out = {}
    for col in config.participation:
        cell = frame.groupby([config.time, config.district])[col].mean()
        nat = frame.groupby(config.time)[col].mean()
        shock = {}
        for w, p in prev_of.items():
            base = nat.loc[p]
            if base == 0:
                raise DataError(f"national mean of {col!r} is zero in wave {p!r}; "
                                "growth rate undefined")
            shock[w] = (nat.loc[w] - base) / base
        idx = pd.MultiIndex.from_arrays([prev_arr, dist_arr[has_prev]])
        shares = cell.reindex(idx).to_numpy()
        if np.isnan(shares).any():
            pos = int(np.flatnonzero(np.isnan(shares))[0])
            raise DataError(
                f"district {idx[pos][1]!r} has no usable {col!r} rows in "
                f"wave {idx[pos][0]!r}; lagged share undefined")
        shocks = np.array([shock[w] for w in wave_arr[has_prev]])
        iv = np.full(len(frame), np.nan)
        iv[has_prev] = shares * shocks
        out[f"{config.prefix}_{col}"] = iv
    return pd.DataFrame(out, index=frame.index)


def bivariate_normal_cdf(h, k, rho):
    """P(X <= h, Y <= k) for standard bivariate normal (X, Y), corr rho.

    Evaluated through Owen's T function; vectorized over all arguments.
    """
    h, k, rho = np.broadcast_arrays(np.asarray(h, float), np.asarray(k, float),
                                    np.asarray(rho, float))
    rho = np.clip(rho, -_RHO_MAX, _RHO_MAX)
    s = np.sqrt(1.0 - rho * rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        ah = np.where(h != 0.0, (k - rho * h) / (h * s),
                      np.where(k > 0, np.inf, np.where(k < 0, -np.inf, 0.0)))
        ak = np.where(k != 0.0, (h - rho * k) / (k * s),
                      np.where(h > 0, np.inf, np.where(h < 0, -np.inf, 0.0)))
    hk = h * k
    c = np.where((hk > 0) | ((hk == 0) & (h + k >= 0)), 0.0, 0.5)
    val = (0.5 * (norm.cdf(h) + norm.cdf(k))
           - owens_t(h, ah) - owens_t(k, ak) - c)
    both_zero = (h == 0.0) & (k == 0.0)
    if both_zero.any():
        val = np.where(both_zero, 0.25 + np.arcsin(rho) / (2.0 * np.pi), val)
    out = np.clip(val, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _bivariate_normal_pdf(h, k, rho):
    s2 = 1.0 - rho * rho
    z = (h * h - 2.0 * rho * h * k + k * k) / s2
    return np.exp(-0.5 * z) / (2.0 * np.pi * np.sqrt(s2))


def _loglik_linear_probit(theta, Z, X, y1, y2, k1, k2):
    """Per-observation log-likelihood and score, linear first stage.

    theta = (gamma, beta, atanhrho, lnsigma). The outcome probit index
    is shifted by the first-stage residual scaled by rho/sigma, which is
    the conditional distribution of the outcome error given the first
    stage's.
    """
    gamma = theta[:k1]
    beta = theta[k1:k1 + k2]
    a = theta[k1 + k2]
    lnsigma = theta[k1 + k2 + 1]
    rho = np.clip(np.tanh(a), -_RHO_MAX, _RHO_MAX)
    s = np.sqrt(1.0 - rho * rho)
    sigma = np.exp(lnsigma)

    u = y1 - Z @ gamma
    us = u / sigma
    m = (X @ beta + rho * us) / s
    q = 2.0 * y2 - 1.0
    ll = (-0.5 * np.log(2.0 * np.pi) - lnsigma - 0.5 * us * us
          + norm.logcdf(q * m))
    lam = q * np.exp(norm.logpdf(m) - norm.logcdf(q * m))

    g_gamma = Z * (us / sigma - lam * rho / (sigma * s))[:, None]
    g_beta = X * (lam / s)[:, None]
    g_a = lam * (us * s + m * rho)          # includes d(rho)/d(atanhrho) = 1 - rho^2
    g_lns = -1.0 + us * us - lam * rho * us / s
    G = np.column_stack([g_gamma, g_beta, g_a, g_lns])
    return ll, G


def _loglik_biprobit(theta, Z, X, y1, y2, k1, k2):
    """Per-observation log-likelihood and score, probit first stage.

    Each observation contributes the orthant probability of the signed
    latent indices under the signed error correlation.
    """
    gamma = theta[:k1]
    beta = theta[k1:k1 + k2]
    a = theta[k1 + k2]
    rho = np.clip(np.tanh(a), -_RHO_MAX, _RHO_MAX)
    s = np.sqrt(1.0 - rho * rho)

    q1 = 2.0 * y1 - 1.0
    q2 = 2.0 * y2 - 1.0
    t1 = q1 * (Z @ gamma)
    t2 = q2 * (X @ beta)
    r = q1 * q2 * rho
    P = np.maximum(bivariate_normal_cdf(t1, t2, r), _TINY)
    ll = np.log(P)

    A1 = norm.pdf(t1) * norm.cdf((t2 - r * t1) / s) / P
    A2 = norm.pdf(t2) * norm.cdf((t1 - r * t2) / s) / P
    A3 = _bivariate_normal_pdf(t1, t2, r) / P
    g_gamma = Z * (q1 * A1)[:, None]
    g_beta = X * (q2 * A2)[:, None]
    g_a = q1 * q2 * A3 * (1.0 - rho * rho)
    G = np.column_stack([g_gamma, g_beta, g_a])
    return ll, G


def _fd_hessian(grad_fn, x, h=1e-5):
    p = x.size
    H = np.empty((p, p))
    for i in range(p):
        hi = h * max(1.0, abs(x[i]))
        e = np.zeros(p)
        e[i] = hi
        H[:, i] = (grad_fn(x + e) - grad_fn(x - e)) / (2.0 * hi)
    return 0.5 * (H + H.T)


@dataclass
class RecursiveFit:
    """Joint-MLE output for the two-equation recursive model."""

    first_names: list
    first_coef: np.ndarray
    first_se: np.ndarray
    second_names: list
    second_coef: np.ndarray
    second_se: np.ndarray
    atanhrho: float
    atanhrho_se: float
    rho: float
    lnsigma: float | None
    sigma: float | None
    loglik: float
    start_loglik: float
    iterations: int
    converged: bool
    n_obs: int
    n_dropped: int
    first_family: str
    param_names: list
    coef: np.ndarray
    vcov: np.ndarray

    @property
    def atanhrho_z(self) -> float:
        return self.atanhrho / self.atanhrho_se

    @property
    def atanhrho_p(self) -> float:
        return float(2.0 * norm.sf(abs(self.atanhrho_z)))

    def second_of(self, name: str) -> float:
        return float(self.second_coef[self.second_names.index(name)])

    def second_se_of(self, name: str) -> float:
        return float(self.second_se[self.second_names.index(name)])

    def _table(self, names, coef, se) -> pd.DataFrame:
        z = coef / se
        return pd.DataFrame({"name": names, "estimate": coef, "se": se,
                             "z": z, "p": 2.0 * norm.sf(np.abs(z))})

    def first_table(self) -> pd.DataFrame:
        return self._table(self.first_names, self.first_coef, self.first_se)

    def second_table(self) -> pd.DataFrame:
        return self._table(self.second_names, self.second_coef, self.second_se)


def _ols_start(Z, y):
    gamma, _, _, _ = np.linalg.lstsq(Z, y, rcond=None)
    resid = y - Z @ gamma
    sigma = float(np.sqrt(np.mean(resid * resid)))
    return gamma, max(sigma, 1e-8)


def fit_recursive_joint(data, first: ModelSpec, second: ModelSpec,
                        instrument, *, cluster: str | None = None,
                        maxiter: int = 500) -> RecursiveFit:
    """Jointly estimate the first stage and a probit outcome equation.

    `first.response` is the endogenous regressor and must appear in
    `second.regressors`; the instrument(s) enter the first stage only.
    The first stage is linear (default) or probit (binary endogenous
    regressor). Starting values are the independent single-equation
    fits with correlation zero, so the optimized joint likelihood never
    falls below the independent one.
    """
    instruments = (instrument,) if isinstance(instrument, str) else tuple(instrument)
    if not instruments:
        raise DataError("at least one instrument is required")
    if second.family != "probit":
        raise DataError("the outcome equation must be a probit")
    if first.family not in ("linear", "probit"):
        raise DataError("first stage must be linear or probit")
    if first.response not in second.regressors:
        raise DataError(f"endogenous regressor {first.response!r} is not in the "
                        "outcome equation")
    for iv in instruments:
        if iv in second.regressors:
            raise DataError(f"instrument {iv!r} appears in the outcome equation; "
                            "the exclusion restriction fails by construction")
        if iv in first.regressors:
            raise DataError(f"instrument {iv!r} duplicated in first-stage regressors")

    frame = data.frame if isinstance(data, PanelDataset) else data
    cluster_col = cluster or second.cluster or first.cluster
    numeric = list(dict.fromkeys(
        [first.response, second.response] + list(first.regressors)
        + list(instruments) + list(second.regressors)))
    missing = [c for c in numeric if c not in frame.columns]
    if missing:
        raise UnknownColumnError(f"columns not in data: {missing}")
    keep = listwise_complete(frame, numeric)
    n_dropped = int((~keep).sum())
    sub = frame.loc[keep]
    if len(sub) == 0:
        raise DataError("no complete rows for the joint model")

    first_aug = ModelSpec(first.response, first.regressors + tuple(instruments),
                          first.fixed_effects, cluster_col, first.family,
                          first.intercept)
    second_run = ModelSpec(second.response, second.regressors,
                           second.fixed_effects, cluster_col, "probit",
                           second.intercept)
    try:
        d1 = build_design(sub, first_aug)
    except RankDeficiencyError:
        base = ModelSpec(first.response, first.regressors, first.fixed_effects,
                         cluster_col, first.family, first.intercept)
        build_design(sub, base)  # raises if the problem is not the instrument
        raise RankDeficiencyError("instrument is collinear with the included "
                                  "first-stage regressors") from None
    d2 = build_design(sub, second_run)
    Z, y1 = d1.X, d1.y
    X, y2 = d2.X, d2.y
    k1, k2 = Z.shape[1], X.shape[1]
    n = Z.shape[0]

    if first.family == "linear":
        gamma0, sigma0 = _ols_start(Z, y1)
        beta0, *_ = _newton_binary(X, y2, "probit")
        theta0 = np.r_[gamma0, beta0, 0.0, np.log(sigma0)]
        per_obs = _loglik_linear_probit
    else:
        if not np.isin(y1, (0.0, 1.0)).all():
            raise DataError("probit first stage requires a binary endogenous "
                            "regressor")
        gamma0, *_ = _newton_binary(Z, y1, "probit")
        beta0, *_ = _newton_binary(X, y2, "probit")
        theta0 = np.r_[gamma0, beta0, 0.0]
        per_obs = _loglik_biprobit

    def nll_grad(theta):
        ll, G = per_obs(theta, Z, X, y1, y2, k1, k2)
        return -float(ll.mean()), -G.mean(axis=0)

    def grad_only(theta):
        return nll_grad(theta)[1]

    start_loglik = -nll_grad(theta0)[0] * n
    res = minimize(nll_grad, theta0, jac=True, method="BFGS",
                   options={"maxiter": maxiter, "gtol": 1e-8})
    theta = res.x
    iterations = int(res.nit)

    # Newton polish: BFGS sometimes stops on precision loss shy of the tol
    for _ in range(20):
        f0, g0 = nll_grad(theta)
        if np.max(np.abs(g0)) <= 1e-9:
            break
        H = _fd_hessian(grad_only, theta)
        try:
            step = np.linalg.solve(H, -g0)
        except np.linalg.LinAlgError:
            step = -g0
        scale, improved = 1.0, False
        for _ in range(30):
            f1, _ = nll_grad(theta + scale * step)
            if f1 < f0:
                theta = theta + scale * step
                improved = True
                break
            scale *= 0.5
        iterations += 1
        if not improved:
            break
    _, g_final = nll_grad(theta)
    grad_norm = float(np.max(np.abs(g_final)))
    if grad_norm > 1e-5:
        raise NonConvergenceError(f"joint likelihood failed to converge "
                                  f"(score max-norm {grad_norm:.2e})")

    loglik = -nll_grad(theta)[0] * n
    H_mean = _fd_hessian(grad_only, theta)
    info = n * H_mean                      # observed information of the total ll
    try:
        bread = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        raise NonConvergenceError("observed information is singular at the "
                                  "optimum") from None
    if d1.cluster_ids is not None:
        _, G = per_obs(theta, Z, X, y1, y2, k1, k2)
        vcov = cluster_robust_vcov(bread, G, d1.cluster_ids)
    else:
        vcov = bread
    se = np.sqrt(np.diag(vcov))

    names = ([f"first:{nm}" for nm in d1.names]
             + [f"second:{nm}" for nm in d2.names] + ["atanhrho"])
    lnsigma = None
    sigma = None
    if first.family == "linear":
        names.append("lnsigma")
        lnsigma = float(theta[-1])
        sigma = float(np.exp(lnsigma))
    a_pos = k1 + k2
    return RecursiveFit(
        first_names=d1.names, first_coef=theta[:k1], first_se=se[:k1],
        second_names=d2.names, second_coef=theta[k1:k1 + k2],
        second_se=se[k1:k1 + k2],
        atanhrho=float(theta[a_pos]), atanhrho_se=float(se[a_pos]),
        rho=float(np.tanh(theta[a_pos])), lnsigma=lnsigma, sigma=sigma,
        loglik=float(loglik), start_loglik=float(start_loglik),
        iterations=iterations, converged=True, n_obs=n, n_dropped=n_dropped,
        first_family=first.family, param_names=names, coef=theta, vcov=vcov)
