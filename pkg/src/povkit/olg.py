"""Two-period overlapping-generations model of pension participation.

A household works young, pays a payroll tax and optional contributions
to three pension pillars, consumes E1, and saves S at rate r; when old
it consumes E2 out of savings plus pension payouts. Log utility

    U = ln E1 + ln E2 / (1 + rho)

yields closed forms for optimal expenditure with and without pension
participation, and the proportional first-period expenditure uplift
from participating. A golden-section search over savings provides an
independent numerical check of the closed forms.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import InfeasibleParamsError

# Reference annualized pillar returns used in the bundled presets.
PILLAR1_REFERENCE_RETURN = 0.0500
PILLAR2_REFERENCE_RETURN = 0.0626


@dataclass(frozen=True)
class OlgParams:
    """Household and policy parameters for the two-period problem.

    Rates are per period. `subsidy_rate` tops up the first pillar's
    return; `pooled_benefit` is a lump sum paid in old age regardless of
    contribution size; `everyday_consumption` is committed first-period
    spending outside E1.
    """

    wage: float
    tax_rate: float
    time_preference: float     # rho > -1
    interest_rate: float       # r > -1
    pillar1_contrib: float = 0.0
    pillar2_contrib: float = 0.0
    pillar3_contrib: float = 0.0
    pillar1_return: float = 0.0
    pillar2_return: float = 0.0
    pillar3_return: float = 0.0
    subsidy_rate: float = 0.0
    pooled_benefit: float = 0.0
    everyday_consumption: float = 0.0

    def __post_init__(self):
        if self.wage <= 0:
            raise InfeasibleParamsError("wage must be positive")
        if not (0 <= self.tax_rate < 1):
            raise InfeasibleParamsError("tax rate must lie in [0, 1)")
        if self.time_preference <= -1:
            raise InfeasibleParamsError("time preference must exceed -1")
        if self.interest_rate <= -1:
            raise InfeasibleParamsError("interest rate must exceed -1")
        for name in ("pillar1_contrib", "pillar2_contrib", "pillar3_contrib",
                     "pooled_benefit", "everyday_consumption"):
            if getattr(self, name) < 0:
                raise InfeasibleParamsError(f"{name} must be nonnegative")

    @property
    def contributions(self) -> float:
        return self.pillar1_contrib + self.pillar2_contrib + self.pillar3_contrib

    def pension_payout(self) -> float:
        """Old-age income from the three pillars plus the pooled benefit."""
        return ((1 + self.pillar1_return + self.subsidy_rate) * self.pillar1_contrib
                + (1 + self.pillar2_return) * self.pillar2_contrib
                + (1 + self.pillar3_return) * self.pillar3_contrib
                + self.pooled_benefit)

    def excess_return(self) -> float:
        """Payout minus contributions compounded at r: the net transfer
        to old age created by participating."""
        return ((self.pillar1_return + self.subsidy_rate - self.interest_rate)
                * self.pillar1_contrib
                + (self.pillar2_return - self.interest_rate) * self.pillar2_contrib
                + (self.pillar3_return - self.interest_rate) * self.pillar3_contrib
                + self.pooled_benefit)


def reference_preset(wage: float = 100.0) -> OlgParams:
    """Illustrative parameterization with the bundled pillar returns."""
    return OlgParams(wage=wage, tax_rate=0.2, time_preference=0.05,
                     interest_rate=0.03,
                     pillar1_contrib=5.0, pillar2_contrib=3.0, pillar3_contrib=2.0,
                     pillar1_return=PILLAR1_REFERENCE_RETURN,
                     pillar2_return=PILLAR2_REFERENCE_RETURN,
                     pillar3_return=0.04,
                     subsidy_rate=0.01, pooled_benefit=2.0)


@dataclass(frozen=True)
class OlgSolution:
    expenditure_young: float     # E1
    expenditure_old: float       # E2
    savings: float               # S
    utility: float

    def euler_ratio(self) -> float:
        return self.expenditure_old / self.expenditure_young


def utility(params: OlgParams, e1: float, e2: float) -> float:
    if e1 <= 0 or e2 <= 0:
        raise InfeasibleParamsError("expenditures must be positive for log utility")
    return math.log(e1) + math.log(e2) / (1 + params.time_preference)


def _solution(params: OlgParams, resources: float, payout: float) -> OlgSolution:
    """Interior optimum given first-period resources and old-age payout.

    Budget: E1 = resources - S and E2 = S (1 + r) + payout. The interior
    first-order condition gives E2 = E1 (1 + r) / (1 + rho).
    """
    rho, r = params.time_preference, params.interest_rate
    e1 = (1 + rho) / (2 + rho) * (resources + payout / (1 + r))
    s = resources - e1
    e2 = s * (1 + r) + payout
    if e1 <= 0:
        raise InfeasibleParamsError("no interior optimum: first-period expenditure "
                                    "would be nonpositive")
    if s <= 0:
        raise InfeasibleParamsError("no interior optimum: implied savings are "
                                    "nonpositive (corner solution)")
    if e2 <= 0:
        raise InfeasibleParamsError("no interior optimum: old-age expenditure "
                                    "would be nonpositive")
    return OlgSolution(expenditure_young=e1, expenditure_old=e2, savings=s,
                       utility=utility(params, e1, e2))


def solve_no_tpps(params: OlgParams) -> OlgSolution:
    """Optimum without pension participation: savings are the only
    vehicle for old-age consumption."""
    resources = params.wage * (1 - params.tax_rate) - params.everyday_consumption
    if resources <= 0:
        raise InfeasibleParamsError("disposable first-period resources must be positive")
    return _solution(params, resources, 0.0)


def solve_with_tpps(params: OlgParams) -> OlgSolution:
    """Optimum with pension participation.

    Requires a positive contribution to at least one pillar and positive
    first-period resources net of contributions and committed spending.
    """
    if params.contributions <= 0:
        raise InfeasibleParamsError("participation requires a positive contribution "
                                    "to at least one pillar")
    resources = (params.wage * (1 - params.tax_rate) - params.contributions
                 - params.everyday_consumption)
    if resources <= 0:
        raise InfeasibleParamsError("contributions exhaust disposable income")
    return _solution(params, resources, params.pension_payout())


def expenditure_uplift(params: OlgParams) -> float:
    """Proportional gain in optimal E1 from participating.

    Equals the contributions' excess return over private savings,
    discounted one period and scaled by disposable resources:
    (E1_with - E1_without) / E1_without.
    """
    base = params.wage * (1 - params.tax_rate) - params.everyday_consumption
    if base <= 0:
        raise InfeasibleParamsError("disposable first-period resources must be positive")
    return params.excess_return() / (base * (1 + params.interest_rate))


def _golden_max(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Golden-section maximizer of a unimodal f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def numeric_oracle(params: OlgParams, mode: str = "no_tpps",
                   tol: float = 1e-10) -> OlgSolution:
    """Solve the same problem by golden-section search over savings.

    Deliberately independent of the closed forms: maximizes
    ln(resources - S) + ln(S (1 + r) + payout) / (1 + rho) on the
    feasible savings interval.
    """
    if mode == "no_tpps":
        resources = params.wage * (1 - params.tax_rate) - params.everyday_consumption
        payout = 0.0
    elif mode == "with_tpps":
        if params.contributions <= 0:
            raise InfeasibleParamsError("participation requires a positive contribution")
        resources = (params.wage * (1 - params.tax_rate) - params.contributions
                     - params.everyday_consumption)
        payout = params.pension_payout()
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if resources <= 0:
        raise InfeasibleParamsError("disposable first-period resources must be positive")

    r, rho = params.interest_rate, params.time_preference
    lo = max(0.0, -payout / (1 + r)) + 1e-12
    hi = resources - 1e-12
    if lo >= hi:
        raise InfeasibleParamsError("empty feasible savings interval")

    def objective(s):
        return math.log(resources - s) + math.log(s * (1 + r) + payout) / (1 + rho)

    s = _golden_max(objective, lo, hi, tol)
    e1 = resources - s
    e2 = s * (1 + r) + payout
    return OlgSolution(expenditure_young=e1, expenditure_old=e2, savings=s,
                       utility=utility(params, e1, e2))


def comparative_statics(params: OlgParams, parameter: str, values) -> pd.DataFrame:
    """Re-solve the with-participation problem along a parameter sweep.

    Returns one row per value: the swept value, E1, E2, savings, and the
    expenditure uplift relative to not participating.
    """
    if parameter not in {f.name for f in dataclasses.fields(OlgParams)}:
        raise ValueError(f"unknown parameter {parameter!r}")
    rows = []
    for v in values:
        p = dataclasses.replace(params, **{parameter: float(v)})
        sol = solve_with_tpps(p)
        rows.append({"parameter": parameter, "value": float(v),
                     "e1": sol.expenditure_young, "e2": sol.expenditure_old,
                     "savings": sol.savings, "uplift": expenditure_uplift(p)})
    return pd.DataFrame(rows)


def sweep_trend(table: pd.DataFrame, column: str = "uplift") -> str:
    """Classify a sweep column as increasing, decreasing, flat, or mixed."""
    x = table[column].to_numpy()
    d = np.diff(x)
    if (d > 0).all():
        return "increasing"
    if (d < 0).all():
        return "decreasing"
    if (d == 0).all():
        return "flat"
    return "mixed"
