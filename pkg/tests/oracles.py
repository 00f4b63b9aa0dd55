"""Independent reference implementations used to cross-check the package.

Everything here is written from the definitions, in the plainest
possible way (exact rational arithmetic, explicit loops, brute-force
sums), and deliberately shares no code with the package internals.
"""

from fractions import Fraction

import numpy as np


def af_measures(rows, weights, k):
    """Dual-cutoff aggregates by direct enumeration in exact arithmetic.

    rows: list of 0/1 tuples, weights: list of Fractions summing to 1,
    k: a Fraction. Returns (H, A, M0, censored_counts, contributions)
    with H, A, M0 as Fractions and contributions as Fractions or None.
    """
    weights = [Fraction(w) for w in weights]
    k = Fraction(k)
    n = len(rows)
    scores = []
    for row in rows:
        s = Fraction(0)
        for g, w in zip(row, weights):
            if g:
                s += w
        scores.append(s)
    poor = [s >= k for s in scores]
    q = sum(poor)
    h = Fraction(q, n)
    a = (sum(s for s, p in zip(scores, poor) if p) / q) if q else Fraction(0)
    m0 = sum(s for s, p in zip(scores, poor) if p) / n
    censored = [sum(row[j] for row, p in zip(rows, poor) if p)
                for j in range(len(weights))]
    if m0 > 0:
        contributions = [Fraction(censored[j]) * weights[j] / (n * m0)
                         for j in range(len(weights))]
    else:
        contributions = None
    return h, a, m0, censored, contributions


def entropy_weights_reference(matrix):
    """Entropy weights by the textbook three-step recipe, looped."""
    x = np.asarray(matrix, dtype=float)
    n, m = x.shape
    d = np.empty(m)
    degenerate = np.zeros(m, dtype=bool)
    for j in range(m):
        col = x[:, j]
        total = col.sum()
        if col.max() == col.min():
            degenerate[j] = True
            d[j] = 1.0
            continue
        e = 0.0
        for v in col:
            p = v / total
            if p > 0:
                e += p * np.log(p)
        e = -e / np.log(n)
        d[j] = 1.0 - e
    w = np.zeros(m)
    usable = ~degenerate
    w[usable] = d[usable] / d[usable].sum()
    return w, degenerate


def sandwich_vcov_reference(X, residual_factor, cluster_ids, bread):
    """Cluster sandwich assembled cluster by cluster with python loops."""
    scores = X * np.asarray(residual_factor)[:, None]
    p = X.shape[1]
    meat = np.zeros((p, p))
    for cid in dict.fromkeys(cluster_ids):
        block = scores[np.asarray(cluster_ids) == cid].sum(axis=0)
        meat += np.outer(block, block)
    return bread @ meat @ bread


def fd_gradient(f, x, h=1e-6):
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.empty(x.size)
    for i in range(x.size):
        hi = h * max(1.0, abs(x[i]))
        e = np.zeros(x.size)
        e[i] = hi
        g[i] = (f(x + e) - f(x - e)) / (2.0 * hi)
    return g


def logit_2x2_closed_form(n11, n10, n01, n00):
    """Exact logit MLE for one binary regressor from a 2x2 table.

    Cell counts: n11 (x=1, y=1), n10 (x=1, y=0), n01 (x=0, y=1),
    n00 (x=0, y=0). The MLE fits each cell's empirical log-odds.
    """
    intercept = np.log(n01 / n00)
    slope = np.log(n11 / n10) - intercept
    return intercept, slope


def bvn_cdf_quadrature(h, k, rho, n=20001):
    """Bivariate normal CDF by direct numerical integration over x.

    P(X<=h, Y<=k) = int_{-inf}^{h} phi(x) Phi((k - rho x)/sqrt(1-rho^2)) dx,
    evaluated with Simpson's rule on a wide truncated grid.
    """
    from scipy.integrate import simpson
    from scipy.stats import norm
    lo = min(h - 12.0, -12.0)
    x = np.linspace(lo, h, n)
    integrand = norm.pdf(x) * norm.cdf((k - rho * x) / np.sqrt(1.0 - rho ** 2))
    return float(simpson(integrand, x=x))
