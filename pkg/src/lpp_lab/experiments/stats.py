"""Small statistics kit: goodness of fit, correlations, intervals, fits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats as sps

SIGNIFICANCE = 0.001


def mean_se(x):
    x = np.asarray(x, dtype=float)
    n = x.size
    if n == 0:
        return math.nan, math.nan
    m = float(np.sum(x) / n)
    if n == 1:
        return m, math.nan
    return m, float(np.std(x, ddof=1) / math.sqrt(n))


def ecdf(samples):
    """(sorted distinct values, P(X <= value))."""
    x = np.sort(np.asarray(samples).ravel())
    vals, counts = np.unique(x, return_counts=True)
    return vals, np.cumsum(counts) / x.size


@dataclass(frozen=True)
class GofResult:
    statistic: float
    dof: int
    p_value: float
    n: int
    bins: int
    inconclusive: bool

    def passed(self, alpha: float = SIGNIFICANCE) -> Optional[bool]:
        if self.inconclusive:
            return None
        return self.p_value >= alpha


def chi_square_geometric(samples, rho: float, min_expected: float = 5.0) -> GofResult:
    """Pearson test against Geom(rho) on {0, 1, ...}.

    Singleton bins 0, 1, ... while both the bin and the remaining tail expect at
    least ``min_expected`` counts, then one tail bin.  Fewer than two bins is
    reported as inconclusive.
    """
    x = np.asarray(samples).ravel()
    n = x.size
    if n == 0 or not (0.0 < rho < 1.0):
        return GofResult(math.nan, 0, math.nan, n, 0, True)
    k = 0
    while n * (1 - rho) * rho ** k >= min_expected and n * rho ** (k + 1) >= min_expected:
        k += 1
    bins = k + 1
    if bins < 2:
        return GofResult(math.nan, 0, math.nan, n, bins, True)
    obs = np.bincount(np.minimum(x, k).astype(np.int64), minlength=bins)[:bins].astype(float)
    exp = np.empty(bins)
    exp[:k] = n * (1 - rho) * rho ** np.arange(k)
    exp[k] = n * rho ** k
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = bins - 1
    return GofResult(stat, dof, float(sps.chi2.sf(stat, dof)), n, bins, False)


def chi_square_two_sample(x, y, min_expected: float = 5.0) -> GofResult:
    """Homogeneity test of two integer samples, pooling the upper tail."""
    x = np.asarray(x).ravel().astype(np.int64)
    y = np.asarray(y).ravel().astype(np.int64)
    if x.size == 0 or y.size == 0:
        return GofResult(math.nan, 0, math.nan, x.size + y.size, 0, True)
    top = int(max(x.max(), y.max()))
    cx = np.bincount(x, minlength=top + 1).astype(float)
    cy = np.bincount(y, minlength=top + 1).astype(float)
    tot = cx + cy
    fx = x.size / (x.size + y.size)
    # cut where the pooled tail still expects enough in the smaller sample
    need = min_expected / min(fx, 1 - fx)
    tail = np.cumsum(tot[::-1])[::-1]
    cut = 0
    while cut + 1 <= top and tot[cut] >= need and tail[cut + 1] >= need:
        cut += 1
    ox = np.append(cx[:cut], cx[cut:].sum())
    oy = np.append(cy[:cut], cy[cut:].sum())
    if ox.size < 2:
        return GofResult(math.nan, 0, math.nan, x.size + y.size, ox.size, True)
    stat, p, dof, _ = sps.chi2_contingency(np.vstack([ox, oy]), correction=False)
    return GofResult(float(stat), int(dof), float(p), x.size + y.size, ox.size, False)


def correlation(x, y):
    """(Pearson correlation, n).  Zero-variance input gives 0."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    n = x.size
    if n < 2:
        return math.nan, n
    xc = x - np.sum(x) / n
    yc = y - np.sum(y) / n
    den = math.sqrt(float(np.sum(xc * xc)) * float(np.sum(yc * yc)))
    if den == 0:
        return 0.0, n
    return float(np.sum(xc * yc) / den), n


def lag_correlation(samples, lag: int = 1):
    """Lag correlation of one sequence, or pooled over a list of sequences.

    Pairs never straddle two sequences.  Returns (rho_hat, number of pairs).
    """
    if isinstance(samples, (list, tuple)) and samples and np.ndim(samples[0]) == 1:
        seqs = list(samples)
    else:
        seqs = [samples]
    xs = [np.asarray(s)[:-lag] for s in seqs if len(s) > lag]
    ys = [np.asarray(s)[lag:] for s in seqs if len(s) > lag]
    if not xs:
        return math.nan, 0
    return correlation(np.concatenate(xs), np.concatenate(ys))


def correlation_bound(n: int) -> float:
    return 4.0 / math.sqrt(n) if n > 0 else math.inf


def wilson_interval(k: int, n: int, z: float = 1.959963984540054):
    if n <= 0:
        return (0.0, 1.0)
    ph = k / n
    den = 1 + z * z / n
    c = (ph + z * z / (2 * n)) / den
    h = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if k == 0 else max(0.0, c - h)
    hi = 1.0 if k == n else min(1.0, c + h)
    return (lo, hi)


def proportion(k: int, n: int):
    """(estimate, binomial SE, Wilson interval)."""
    ph = k / n
    return ph, math.sqrt(ph * (1 - ph) / n), wilson_interval(k, n)


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float
    n: int


def linear_fit(xs, ys) -> LinearFit:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    n = x.size
    if n < 2 or np.ptp(x) == 0:
        return LinearFit(math.nan, math.nan, math.nan, n)
    res = sps.linregress(x, y)
    return LinearFit(float(res.slope), float(res.intercept), float(res.rvalue ** 2), n)


def loglog_fit(xs, ys) -> LinearFit:
    """Least squares of log y on log x over points with y > 0."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    keep = (x > 0) & (y > 0)
    return linear_fit(np.log(x[keep]), np.log(y[keep]))


__all__ = ["SIGNIFICANCE", "mean_se", "ecdf", "GofResult", "chi_square_geometric", "chi_square_two_sample",
           "correlation", "lag_correlation", "correlation_bound", "wilson_interval", "proportion",
           "LinearFit", "linear_fit", "loglog_fit"]
