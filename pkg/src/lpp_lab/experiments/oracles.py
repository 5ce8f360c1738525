"""Exact reference computations used to check Monte Carlo output.

Nothing here shares code with the dynamic programs under test except the
weight containers: walks are handled by direct convolution, lattice events
by exhaustive path enumeration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .. import _kernels as K
from ..errors import ParameterError
from ..sampling import Point, WeightField

TRUNCATION_LIMIT = 1e-10


@dataclass(frozen=True, eq=False)
class GeometricDifference:
    """Law of G1 - G2 with G1 ~ Geom(p), G2 ~ Geom(q) independent."""

    p: float
    q: float

    def __post_init__(self):
        for v in (self.p, self.q):
            if not 0.0 <= v < 1.0:
                raise ParameterError(f"geometric parameters must lie in [0, 1), got {v}")

    @property
    def mean(self) -> float:
        return self.p / (1 - self.p) - self.q / (1 - self.q)

    def pmf(self, k):
        k = np.asarray(k)
        c = (1 - self.p) * (1 - self.q) / (1 - self.p * self.q)
        pos = c * self.p ** np.maximum(k, 0)
        neg = c * self.q ** np.maximum(-k, 0)
        return np.where(k >= 0, pos, neg)

    def outside_mass(self, T: int) -> float:
        c = (1 - self.p) * (1 - self.q) / (1 - self.p * self.q)
        return c * (self.p ** (T + 1) / (1 - self.p) + self.q ** (T + 1) / (1 - self.q))

    def support_for(self, tol: float = TRUNCATION_LIMIT) -> int:
        T = 0
        while self.outside_mass(T) >= tol:
            T += 1
        return T

    def truncated(self, T: Optional[int] = None):
        """(renormalized pmf on [-T, T], T, discarded mass)."""
        if T is None:
            T = self.support_for()
        lost = self.outside_mass(T)
        if lost >= TRUNCATION_LIMIT:
            raise ParameterError(f"truncation at T={T} discards mass {lost:.3g} >= {TRUNCATION_LIMIT}")
        pmf = self.pmf(np.arange(-T, T + 1)).astype(float)
        return pmf / pmf.sum(), T, lost


@dataclass(eq=False)
class WalkOracle:
    """Exact stay-nonpositive probabilities of a walk with pmf on [-T, T].

    ``stay[n-1] = P(S_1 <= 0, ..., S_n <= 0)`` for n = 1..n_max.
    """

    pmf: np.ndarray
    T: int
    n_max: int
    truncation_mass: float = 0.0
    stay: np.ndarray = field(init=False, repr=False)
    nonpositive: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.pmf = np.asarray(self.pmf, dtype=float)
        if self.pmf.shape != (2 * self.T + 1,):
            raise ParameterError("pmf must have length 2T + 1")
        if abs(self.pmf.sum() - 1.0) > 1e-12:
            raise ParameterError("pmf must sum to 1")
        if self.truncation_mass >= TRUNCATION_LIMIT:
            raise ParameterError(f"truncation mass {self.truncation_mass:.3g} too large")
        if self.n_max < 1:
            raise ParameterError("n_max must be >= 1")
        self.stay = self._killed()
        self.nonpositive = self._marginals()

    @classmethod
    def geometric_difference(cls, p: float, q: float, n_max: int, T: Optional[int] = None) -> "WalkOracle":
        pmf, T, lost = GeometricDifference(p, q).truncated(T)
        return cls(pmf, T, n_max, lost)

    def _killed(self):
        # dist[i] = P(S_k = i - L, never positive so far), support [-L, 0]
        T = self.T
        dist = np.array([1.0])
        out = np.empty(self.n_max)
        for k in range(self.n_max):
            full = np.convolve(dist, self.pmf)  # support [-L - T, T]
            dist = full[: full.size - T]
            out[k] = dist.sum()
        return out

    def _marginals(self):
        # P(S_k <= 0) for the free walk
        T = self.T
        dist = np.array([1.0])
        out = np.empty(self.n_max)
        for k in range(1, self.n_max + 1):
            dist = np.convolve(dist, self.pmf)  # support [-kT, kT]
            out[k - 1] = dist[: k * T + 1].sum()
        return out

    def sparre_andersen(self) -> np.ndarray:
        """Coefficients of exp(sum_k s^k P(S_k <= 0) / k), orders 1..n_max.

        Uses n b_n = sum_{k=1}^n P(S_k <= 0) b_{n-k}, b_0 = 1.
        """
        a = self.nonpositive
        b = np.zeros(self.n_max + 1)
        b[0] = 1.0
        for n in range(1, self.n_max + 1):
            b[n] = np.dot(a[:n], b[n - 1::-1]) / n
        return b[1:]


def shape_corner_mean(r: float, tol: float = 1e-15) -> float:
    """E[G((0,0),(1,1))] for Geom(r) weights, by enumerating both paths.

    The two paths share the end sites, so the value is 2 E[w] plus the mean of
    the larger middle weight, summed over all pairs of middle weights.
    """
    top = 1
    while r ** top > tol:
        top += 1
    k = np.arange(top + 1)
    pmf = (1 - r) * r ** k
    a, b = np.meshgrid(k, k, indexing="ij")
    mid = float(np.sum(np.outer(pmf, pmf) * np.maximum(a, b)))
    return 2 * r / (1 - r) + mid


def _idx(field: WeightField, x: Point):
    return x[1] - field.origin[1], x[0] - field.origin[0]


def passage_bruteforce(field: WeightField, x: Point, y: Point) -> int:
    uy, ux = _idx(field, x)
    vy, vx = _idx(field, y)
    best, _ = K.enumerate_paths(field.contiguous(), uy, ux, vy, vx, -1, -1)
    return int(best)


def edge_usage_bruteforce(field: WeightField, u: Point, v: Point) -> bool:
    """Some maximal path from u to v steps from (0,0) to (1,0)."""
    uy, ux = _idx(field, u)
    vy, vx = _idx(field, v)
    ey, ex = _idx(field, (0, 0))
    best, best_edge = K.enumerate_paths(field.contiguous(), uy, ux, vy, vx, ey, ex)
    return bool(best_edge == best)


def edge_usage_union_bruteforce(field: WeightField, us: Sequence[Point], vs: Sequence[Point]) -> bool:
    return any(edge_usage_bruteforce(field, u, v) for u in us for v in vs)


def geometric_cdf_le0_difference(p: float, q: float) -> float:
    """P(G1 - G2 <= 0) in closed form."""
    c = (1 - p) * (1 - q) / (1 - p * q)
    return c * (1 + q / (1 - q))


__all__ = ["TRUNCATION_LIMIT", "GeometricDifference", "WalkOracle", "shape_corner_mean", "passage_bruteforce",
           "edge_usage_bruteforce", "edge_usage_union_bruteforce", "geometric_cdf_le0_difference"]
