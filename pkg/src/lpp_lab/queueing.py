"""Discrete-time queues behind the stationary boundary weights.

A queue is fed inter-arrival times ``a`` and service times ``s``; the
Lindley recursion produces sojourns ``t``, inter-departures ``d`` and dual
services.  Finite windows replace the infinite past with an initial sojourn
``t_init``.  Drawing ``t_init`` from the stationary sojourn law makes the
window an exact piece of the stationary queue.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Dict, Optional, Sequence

import numpy as np

from . import _kernels as K
from .errors import InstabilityError, ParameterError
from .sampling import RngStream, sample_geometric


@dataclass(frozen=True, eq=False)
class QueueTrace:
    a: np.ndarray = dc_field(repr=False)
    s: np.ndarray = dc_field(repr=False)
    t_init: int = 0
    t: np.ndarray = dc_field(default=None, repr=False)
    d: np.ndarray = dc_field(default=None, repr=False)
    s_dual: np.ndarray = dc_field(default=None, repr=False)

    @property
    def t_last(self) -> int:
        return int(self.t[-1]) if len(self.t) else int(self.t_init)


def _as_int_array(x, name):
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ParameterError(f"{name} must be one-dimensional")
    arr = arr.astype(np.int64, copy=False)
    if arr.size and arr.min() < 0:
        raise ParameterError(f"{name} must be nonnegative")
    return arr


def lindley(a, s, t_init: int = 0) -> QueueTrace:
    """t_j = max(t_{j-1} - a_j, 0) + s_j with d and dual services alongside."""
    a = _as_int_array(a, "arrivals")
    s = _as_int_array(s, "services")
    if a.shape != s.shape:
        raise ParameterError(f"length mismatch: {a.shape[0]} arrivals vs {s.shape[0]} services")
    if int(t_init) < 0:
        raise ParameterError("initial sojourn must be nonnegative")
    t, d, sd = K.lindley(a, s, np.int64(t_init))
    return QueueTrace(a, s, int(t_init), t, d, sd)


def departures(a, s, t_init: int = 0) -> np.ndarray:
    return lindley(a, s, t_init).d


def dual_services(a, s, t_init: int = 0) -> np.ndarray:
    return lindley(a, s, t_init).s_dual


def stationary_sojourn_init(stream: RngStream, sigma: float, alpha: float) -> int:
    """Stationary sojourn of a queue with Geom(sigma) services and Geom(alpha) gaps."""
    if not (0.0 <= sigma < 1.0 and 0.0 < alpha < 1.0):
        raise ParameterError(f"need 0 <= sigma < 1 and 0 < alpha < 1, got {sigma}, {alpha}")
    if sigma >= alpha:
        raise InstabilityError(f"service parameter {sigma} must be below arrival parameter {alpha}")
    return int(sample_geometric(stream, sigma / alpha))


def geometric_triple_map(I, J, omega):
    """(omega + (I-J)^+, omega + (J-I)^+, min(I, J)); elementwise on arrays."""
    I = np.asarray(I, dtype=np.int64)
    J = np.asarray(J, dtype=np.int64)
    w = np.asarray(omega, dtype=np.int64)
    diff = I - J
    out = (w + np.maximum(diff, 0), w + np.maximum(-diff, 0), np.minimum(I, J))
    if out[0].ndim == 0:
        return tuple(int(v) for v in out)
    return out


# ------------------------------------------------------------- interchange identity

QUEUE_NAMES = ("b|a", "(b|a)|s", "a|s", "b|R(a,s)", "(b|R)|(a|s)")


@dataclass(frozen=True, eq=False)
class IdentitySides:
    """Both sides of D(D(b,a),s) = D(D(b,R(a,s)),D(a,s)) on one window.

    ``start`` is the first index from which every queue has forgotten its
    initial sojourn; ``lhs``/``rhs`` are restricted to ``[start, n)``.
    """

    lhs: np.ndarray = dc_field(repr=False)
    rhs: np.ndarray = dc_field(repr=False)
    start: int = 0
    status: str = "stabilized"  # stabilized | inconclusive
    stable: bool = True

    @property
    def equal(self) -> bool:
        return bool(np.array_equal(self.lhs, self.rhs))


def _both_sides(b, a, s, inits):
    q1 = lindley(b, a, inits[0])
    q2 = lindley(q1.d, s, inits[1])
    q3 = lindley(a, s, inits[2])
    q4 = lindley(b, q3.s_dual, inits[3])
    q5 = lindley(q4.d, q3.d, inits[4])
    return (q1, q2, q3, q4, q5)


def queue_identity_sides(b, a, s, inits: Optional[Sequence[int]] = None) -> IdentitySides:
    """Evaluate both sides of the interchange identity on a finite window.

    ``inits`` gives initial sojourns for the five queues in the order of
    :data:`QUEUE_NAMES` (zeros by default).  Each queue is also run from an
    empty start; from the first index where all five sojourns agree with
    the empty-start runs, the outputs no longer depend on the initial state.
    """
    b = _as_int_array(b, "b")
    a = _as_int_array(a, "a")
    s = _as_int_array(s, "s")
    if not (b.shape == a.shape == s.shape):
        raise ParameterError("b, a, s must share one window")
    n = b.shape[0]
    inits = tuple(int(v) for v in (inits if inits is not None else (0,) * 5))
    if len(inits) != 5 or min(inits) < 0:
        raise ParameterError("inits must be five nonnegative sojourns")
    qs = _both_sides(b, a, s, inits)
    stable = all(q.a.mean() > q.s.mean() for q in qs) if n else False
    if not any(inits):
        return IdentitySides(qs[1].d, qs[4].d, 0, "stabilized", stable)
    zs = _both_sides(b, a, s, (0,) * 5)
    agree = np.ones(n, dtype=bool)
    for q, z in zip(qs, zs):
        agree &= q.t == z.t
    # once all states agree they agree forever; d_j also reads t_{j-1}, so
    # the interior begins one index after the last disagreement
    bad = np.nonzero(~agree)[0]
    start = 1 if bad.size == 0 else int(bad[-1]) + 2
    if start >= n:
        return IdentitySides(qs[1].d[n:], qs[4].d[n:], n, "inconclusive", stable)
    return IdentitySides(qs[1].d[start:], qs[4].d[start:], start, "stabilized", stable)


def stationary_identity_inits(stream: RngStream, beta: float, alpha: float, sigma: float):
    """Marginally stationary sojourns for the five queues of the identity."""
    if not (0 < sigma < alpha < beta < 1):
        raise InstabilityError(f"need 0 < sigma < alpha < beta < 1, got {sigma}, {alpha}, {beta}")
    ratios = (alpha / beta, sigma / beta, sigma / alpha, sigma / beta, alpha / beta)
    return tuple(int(sample_geometric(stream, q)) for q in ratios)


def interchange_check(stream: RngStream, beta: float, alpha: float, sigma: float,
                      window: int = 1024, cap: int = 1 << 16) -> IdentitySides:
    """Sample geometric b, a, s with stationary starts; double the window
    until every queue forgets its start or ``cap`` is reached."""
    n = int(window)
    while True:
        b = sample_geometric(stream, beta, n)
        a = sample_geometric(stream, alpha, n)
        s = sample_geometric(stream, sigma, n)
        inits = stationary_identity_inits(stream, beta, alpha, sigma)
        res = queue_identity_sides(b, a, s, inits)
        if res.status == "stabilized" or n >= cap:
            return res
        n = min(2 * n, cap)


# ------------------------------------------------------------- coupled boundaries

@dataclass(frozen=True, eq=False)
class CoupledBoundary:
    r: float
    q1: float
    q2: float
    I1: np.ndarray = dc_field(repr=False)
    I2: np.ndarray = dc_field(repr=False)
    J1: np.ndarray = dc_field(repr=False)
    J2: np.ndarray = dc_field(repr=False)
    certificate: Dict[str, bool] = dc_field(default_factory=dict)


def _check_pair(r, q1, q2):
    if not (0 < r < q1 <= q2 < 1):
        raise ParameterError(f"need r < q1 <= q2 < 1, got r={r}, q1={q1}, q2={q2}")


def sample_coupled_J_pair(stream: RngStream, r: float, q1: float, q2: float, length: int):
    """Columns (J^{q1}, J^{q2}) with J^{q2} <= J^{q1} pointwise.

    The base column Y ~ Geom(r/q2) serves as the service sequence of a queue
    fed by independent Geom(r/q1) gaps; its departures form J^{q1}.  This
    orientation is the stable one, since r/(q1-r) > r/(q2-r).
    """
    _check_pair(r, q1, q2)
    n = int(length)
    if n < 0:
        raise ParameterError("length must be nonnegative")
    base = sample_geometric(stream, r / q2, n).astype(np.int64)
    if q1 == q2:
        return base.copy(), base
    gaps = sample_geometric(stream, r / q1, n)
    t0 = stationary_sojourn_init(stream, r / q2, r / q1)
    return lindley(gaps, base, t0).d, base


def sample_coupled_boundary(stream: RngStream, r: float, q1: float, q2: float,
                            n_row: int, n_col: int) -> CoupledBoundary:
    """Two stationary boundaries on one corner, ordered I1 <= I2 and J2 <= J1.

    Rows come from one set of uniforms pushed through both inverse CDFs; the
    columns from :func:`sample_coupled_J_pair`.  Each boundary on its own is
    an exact stationary boundary.
    """
    _check_pair(r, q1, q2)
    u = stream.uniform_open(int(n_row))
    I1 = np.floor(np.log(u) / np.log(q1)).astype(np.int64)
    I2 = np.floor(np.log(u) / np.log(q2)).astype(np.int64)
    J1, J2 = sample_coupled_J_pair(stream, r, q1, q2, n_col)
    cert = {"I1<=I2": bool(np.all(I1 <= I2)), "J2<=J1": bool(np.all(J2 <= J1))}
    return CoupledBoundary(r, q1, q2, I1, I2, J1, J2, cert)


def propagate_boundary(J_col, bulk_column_weights, t_init: int = 0) -> np.ndarray:
    """Vertical increments of the next column: departures of the queue with
    arrivals ``J_col`` and services ``bulk_column_weights``."""
    return lindley(J_col, bulk_column_weights, t_init).d


def propagate_with_sojourns(J_col, bulk_column_weights, t_init: int = 0):
    """(next vertical increments, horizontal increments into the next column)."""
    q = lindley(J_col, bulk_column_weights, t_init)
    return q.d, q.t


# ------------------------------------------------------------- boundary walks

@dataclass(frozen=True, eq=False)
class BoundaryWalk:
    """Walk with steps X_j = J_j - Jhat_j for j in [-K+1, K] and S_0 = 0.

    ``partial_sums[n + K]`` is S_n for n in [-K, K].
    """

    K: int
    steps: np.ndarray = dc_field(repr=False)
    partial_sums: np.ndarray = dc_field(repr=False)

    def S(self, n: int) -> int:
        if not -self.K <= n <= self.K:
            raise ParameterError(f"n={n} outside [-{self.K}, {self.K}]")
        return int(self.partial_sums[n + self.K])

    def step(self, j: int) -> int:
        if not -self.K + 1 <= j <= self.K:
            raise ParameterError(f"step index {j} outside [{-self.K + 1}, {self.K}]")
        return int(self.steps[j + self.K - 1])

    def positive_half(self) -> np.ndarray:
        return self.partial_sums[self.K + 1:]

    def negative_half(self) -> np.ndarray:
        """S_{-1}, S_{-2}, ..., S_{-K}."""
        return self.partial_sums[: self.K][::-1]


def build_boundary_walk(J_xi_col, Jhat_eta_col, K: int) -> BoundaryWalk:
    """Both columns are indexed by j in [-K+1, K], stored at position j + K - 1."""
    K = int(K)
    J = np.asarray(J_xi_col, dtype=np.int64)
    Jh = np.asarray(Jhat_eta_col, dtype=np.int64)
    if K < 1 or J.shape != (2 * K,) or Jh.shape != (2 * K,):
        raise ParameterError(f"columns must cover [-K+1, K] (length {2 * K}), got {J.shape}, {Jh.shape}")
    x = J - Jh
    S = np.zeros(2 * K + 1, dtype=np.int64)
    S[K + 1:] = np.cumsum(x[K:])
    # S_n = -(X_{n+1} + ... + X_0) for n < 0
    S[:K] = -np.cumsum(x[:K][::-1])[::-1]
    return BoundaryWalk(K, x, S)


__all__ = [
    "QueueTrace", "lindley", "departures", "dual_services", "stationary_sojourn_init",
    "geometric_triple_map", "QUEUE_NAMES", "IdentitySides", "queue_identity_sides",
    "stationary_identity_inits", "interchange_check", "CoupledBoundary", "sample_coupled_J_pair",
    "sample_coupled_boundary", "propagate_boundary", "propagate_with_sojourns", "BoundaryWalk",
    "build_boundary_walk",
]
