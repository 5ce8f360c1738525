"""Closed-form quantities of the geometric corner-growth model.

Everything here is double precision and vectorises over numpy arrays where
that is natural.  Conventions:

* ``r`` is the bulk weight parameter, weights ~ Geom(r).
* ``p`` in (r, 1) is the stationary parameter: horizontal boundary weights
  are Geom(p) and vertical ones Geom(r/p).
* Directions are normalised to ``xi1 + xi2 = 1`` on entry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ParameterError

ROUND_TRIP_TOL = 1e-12
VARIATIONAL_TOL = 1e-8
# below this relative gap a == r*b is treated as exact
_DIAG_FALLBACK = 1e-9


def _check_r(r):
    if not (0.0 < r < 1.0):
        raise ParameterError(f"r must lie in (0, 1), got {r}")


def _check_p(p, r):
    _check_r(r)
    pa = np.asarray(p, dtype=float)
    if np.any(~((pa > r) & (pa < 1.0))):
        raise ParameterError(f"p must lie in (r, 1) = ({r}, 1), got {p}")


def normalize_direction(xi) -> Tuple[float, float]:
    a, b = float(xi[0]), float(xi[1])
    if not (a > 0 and b > 0) or not (math.isfinite(a) and math.isfinite(b)):
        raise ParameterError(f"direction components must be positive, got {tuple(xi)}")
    s = a + b
    return (a / s, b / s)


def in_cone(x, delta) -> bool:
    """Membership in the cone {x1 >= delta x2 and x2 >= delta x1}."""
    return bool(x[0] >= delta * x[1] and x[1] >= delta * x[0])


def pbar(xi, r):
    """Stationary parameter whose characteristic direction is ``xi``.

    Accepts a pair or an array of shape (..., 2); scale-invariant.
    """
    _check_r(r)
    x = np.asarray(xi, dtype=float)
    a, b = x[..., 0], x[..., 1]
    if np.any(~(a > 0)) or np.any(~(b > 0)):
        raise ParameterError(f"direction components must be positive, got {xi}")
    s = a + b
    a, b = a / s, b / s
    root = np.sqrt(r * a * b)
    val = (r * (a + b) + (r + 1.0) * root) / (a + r * b + 2.0 * root)
    return float(val) if np.ndim(val) == 0 else val


def xibar(p, r):
    """Characteristic direction of parameter ``p``; inverse of :func:`pbar`."""
    _check_p(p, r)
    p = np.asarray(p, dtype=float)
    # the denominator written as the sum of the two numerators, so the
    # components add to 1 up to rounding
    n1 = r * (1.0 - p) ** 2
    n2 = (p - r) ** 2
    x1 = n1 / (n1 + n2)
    x2 = n2 / (n1 + n2)
    if np.ndim(p) == 0:
        return (float(x1), float(x2))
    return np.stack([x1, x2], axis=-1)


def shape_gamma(x, r):
    """Limit shape: r|x|_1/(1-r) + 2 sqrt(r x1 x2)/(1-r)."""
    _check_r(r)
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    if np.any(x1 < 0) or np.any(x2 < 0):
        raise ParameterError(f"shape function needs x >= 0, got {x}")
    val = (r * (x1 + x2) + 2.0 * math.sqrt(r) * np.sqrt(x1 * x2)) / (1.0 - r)
    return float(val) if np.ndim(val) == 0 else val


def stationary_M(p, x, r):
    """Mean stationary passage value to ``x``: p x1/(1-p) + r x2/(p-r)."""
    _check_p(p, r)
    p = np.asarray(p, dtype=float)
    x1, x2 = float(x[0]), float(x[1])
    if x1 < 0 or x2 < 0:
        raise ParameterError(f"x must be nonnegative, got {x}")
    val = p * x1 / (1.0 - p) + r * x2 / (p - r)
    return float(val) if np.ndim(val) == 0 else val


def pbar_minus_lambda(a, b, lam, r):
    """Lower root of M^{p}(a,b) = M^{lam p}(a,b).

    The discriminant form is rewritten by multiplying through with the
    conjugate when the leading term is negative, which removes the 0/0 at
    a = r b.
    """
    _check_r(r)
    a, b, lam = float(a), float(b), float(lam)
    if not (a > 0 and b > 0):
        raise ParameterError(f"a, b must be positive, got ({a}, {b})")
    if not (1.0 <= lam <= 1.0 / r * (1 + 1e-15)):
        raise ParameterError(f"lambda must lie in [1, 1/r], got {lam}")
    if abs(a - r * b) < _DIAG_FALLBACK * b:
        return (r + 1.0) / (lam + 1.0)
    A = r * (lam + 1.0) * (a - b)
    C = r * lam * (r * a - b) * (a - r * b)
    disc = max(A * A - 4.0 * C, 0.0)
    root = math.sqrt(disc)
    if A >= 0:
        p0 = (A + root) / (2.0 * lam * (a - r * b))
    else:
        p0 = 2.0 * r * (r * a - b) / (A - root)
    return _polish_tilt_root(p0, a, b, lam, r)


def _polish_tilt_root(p0, a, b, lam, r):
    # Newton on M^{lam p} - M^p in extended precision; the closed form loses
    # digits when the root sits close to r
    if lam == 1.0:
        return p0
    L = np.longdouble
    a_, b_, lam_, r_ = L(a), L(b), L(lam), L(r)

    def h(p):
        return (lam_ * p * a_ / (1 - lam_ * p) + r_ * b_ / (lam_ * p - r_)
                - p * a_ / (1 - p) - r_ * b_ / (p - r_))

    def dh(p):
        return (lam_ * a_ / (1 - lam_ * p) ** 2 - lam_ * r_ * b_ / (lam_ * p - r_) ** 2
                - a_ / (1 - p) ** 2 + r_ * b_ / (p - r_) ** 2)

    p = L(p0)
    if not (r_ < p and lam_ * p < 1):
        return p0
    best, best_h = p, abs(h(p))
    for _ in range(3):
        d = dh(p)
        if d == 0:
            break
        nxt = p - h(p) / d
        if not (r_ < nxt and lam_ * nxt < 1):
            break
        p = nxt
        hp = abs(h(p))
        if hp < best_h:
            best, best_h = p, hp
    return float(best)


def pbar_plus_lambda(a, b, lam, r):
    return lam * pbar_minus_lambda(a, b, lam, r)


def L_pq(mn, p, q, r):
    """m log((1-p)/(1-q)) + n log((1-r/q)/(1-r/p))."""
    _check_p(p, r)
    _check_p(q, r)
    m, n = float(mn[0]), float(mn[1])
    return m * math.log((1.0 - p) / (1.0 - q)) + n * math.log((1.0 - r / q) / (1.0 - r / p))


@dataclass(frozen=True)
class TiltedRate:
    value: float
    argmin: Optional[float]
    infinite: bool


def curlyL(lam, q, mn, r) -> TiltedRate:
    """inf over s in (q, 1/lam) of L^{s, lam s}(m, n)."""
    _check_r(r)
    lam, q = float(lam), float(q)
    if lam < 1.0:
        raise ParameterError(f"lambda must be >= 1, got {lam}")
    if not (r <= q < 1.0):
        raise ParameterError(f"q must lie in [r, 1), got {q}")
    if lam >= 1.0 / q:
        return TiltedRate(math.inf, None, True)
    if lam == 1.0:
        return TiltedRate(0.0, q, False)
    s = max(q, pbar_minus_lambda(mn[0], mn[1], lam, r))
    if s <= r:
        # only reachable at q == r with the lower root pinned at r
        s = math.nextafter(r, 1.0)
    return TiltedRate(L_pq(mn, s, lam * s, r), s, False)


def dL_ds(s, lam, mn, r):
    """Derivative of s -> L^{s, lam s}(m, n)."""
    return (stationary_M(lam * s, mn, r) - stationary_M(s, mn, r)) / s


@dataclass(frozen=True)
class BoundConstants:
    C0: Optional[float]
    C1: float
    C2: float
    shape_lo: float
    shape_hi: float
    pbar_lo: float
    pbar_hi: float


def C0_constant(delta, r) -> float:
    if not (0.0 < delta < r):
        raise ParameterError(f"C0 needs 0 < delta < r, got delta={delta}, r={r}")
    inv = 1.0 / delta + 1.0
    srd = math.sqrt(r * delta)
    t1 = inv * ((1 + r) ** 2 * delta + 2 * r * r + 2) / (8 * (1 - r) ** 2 * delta)
    t2 = r * (r + 1) * inv / (4 * (1 - r) * srd)
    t3 = (r / delta + 1) / (2 * (1 - r) * srd)
    return max(r + 1.0, t1 + t2 + t3)


def bound_constants(delta, r, strict: bool = True) -> BoundConstants:
    """Explicit constants for the cone S_delta.

    With ``strict`` a ``delta >= r`` raises, since C0 is undefined there;
    otherwise C0 is reported as ``None``.
    """
    _check_r(r)
    if not (0.0 < delta < 1.0):
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    if delta < r:
        c0 = C0_constant(delta, r)
    elif strict:
        raise ParameterError(f"C0 needs delta < r, got delta={delta}, r={r}")
    else:
        c0 = None
    sr = math.sqrt(r)
    c1 = (1 + delta) ** 2 * r * (1 - r) / (2 * delta ** 2 * sr * (1 + sr) ** 2)
    c2 = 2 * (r + 1) ** 2 / (r * (1 - r))
    return BoundConstants(
        C0=c0,
        C1=c1,
        C2=c2,
        shape_lo=r / (1 - r),
        shape_hi=(r + sr) / (1 - r),
        pbar_lo=r + (1 - r) * delta * math.sqrt(r * delta) / (1 + sr) ** 2,
        pbar_hi=1 - (1 - sr) * delta / (1 + sr),
    )


def taylor_terms(a, b, s, lam, r):
    """(L^{s, lam s}(a,b), its second-order expansion at lam = 1)."""
    lin = (lam - 1) * (a * s / (1 - s) + b * r / (s - r))
    quad = 0.5 * (lam - 1) ** 2 * (a * s * s / (1 - s) ** 2 - b * r * (2 * s - r) / (s - r) ** 2)
    return L_pq((a, b), s, lam * s, r), lin + quad


def taylor_bound(a, b, lam, eps):
    return 2.0 * (a + b) * (lam - 1) ** 3 / eps ** 3


def exit_decay_diagnostics(delta, r) -> dict:
    """Intermediate constants of the exit-tail argument.  Informational only."""
    _check_r(r)
    sr = math.sqrt(r)
    a0 = (1 - sr) * r / (2 * (1 + sr) * (1 / delta + 1))
    eps = min(r / 2, (1 - r) * delta * math.sqrt(r * delta) / (1 + sr) ** 2,
              (1 - sr) ** 2 * delta ** 2 / (2 * (1 + sr) ** 2))
    return {"a0": a0, "epsilon": eps}


__all__ = [
    "normalize_direction", "in_cone", "pbar", "xibar", "shape_gamma", "stationary_M",
    "pbar_minus_lambda", "pbar_plus_lambda", "L_pq", "TiltedRate", "curlyL", "dL_ds",
    "BoundConstants", "C0_constant", "bound_constants", "taylor_terms", "taylor_bound",
    "exit_decay_diagnostics",
]
