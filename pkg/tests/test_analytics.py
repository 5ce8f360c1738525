import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.optimize import brentq, minimize_scalar

from lpp_lab import analytics as an
from lpp_lab.errors import ParameterError

rs = st.floats(0.02, 0.98)
ts = st.floats(0.01, 0.99)
pos = st.floats(0.01, 50.0)


def _argmin_M(x, r):
    res = minimize_scalar(lambda p: an.stationary_M(p, x, r), bounds=(r + 1e-12, 1 - 1e-12),
                          method="bounded", options={"xatol": 1e-13})
    return res.x, res.fun


def test_pbar_examples():
    assert an.pbar((0.5, 0.5), 0.25) == pytest.approx(0.5, abs=1e-15)
    r = 0.25
    assert an.pbar((r / (1 + r), 1 / (1 + r)), r) == pytest.approx(5 / 8, abs=1e-14)
    assert an.pbar((1 - 1e-12, 1e-12), r) == pytest.approx(r, abs=1e-5)
    with pytest.raises(ParameterError):
        an.pbar((0.0, 1.0), r)


def test_xibar_examples():
    assert an.xibar(0.5, 0.25) == pytest.approx((0.5, 0.5), abs=1e-15)
    with pytest.raises(ParameterError):
        an.xibar(0.25, 0.25)
    with pytest.raises(ParameterError):
        an.xibar(1.0, 0.25)


def test_shape_and_M_examples():
    assert an.shape_gamma((1, 1), 0.25) == pytest.approx(2.0, abs=1e-15)
    assert an.shape_gamma((3, 0), 0.25) == pytest.approx(0.25 * 3 / 0.75)
    assert an.stationary_M(0.5, (1, 1), 0.25) == pytest.approx(2.0, abs=1e-15)
    with pytest.raises(ParameterError):
        an.shape_gamma((-1, 1), 0.25)
    with pytest.raises(ParameterError):
        an.stationary_M(0.25, (1, 1), 0.25)


@given(rs, ts, st.floats(0.1, 100))
def test_pbar_is_the_minimizer_of_M(r, t, scale):
    x = (scale * t, scale * (1 - t))
    p_star, m_star = _argmin_M(x, r)
    pb = an.pbar(x, r)
    assert pb == pytest.approx(p_star, abs=1e-6)
    assert an.stationary_M(pb, x, r) == pytest.approx(m_star, rel=1e-10)
    assert an.shape_gamma(x, r) == pytest.approx(an.stationary_M(pb, x, r), rel=1e-12)
    assert an.pbar((7 * x[0], 7 * x[1]), r) == pytest.approx(pb, abs=1e-15)


@given(rs, st.floats(0.001, 0.999))
def test_xibar_is_the_characteristic_direction(r, u):
    p = r + (1 - r) * u
    assume(r < p < 1)
    x1, x2 = an.xibar(p, r)
    assert x1 + x2 == pytest.approx(1.0, abs=4.5e-16)
    # stationarity condition of p -> M^p(x): x1/(1-p)^2 = r x2/(p-r)^2
    assert x1 / (1 - p) ** 2 == pytest.approx(r * x2 / (p - r) ** 2, rel=1e-9)
    assert an.pbar((x1, x2), r) == pytest.approx(p, abs=1e-12)


@given(rs, ts)
def test_round_trip_on_directions(r, t):
    assert an.xibar(an.pbar((t, 1 - t), r), r)[0] == pytest.approx(t, abs=1e-12)


def test_monotonicity():
    for r in (0.1, 0.25, 0.7):
        t = np.linspace(0.001, 0.999, 2001)
        pb = an.pbar(np.stack([t, 1 - t], axis=-1), r)
        assert np.all(np.diff(pb) < 0)
        p = np.linspace(r + 1e-3, 1 - 1e-3, 2001)
        assert np.all(np.diff(an.xibar(p, r)[:, 0]) < 0)


@given(rs, ts, st.floats(0.001, 0.999), st.floats(0.001, 0.999))
def test_M_convex_and_above_shape(r, t, u, v):
    x = (t, 1 - t)
    p1, p2 = r + (1 - r) * u, r + (1 - r) * v
    assume(r < min(p1, p2) and max(p1, p2) < 1 and abs(p1 - p2) > 1e-6)
    g = an.shape_gamma(x, r)
    assert an.stationary_M(p1, x, r) >= g * (1 - 1e-12)
    mid = an.stationary_M((p1 + p2) / 2, x, r)
    assert mid < (an.stationary_M(p1, x, r) + an.stationary_M(p2, x, r)) / 2


def test_tilt_roots_examples():
    r = 0.25
    assert an.pbar_minus_lambda(r, 1.0, 2.0, r) == pytest.approx(5 / 12, abs=1e-14)
    assert an.stationary_M(5 / 12, (0.25, 1), r) == pytest.approx(47 / 28, abs=1e-13)
    assert an.stationary_M(5 / 6, (0.25, 1), r) == pytest.approx(47 / 28, abs=1e-13)
    assert an.pbar_minus_lambda(1.0, 2.0, 1.0, r) == pytest.approx(an.pbar((1, 2), r), abs=1e-14)
    assert an.pbar_minus_lambda(1.0, 2.0, 1 / r, r) == pytest.approx(r, abs=1e-12)
    assert an.pbar_plus_lambda(1.0, 2.0, 1 / r, r) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ParameterError):
        an.pbar_minus_lambda(1.0, 1.0, 0.5, r)
    with pytest.raises(ParameterError):
        an.pbar_minus_lambda(1.0, 1.0, 5.0, r)


@given(rs, pos, pos, st.floats(0.01, 0.99))
def test_tilt_root_against_bracketing(r, a, b, u):
    lam = 1 + (1 / r - 1) * u
    pb = an.pbar((a, b), r)
    pm = an.pbar_minus_lambda(a, b, lam, r)
    h = lambda p: an.stationary_M(lam * p, (a, b), r) - an.stationary_M(p, (a, b), r)
    lo, hi = r * (1 + 1e-12), min(pb, (1 - 1e-12) / lam)
    assume(h(lo) < 0 < h(hi))
    ref = brentq(h, lo, hi, xtol=1e-15, rtol=1e-15)
    assert pm == pytest.approx(ref, abs=1e-9)
    assert r <= pm <= pb <= lam * pm <= 1


def test_tilt_root_near_diagonal_branch():
    r = 0.3
    for eps in (0.0, 1e-11, -1e-11, 1e-7):
        a = r * 1.0 + eps
        pm = an.pbar_minus_lambda(a, 1.0, 1.5, r)
        assert an.stationary_M(pm, (a, 1), r) == pytest.approx(an.stationary_M(1.5 * pm, (a, 1), r), rel=1e-9)


def test_log_mgf_closed_form():
    assert an.L_pq((3, 4), 0.4, 0.4, 0.25) == 0.0
    p, q = 0.45, 0.55
    # geometric MGF summed directly: E[(q/p)^I] = sum (1-p) p^k (q/p)^k
    series = sum((1 - p) * q ** k for k in range(2000))
    assert an.L_pq((1, 0), p, q, 0.25) == pytest.approx(math.log(series), abs=1e-12)
    assert an.L_pq((6, 6), p, q, 0.25) == pytest.approx(2.4328, abs=1e-4)


def test_curly_L():
    r = 0.25
    assert an.curlyL(1.0, 0.4, (1, 1), r).value == 0.0
    assert an.curlyL(3.0, 0.4, (1, 1), r).infinite
    with pytest.raises(ParameterError):
        an.curlyL(0.5, 0.4, (1, 1), r)


@given(rs, st.floats(0.01, 0.95), st.floats(0.01, 0.99), pos, pos)
def test_curly_L_argmin_matches_grid(r, uq, ul, m, n):
    q = r + (1 - r) * uq
    assume(r < q < 1)
    lam = 1 + (1 / q - 1) * ul
    assume(lam * q < 1 - 1e-6 and lam > 1 + 1e-6)
    res = an.curlyL(lam, q, (m, n), r)
    grid = np.linspace(q, 1 / lam, 4001)[:-1]
    grid = grid[grid > r]
    vals = [an.L_pq((m, n), s, lam * s, r) for s in grid]
    k = int(np.argmin(vals))
    step = grid[1] - grid[0]
    assert abs(res.argmin - grid[k]) <= 2 * step
    assert res.value <= vals[k] + 1e-9 * max(1.0, abs(vals[k]))


def test_bound_constants():
    assert an.bound_constants(0.1, 0.5).C2 == pytest.approx(18.0, abs=1e-12)
    with pytest.raises(ParameterError):
        an.bound_constants(0.5, 0.25)
    assert an.bound_constants(0.5, 0.25, strict=False).C0 is None
    assert an.in_cone((1, 2), 0.5) and not an.in_cone((1, 3), 0.5)


@given(rs, pos, st.floats(0.0, 50.0))
def test_shape_bounds(r, x1, x2):
    bc = an.bound_constants(0.5, r, strict=False)
    g = an.shape_gamma((x1, x2), r)
    l1 = x1 + x2
    assert bc.shape_lo * l1 * (1 - 1e-12) <= g <= bc.shape_hi * l1 * (1 + 1e-12)


@given(rs, st.floats(0.01, 0.99), st.floats(0.0, 1.0))
def test_pbar_bounds_on_cone(r, d, u):
    lo, hi = d / (1 + d), 1 / (1 + d)
    t = lo + (hi - lo) * u
    bc = an.bound_constants(d, r, strict=False)
    assert bc.pbar_lo - 1e-15 <= an.pbar((t, 1 - t), r) <= bc.pbar_hi + 1e-15


def test_diagnostics_are_finite():
    d = an.exit_decay_diagnostics(0.2, 0.25)
    assert d["a0"] > 0 and d["epsilon"] > 0
