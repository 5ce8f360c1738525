import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from lpp_lab import _kernels as K
from lpp_lab import queueing as Q
from lpp_lab.errors import InstabilityError, ParameterError
from lpp_lab.experiments.stats import (chi_square_geometric, chi_square_two_sample, correlation,
                                       correlation_bound, mean_se)
from lpp_lab.sampling import RngStream, sample_geometric


def ref_lindley(a, s, t0):
    t, d, sd, prev = [], [], [], t0
    for aj, sj in zip(a, s):
        tj = max(prev - aj, 0) + sj
        t.append(tj)
        d.append(tj + aj - prev)
        sd.append(min(aj, prev))
        prev = tj
    return t, d, sd


seqs = st.integers(1, 40).flatmap(lambda n: st.tuples(
    arrays(np.int64, n, elements=st.integers(0, 9)), arrays(np.int64, n, elements=st.integers(0, 9))))


def test_hand_example():
    q = Q.lindley([1, 3], [2, 1], 0)
    assert q.t.tolist() == [2, 1] and q.d.tolist() == [3, 2] and q.s_dual.tolist() == [0, 2]


def test_idle_server():
    a = np.array([3, 0, 2, 5])
    q = Q.lindley(a, np.zeros(4, dtype=int), 0)
    assert not q.t.any() and q.d.tolist() == a.tolist()
    assert q.s_dual.tolist() == [min(x, 0) for x in a]


def test_lindley_errors():
    with pytest.raises(ParameterError):
        Q.lindley([1, 2], [1], 0)
    with pytest.raises(ParameterError):
        Q.lindley([1, -2], [1, 1], 0)


@given(seqs, st.integers(0, 12))
def test_recurrences_match_reference(pair, t0):
    a, s = pair
    q = Q.lindley(a, s, t0)
    t, d, sd = ref_lindley(a.tolist(), s.tolist(), t0)
    assert q.t.tolist() == t and q.d.tolist() == d and q.s_dual.tolist() == sd
    tprev = np.concatenate([[t0], q.t[:-1]])
    assert np.array_equal(q.t + q.a, tprev + q.d)
    assert (q.d >= q.s).all()
    assert q.d.sum() == q.a.sum() + q.t_last - t0


@given(seqs, st.data())
def test_sojourns_decrease_in_arrivals(pair, data):
    a, s = pair
    bump = data.draw(arrays(np.int64, a.size, elements=st.integers(0, 3)))
    t0 = data.draw(st.integers(0, 5))
    assert (Q.lindley(a, s, t0).t >= Q.lindley(a + bump, s, t0).t).all()


def test_stationary_sojourn_init():
    s = RngStream(3)
    assert all(Q.stationary_sojourn_init(s, 0.0, 0.4) == 0 for _ in range(50))
    with pytest.raises(InstabilityError):
        Q.stationary_sojourn_init(s, 0.5, 0.5)
    x = np.array([Q.stationary_sojourn_init(s, 0.3, 0.6) for _ in range(40_000)])
    m, se = mean_se(x)
    assert abs(m - 1.0) <= 3 * se


def test_stationary_window_departures():
    # Geom(sigma) services, Geom(alpha) gaps, stationary start: departures ~ Geom(alpha)
    sigma, alpha = 0.3, 0.6
    s = RngStream(4)
    out = []
    for _ in range(2000):
        a = sample_geometric(s, alpha, 50)
        sv = sample_geometric(s, sigma, 50)
        out.append(Q.lindley(a, sv, Q.stationary_sojourn_init(s, sigma, alpha)).d)
    assert chi_square_geometric(np.concatenate(out), alpha).p_value > 1e-3


def test_triple_map_examples():
    assert Q.geometric_triple_map(3, 1, 2) == (4, 2, 1)
    assert Q.geometric_triple_map(1, 4, 0) == (0, 3, 1)


def test_triple_map_preserves_law():
    s = RngStream(5)
    n, r, q = 100_000, 0.25, 0.5
    I = sample_geometric(s, q, n)
    J = sample_geometric(s, r / q, n)
    w = sample_geometric(s, r, n)
    I2, J2, w2 = Q.geometric_triple_map(I, J, w)
    for x, y in ((I, I2), (J, J2), (w, w2)):
        assert chi_square_two_sample(x, y).p_value > 1e-3
    code = lambda a, b, c: np.minimum(a, 4) * 25 + np.minimum(b, 4) * 5 + np.minimum(c, 4)
    assert chi_square_two_sample(code(I, J, w), code(I2, J2, w2)).p_value > 1e-3


def test_identity_with_idle_service():
    s = RngStream(6)
    b = sample_geometric(s, 0.7, 300)
    a = sample_geometric(s, 0.5, 300)
    res = Q.queue_identity_sides(b, a, np.zeros(300, dtype=int))
    assert res.equal and np.array_equal(res.lhs, Q.departures(b, a))


def test_identity_five_element_instance():
    b, a, s = [2, 0, 3, 1, 4], [1, 2, 0, 2, 1], [0, 1, 1, 0, 2]
    # both sides by the reference recurrence
    d_ba = ref_lindley(b, a, 0)[1]
    lhs = ref_lindley(d_ba, s, 0)[1]
    _, d_as, r_as = ref_lindley(a, s, 0)
    rhs = ref_lindley(ref_lindley(b, r_as, 0)[1], d_as, 0)[1]
    # hand-run: D(b,a)=[3,2,0,3,3], D(a,s)=[1,3,1,0,3], R(a,s)=[0,0,0,2,0], D(b,R)=[2,0,3,3,2]
    assert lhs == rhs == [3, 3, 1, 1, 5]
    res = Q.queue_identity_sides(b, a, s)
    assert res.lhs.tolist() == lhs and res.rhs.tolist() == rhs


def test_interchange_identity_on_long_windows():
    st_ = RngStream(7)
    inconclusive = 0
    for k in range(1000):
        u = np.sort(0.1 + 0.8 * RngStream(7, k + 1).uniform_open(3))
        res = Q.interchange_check(RngStream(8, k), float(u[2]), float(u[1]), float(u[0]), window=10_000, cap=10_000)
        if res.status != "stabilized":
            inconclusive += 1
            continue
        assert res.equal
    assert inconclusive < 50


def test_interchange_requires_order():
    with pytest.raises(InstabilityError):
        Q.interchange_check(RngStream(1), 0.3, 0.5, 0.1)


def test_coupled_pair():
    s = RngStream(9)
    J1, J2 = Q.sample_coupled_J_pair(s, 0.25, 0.5, 0.5, 100)
    assert np.array_equal(J1, J2)
    J1, J2 = Q.sample_coupled_J_pair(s, 0.25, 0.4, 0.6, 100_000)
    assert (J2 <= J1).all()
    assert chi_square_geometric(J1, 0.25 / 0.4).p_value > 1e-3
    assert chi_square_geometric(J2, 0.25 / 0.6).p_value > 1e-3
    with pytest.raises(ParameterError):
        Q.sample_coupled_J_pair(s, 0.25, 0.6, 0.4, 10)


def test_coupled_boundary_orders_and_marginals():
    s = RngStream(10)
    cb = Q.sample_coupled_boundary(s, 0.25, 0.4, 0.6, 50_000, 50_000)
    assert all(cb.certificate.values())
    assert (cb.I1 <= cb.I2).all() and (cb.J2 <= cb.J1).all()
    assert chi_square_geometric(cb.I1, 0.4).p_value > 1e-3
    assert chi_square_geometric(cb.I2, 0.6).p_value > 1e-3


@pytest.mark.parametrize("seed", range(20))
def test_propagation_is_the_dp_increment(seed):
    s = RngStream(seed, 11)
    h, w = 12, 9
    om = sample_geometric(s, 0.3, h * w).reshape(h, w)
    I = sample_geometric(s, 0.5, w - 1).astype(np.int64)
    J = sample_geometric(s, 0.6, h - 1).astype(np.int64)
    g = K.sw_grid(om, I, J)
    Ih, Jv = g[:, 1:] - g[:, :-1], g[1:, :] - g[:-1, :]
    col = J
    for k in range(w - 1):
        nxt = Q.propagate_boundary(col, om[1:, k + 1], int(Ih[0, k]))
        assert np.array_equal(nxt, Jv[:, k + 1])
        col = nxt


def test_zero_bulk_keeps_column():
    J = np.array([4, 0, 2, 7])
    assert Q.propagate_boundary(J, np.zeros(4, dtype=int)).tolist() == J.tolist()


def test_propagated_column_is_stationary():
    s = RngStream(12)
    r, p = 0.25, 0.5
    out = []
    for _ in range(2000):
        J = sample_geometric(s, r / p, 50)
        w = sample_geometric(s, r, 50)
        out.append(Q.propagate_boundary(J, w, Q.stationary_sojourn_init(s, r, r / p)))
    assert chi_square_geometric(np.concatenate(out), r / p).p_value > 1e-3


def test_boundary_walk_basics():
    J = np.array([1, 2, 3, 4, 5, 6])
    walk = Q.build_boundary_walk(J, J, 3)
    assert walk.S(0) == 0 and not walk.partial_sums.any()
    Jh = np.array([0, 4, 1, 1, 9, 2])
    walk = Q.build_boundary_walk(J, Jh, 3)
    for n in range(-2, 4):
        assert walk.S(n) - walk.S(n - 1) == walk.step(n) == J[n + 2] - Jh[n + 2]
    assert walk.positive_half().tolist() == [walk.S(1), walk.S(2), walk.S(3)]
    assert walk.negative_half().tolist() == [walk.S(-1), walk.S(-2), walk.S(-3)]
    with pytest.raises(ParameterError):
        Q.build_boundary_walk(J[:4], Jh, 3)


def test_half_walks_uncorrelated():
    s = RngStream(13)
    K_, n = 8, 20_000
    pos, neg = np.empty(n), np.empty(n)
    for i in range(n):
        walk = Q.build_boundary_walk(sample_geometric(s, 0.5, 2 * K_), sample_geometric(s, 0.5, 2 * K_), K_)
        pos[i] = walk.positive_half().max()
        neg[i] = walk.negative_half().max()
    rho, m = correlation(pos, neg)
    assert abs(rho) <= correlation_bound(m)
