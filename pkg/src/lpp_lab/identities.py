"""Deterministic identity suite and closed-form anchors.

Each check draws its own random instances from keyed streams, so the suite
is reproducible to the byte.  A check reports how many instances it saw and
how many violated the identity; queue-interchange windows that never
forget their initial state are counted as inconclusive, not as failures.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from . import _kernels as K
from . import analytics as an
from . import engine
from .queueing import interchange_check, lindley, propagate_with_sojourns
from .sampling import RngStream, WeightField, sample_geometric

MAX_SIDE = 32


@dataclass(frozen=True)
class CheckResult:
    name: str
    instances: int
    failures: int
    inconclusive: int = 0
    detail: str = ""
    gating: bool = True

    @property
    def ok(self) -> bool:
        return self.failures == 0 and self.instances > 0

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        if not self.gating:
            tag = f"INFO({tag.lower()})"
        extra = f", {self.inconclusive} inconclusive" if self.inconclusive else ""
        tail = f" [{self.detail}]" if self.detail and not self.ok else ""
        return f"{tag} {self.name}: {self.failures}/{self.instances} violations{extra}{tail}"


class _Instances:
    """Random small lattices for one check, keyed by (seed, check index)."""

    def __init__(self, seed: int, check: int):
        self.seed = seed
        self.check = check

    def stream(self, i: int) -> RngStream:
        return RngStream(self.seed, (self.check << 32) | i)

    @staticmethod
    def dims(st: RngStream, lo: int = 2):
        u = st.uniform_open(3)
        h = lo + int(u[0] * (MAX_SIDE - lo + 1) - 1e-12)
        w = lo + int(u[1] * (MAX_SIDE - lo + 1) - 1e-12)
        r = 0.1 + 0.8 * float(u[2])
        return h, w, r

    @staticmethod
    def weights(st: RngStream, h: int, w: int, r: float) -> np.ndarray:
        return sample_geometric(st, r, h * w).reshape(h, w).astype(np.int32)


def _randint(st: RngStream, lo: int, hi: int) -> int:
    """Uniform integer in [lo, hi]."""
    return lo + min(hi - lo, int(float(st.uniform_open()) * (hi - lo + 1)))


# ---------------------------------------------------------------- lattice checks

def check_recovery_and_cocycle(seed: int, n: int):
    inst = _Instances(seed, 1)
    bad_rec = bad_coc = 0
    for i in range(n):
        st = inst.stream(i)
        h, w, r = inst.dims(st)
        om = inst.weights(st, h, w, r)
        # alternate bulk grids and stationary boundary grids
        if i % 2:
            p = r + (1 - r) * float(st.uniform_open())
            I = sample_geometric(st, min(p, 0.999), w - 1).astype(np.int64)
            J = sample_geometric(st, r / min(p, 0.999), h - 1).astype(np.int64)
            g = K.sw_grid(om, I, J)
        else:
            g = K.forward_bulk(om, 0, 0)
        Ih = g[:, 1:] - g[:, :-1]
        Jv = g[1:, :] - g[:-1, :]
        if not np.array_equal(np.minimum(Ih[1:, :], Jv[:, 1:]), om[1:, 1:]):
            bad_rec += 1
        if not np.array_equal(Ih[:-1, :] + Jv[:, 1:], Jv[:, :-1] + Ih[1:, :]):
            bad_coc += 1
    return [CheckResult("recovery", n, bad_rec), CheckResult("cocycle", n, bad_coc)]


def check_superadditivity(seed: int, n: int):
    inst = _Instances(seed, 2)
    bad = 0
    for i in range(n):
        st = inst.stream(i)
        h, w, r = inst.dims(st)
        f = WeightField.from_array(inst.weights(st, h, w, r))
        x = (_randint(st, 0, w - 1), _randint(st, 0, h - 1))
        y = (_randint(st, x[0], w - 1), _randint(st, x[1], h - 1))
        z = (_randint(st, y[0], w - 1), _randint(st, y[1], h - 1))
        gx = engine.bulk_passage_forward(f, x)
        gy = engine.bulk_passage_forward(f, y)
        if gx.at(y) + gy.at(z) - f.at(y) > gx.at(z):
            bad += 1
    return [CheckResult("superadditivity", n, bad)]


def check_push_forward(seed: int, n: int):
    inst = _Instances(seed, 3)
    bad = 0
    for i in range(n):
        st = inst.stream(i)
        h, w, r = inst.dims(st)
        f = WeightField.from_array(inst.weights(st, h, w, r))
        gx = engine.bulk_passage_forward(f, (0, 0))
        y = (_randint(st, 0, w - 1), _randint(st, 0, h - 1))
        bd = engine.boundary_from_increments(gx, y, f.corner)
        sub = f.window(y, f.corner)
        gy = engine.sw_boundary_passage(sub, bd)
        lhs = gx.values[y[1]:, y[0]:]
        if not np.array_equal(lhs, gx.at(y) + gy.values):
            bad += 1
    return [CheckResult("push-forward", n, bad)]


def check_exit_shift(seed: int, n: int):
    inst = _Instances(seed, 4)
    bad = 0
    for i in range(n):
        st = inst.stream(i)
        h, w, r = inst.dims(st, lo=3)
        om = inst.weights(st, h, w, r)
        p = min(r + (1 - r) * float(st.uniform_open()), 0.999)
        I = sample_geometric(st, p, w - 1).astype(np.int64)
        J = sample_geometric(st, r / p, h - 1).astype(np.int64)
        tx, ty = w - 1, h - 1
        g = K.sw_grid(om, I, J)
        Ih = g[:, 1:] - g[:, :-1]
        Jv = g[1:, :] - g[:-1, :]
        _, z1, z2 = K.sw_exit_extremes(om, I, J, ty, tx)
        ok = True
        for l in range(1, tx):
            _, s1, s2 = K.sw_exit_extremes(np.ascontiguousarray(om[:, l:]), I[l:].copy(),
                                           np.ascontiguousarray(Jv[:, l]), ty, tx - l)
            for a, b in ((z1, s1), (z2, s2)):
                if (a - l >= 1 or b >= 1) and a - l != b:
                    ok = False
        for l in range(1, ty):
            _, s1, s2 = K.sw_exit_extremes(np.ascontiguousarray(om[l:, :]), np.ascontiguousarray(Ih[l, :]),
                                           J[l:].copy(), ty - l, tx)
            for a, b in ((z1, s1), (z2, s2)):
                if (a + l <= -1 or b <= -1) and a + l != b:
                    ok = False
        bad += not ok
    return [CheckResult("exit-shift", n, bad)]


def _extremal(F, R, G, om, xs, ys, prefer_e1: bool) -> bool:
    # a site lies on some geodesic iff F + R - w == G; the e1-most (e2-most)
    # geodesic steps e1 (e2) whenever that neighbour lies on one
    on = (F + R - om) == G
    h, w = om.shape
    for k in range(len(xs) - 1):
        x, y = xs[k], ys[k]
        right_ok = x + 1 < w and on[y, x + 1]
        up_ok = y + 1 < h and on[y + 1, x]
        step_e1 = xs[k + 1] == x + 1
        if prefer_e1 and right_ok and not step_e1:
            return False
        if not prefer_e1 and up_ok and step_e1:
            return False
    return True


def check_geodesics(seed: int, n: int):
    inst = _Instances(seed, 5)
    bad_w = bad_o = 0
    for i in range(n):
        st = inst.stream(i)
        h, w, r = inst.dims(st)
        # small support makes ties common
        om = inst.weights(st, h, w, max(r, 0.5)) % 3
        f = WeightField.from_array(om)
        rev = engine.bulk_passage_reverse(f, f.corner)
        F = K.forward_bulk(f.contiguous(), 0, 0)
        G = int(F[-1, -1])
        right = engine.trace_geodesic(rev, (0, 0), f.corner, "rightmost")
        up = engine.trace_geodesic(rev, (0, 0), f.corner, "upmost")
        if engine.geodesic_weight(f, right) != G or engine.geodesic_weight(f, up) != G:
            bad_w += 1
        rx = right.vertices[:, 0]
        ux = up.vertices[:, 0]
        ordered = bool(np.all(rx >= ux))
        ext = (_extremal(F, rev.values, G, f.contiguous(), rx, right.vertices[:, 1], True)
               and _extremal(F, rev.values, G, f.contiguous(), ux, up.vertices[:, 1], False))
        bad_o += not (ordered and ext)
    return [CheckResult("geodesic-weight", n, bad_w), CheckResult("geodesic-ordering", n, bad_o)]


def check_reflection(seed: int, n: int):
    inst = _Instances(seed, 6)
    bad = 0
    for i in range(n):
        st = inst.stream(i)
        h, w, r = inst.dims(st)
        f = WeightField.from_array(inst.weights(st, h, w, r))
        rev = engine.bulk_passage_reverse(f, f.corner)
        fwd = engine.bulk_passage_forward(engine.reflect_field(f), (-f.corner[0], -f.corner[1]))
        if not np.array_equal(rev.values, fwd.values[::-1, ::-1]):
            bad += 1
    return [CheckResult("reverse-equals-reflected-forward", n, bad)]


# ---------------------------------------------------------------- queue checks

def _lindley_reference(a, s, t0):
    t, d, sd = [], [], []
    prev = t0
    for aj, sj in zip(a.tolist(), s.tolist()):
        tj = max(prev - aj, 0) + sj
        t.append(tj)
        d.append(tj + aj - prev)
        sd.append(min(aj, prev))
        prev = tj
    return t, d, sd


def check_queues(seed: int, n: int):
    inst = _Instances(seed, 7)
    bad_c = bad_d = bad_k = bad_ref = 0
    for i in range(n):
        st = inst.stream(i)
        u = st.uniform_open(3)
        L = 1 + int(u[0] * 200)
        a = sample_geometric(st, 0.05 + 0.9 * float(u[1]), L).astype(np.int64)
        s = sample_geometric(st, 0.05 + 0.9 * float(u[2]), L).astype(np.int64)
        t0 = _randint(st, 0, 10)
        q = lindley(a, s, t0)
        tprev = np.concatenate([[t0], q.t[:-1]])
        bad_c += not np.array_equal(q.t + q.a, tprev + q.d)
        bad_d += not bool(np.all(q.d >= q.s))
        bad_k += int(q.d.sum()) != int(q.a.sum()) + q.t_last - t0
        ref = _lindley_reference(a, s, t0)
        bad_ref += not (q.t.tolist() == ref[0] and q.d.tolist() == ref[1] and q.s_dual.tolist() == ref[2])
    return [CheckResult("queue-cocycle", n, bad_c), CheckResult("departures-dominate-services", n, bad_d),
            CheckResult("conservation", n, bad_k), CheckResult("lindley-reference", n, bad_ref)]


def check_interchange(seed: int, n: int):
    inst = _Instances(seed, 8)
    bad = inc = 0
    for i in range(n):
        st = inst.stream(i)
        u = np.sort(0.05 + 0.9 * st.uniform_open(3))
        sigma, alpha, beta = (float(x) for x in u)
        if not sigma < alpha < beta:
            inc += 1
            continue
        res = interchange_check(st, beta, alpha, sigma, window=256, cap=1 << 14)
        if res.status != "stabilized":
            inc += 1
        elif not res.equal:
            bad += 1
    return [CheckResult("interchange-identity", n, bad, inc)]


def check_lindley_dp(seed: int, n: int):
    inst = _Instances(seed, 9)
    bad = 0
    for i in range(n):
        st = inst.stream(i)
        h, w, r = inst.dims(st)
        om = inst.weights(st, h, w, r)
        p = min(r + (1 - r) * float(st.uniform_open()), 0.999)
        I = sample_geometric(st, p, w - 1).astype(np.int64)
        J = sample_geometric(st, r / p, h - 1).astype(np.int64)
        g = K.sw_grid(om, I, J)
        Ih = g[:, 1:] - g[:, :-1]
        Jv = g[1:, :] - g[:-1, :]
        col = J
        ok = True
        for k in range(w - 1):
            d, t = propagate_with_sojourns(col, om[1:, k + 1], int(Ih[0, k]))
            ok &= np.array_equal(d, Jv[:, k + 1]) and np.array_equal(t, Ih[1:, k])
            col = d
        bad += not ok
    return [CheckResult("lindley-dp-equivalence", n, bad)]


LATTICE_CHECKS: List[Callable] = [
    check_recovery_and_cocycle, check_superadditivity, check_push_forward, check_exit_shift,
    check_geodesics, check_reflection, check_queues, check_interchange, check_lindley_dp,
]


def identity_suite(seed: int = 2024, instances: int = 1000) -> List[CheckResult]:
    out: List[CheckResult] = []
    for fn in LATTICE_CHECKS:
        out.extend(fn(seed, instances))
    return out


# ---------------------------------------------------------------- closed forms

def closed_form_suite(seed: int = 2024, grid: int = 1000, draws: int = 10_000) -> List[CheckResult]:
    st = RngStream(seed, 1 << 40)
    out = []
    side = int(math.ceil(math.sqrt(grid)))
    rs = np.linspace(0.05, 0.95, side)
    ts = np.linspace(0.02, 0.98, side)

    # direction -> parameter -> direction, and parameter -> direction -> parameter
    worst_dir = worst_par = 0.0
    cnt = 0
    for r in rs:
        for t in ts:
            p = an.pbar((t, 1 - t), r)
            worst_dir = max(worst_dir, abs(an.xibar(p, r)[0] - t))
            q = r + (1 - r) * t
            worst_par = max(worst_par, abs(an.pbar(an.xibar(q, r), r) - q))
            cnt += 1
    out.append(CheckResult("roundtrip-direction", cnt, int(worst_dir > an.ROUND_TRIP_TOL), detail=f"max {worst_dir:.3g}"))
    out.append(CheckResult("roundtrip-parameter", cnt, int(worst_par > an.ROUND_TRIP_TOL), detail=f"max {worst_par:.3g}"))

    # min over a dense p-grid of M^p(x) against the shape function
    bad = 0
    worst = 0.0
    n_var = max(1, grid // 10)
    for i in range(n_var):
        r, a, b = 0.05 + 0.9 * float(st.uniform_open()), float(st.uniform_open()), float(st.uniform_open())
        ps = np.linspace(r, 1, 20001)[1:-1]
        vals = a * ps / (1 - ps) + r * b / (ps - r)
        j = int(np.argmin(vals))
        lo, hi = ps[max(j - 1, 0)], ps[min(j + 1, ps.size - 1)]
        fine = np.linspace(lo, hi, 20001)
        mv = float(np.min(a * fine / (1 - fine) + r * b / (fine - r)))
        err = abs(mv - an.shape_gamma((a, b), r))
        worst = max(worst, err)
        bad += err > an.VARIATIONAL_TOL
    out.append(CheckResult("variational-shape", n_var, bad, detail=f"max {worst:.3g}"))

    # tilt balance, relative to the size of M
    bad = 0
    worst = 0.0
    for i in range(draws):
        u = st.uniform_open(4)
        r = 0.05 + 0.9 * float(u[0])
        a, b = 0.01 + float(u[1]), 0.01 + float(u[2])
        lam = 1 + (1 / r - 1) * float(u[3])
        pm = an.pbar_minus_lambda(a, b, lam, r)
        pp = lam * pm
        if not (r < pm and pp < 1):
            continue
        m1, m2 = an.stationary_M(pm, (a, b), r), an.stationary_M(pp, (a, b), r)
        rel = abs(m1 - m2) / max(1.0, abs(m1))
        worst = max(worst, rel)
        bad += rel > 1e-9
    out.append(CheckResult("tilt-balance", draws, bad, detail=f"max {worst:.3g}"))

    # cone-based inequalities
    bad5 = bad6a = bad6b = bad7 = bad8 = bad9 = 0
    n9 = bad9_stated = n9_stated = 0
    for i in range(draws):
        u = st.uniform_open(7)
        r = 0.05 + 0.9 * float(u[0])
        delta = r * (0.05 + 0.9 * float(u[1]))  # below r so C0 exists
        lo_t, hi_t = delta / (1 + delta), 1 / (1 + delta)
        t1 = lo_t + (hi_t - lo_t) * float(u[2])
        t2 = lo_t + (hi_t - lo_t) * float(u[3])
        scale = 0.1 + 10 * float(u[4])
        a, b = scale * t1, scale * (1 - t1)
        bc = an.bound_constants(delta, r)
        lam = 1 + (1 / r - 1) * float(u[5])
        if lam >= 1 / r:
            lam = math.nextafter(1 / r, 0)
        pb = an.pbar((a, b), r)
        bad5 += an.pbar_minus_lambda(a, b, lam, r) - pb < -bc.C0 * (lam - 1) - 1e-12
        pb2 = an.pbar((t2, 1 - t2), r)
        bad6a += abs(pb - pb2) > bc.C1 * abs(t1 - t2) * (1 + 1e-12) + 1e-15
        qq = r + (1 - r) * float(u[6])
        bad6b += abs(an.xibar(qq, r)[0] - t1) > bc.C2 * abs(qq - pb) * (1 + 1e-12) + 1e-15
        g = an.shape_gamma((a, b), r)
        l1 = a + b
        bad7 += not (bc.shape_lo * l1 * (1 - 1e-12) <= g <= bc.shape_hi * l1 * (1 + 1e-12))
        bad8 += not (bc.pbar_lo - 1e-15 <= pb <= bc.pbar_hi + 1e-15)
    # Taylor remainder: draws cover the stated domain until the gated subset,
    # which also has s - r >= eps so that every point between 1 and lam keeps
    # lam*s - r >= eps, reaches the requested count
    while n9 < draws:
        u = st.uniform_open(6)
        r = 0.05 + 0.9 * float(u[0])
        a, b = 0.1 + 10 * float(u[1]), 0.1 + 10 * float(u[2])
        s = r + (1 - r) * float(u[3])
        eps = min(r, 1 - s, (1 - r) / 2) * (0.001 + 0.998 * float(u[4]))
        lam_lo, lam_hi = max((r + eps) / s, 1.0), (1 - eps) / s
        if lam_lo > lam_hi:
            continue
        lt = lam_lo + (lam_hi - lam_lo) * float(u[5])
        Lv, ex = an.taylor_terms(a, b, s, lt, r)
        miss = abs(Lv - ex) > an.taylor_bound(a, b, lt, eps) * (1 + 1e-9) + 1e-12
        n9_stated += 1
        bad9_stated += miss
        if s - r >= eps:
            n9 += 1
            bad9 += miss
    out += [CheckResult("lower-tilt-root-bound", draws, bad5), CheckResult("pbar-lipschitz", draws, bad6a),
            CheckResult("direction-lipschitz", draws, bad6b), CheckResult("shape-bounds", draws, bad7),
            CheckResult("pbar-bounds", draws, bad8), CheckResult("taylor-remainder", n9, bad9),
            CheckResult("taylor-remainder-stated-domain", n9_stated, bad9_stated, gating=False)]
    return out


def all_pass(results: List[CheckResult]) -> bool:
    return all(c.ok for c in results if c.gating)


__all__ = ["CheckResult", "all_pass", "identity_suite", "closed_form_suite", "LATTICE_CHECKS", "MAX_SIDE"]
