"""Random-walk experiments: the exact stay-nonpositive oracle and the boundary walks."""
from __future__ import annotations

import math

import numpy as np

from ..analytics import normalize_direction, pbar
from ..errors import ConfigError, ParameterError
from ..queueing import build_boundary_walk
from ..sampling import sample_geometric
from . import stats as st
from .config import ExperimentConfig
from .oracles import GeometricDifference, WalkOracle, geometric_cdf_le0_difference
from .parallel import run_replicates
from .report import ExperimentReport, verdict

SA_TOL = 1e-8
SCALING_BAND = (10, 40)
# moment order used for the polynomial envelope diagnostic
ENVELOPE_MOMENT = 4


def _survival(S: np.ndarray) -> int:
    """Number of leading partial sums that stay <= 0."""
    bad = np.flatnonzero(S > 0)
    return int(bad[0]) if bad.size else int(S.size)


def run_rw(cfg: ExperimentConfig) -> ExperimentReport:
    p = cfg.p
    q = cfg.q if cfg.q is not None else p
    n_max = cfg.n
    rep = ExperimentReport(cfg.experiment, cfg.echo())
    try:
        law = GeometricDifference(p, q)
        oracle = WalkOracle.geometric_difference(p, q, n_max)
    except ParameterError as exc:
        raise ConfigError(str(exc))
    sa = oracle.sparre_andersen()
    gap = float(np.max(np.abs(sa - oracle.stay)))

    def task(stream, k):
        a = sample_geometric(stream, p, n_max).astype(np.int64)
        b = sample_geometric(stream, q, n_max).astype(np.int64)
        return _survival(np.cumsum(a - b))

    life = np.array(run_replicates(task, cfg.reps, cfg.seed, cfg.threads), dtype=np.int64)
    N = life.size
    counts = np.bincount(life, minlength=n_max + 1)
    # survivors past step n: lifetimes >= n
    surv = np.cumsum(counts[::-1])[::-1][1:]
    worst = 0.0
    for n in range(1, n_max + 1):
        k = int(surv[n - 1])
        ph, se, ci = st.proportion(k, N)
        rep.add({"n": n}, ph, se, N, ci, label="P(S_1..S_n <= 0)")
        exact = oracle.stay[n - 1]
        sd = math.sqrt(exact * (1 - exact) / N)
        if sd > 0:
            worst = max(worst, abs(ph - exact) / sd)
        elif ph != exact:
            worst = math.inf
    rep.statistics.update(
        drift=law.mean, support_T=oracle.T, truncation_mass=oracle.truncation_mass,
        oracle_stay=oracle.stay.tolist(), sparre_andersen=sa.tolist(), sa_max_abs_diff=gap,
        p_step_le0=geometric_cdf_le0_difference(p, q), mc_max_abs_z=worst,
    )
    # n = 1 straight from the (truncated) step pmf
    step_le0 = float(np.sum(oracle.pmf[: oracle.T + 1]))
    rep.verdicts["oracle_matches_sparre_andersen"] = verdict(gap <= SA_TOL)
    rep.verdicts["oracle_nonincreasing_in_n"] = verdict(bool(np.all(np.diff(oracle.stay) <= 0)))
    rep.verdicts["n1_equals_step_cdf"] = verdict(abs(oracle.stay[0] - step_le0) <= 1e-12)
    rep.verdicts["monte_carlo_within_3se"] = verdict(worst <= 3.0)
    ns = np.arange(1, n_max + 1)
    lo, hi = SCALING_BAND
    band = (ns >= lo) & (ns <= hi)
    if band.any():
        fit = st.loglog_fit(ns[band], oracle.stay[band])
        rep.statistics["loglog_slope"] = {"slope": fit.slope, "r2": fit.r2}
    if p == q and n_max >= hi:
        c = np.sqrt(ns[band]) * oracle.stay[band]
        spread = float(c.max() / c.min() - 1.0)
        rep.statistics["sqrt_n_scaled"] = {"min": float(c.min()), "max": float(c.max()), "spread": spread}
        rep.verdicts["sqrt_n_scaling_within_10pct"] = verdict(spread <= 0.10)
    k = ENVELOPE_MOMENT
    env = np.maximum(ns ** (-(k - 2) / (2.0 * (k + 1))), abs(law.mean))
    rep.statistics["envelope_ratio_max"] = float(np.max(oracle.stay / env))
    return rep


# ---------------------------------------------------------------- boundary walks

def _directions(cfg: ExperimentConfig, N: int):
    c = normalize_direction(cfg.xi)[0]
    limit = N ** (-cfg.a0 / 2.0)
    d = limit if cfg.gap is None else cfg.gap
    if d > limit * (1 + 1e-12):
        raise ConfigError(f"rw-boundary: separation {d} exceeds the window N^(-a0/2) = {limit:.6g} at N={N}")
    lo_edge = cfg.delta if cfg.delta is not None else 0.0
    dirs = {"xi_lower": c - d, "eta_upper": c, "eta_lower": c, "xi_upper": c + d}
    for name, t in dirs.items():
        if not (lo_edge < t < 1 - lo_edge):
            raise ConfigError(f"rw-boundary: direction {name} has e1-coordinate {t} outside ({lo_edge}, {1 - lo_edge})")
    return dirs, d


def run_rw_boundary(cfg: ExperimentConfig) -> ExperimentReport:
    r = cfg.r
    rep = ExperimentReport(cfg.experiment, cfg.echo())
    sizes = list(cfg.size)
    plans = []
    for N in sizes:
        dirs, d = _directions(cfg, N)
        rho = {k: r / pbar((t, 1 - t), r) for k, t in dirs.items()}
        plans.append((N, max(1, int(math.floor(N ** (2.0 / 3.0) + 1e-9))), d, rho))

    joint_est, joint_se = [], []
    profile_ok = True
    for cell, (N, K, d, rho) in enumerate(plans):
        def task(stream, k, K=K, rho=rho):
            Jp = sample_geometric(stream, rho["xi_lower"], 2 * K)
            Jhp = sample_geometric(stream, rho["eta_upper"], 2 * K)
            Jn = sample_geometric(stream, rho["xi_upper"], 2 * K)
            Jhn = sample_geometric(stream, rho["eta_lower"], 2 * K)
            pos = build_boundary_walk(Jp, Jhp, K).positive_half()
            neg = build_boundary_walk(Jn, Jhn, K).negative_half()
            return _survival(pos), _survival(neg)

        res = np.array(run_replicates(task, cfg.reps, cfg.seed, cfg.threads, cell=cell), dtype=np.int64)
        R = res.shape[0]
        pos_ok = res[:, 0] >= K
        neg_ok = res[:, 1] >= K
        both = pos_ok & neg_ok
        params = {"N": N, "K": K}
        pj, sj, cj = st.proportion(int(both.sum()), R)
        pp, sp, cp = st.proportion(int(pos_ok.sum()), R)
        pn, sn, cn = st.proportion(int(neg_ok.sum()), R)
        rep.add(params, pj, sj, R, cj, label="both halves <= 0")
        rep.add(params, pp, sp, R, cp, label="positive half <= 0")
        rep.add(params, pn, sn, R, cn, label="negative half <= 0")
        joint_est.append(pj)
        joint_se.append(sj)
        prof = [float(np.mean((res[:, 0] >= k) & (res[:, 1] >= k))) for k in range(1, K + 1)]
        profile_ok &= all(a >= b for a, b in zip(prof, prof[1:]))
        drift_pos = _mean(rho["xi_lower"]) - _mean(rho["eta_upper"])
        drift_neg = _mean(rho["xi_upper"]) - _mean(rho["eta_lower"])
        cellstats = {"separation": d, "drift_positive_half": drift_pos, "drift_negative_half": drift_neg,
                     "joint_profile": prof}
        prod = pp * pn
        sprod = math.sqrt((pn * sp) ** 2 + (pp * sn) ** 2)
        tol = 3 * math.sqrt(sj ** 2 + sprod ** 2)
        cellstats["product"] = prod
        rep.verdicts[f"product_form_N{N}"] = verdict(abs(pj - prod) <= tol if tol > 0 else pj == prod)
        if K == 1:
            exact = (geometric_cdf_le0_difference(rho["xi_lower"], rho["eta_upper"])
                     * geometric_cdf_le0_difference(rho["eta_lower"], rho["xi_upper"]))
            cellstats["exact_K1"] = exact
            sd = math.sqrt(exact * (1 - exact) / R)
            rep.verdicts[f"exact_K1_N{N}"] = verdict(abs(pj - exact) <= 3 * sd)
        rep.statistics[f"N{N}"] = cellstats
    rep.verdicts["profile_nonincreasing_in_K"] = verdict(profile_ok)
    if len(sizes) >= 2:
        ok = all(b <= a + 2 * math.sqrt(sa ** 2 + sb ** 2)
                 for a, b, sa, sb in zip(joint_est, joint_est[1:], joint_se, joint_se[1:]))
        rep.verdicts["nonincreasing_in_N_2se"] = verdict(ok)
        fit = st.loglog_fit(sizes, joint_est)
        rep.statistics["loglog_fit_joint"] = {"slope": fit.slope, "r2": fit.r2, "a0": cfg.a0}
        for lab in ("positive half <= 0", "negative half <= 0"):
            ys = [e.estimate for e in rep.estimates if e.label == lab]
            f = st.loglog_fit(sizes, ys)
            rep.statistics[f"loglog_fit_{lab.split()[0]}"] = {"slope": f.slope, "r2": f.r2}
    return rep


def _mean(rho: float) -> float:
    return rho / (1 - rho)


__all__ = ["run_rw", "run_rw_boundary"]
