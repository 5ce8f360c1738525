"""Finite-box surrogate for bi-infinite geodesics through the edge (0, e1).

For each replicate the box [-N, N]^2 is sampled once; the union over anchor
pairs of the edge-usage event is evaluated from one column per anchor.
"""
from __future__ import annotations

import math
from typing import List, Tuple

import numpy as np

from .. import _kernels as K
from ..errors import ConfigError
from ..sampling import Point, sample_weight_field
from . import stats as st
from .config import ExperimentConfig
from .parallel import run_replicates
from .report import ExperimentReport, verdict

MEMORY_BUDGET = 1 << 30  # bytes per replicate


def southwest_anchors(N: int, delta: float) -> List[Point]:
    top = math.floor(-delta * N)
    left = [(-N, y) for y in range(-N, top + 1)]
    bottom = [(x, -N) for x in range(-N + 1, top + 1)]
    return left + bottom


def northeast_anchors(N: int, delta: float) -> List[Point]:
    lo = math.ceil(delta * N)
    right = [(N, y) for y in range(lo, N + 1)]
    top = [(x, N) for x in range(lo, N)]
    return right + top


def replicate_bytes(N: int, delta: float) -> int:
    side = 2 * N + 1
    anchors = len(southwest_anchors(N, delta)) + len(northeast_anchors(N, delta))
    return 4 * side * side + 8 * anchors * side


def union_event(w: np.ndarray, N: int, us, vs) -> bool:
    """Edge-usage union on a (2N+1)^2 array whose index (0, 0) is site (-N, -N)."""
    ua = np.array([(x + N, y + N) for x, y in us], dtype=np.int64).reshape(-1, 2)
    va = np.array([(x + N, y + N) for x, y in vs], dtype=np.int64).reshape(-1, 2)
    return bool(K.edge_usage_any(w, ua, va, N, N))


def run_biinf(cfg: ExperimentConfig) -> ExperimentReport:
    r, delta = cfg.r, cfg.delta
    rep = ExperimentReport(cfg.experiment, cfg.echo())
    sizes = list(cfg.size)
    for N in sizes:
        if math.floor(-delta * N) < -N or math.ceil(delta * N) > N:
            raise ConfigError(f"biinf: empty anchor set at N={N}")
        need = replicate_bytes(N, delta) * max(1, cfg.threads)
        if need > MEMORY_BUDGET:
            raise ConfigError(f"biinf: N={N} needs {need} bytes, over the budget of {MEMORY_BUDGET}")
        if N < 8 / delta ** 3:
            rep.warnings.append(f"N={N} is below 8/delta^3 = {8 / delta ** 3:.4g}")
    est, ses = [], []
    for cell, N in enumerate(sizes):
        us = southwest_anchors(N, delta)
        vs = northeast_anchors(N, delta)

        def task(stream, k, N=N, us=us, vs=vs):
            w = sample_weight_field(stream, (-N, -N), 2 * N + 1, 2 * N + 1, r).contiguous()
            return union_event(w, N, us, vs)

        hits = run_replicates(task, cfg.reps, cfg.seed, cfg.threads, cell=cell)
        k = int(sum(hits))
        ph, se, ci = st.proportion(k, len(hits))
        rep.add({"N": N, "delta": delta}, ph, se, len(hits), ci, label="P(union of edge-usage events)")
        rep.statistics[f"N{N}"] = {"southwest_anchors": len(us), "northeast_anchors": len(vs)}
        est.append(ph)
        ses.append(se)
    if len(sizes) >= 2:
        ok = all(b <= a + 2 * math.sqrt(sa ** 2 + sb ** 2) for a, b, sa, sb in zip(est, est[1:], ses, ses[1:]))
        rep.verdicts["nonincreasing_in_N_2se"] = verdict(ok)
        fit = st.loglog_fit(sizes, est)
        rep.statistics["loglog_fit"] = {"slope": fit.slope, "r2": fit.r2, "points": fit.n}
    return rep


__all__ = ["southwest_anchors", "northeast_anchors", "replicate_bytes", "union_event", "run_biinf"]
