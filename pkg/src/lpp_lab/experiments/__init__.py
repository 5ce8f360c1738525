"""Monte Carlo experiments, statistics helpers and exact oracles."""
from __future__ import annotations

import time

from .biinf import run_biinf
from .config import ExperimentConfig, load_config_file, resolve
from .lattice import run_burke, run_crossing, run_exit_tail, run_logmgf, run_shape
from .report import ExperimentReport
from .walks import run_rw, run_rw_boundary

RUNNERS = {
    "shape": run_shape,
    "logmgf": run_logmgf,
    "burke": run_burke,
    "exit-tail": run_exit_tail,
    "crossing": run_crossing,
    "rw": run_rw,
    "rw-boundary": run_rw_boundary,
    "biinf": run_biinf,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    t0 = time.perf_counter()
    rep = RUNNERS[cfg.experiment](cfg)
    rep.wall_seconds = time.perf_counter() - t0
    return rep


__all__ = ["RUNNERS", "run_experiment", "ExperimentConfig", "ExperimentReport", "resolve", "load_config_file",
           "run_shape", "run_logmgf", "run_burke", "run_exit_tail", "run_crossing", "run_rw",
           "run_rw_boundary", "run_biinf"]
