"""Experiment configuration: typed fields, flat key=value files, per-experiment defaults."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from ..errors import ConfigError

EXPERIMENTS = ("shape", "logmgf", "burke", "exit-tail", "crossing", "rw", "rw-boundary", "biinf", "analytics")


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(x) for x in str(text).split(",") if x.strip())


def _ints(text: str) -> Tuple[int, ...]:
    return tuple(int(x) for x in str(text).split(",") if x.strip())


# key -> parser for string values (flags and config files share these)
PARSERS = {
    "r": float, "p": float, "q": float, "xi": _floats, "m": int, "n": int, "size": _ints,
    "delta": float, "alpha": float, "s": _floats, "reps": int, "seed": int, "threads": int,
    "out": str, "format": str, "kappa": float, "a0": float, "gap": float, "t": float, "tol": float,
}

# run-time plumbing that does not change results and is not echoed
_PLUMBING = ("threads", "out", "format")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    r: Optional[float] = None
    p: Optional[float] = None
    q: Optional[float] = None
    xi: Optional[Tuple[float, ...]] = None
    m: Optional[int] = None
    n: Optional[int] = None
    size: Optional[Tuple[int, ...]] = None
    delta: Optional[float] = None
    alpha: Optional[float] = None
    s: Optional[Tuple[float, ...]] = None
    reps: Optional[int] = None
    seed: int = 0
    threads: int = 1
    out: Optional[str] = None
    format: Optional[str] = None
    kappa: Optional[float] = None
    a0: Optional[float] = None
    gap: Optional[float] = None
    t: Optional[float] = None
    tol: Optional[float] = None

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)

    def echo(self) -> Dict[str, object]:
        """Result-defining fields, in declaration order, unset ones dropped."""
        outd = {}
        for f in dataclasses.fields(self):
            if f.name in _PLUMBING:
                continue
            v = getattr(self, f.name)
            if v is None:
                continue
            outd[f.name] = list(v) if isinstance(v, tuple) else v
        return outd


REQUIRED = {
    "shape": ("r",),
    "logmgf": ("r", "p", "q"),
    "burke": ("r", "p"),
    "exit-tail": ("r",),
    "crossing": ("r",),
    "rw": ("p",),
    "rw-boundary": ("r",),
    "biinf": ("r", "delta"),
    "analytics": ("r",),
}

DEFAULTS = {
    "shape": dict(n=400, reps=100, tol=0.1),
    "logmgf": dict(m=6, n=6, reps=100_000),
    "burke": dict(size=(200,), reps=50),
    "exit-tail": dict(n=200, s=(0.5, 1.0, 1.5, 2.0), reps=20_000, kappa=1.0),
    "crossing": dict(n=200, alpha=0.5, s=(2.0,), reps=10_000),
    "rw": dict(n=40, reps=100_000),
    "rw-boundary": dict(xi=(0.5, 0.5), size=(64, 128, 256, 512), reps=2_000, a0=0.5),
    "biinf": dict(size=(24, 48, 96), reps=500),
    "analytics": dict(m=1, n=1),
}


def parse_value(key: str, text) -> object:
    if key not in PARSERS:
        raise ConfigError(f"unknown key {key!r}")
    try:
        return PARSERS[key](text)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {text!r}")


def load_config_file(path: str) -> Dict[str, object]:
    """Flat ``key = value`` lines; ``#`` starts a comment.  Keys mirror the flags."""
    values: Dict[str, object] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, val = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        values[key] = parse_value(key, val)
    return values


def _check(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def resolve(experiment: str, values: Dict[str, object]) -> ExperimentConfig:
    """Apply defaults for ``experiment`` and validate every field."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    vals = {k: v for k, v in values.items() if v is not None}
    for k in vals:
        if k not in PARSERS:
            raise ConfigError(f"unknown key {k!r}")
    missing = [k for k in REQUIRED[experiment] if k not in vals]
    if missing:
        raise ConfigError(f"{experiment}: missing required value(s): " + ", ".join("--" + k for k in missing))
    merged = dict(DEFAULTS[experiment])
    merged.update(vals)
    cfg = ExperimentConfig(experiment=experiment, **merged)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig):
    e = cfg.experiment
    fin = lambda x: x is None or math.isfinite(x)
    for name in ("r", "p", "q", "delta", "alpha", "kappa", "a0", "gap", "t", "tol"):
        _check(fin(getattr(cfg, name)), f"{name} must be finite")
    if cfg.r is not None:
        _check(0.0 < cfg.r < 1.0, f"r must lie in (0, 1), got {cfg.r}")
    if e != "analytics":
        _check(cfg.reps is not None and cfg.reps >= 1, f"reps must be >= 1, got {cfg.reps}")
    _check(0 <= cfg.seed < 2 ** 64, "seed must fit in 64 unsigned bits")
    _check(cfg.threads >= 1, "threads must be >= 1")
    if cfg.format is not None:
        _check(cfg.format in ("csv", "json"), f"format must be csv or json, got {cfg.format!r}")
    for name in ("m", "n"):
        v = getattr(cfg, name)
        _check(v is None or v >= 0, f"{name} must be nonnegative")
    if cfg.size is not None:
        _check(len(cfg.size) >= 1 and all(x >= 1 for x in cfg.size), "size entries must be >= 1")
    if cfg.s is not None:
        _check(len(cfg.s) >= 1 and all(x >= 0 and math.isfinite(x) for x in cfg.s), "s values must be >= 0")
    if cfg.xi is not None:
        _check(len(cfg.xi) == 2 and all(x > 0 for x in cfg.xi), "xi must be two positive numbers")
    if cfg.delta is not None:
        _check(0.0 < cfg.delta < 1.0, f"delta must lie in (0, 1), got {cfg.delta}")
    if cfg.alpha is not None:
        _check(0.0 < cfg.alpha < 1.0, f"alpha must lie in (0, 1), got {cfg.alpha}")
    if cfg.kappa is not None:
        _check(cfg.kappa >= 0, "kappa must be >= 0")
    if cfg.a0 is not None:
        _check(0.0 < cfg.a0 < 1.0, "a0 must lie in (0, 1)")
    if cfg.gap is not None:
        _check(cfg.gap >= 0, "gap must be >= 0")
    if e in ("logmgf", "burke"):
        for name in ("p", "q"):
            v = getattr(cfg, name)
            _check(v is None or cfg.r < v < 1.0, f"{name} must lie in (r, 1) = ({cfg.r}, 1), got {v}")
    if e == "exit-tail" and cfg.p is not None:
        _check(cfg.r < cfg.p < 1.0, f"p must lie in (r, 1), got {cfg.p}")
    if e == "rw":
        for name in ("p", "q"):
            v = getattr(cfg, name)
            _check(v is None or 0.0 < v < 1.0, f"{name} must lie in (0, 1), got {v}")
        _check(cfg.n >= 1, "n (walk horizon) must be >= 1")
    if e == "shape":
        _check(cfg.n >= 1, "n must be >= 1")
    if e in ("exit-tail", "crossing"):
        _check(cfg.n >= 1 and (cfg.m is None or cfg.m >= 1), "grid dimensions must be >= 1")


__all__ = ["ExperimentConfig", "EXPERIMENTS", "PARSERS", "REQUIRED", "DEFAULTS", "parse_value",
           "load_config_file", "resolve", "validate"]
