"""Experiment reports and their serializations.

The canonical JSON omits wall-clock timing, so two runs of the same
configuration produce identical bytes whatever the worker count.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .. import __version__

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


def verdict(ok: Optional[bool]) -> str:
    """True -> pass, False -> fail, None -> inconclusive."""
    if ok is None:
        return INCONCLUSIVE
    return PASS if ok else FAIL


@dataclass
class Estimate:
    params: Dict[str, object]
    estimate: float
    se: float
    n: int
    ci: Optional[Tuple[float, float]] = None
    label: str = "value"

    def to_dict(self):
        d = {"label": self.label, "params": self.params, "estimate": self.estimate, "se": self.se, "n": self.n}
        if self.ci is not None:
            d["ci"] = [self.ci[0], self.ci[1]]
        return d


@dataclass
class ExperimentReport:
    experiment: str
    config: Dict[str, object]
    estimates: List[Estimate] = field(default_factory=list)
    statistics: Dict[str, object] = field(default_factory=dict)
    verdicts: Dict[str, str] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    version: str = __version__
    wall_seconds: Optional[float] = None

    @property
    def status(self) -> str:
        vals = list(self.verdicts.values())
        if FAIL in vals:
            return FAIL
        if INCONCLUSIVE in vals:
            return INCONCLUSIVE
        return PASS

    def add(self, params, estimate, se, n, ci=None, label="value"):
        self.estimates.append(Estimate(dict(params), float(estimate), float(se), int(n),
                                       None if ci is None else (float(ci[0]), float(ci[1])), label))

    def to_dict(self, timing: bool = False):
        d = {
            "experiment": self.experiment,
            "version": self.version,
            "config": self.config,
            "estimates": [e.to_dict() for e in self.estimates],
            "statistics": self.statistics,
            "verdicts": self.verdicts,
            "status": self.status,
            "warnings": self.warnings,
        }
        if timing:
            d["timing"] = {"wall_seconds": self.wall_seconds}
        return _clean(d)

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), indent=2, allow_nan=False) + "\n"

    def canonical_bytes(self) -> bytes:
        return self.to_json(timing=False).encode("utf-8")

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_bytes()).hexdigest()

    def to_csv(self) -> str:
        names: List[str] = []
        for e in self.estimates:
            for k in e.params:
                if k not in names:
                    names.append(k)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        # parameter columns that collide with a fixed column get a prefix
        head = ["param_" + k if k in _CSV_FIXED else k for k in names]
        w.writerow(["experiment", "label"] + head + ["estimate", "se", "n"])
        for e in self.estimates:
            row = [self.experiment, e.label] + [_fmt(e.params.get(k, "")) for k in names]
            w.writerow(row + [_fmt(e.estimate), _fmt(e.se), e.n])
        return buf.getvalue()


_CSV_FIXED = ("experiment", "label", "estimate", "se", "n")


def _fmt(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return v


def _clean(obj):
    # numpy scalars to python, non-finite floats to strings
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


__all__ = ["PASS", "FAIL", "INCONCLUSIVE", "verdict", "Estimate", "ExperimentReport"]
