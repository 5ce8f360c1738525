"""Deterministic self-test: lattice and queue identities plus closed-form anchors."""
from __future__ import annotations

from typing import List, Tuple

from .identities import CheckResult, all_pass, closed_form_suite, identity_suite

DEFAULT_SEED = 2024


def run_selftest(seed: int = DEFAULT_SEED, instances: int = 1000) -> Tuple[bool, List[CheckResult], str]:
    results = identity_suite(seed, instances) + closed_form_suite(seed)
    ok = all_pass(results)
    lines = [c.line() for c in results]
    failing = [c.name for c in results if c.gating and not c.ok]
    if failing:
        lines.append("selftest FAILED: " + ", ".join(failing))
    else:
        lines.append(f"selftest passed: {sum(c.gating for c in results)} checks")
    return ok, results, "\n".join(lines) + "\n"


__all__ = ["run_selftest", "DEFAULT_SEED"]
