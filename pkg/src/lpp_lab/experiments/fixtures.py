"""Calibrated thresholds stored as JSON next to the config that produced them."""
from __future__ import annotations

import json
import os
from pathlib import Path

from ..errors import ConfigError

ENV_VAR = "LPP_LAB_FIXTURES"


def fixture_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path(__file__).resolve().parent.parent / "fixtures"


def load_fixture(name: str) -> dict:
    path = fixture_dir() / f"{name}.json"
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"fixture {name!r} not found at {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"fixture {path} is not valid JSON: {exc}")


__all__ = ["ENV_VAR", "fixture_dir", "load_fixture"]
