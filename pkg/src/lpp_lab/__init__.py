"""Simulation and verification toolkit for geometric last-passage percolation."""
from __future__ import annotations

__version__ = "0.1.0"
