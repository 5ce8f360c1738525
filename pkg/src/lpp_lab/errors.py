"""Exception types shared across the package."""
from __future__ import annotations


class LabError(Exception):
    pass


class ParameterError(LabError, ValueError):
    """Input outside the domain of an operation."""


class DegenerateTargetError(ParameterError):
    """Exit query for a target on the boundary axes."""


class InstabilityError(ParameterError):
    """Queue with service mean not below arrival mean."""


class ConfigError(LabError, ValueError):
    """Bad experiment or CLI configuration."""
