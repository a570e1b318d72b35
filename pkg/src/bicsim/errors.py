"""Exception types shared across the package."""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid model parameters or run configuration (CLI exit code 2)."""


class NumericalFailure(RuntimeError):
    """Numerical invariant violated during a run (CLI exit code 3)."""
