"""Exception hierarchy; the CLI maps each family to its own exit code."""

from __future__ import annotations


class GEPError(Exception):
    exit_code = 1


class ConfigError(GEPError, ValueError):
    """Invalid parameters or configuration files."""

    exit_code = 2


class DataError(GEPError, ValueError):
    """Malformed or insufficient input data."""

    exit_code = 3


class StageError(GEPError):
    """A pipeline stage failed; ``stage`` names the failing step."""

    exit_code = 4

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class NoEventsError(StageError):
    def __init__(self, message: str = "no events to predict: zero evolution chains were produced") -> None:
        super().__init__("chains", message)
