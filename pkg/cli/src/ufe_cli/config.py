"""Run configuration and environment overrides."""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from ufe_engine.design_data import Schema
from ufe_engine.estimators import Objective

DEFAULT_ALPHA = 0.05
DEFAULT_TOLERANCE = 1e-3
DEFAULT_LOG_LEVEL = "WARNING"

TOLERANCE_ENV = "UFE_TOL"
LOG_LEVEL_ENV = "UFE_LOG_LEVEL"

FORMATS = ("text", "json")


class ConfigError(ValueError):
    """Raised when a flag or environment override is invalid."""


def get_golden_tolerance() -> float:
    """Absolute tolerance for golden comparisons.

    Returns:
        The value of UFE_TOL, or 1e-3 when it is unset.

    Raises:
        ConfigError: If UFE_TOL is not a finite number >= 0.
    """
    raw = os.getenv(TOLERANCE_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_TOLERANCE
    try:
        value = float(raw)
    except ValueError as exc:
        raise ConfigError(f"{TOLERANCE_ENV} must be a number, got {raw!r}") from exc
    if not math.isfinite(value) or value < 0:
        raise ConfigError(f"{TOLERANCE_ENV} must be a finite value >= 0, got {raw!r}")
    return value


def get_log_level(explicit: Optional[str] = None) -> int:
    """Resolve the log level from a flag, then UFE_LOG_LEVEL, then WARNING."""
    name = (explicit or os.getenv(LOG_LEVEL_ENV) or DEFAULT_LOG_LEVEL).strip().upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        raise ConfigError(f"unknown log level {name!r}")
    return level


@dataclass(frozen=True)
class AnalysisConfig:
    """Everything one ``analyze`` run needs.

    Attributes:
        input_path: CSV file to analyse.
        design: ``single`` or ``two``.
        interaction: Fit the interaction model (two-factor only).
        alpha: Significance level; intervals are reported at confidence 1 - alpha.
        objective: Optional ``larger`` or ``smaller`` recommendation target.
        output_format: ``text`` or ``json``.
        output_path: Write the report here instead of stdout.
    """

    input_path: Path
    design: Schema
    interaction: bool = False
    alpha: float = DEFAULT_ALPHA
    objective: Optional[Objective] = None
    output_format: str = "text"
    output_path: Optional[Path] = None

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "design", Schema(self.design))
            if self.objective is not None:
                object.__setattr__(self, "objective", Objective(self.objective))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        object.__setattr__(self, "input_path", Path(self.input_path))
        if self.output_path is not None:
            object.__setattr__(self, "output_path", Path(self.output_path))
        if not (math.isfinite(self.alpha) and 0.0 < self.alpha < 1.0):
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.output_format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}")
        if self.interaction and self.design is Schema.SINGLE:
            raise ConfigError("--interaction needs a two-factor design")

    @property
    def confidence(self) -> float:
        return 1.0 - self.alpha

    def to_dict(self) -> dict[str, Any]:
        """Settings that affect the numbers, recorded in report provenance."""
        return {
            "design": self.design.value,
            "interaction": self.interaction,
            "alpha": self.alpha,
            "objective": None if self.objective is None else self.objective.value,
        }
