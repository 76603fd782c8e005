"""Helpers for fatal analysis failures."""

from __future__ import annotations

import sys
from typing import NoReturn, Optional, TextIO

from ufe_engine.exceptions import (
    DegenerateGroupError,
    InfeasibleConstraintsError,
    SchemaError,
    SolverError,
)

from .config import ConfigError
from .pipeline import EXIT_INPUT_ERROR, StageError, describe_stage

_CAUSES: dict[type, tuple[list[str], list[str]]] = {
    SchemaError: (
        [
            "1. The header is not level_a,value or level_a,level_b,value.",
            "2. A value is not a plain decimal number.",
            "3. Some combination of factor levels has no observations.",
        ],
        [
            "1. Check the line named above.",
            "2. Pass --design matching the columns in the file.",
        ],
    ),
    DegenerateGroupError: (
        [
            "1. A level or cell has a single observation.",
            "2. All observations in a group are identical.",
        ],
        [
            "1. Add replicates to the named group.",
            "2. Fit the model without interaction (cells need two points for that test).",
        ],
    ),
    InfeasibleConstraintsError: (
        ["1. The design has empty levels or the constraint weights are inconsistent."],
        ["1. Check that every cell has at least one observation."],
    ),
    SolverError: (
        ["1. The design matrix is badly conditioned."],
        ["1. Rescale the responses and retry."],
    ),
}

_DEFAULT_CAUSES = (
    ["1. The input file is missing or unreadable.", "2. A flag value is out of range."],
    ["1. Check the path and flags, then retry."],
)


def _causes_for(error: Optional[BaseException]) -> tuple[list[str], list[str]]:
    for kind, causes in _CAUSES.items():
        if isinstance(error, kind):
            return causes
    return _DEFAULT_CAUSES


def exit_with_stage_failure(error: StageError, *, out: Optional[TextIO] = None) -> NoReturn:
    """Print a detailed failure report and exit with the stage's exit code."""
    out = out or sys.stderr
    causes, fixes = _causes_for(error.cause)
    lines = [
        f"ufe: Failed while {describe_stage(error.stage)}.",
        "",
        "Details:",
        f"- Stage: {error.stage}",
        f"- Exception: {type(error.cause).__name__}: {error.cause}",
        "",
        "Most likely causes:",
        *causes,
        "",
        "Potential fixes:",
        *fixes,
        "",
        "Exiting now.",
    ]
    print("\n".join(lines), file=out)
    out.flush()
    raise SystemExit(error.exit_code)


def exit_with_config_failure(error: ConfigError, *, out: Optional[TextIO] = None) -> NoReturn:
    """Print a configuration error report and exit with status 1."""
    out = out or sys.stderr
    lines = [
        "ufe: Invalid configuration.",
        "",
        "Details:",
        f"- {error}",
        "",
        "Potential fixes:",
        "1. Run with --help to see accepted values.",
        "2. Unset UFE_TOL / UFE_LOG_LEVEL or give them valid values.",
        "",
        "Exiting now.",
    ]
    print("\n".join(lines), file=out)
    out.flush()
    raise SystemExit(EXIT_INPUT_ERROR)
