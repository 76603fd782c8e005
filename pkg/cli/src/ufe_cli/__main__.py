#!/usr/bin/env python3
"""Command-line entry point.

``ufe analyze`` runs the full pipeline on a CSV file; ``ufe golden`` replays
the built-in reference cases.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from typing import Optional

from .config import (
    DEFAULT_ALPHA,
    FORMATS,
    AnalysisConfig,
    ConfigError,
    get_golden_tolerance,
    get_log_level,
)
from .failure import exit_with_config_failure, exit_with_stage_failure
from .golden import GOLDEN_CASES, run_golden
from .pipeline import (
    EXIT_INPUT_ERROR,
    EXIT_OK,
    OUTPUT,
    StageError,
    exit_code_for,
    run_analysis,
)
from .report import write_report


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="ufe",
        description="Estimate and test uncertain fixed-effects models",
    )
    parser.add_argument(
        "--log-level",
        default=None,
        help="Logging level (default: $UFE_LOG_LEVEL or WARNING)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="Analyse a CSV dataset")
    analyze.add_argument("--input", required=True, help="CSV file with a header row")
    analyze.add_argument("--design", required=True, choices=["single", "two"])
    analyze.add_argument(
        "--interaction",
        action="store_true",
        help="Fit the interaction model (two-factor designs only)",
    )
    analyze.add_argument(
        "--alpha",
        type=float,
        default=DEFAULT_ALPHA,
        help=f"Significance level (default: {DEFAULT_ALPHA})",
    )
    analyze.add_argument("--objective", choices=["larger", "smaller"], default=None)
    analyze.add_argument("--format", choices=list(FORMATS), default="text")
    analyze.add_argument("--output", default=None, help="Write the report here (default: stdout)")

    golden = sub.add_parser("golden", help="Replay built-in reference cases")
    golden.add_argument("names", nargs="+", choices=sorted(GOLDEN_CASES))

    return parser.parse_args(argv)


def _configure_logging(explicit: Optional[str]) -> None:
    logging.basicConfig(stream=sys.stderr, level=get_log_level(explicit))


def _analyze(args: argparse.Namespace) -> int:
    config = AnalysisConfig(
        input_path=args.input,
        design=args.design,
        interaction=args.interaction,
        alpha=args.alpha,
        objective=args.objective,
        output_format=args.format,
        output_path=args.output,
    )
    report = run_analysis(config)
    if config.output_path is None:
        write_report(report, config.output_format, sys.stdout)
    else:
        with config.output_path.open("w", encoding="utf-8") as out:
            write_report(report, config.output_format, out)
    if report.halted:
        print(
            f"ufe: residual validation rejected at {report.diagnostics.blocked}; "
            "estimation and effect tests were skipped.",
            file=sys.stderr,
        )
    return exit_code_for(report)


def _golden(args: argparse.Namespace) -> int:
    tolerance = get_golden_tolerance()
    status = EXIT_OK
    for name in args.names:
        _, mismatches = run_golden(name, tolerance)
        if mismatches:
            status = EXIT_INPUT_ERROR
            print(f"✗ {name}: {len(mismatches)} mismatch(es) at tolerance {tolerance:g}")
            for mismatch in mismatches:
                print(f"  {mismatch}")
        else:
            print(f"✓ {name}: all values within {tolerance:g}")
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point."""
    args = parse_args(argv)
    try:
        _configure_logging(args.log_level)
        if args.command == "analyze":
            return _analyze(args)
        return _golden(args)
    except ConfigError as exc:
        exit_with_config_failure(exc)
    except StageError as exc:
        exit_with_stage_failure(exc)
    except OSError as exc:
        exit_with_stage_failure(StageError(OUTPUT, exc))


if __name__ == "__main__":
    sys.exit(main())
