"""The analysis pipeline: parse, validate residuals, estimate, test, recommend."""

from __future__ import annotations

import hashlib
import io
import logging
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from typing import Any, Optional

import ufe_engine
from ufe_engine.design_data import Factor, SingleFactorData, TwoFactorData, parse_csv
from ufe_engine.estimators import (
    best_cell,
    fit_single_effects,
    fit_single_means,
    fit_two,
    single_factor_residuals,
    two_factor_residuals,
)
from ufe_engine.exceptions import DegenerateGroupError, SequencingError, UFEError
from ufe_engine.uhtest import (
    ResidualDiagnostics,
    diagnose_residuals,
    homogeneity_effects,
    homogeneity_main_effect,
    interaction_test,
)

from . import __version__
from .config import AnalysisConfig
from .report import AnalysisReport, DatasetSummary

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_VALIDATION_HALT = 2

READ = "read"
PARSE = "parse"
DIAGNOSTICS = "diagnostics"
ESTIMATION = "estimation"
TESTS = "tests"
RECOMMENDATION = "recommendation"
OUTPUT = "output"


class StageError(Exception):
    """A pipeline stage failed; carries the stage name and the exit code to use."""

    def __init__(self, stage: str, cause: BaseException) -> None:
        self.stage = stage
        self.cause = cause
        if isinstance(cause, (DegenerateGroupError, SequencingError)):
            self.exit_code = EXIT_VALIDATION_HALT
        else:
            self.exit_code = EXIT_INPUT_ERROR
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")


@contextmanager
def _stage(name: str) -> Iterator[None]:
    logger.debug("stage %s", name)
    try:
        yield
    except (UFEError, OSError, ValueError) as exc:
        raise StageError(name, exc) from exc


def exit_code_for(report: AnalysisReport) -> int:
    return EXIT_VALIDATION_HALT if report.halted else EXIT_OK


def run_analysis(config: AnalysisConfig) -> AnalysisReport:
    """Read config.input_path and analyse it.

    Raises:
        StageError: If any stage fails; the message names the stage.
    """
    with _stage(READ):
        raw = config.input_path.read_bytes()
    return analyze_bytes(raw, config)


def analyze_bytes(raw: bytes, config: AnalysisConfig) -> AnalysisReport:
    """Analyse CSV bytes under config.

    A rejected residual validation is not an error: the returned report
    carries the diagnostics and ``diagnostics.blocked`` names the stage.
    """
    with _stage(PARSE):
        dataset = parse_csv(io.BytesIO(raw), config.design)
    provenance = {
        "input": str(config.input_path),
        "input_sha512": hashlib.sha512(raw).hexdigest(),
        "config": config.to_dict(),
        "engine_version": ufe_engine.__version__,
        "cli_version": __version__,
    }
    if isinstance(dataset, SingleFactorData):
        report = _analyze_single(dataset, config, provenance)
    else:
        report = _analyze_two(dataset, config, provenance)
    if report.halted:
        logger.warning("residual validation rejected at %s", report.diagnostics.blocked)
    return report


def _diagnose(
    groups: Sequence[Sequence[float]], config: AnalysisConfig, labels: Sequence[str]
) -> ResidualDiagnostics:
    with _stage(DIAGNOSTICS):
        return diagnose_residuals(groups, config.alpha, labels)


def _analyze_single(
    d: SingleFactorData, config: AnalysisConfig, provenance: dict[str, Any]
) -> AnalysisReport:
    summary = DatasetSummary.from_dataset(d)
    labels = [str(i + 1) for i in range(d.levels)]
    diagnostics = _diagnose(single_factor_residuals(d), config, labels)
    if not diagnostics.validated:
        return AnalysisReport(summary, diagnostics, provenance=provenance)

    with _stage(ESTIMATION):
        sigma0 = diagnostics.require_validated()
        means = fit_single_means(d)
        fit = fit_single_effects(d, sigma0, config.confidence)
    sigmas = [g.sigma for g in diagnostics.groups]
    with _stage(TESTS):
        tests = (
            homogeneity_effects(
                d, means.mu_i, sigmas, 0.0, config.alpha,
                name="homogeneity-means", parameter="mu",
            ),
            homogeneity_effects(
                d, fit.a_values, sigmas, fit.mu.value, config.alpha,
                name="homogeneity-effects", parameter="a",
            ),
        )
    if config.objective is not None:
        logger.info("recommendations need a two-factor interaction fit; objective ignored")
    return AnalysisReport(summary, diagnostics, fit, tests, provenance=provenance)


def _analyze_two(
    d: TwoFactorData, config: AnalysisConfig, provenance: dict[str, Any]
) -> AnalysisReport:
    summary = DatasetSummary.from_dataset(d)
    labels = [d.cell_name(i, j) for i in range(d.levels_a) for j in range(d.levels_b)]
    with _stage(DIAGNOSTICS):
        residuals = two_factor_residuals(d, config.interaction)
    diagnostics = _diagnose(residuals, config, labels)
    if not diagnostics.validated:
        return AnalysisReport(summary, diagnostics, provenance=provenance)

    with _stage(ESTIMATION):
        fit = fit_two(d, config.interaction, diagnostics.require_validated(), config.confidence)
    with _stage(TESTS):
        tests = [
            homogeneity_main_effect(d, Factor.A, fit, config.alpha),
            homogeneity_main_effect(d, Factor.B, fit, config.alpha),
        ]
        if config.interaction:
            tests.append(interaction_test(d, fit, config.alpha))

    recommendation = None
    if config.objective is not None:
        if config.interaction:
            with _stage(RECOMMENDATION):
                recommendation = best_cell(fit, config.objective)
        else:
            logger.info("recommendations need the interaction model; objective ignored")
    return AnalysisReport(summary, diagnostics, fit, tuple(tests), recommendation, provenance)


def describe_stage(stage: Optional[str]) -> str:
    return {
        READ: "reading the input file",
        PARSE: "parsing the CSV input",
        DIAGNOSTICS: "validating residuals",
        ESTIMATION: "estimating effects",
        TESTS: "testing effects",
        RECOMMENDATION: "choosing the best treatment",
        OUTPUT: "writing the report",
    }.get(stage or "", "running the analysis")
