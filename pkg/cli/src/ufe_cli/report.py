"""Analysis report model, JSON serialization and text rendering."""

from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import IO, Any, Optional

from pygments import highlight
from pygments.formatters import TerminalFormatter
from pygments.lexers import get_lexer_by_name

from ufe_engine.design_data import Dataset, Schema, SingleFactorData
from ufe_engine.estimators import Estimate, EffectFit, Recommendation
from ufe_engine.udist import Interval
from ufe_engine.uhtest import ResidualDiagnostics, TestOutcome

REPORT_KEYS = ("dataset", "diagnostics", "fit", "tests", "recommendation", "provenance")


@dataclass(frozen=True)
class DatasetSummary:
    """Shape of the analysed dataset and its label-to-index map.

    Single-factor replicate counts are stored as an r x 1 table so both
    schemas share one layout.
    """

    schema: Schema
    labels_a: tuple[str, ...]
    labels_b: tuple[str, ...]
    replicates: tuple[tuple[int, ...], ...]
    total: int
    balanced: bool

    @classmethod
    def from_dataset(cls, d: Dataset) -> DatasetSummary:
        if isinstance(d, SingleFactorData):
            return cls(
                Schema.SINGLE,
                d.labels,
                (),
                tuple((m,) for m in d.replicates),
                d.total,
                d.balanced,
            )
        return cls(Schema.TWO, d.labels_a, d.labels_b, d.cell_replicates, d.total, d.balanced)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": self.schema.value,
            "labels_a": list(self.labels_a),
            "labels_b": list(self.labels_b),
            "replicates": [list(row) for row in self.replicates],
            "total": self.total,
            "balanced": self.balanced,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DatasetSummary:
        return cls(
            Schema(data["schema"]),
            tuple(str(x) for x in data["labels_a"]),
            tuple(str(x) for x in data["labels_b"]),
            tuple(tuple(int(m) for m in row) for row in data["replicates"]),
            int(data["total"]),
            bool(data["balanced"]),
        )


@dataclass(frozen=True)
class AnalysisReport:
    """Full diagnostic, estimation and testing result for one dataset.

    ``fit`` and ``tests`` stay empty when residual validation stopped the
    pipeline; ``diagnostics.blocked`` then names the rejecting stage.
    """

    dataset: DatasetSummary
    diagnostics: ResidualDiagnostics
    fit: Optional[EffectFit] = None
    tests: tuple[TestOutcome, ...] = ()
    recommendation: Optional[Recommendation] = None
    provenance: dict[str, Any] = field(default_factory=dict)

    @property
    def halted(self) -> bool:
        return self.diagnostics.blocked is not None

    def test(self, name: str) -> TestOutcome:
        for outcome in self.tests:
            if outcome.name == name:
                return outcome
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "dataset": self.dataset.to_dict(),
            "diagnostics": self.diagnostics.to_dict(),
            "fit": None if self.fit is None else self.fit.to_dict(),
            "tests": [t.to_dict() for t in self.tests],
            "recommendation": (
                None if self.recommendation is None else self.recommendation.to_dict()
            ),
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> AnalysisReport:
        missing = [key for key in REPORT_KEYS if key not in data]
        if missing:
            raise ValueError(f"report is missing key(s): {', '.join(missing)}")
        fit = data["fit"]
        recommendation = data["recommendation"]
        return cls(
            dataset=DatasetSummary.from_dict(data["dataset"]),
            diagnostics=ResidualDiagnostics.from_dict(data["diagnostics"]),
            fit=None if fit is None else EffectFit.from_dict(fit),
            tests=tuple(TestOutcome.from_dict(t) for t in data["tests"]),
            recommendation=(
                None if recommendation is None else Recommendation.from_dict(recommendation)
            ),
            provenance=dict(data["provenance"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> AnalysisReport:
        return cls.from_dict(json.loads(text))


def highlight_json(text: str) -> str:
    """Colourise a JSON document for a terminal."""
    return highlight(text, get_lexer_by_name("json"), TerminalFormatter())


def write_report(report: AnalysisReport, output_format: str, out: IO[str]) -> None:
    """Write report as text or JSON; JSON is highlighted when out is a terminal."""
    if output_format == "json":
        text = report.to_json()
        if out.isatty():
            text = highlight_json(text)
    else:
        text = render_text(report)
    out.write(text)


def _num(value: float) -> str:
    return f"{value:.3f}"


def _iv(interval: Interval) -> str:
    return f"[{_num(interval.lo)}, {_num(interval.hi)}]"


def _estimate_line(name: str, est: Estimate) -> str:
    return (
        f"  {name:<8} {_num(est.value):>10} ± {_num(est.half_width):<8}"
        f" CI {_iv(est.ci)}  sigma {_num(est.dist.sigma)}"
    )


def _outcome_lines(outcome: TestOutcome) -> list[str]:
    lines = [f"{outcome.name}: {outcome.decision.value}"]
    if outcome.sigmas:
        lines.append(
            "  sigma: " + ", ".join(f"{name}={_num(value)}" for name, value in outcome.sigmas)
        )
    if len(outcome.ai_cols) > 1:
        width = max(len(name) for name in outcome.ai_rows)
        lines.append(" " * (width + 3) + "  ".join(f"{c:^22}" for c in outcome.ai_cols))
        for name, row in zip(outcome.ai_rows, outcome.ai_table):
            cells = "  ".join(f"{_iv(iv):^22}" for iv in row)
            lines.append(f"  {name:<{width}} {cells}")
    for check in outcome.details:
        if check.violations:
            positions = ", ".join(str(k) for k in check.violations)
            relation = ">=" if check.rejects else "<"
            lines.append(
                f"  {check.sample} vs {check.reference} {_iv(check.interval)}: "
                f"outside at {positions} ({check.count} {relation} {check.threshold})"
            )
    return lines


def _level_map(title: str, labels: Sequence[str]) -> str:
    return f"  {title}: " + ", ".join(f"{k + 1}={label}" for k, label in enumerate(labels))


def render_text(report: AnalysisReport) -> str:
    """Human-readable report with three-decimal numbers.

    Decisions and numbers are the same ones the JSON form carries; AI tables
    have one row per reference parameter and one column per sample.
    """
    ds = report.dataset
    lines = []
    if ds.schema is Schema.SINGLE:
        lines.append(
            f"Dataset: single factor, r={len(ds.labels_a)}, N={ds.total}, "
            f"m={[row[0] for row in ds.replicates]}"
        )
    else:
        lines.append(
            f"Dataset: two factors, {len(ds.labels_a)}x{len(ds.labels_b)}, N={ds.total}, "
            f"{'balanced' if ds.balanced else 'unbalanced'}, m={[list(r) for r in ds.replicates]}"
        )
    lines.append(_level_map("A levels", ds.labels_a))
    if ds.labels_b:
        lines.append(_level_map("B levels", ds.labels_b))

    diag = report.diagnostics
    lines.extend(["", "Residual diagnostics"])
    for group in diag.groups:
        check = group.outcome.details[0]
        lines.append(
            f"  group {group.group:<6} sigma {_num(group.sigma)}  AI {_iv(check.interval)}"
            f"  outliers {check.count}  {group.outcome.decision.value}"
        )
    for outcome in (diag.homogeneity, diag.common):
        if outcome is not None:
            lines.extend("  " + line for line in _outcome_lines(outcome))
    if diag.sigma0 is not None:
        lines.append(f"  sigma0 = {_num(diag.sigma0)}")
    if report.halted:
        lines.append(f"  HALTED at {diag.blocked}: estimation and effect tests were not run")

    fit = report.fit
    if fit is not None:
        lines.extend(
            ["", f"Estimates ({fit.design.value}, {fit.method.value}, "
                 f"{round(fit.confidence * 100, 6):g}% CI)"]
        )
        for name, est in fit.named_estimates():
            lines.append(_estimate_line(name, est))

    if report.tests:
        lines.extend(["", "Tests"])
        for outcome in report.tests:
            lines.extend("  " + line for line in _outcome_lines(outcome))

    rec = report.recommendation
    if rec is not None:
        cell = f"A{rec.level_a + 1}" + ("" if rec.level_b is None else f"B{rec.level_b + 1}")
        lines.extend(
            ["", f"Recommendation ({rec.objective.value}-the-better): {cell}, "
                 f"expected response {_num(rec.expected)}"]
        )
    return "\n".join(lines) + "\n"
