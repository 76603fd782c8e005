"""Uncertain fixed-effects estimation and hypothesis testing."""

__version__ = "0.1.0"
__all__ = [
    "AdjustedSample",
    "CellMeansFit",
    "CountingRule",
    "Decision",
    "EffectFit",
    "Estimate",
    "Interval",
    "NormalUncertain",
    "Objective",
    "Recommendation",
    "ResidualDiagnostics",
    "SingleFactorData",
    "TestOutcome",
    "TwoFactorData",
    "UFEError",
    "best_cell",
    "diagnose_residuals",
    "fit_single_effects",
    "fit_single_means",
    "fit_two",
    "homogeneity_effects",
    "homogeneity_main_effect",
    "interaction_test",
    "parse_csv",
]

from .design_data import AdjustedSample, SingleFactorData, TwoFactorData, parse_csv
from .estimators import (
    CellMeansFit,
    EffectFit,
    Estimate,
    Objective,
    Recommendation,
    best_cell,
    fit_single_effects,
    fit_single_means,
    fit_two,
)
from .exceptions import UFEError
from .udist import Interval, NormalUncertain
from .uhtest import (
    CountingRule,
    Decision,
    ResidualDiagnostics,
    TestOutcome,
    diagnose_residuals,
    homogeneity_effects,
    homogeneity_main_effect,
    interaction_test,
)
