"""Pytest fixtures for shared test state."""

from __future__ import annotations

import io
import logging
from pathlib import Path

import pytest

from ufe_cli.golden import EXAMPLE1_CSV, EXAMPLE2_CSV, EXAMPLE3_CSV
from ufe_engine.design_data import SingleFactorData, TwoFactorData, parse_csv

DATASETS_DIR = Path(__file__).resolve().parent.parent / "datasets"


@pytest.fixture(autouse=True)
def _reset_env(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep tolerance and log-level overrides from leaking between tests."""
    monkeypatch.delenv("UFE_TOL", raising=False)
    monkeypatch.delenv("UFE_LOG_LEVEL", raising=False)
    logging.getLogger().setLevel(logging.WARNING)


@pytest.fixture
def datasets_dir() -> Path:
    return DATASETS_DIR


@pytest.fixture
def example1() -> SingleFactorData:
    data = parse_csv(io.StringIO(EXAMPLE1_CSV), "single")
    assert isinstance(data, SingleFactorData)
    return data


@pytest.fixture
def example2() -> TwoFactorData:
    data = parse_csv(io.StringIO(EXAMPLE2_CSV), "two")
    assert isinstance(data, TwoFactorData)
    return data


@pytest.fixture
def example3() -> TwoFactorData:
    data = parse_csv(io.StringIO(EXAMPLE3_CSV), "two")
    assert isinstance(data, TwoFactorData)
    return data
