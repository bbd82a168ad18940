"""Shared pytest fixtures for reeftip tests."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import pytest

from reeftip.const import DOMAIN, JOBS_ENV_VAR
from reeftip.models import ExperimentSettings, IntegratorConfig, ModelParams

if TYPE_CHECKING:
    from collections.abc import Generator

D = 0.22


@pytest.fixture
def region_ii_params() -> ModelParams:
    """Folded focus for small r (beta = lambda = 0.2)."""
    return ModelParams(lam=0.2, beta=0.2, d=D)


@pytest.fixture
def region_i_params() -> ModelParams:
    """Folded node for every small r (beta = 0.18, lambda = 0.5)."""
    return ModelParams(lam=0.5, beta=0.18, d=D)


@pytest.fixture
def node_params() -> ModelParams:
    """Strong folded node with mu near 20 at r = 4e-3."""
    return ModelParams(lam=0.5, beta=0.15, d=D)


@pytest.fixture
def region_iii_params() -> ModelParams:
    """Folded focus below alpha_plus at r = 4e-3."""
    return ModelParams(lam=0.4, beta=0.3, d=D)


@pytest.fixture
def fast_config() -> IntegratorConfig:
    """Looser tolerances for quick unit-level integrations."""
    return IntegratorConfig(rtol=1e-6, atol=1e-9)


@pytest.fixture
def settings() -> ExperimentSettings:
    """Default classification settings."""
    return ExperimentSettings()


@pytest.fixture(autouse=True)
def _clean_environment(monkeypatch: pytest.MonkeyPatch) -> Generator[None]:
    """Keep REEFTIP_JOBS from leaking into tests and reset the package logger."""
    monkeypatch.delenv(JOBS_ENV_VAR, raising=False)
    logger = logging.getLogger(DOMAIN)
    handlers = list(logger.handlers)
    level = logger.level
    yield
    logger.handlers = handlers
    logger.setLevel(level)
