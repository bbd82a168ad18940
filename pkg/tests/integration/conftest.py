"""Shared fixtures for end-to-end ramped runs."""

from __future__ import annotations

import pytest

from reeftip.manifold import build_ramp
from reeftip.models import (
    AlphaMaxRule,
    ExperimentSettings,
    IntegratorConfig,
    ModelParams,
    RampConfig,
)

D = 0.22
DELTA = 0.01


@pytest.fixture
def config() -> IntegratorConfig:
    """Default stepper tolerances (rtol 1e-8, atol 1e-10)."""
    return IntegratorConfig()


@pytest.fixture
def settings() -> ExperimentSettings:
    """Default classification settings."""
    return ExperimentSettings()


def params_for(beta: float, lam: float) -> ModelParams:
    """Return parameters at d = 0.22, eps = 0.01."""
    return ModelParams(lam=lam, beta=beta, d=D)


def ramp_for(
    params: ModelParams,
    r: float,
    *,
    rule: AlphaMaxRule = AlphaMaxRule.MIN_THRESHOLDS,
    alpha_max: float | None = None,
) -> RampConfig:
    """Return the ramp from d + delta under the given upper-end rule."""
    return build_ramp(params, r, delta=DELTA, rule=rule, alpha_max=alpha_max)
