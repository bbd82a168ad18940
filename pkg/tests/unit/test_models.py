"""Unit tests for the data models."""

import math

import pytest

from reeftip.exceptions import InvalidParameterError
from reeftip.models import (
    CellResult,
    DimensionalParams,
    FoldedKind,
    IntegratorConfig,
    ModelParams,
    OutcomeLabel,
    RampConfig,
    Region,
    RegionLabel,
    SweepMode,
    SweepResult,
)


class TestModelParams:
    """Test hard and soft parameter checks."""

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"lam": 0.0, "beta": 0.2, "d": 0.22},
            {"lam": 0.2, "beta": -0.1, "d": 0.22},
            {"lam": 0.2, "beta": 0.2, "d": 0.0},
            {"lam": 0.2, "beta": 0.2, "d": 0.22, "epsilon": 0.0},
            {"lam": math.nan, "beta": 0.2, "d": 0.22},
        ],
    )
    def test_hard_invariants(self, kwargs: dict) -> None:
        """Test invariant violations raise InvalidParameterError."""
        with pytest.raises(InvalidParameterError, match=r"violates"):
            ModelParams(**kwargs)

    def test_soft_issues(self) -> None:
        """Test soft concerns are reported, not raised."""
        params = ModelParams(lam=25.0, beta=1.5, d=0.22, epsilon=0.5)
        issues = params.validation_issues()
        assert any("beta=1.5" in issue for issue in issues)
        assert any("epsilon=0.5" in issue for issue in issues)
        assert any("lambda*d^2" in issue for issue in issues)

    def test_clean_params(self, region_ii_params: ModelParams) -> None:
        """Test the reference parameters raise no concerns."""
        assert region_ii_params.validation_issues(0.4) == []

    def test_warn_logs(
        self, caplog: pytest.LogCaptureFixture
    ) -> None:
        """Test warn_if_unusual logs each concern."""
        issues = ModelParams(lam=0.2, beta=1.2, d=0.22).warn_if_unusual()
        assert issues
        assert "Parameter check" in caplog.text


class TestDimensionalParams:
    """Test raw rate validation."""

    def test_negative_rate(self) -> None:
        """Test a negative rate is refused."""
        with pytest.raises(InvalidParameterError, match=r"nonnegative"):
            DimensionalParams(mu=0.02, m=-0.1, f=0.0, rA=1.0, rC=0.1, d=0.22, lambda0=1)


class TestRampConfig:
    """Test ramp validation and the moving window."""

    def test_window(self) -> None:
        """Test alpha moves only inside the half-open window."""
        ramp = RampConfig(r=1e-3, delta=0.01, alpha_min_delta=0.23, alpha_max_delta=0.5)
        assert ramp.is_ramping(0.23)
        assert ramp.is_ramping(0.4)
        assert not ramp.is_ramping(0.5)
        assert not ramp.is_ramping(0.2)

    def test_zero_rate_never_ramps(self) -> None:
        """Test r = 0 is valid but frozen."""
        ramp = RampConfig(r=0.0, delta=0.01, alpha_min_delta=0.23, alpha_max_delta=0.5)
        assert not ramp.is_ramping(0.3)

    @pytest.mark.parametrize(
        ("r", "delta", "low", "high", "match"),
        [
            (-1e-3, 0.01, 0.23, 0.5, r"ramp rate"),
            (1e-3, 0.0, 0.23, 0.5, r"ramp margin"),
            (1e-3, 0.01, 0.5, 0.23, r"empty ramp window"),
        ],
    )
    def test_invalid(  # noqa: PLR0913
        self, r: float, delta: float, low: float, high: float, match: str
    ) -> None:
        """Test invalid ramps raise InvalidParameterError."""
        with pytest.raises(InvalidParameterError, match=match):
            RampConfig(r=r, delta=delta, alpha_min_delta=low, alpha_max_delta=high)


class TestIntegratorConfig:
    """Test stepper control validation."""

    @pytest.mark.parametrize(
        "kwargs",
        [{"rtol": 1.0}, {"rtol": 1e-14}, {"atol": 0.0}, {"max_steps": 0},
         {"max_step": 0.0}],
    )
    def test_invalid(self, kwargs: dict) -> None:
        """Test out-of-range controls are refused."""
        with pytest.raises(InvalidParameterError):
            IntegratorConfig(**kwargs)


class TestResults:
    """Test result containers."""

    def test_outcome_tipped(self) -> None:
        """Test only TRACKED is untipped."""
        assert not OutcomeLabel.TRACKED.tipped
        assert all(
            label.tipped for label in OutcomeLabel if label is not OutcomeLabel.TRACKED
        )

    def test_sweep_counts(self) -> None:
        """Test region counts and resolution."""
        label = RegionLabel(
            region=Region.II,
            small_r_kind=FoldedKind.FOCUS,
            delta=-1.0,
            alpha_fs=0.6,
            alpha_plus=0.62,
        )
        cells = (
            CellResult(i=0, j=0, beta=0.1, lam=0.1, region=label),
            CellResult(i=0, j=1, beta=0.1, lam=0.2, excluded=True),
        )
        result = SweepResult(
            betas=(0.1,), lambdas=(0.1, 0.2), d=0.22, r=4e-3,
            mode=SweepMode.CLASSIFY, cells=cells,
        )
        assert result.resolution == (1, 2)
        assert result.count(Region.II) == 1
        assert result.count(Region.I) == 0
        assert cells[0].alpha_fs == 0.6
        assert cells[1].alpha_fs is None
        assert cells[1].mu is None
