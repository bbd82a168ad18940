"""Unit tests for run configuration loading and validation."""

import json
from pathlib import Path

import pytest
import voluptuous as vol

from reeftip.config import build_run_config, load_run_config, save_run_config
from reeftip.const import (
    DEFAULT_D,
    DEFAULT_EPSILON,
    DEFAULT_GRID,
    DEFAULT_SIMULATE_GRID,
    JOBS_ENV_VAR,
)
from reeftip.exceptions import InvalidParameterError
from reeftip.models import AlphaMaxRule, SweepMode


class TestBuildRunConfig:
    """Test schema defaults and coercion."""

    def test_defaults(self) -> None:
        """Test a bare command fills every default."""
        cfg = build_run_config({"command": "analyze"})
        assert cfg.d == DEFAULT_D
        assert cfg.eps == DEFAULT_EPSILON
        assert cfg.alpha_max_rule is AlphaMaxRule.MIN_THRESHOLDS
        assert cfg.mode is SweepMode.CLASSIFY
        assert cfg.jobs == 1
        assert cfg.eps_list == (0.02, 0.01, 0.005)

    def test_coerces_strings(self) -> None:
        """Test numeric strings are coerced."""
        cfg = build_run_config({"command": "simulate", "beta": "0.3", "grid": "10"})
        assert cfg.beta == 0.3
        assert cfg.grid == 10

    def test_model_params(self) -> None:
        """Test the flag-style lambda key reaches ModelParams.lam."""
        cfg = build_run_config(
            {"command": "classify", "lambda": 0.4, "beta": 0.3, "eps": 0.005}
        )
        params = cfg.model_params()
        assert params.lam == 0.4
        assert params.epsilon == 0.005

    def test_integrator_and_settings(self) -> None:
        """Test stepper and classification settings are built from the config."""
        cfg = build_run_config(
            {"command": "simulate", "rtol": 1e-6, "max_step": 5.0, "tol_track": 1e-2}
        )
        assert cfg.integrator_config().rtol == 1e-6
        assert cfg.integrator_config().max_step == 5.0
        assert cfg.experiment_settings().tol_track == 1e-2

    def test_explicit_ramp(self) -> None:
        """Test the explicit rule uses alpha_max as the clamp."""
        cfg = build_run_config(
            {
                "command": "simulate",
                "r": 1e-3,
                "alpha_max_rule": "explicit",
                "alpha_max": 0.5,
            }
        )
        ramp = cfg.ramp()
        assert ramp.alpha_max_delta == 0.5
        assert ramp.alpha_min_delta == pytest.approx(DEFAULT_D + cfg.delta)

    @pytest.mark.parametrize(
        ("mode", "grid"),
        [("classify", DEFAULT_GRID), ("simulate", DEFAULT_SIMULATE_GRID)],
    )
    def test_grid_default_follows_mode(self, mode: str, grid: int) -> None:
        """Test simulate sweeps default to the coarser grid."""
        cfg = build_run_config({"command": "sweep", "mode": mode})
        assert cfg.grid == grid

    def test_explicit_grid_wins(self) -> None:
        """Test an explicit grid overrides the mode default."""
        cfg = build_run_config({"command": "sweep", "mode": "simulate", "grid": 12})
        assert cfg.grid == 12

    def test_default_ranges_inside_unit_square(self) -> None:
        """Test the default sweep ranges exclude the edges of (0, 1)."""
        cfg = build_run_config({"command": "sweep"})
        for low, high in (cfg.beta_range, cfg.lambda_range):
            assert 0.0 < low < high < 1.0

    @pytest.mark.parametrize(
        "values",
        [
            {},
            {"command": "bogus"},
            {"command": "analyze", "lambda": 0.0},
            {"command": "analyze", "rtol": 1.0},
            {"command": "sweep", "grid": 1},
            {"command": "sweep", "beta_range": [0.5, 0.1]},
            {"command": "sweep", "beta_range": [0.0, 0.5]},
            {"command": "sweep", "lambda_range": [0.1, 1.0]},
            {"command": "analyze", "unknown": 1},
        ],
    )
    def test_invalid(self, values: dict) -> None:
        """Test schema violations raise vol.Invalid."""
        with pytest.raises(vol.Invalid):
            build_run_config(values)


class TestJobsEnvironment:
    """Test the REEFTIP_JOBS default."""

    def test_env_default(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test the environment supplies jobs when unset."""
        monkeypatch.setenv(JOBS_ENV_VAR, "4")
        assert build_run_config({"command": "sweep"}).jobs == 4

    def test_explicit_wins(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test an explicit jobs value beats the environment."""
        monkeypatch.setenv(JOBS_ENV_VAR, "4")
        assert build_run_config({"command": "sweep", "jobs": 2}).jobs == 2

    @pytest.mark.parametrize("raw", ["many", "0"])
    def test_bad_env(self, monkeypatch: pytest.MonkeyPatch, raw: str) -> None:
        """Test bad environment values raise InvalidParameterError."""
        monkeypatch.setenv(JOBS_ENV_VAR, raw)
        with pytest.raises(InvalidParameterError, match=JOBS_ENV_VAR):
            build_run_config({"command": "sweep"})


class TestLoadSave:
    """Test JSON files and overrides."""

    def test_round_trip(self, tmp_path: Path) -> None:
        """Test a saved config loads back equal."""
        cfg = build_run_config(
            {"command": "sweep", "grid": 5, "beta_range": [0.1, 0.3], "seed": 7}
        )
        path = tmp_path / "run.json"
        save_run_config(cfg, path)
        assert load_run_config(path) == cfg
        assert json.loads(path.read_text())["lambda"] == cfg.lam

    def test_overrides(self, tmp_path: Path) -> None:
        """Test non-None overrides replace file values."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"command": "analyze", "beta": 0.1}))
        cfg = load_run_config(path, {"beta": 0.25, "lambda": None})
        assert cfg.beta == 0.25
        assert cfg.lam == 0.2

    def test_bad_json(self, tmp_path: Path) -> None:
        """Test malformed JSON raises vol.Invalid."""
        path = tmp_path / "run.json"
        path.write_text("{not json")
        with pytest.raises(vol.Invalid, match=r"not valid JSON"):
            load_run_config(path)

    def test_not_an_object(self, tmp_path: Path) -> None:
        """Test a JSON list is refused."""
        path = tmp_path / "run.json"
        path.write_text("[1, 2]")
        with pytest.raises(vol.Invalid, match=r"JSON object"):
            load_run_config(path)

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test a missing file raises OSError."""
        with pytest.raises(OSError):  # noqa: PT011
            load_run_config(tmp_path / "absent.json")


@pytest.mark.parametrize(
    "recipe", sorted((Path(__file__).parents[2] / "config").glob("*.json"))
)
def test_shipped_recipes_validate(recipe: Path) -> None:
    """Test every recipe under config/ passes the schema."""
    cfg = load_run_config(recipe)
    assert cfg.output is not None
