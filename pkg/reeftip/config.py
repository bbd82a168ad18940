"""
Run configuration: a flat JSON document validated with voluptuous.

Keys mirror the command-line flags (``lambda`` for --lambda, ``eps`` for
--eps). Command-line values override values read from a file.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import (
    DEFAULT_ATOL,
    DEFAULT_D,
    DEFAULT_DELTA,
    DEFAULT_EPSILON,
    DEFAULT_GRID,
    DEFAULT_LIMIT_TAU,
    DEFAULT_MAX_STEPS,
    DEFAULT_RTOL,
    DEFAULT_SIMULATE_GRID,
    DWELL_THRESHOLD,
    H_TIP_FLOOR,
    JOBS_ENV_VAR,
    TOL_TRACK,
    TUBE_CONSTANT,
)
from .exceptions import InvalidParameterError
from .manifold import build_ramp
from .models import (
    AlphaMaxRule,
    ExperimentSettings,
    IntegratorConfig,
    ModelParams,
    RampConfig,
    SweepMode,
)

_LOGGER = logging.getLogger(__name__)

COMMANDS = (
    "analyze",
    "classify",
    "simulate",
    "sweep",
    "rcrit",
    "resurgence",
    "limit-check",
)

_POSITIVE = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))
_NONNEGATIVE = vol.All(vol.Coerce(float), vol.Range(min=0))
_COUNT = vol.All(vol.Coerce(int), vol.Range(min=1))


def _pair(value: Any) -> tuple[float, float]:
    """Validate an increasing (low, high) pair inside (0, 1)."""
    low, high = (float(x) for x in value)
    if not low < high:
        msg = f"range must be increasing, got {value!r}"
        raise vol.Invalid(msg)
    if not (0 < low and high < 1):
        msg = f"range must lie inside (0, 1), got {value!r}"
        raise vol.Invalid(msg)
    return (low, high)


RUN_CONFIG_SCHEMA = vol.Schema(
    {
        vol.Required("command"): vol.In(COMMANDS),
        vol.Optional("beta", default=0.2): _NONNEGATIVE,
        vol.Optional("lambda", default=0.2): _POSITIVE,
        vol.Optional("d", default=DEFAULT_D): _POSITIVE,
        vol.Optional("eps", default=DEFAULT_EPSILON): _POSITIVE,
        vol.Optional("r", default=1e-4): _NONNEGATIVE,
        vol.Optional("delta", default=DEFAULT_DELTA): _POSITIVE,
        vol.Optional("alpha_max_rule", default=AlphaMaxRule.MIN_THRESHOLDS.value): (
            vol.In([rule.value for rule in AlphaMaxRule])
        ),
        vol.Optional("alpha_max", default=None): vol.Any(None, _POSITIVE),
        vol.Optional("rtol", default=DEFAULT_RTOL): vol.All(
            vol.Coerce(float), vol.Range(min=1e-12, max=1e-2)
        ),
        vol.Optional("atol", default=DEFAULT_ATOL): _POSITIVE,
        vol.Optional("max_step", default=None): vol.Any(None, _POSITIVE),
        vol.Optional("max_steps", default=DEFAULT_MAX_STEPS): _COUNT,
        vol.Optional("trace", default=False): bool,
        vol.Optional("tol_track", default=TOL_TRACK): _POSITIVE,
        vol.Optional("tube_constant", default=TUBE_CONSTANT): _POSITIVE,
        vol.Optional("dwell_threshold", default=DWELL_THRESHOLD): _NONNEGATIVE,
        vol.Optional("tip_floor", default=H_TIP_FLOOR): _POSITIVE,
        vol.Optional("output", default=None): vol.Any(None, str),
        vol.Optional("jobs", default=None): vol.Any(None, _COUNT),
        vol.Optional("seed", default=None): vol.Any(None, vol.Coerce(int)),
        vol.Optional("grid", default=None): vol.Any(
            None, vol.All(vol.Coerce(int), vol.Range(min=2))
        ),
        vol.Optional("beta_range", default=(0.01, 0.5)): _pair,
        vol.Optional("lambda_range", default=(0.01, 0.8)): _pair,
        vol.Optional("mode", default=SweepMode.CLASSIFY.value): vol.In(
            [mode.value for mode in SweepMode]
        ),
        vol.Optional("reset_alpha", default=None): vol.Any(None, _POSITIVE),
        vol.Optional("alpha", default=None): vol.Any(None, _POSITIVE),
        vol.Optional("eps_list", default=[0.02, 0.01, 0.005]): [_POSITIVE],
        vol.Optional("tau_end", default=DEFAULT_LIMIT_TAU): _POSITIVE,
        vol.Optional("verbose", default=False): bool,
    }
)


@dataclass(frozen=True)
class RunConfig:
    """A validated run configuration."""

    command: str
    beta: float
    lam: float
    d: float
    eps: float
    r: float
    delta: float
    alpha_max_rule: AlphaMaxRule
    alpha_max: float | None
    rtol: float
    atol: float
    max_step: float | None
    max_steps: int
    trace: bool
    tol_track: float
    tube_constant: float
    dwell_threshold: float
    tip_floor: float
    output: str | None
    jobs: int
    seed: int | None
    grid: int
    beta_range: tuple[float, float]
    lambda_range: tuple[float, float]
    mode: SweepMode
    reset_alpha: float | None
    alpha: float | None
    eps_list: tuple[float, ...] = field(default=())
    tau_end: float = DEFAULT_LIMIT_TAU
    verbose: bool = False

    def model_params(self) -> ModelParams:
        """Return the dimensionless model parameters."""
        return ModelParams(lam=self.lam, beta=self.beta, d=self.d, epsilon=self.eps)

    def integrator_config(self) -> IntegratorConfig:
        """Return the stepper controls."""
        kwargs: dict[str, Any] = {
            "rtol": self.rtol,
            "atol": self.atol,
            "max_steps": self.max_steps,
            "trace": self.trace,
        }
        if self.max_step is not None:
            kwargs["max_step"] = self.max_step
        return IntegratorConfig(**kwargs)

    def experiment_settings(self) -> ExperimentSettings:
        """Return the outcome classification constants."""
        return ExperimentSettings(
            tol_track=self.tol_track,
            tube_constant=self.tube_constant,
            dwell_threshold=self.dwell_threshold,
            tip_floor=self.tip_floor,
        )

    def ramp(self, params: ModelParams | None = None) -> RampConfig:
        """Return the ramp window for these parameters."""
        return build_ramp(
            params or self.model_params(),
            self.r,
            delta=self.delta,
            rule=self.alpha_max_rule,
            alpha_max=self.alpha_max,
        )

    def to_dict(self) -> dict[str, Any]:
        """Return the flat JSON form (flag-style keys)."""
        data = asdict(self)
        data["lambda"] = data.pop("lam")
        data["alpha_max_rule"] = self.alpha_max_rule.value
        data["mode"] = self.mode.value
        data["beta_range"] = list(self.beta_range)
        data["lambda_range"] = list(self.lambda_range)
        data["eps_list"] = list(self.eps_list)
        return data


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV_VAR)
    if raw is None:
        return 1
    try:
        jobs = int(raw)
    except ValueError:
        msg = f"{JOBS_ENV_VAR}={raw!r} is not an integer"
        raise InvalidParameterError(msg) from None
    if jobs < 1:
        msg = f"{JOBS_ENV_VAR} must be >= 1, got {jobs}"
        raise InvalidParameterError(msg)
    return jobs


def build_run_config(values: dict[str, Any]) -> RunConfig:
    """Validate a flat mapping and return a RunConfig; raises vol.Invalid."""
    data = RUN_CONFIG_SCHEMA(dict(values))
    jobs = data["jobs"] if data["jobs"] is not None else _default_jobs()
    mode = SweepMode(data["mode"])
    grid = data["grid"]
    if grid is None:
        grid = DEFAULT_SIMULATE_GRID if mode is SweepMode.SIMULATE else DEFAULT_GRID
    return RunConfig(
        command=data["command"],
        beta=data["beta"],
        lam=data["lambda"],
        d=data["d"],
        eps=data["eps"],
        r=data["r"],
        delta=data["delta"],
        alpha_max_rule=AlphaMaxRule(data["alpha_max_rule"]),
        alpha_max=data["alpha_max"],
        rtol=data["rtol"],
        atol=data["atol"],
        max_step=data["max_step"],
        max_steps=data["max_steps"],
        trace=data["trace"],
        tol_track=data["tol_track"],
        tube_constant=data["tube_constant"],
        dwell_threshold=data["dwell_threshold"],
        tip_floor=data["tip_floor"],
        output=data["output"],
        jobs=jobs,
        seed=data["seed"],
        grid=grid,
        beta_range=tuple(data["beta_range"]),
        lambda_range=tuple(data["lambda_range"]),
        mode=mode,
        reset_alpha=data["reset_alpha"],
        alpha=data["alpha"],
        eps_list=tuple(data["eps_list"]),
        tau_end=data["tau_end"],
        verbose=data["verbose"],
    )


def load_run_config(
    path: str | Path | None, overrides: dict[str, Any] | None = None
) -> RunConfig:
    """Read a JSON config file (if any) and apply non-None overrides."""
    values: dict[str, Any] = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        try:
            loaded = json.loads(text)
        except json.JSONDecodeError as err:
            msg = f"config file {path} is not valid JSON: {err}"
            raise vol.Invalid(msg) from err
        if not isinstance(loaded, dict):
            msg = f"config file {path} must hold a JSON object"
            raise vol.Invalid(msg)
        values.update(loaded)
        _LOGGER.debug("Loaded %d keys from %s", len(loaded), path)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return build_run_config(values)


def save_run_config(config: RunConfig, path: str | Path) -> None:
    """Write a RunConfig as sorted, indented JSON."""
    Path(path).write_text(
        json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
