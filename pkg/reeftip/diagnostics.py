"""Diagnostics sidecar written next to trajectory and sweep outputs."""

from __future__ import annotations

import json
import math
from dataclasses import asdict
from typing import TYPE_CHECKING, Any

from . import __version__

if TYPE_CHECKING:
    from pathlib import Path

    from .config import RunConfig
    from .integrate import Trajectory
    from .models import Outcome, RampConfig, RegionLabel, ThresholdSet


def _finite(value: float | None) -> float | None:
    """Return None for missing or non-finite floats (JSON has no NaN)."""
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def event_log(traj: Trajectory) -> list[dict[str, Any]]:
    """Return the trajectory's events as JSON-ready dicts."""
    return [
        {
            "kind": event.kind.value,
            "t": event.t,
            "tau": event.t * traj.time_scale,
            "direction": event.direction,
            "state": list(event.state),
        }
        for event in traj.events
    ]


def _thresholds_data(ts: ThresholdSet) -> dict[str, Any]:
    return {
        "alpha_plus": ts.alpha_plus,
        "alpha_star": ts.alpha_star,
        "alpha_hat": ts.alpha_hat,
        "H_hat": ts.H_hat,
        "H_I": ts.H_I,
        "ordering": ts.ordering.value,
    }


def _region_data(label: RegionLabel) -> dict[str, Any]:
    return {
        "region": label.region.value,
        "small_r_kind": label.small_r_kind.value,
        "delta": _finite(label.delta),
        "alpha_fs": _finite(label.alpha_fs),
        "alpha_plus": label.alpha_plus,
        "mu": _finite(label.mu),
    }


def build_run_diagnostics(  # noqa: PLR0913
    config: RunConfig,
    *,
    ramp: RampConfig | None = None,
    trajectory: Trajectory | None = None,
    outcome: Outcome | None = None,
    thresholds: ThresholdSet | None = None,
    region: RegionLabel | None = None,
) -> dict[str, Any]:
    """
    Return diagnostics for one run.

    Holds the resolved configuration, derived thresholds, the event log,
    the outcome and integrator statistics.
    """
    data: dict[str, Any] = {
        "version": __version__,
        "config": config.to_dict(),
    }
    if ramp is not None:
        data["ramp"] = {
            "r": ramp.r,
            "delta": ramp.delta,
            "alpha_min_delta": ramp.alpha_min_delta,
            "alpha_max_delta": ramp.alpha_max_delta,
            "rule": ramp.alpha_max_rule.value,
        }
    if thresholds is not None:
        data["thresholds"] = _thresholds_data(thresholds)
    if region is not None:
        data["region"] = _region_data(region)
    if trajectory is not None:
        data["events"] = event_log(trajectory)
        data["integrator"] = {
            "termination": trajectory.termination.value,
            "n_steps": trajectory.n_steps,
            "n_samples": int(trajectory.t.size),
            "t_end": float(trajectory.t[-1]),
            "tau_end": float(trajectory.tau[-1]),
        }
    if outcome is not None:
        payload = asdict(outcome)
        payload["label"] = outcome.label.value
        payload["passed_thresholds"] = list(outcome.passed_thresholds)
        data["outcome"] = payload
    return data


def write_diagnostics(data: dict[str, Any], path: Path) -> None:
    """Write a diagnostics dict as indented JSON."""
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
