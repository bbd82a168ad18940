"""Unit tests for the diagnostics sidecar."""

import json
import math
from pathlib import Path

import numpy as np

from reeftip import __version__
from reeftip.config import build_run_config
from reeftip.diagnostics import build_run_diagnostics, event_log, write_diagnostics
from reeftip.integrate import Event, EventKind, TerminationReason, Trajectory
from reeftip.manifold import threshold_set
from reeftip.models import (
    FoldedKind,
    ModelParams,
    Outcome,
    OutcomeLabel,
    Region,
    RegionLabel,
)


def _trajectory() -> Trajectory:
    event = Event(EventKind.FOLD_CROSSING, 2.0, (0.5, 0.3, 0.4, 0.6), -1)
    return Trajectory(
        t=np.array([0.0, 2.0, 4.0]),
        y=np.zeros((3, 4)),
        events=(event,),
        termination=TerminationReason.EVENT,
        time_scale=0.01,
        n_steps=7,
    )


class TestEventLog:
    """Test event serialisation."""

    def test_fields(self) -> None:
        """Test events carry kind, fast and slow time."""
        (entry,) = event_log(_trajectory())
        assert entry["kind"] == "fold-crossing"
        assert entry["t"] == 2.0
        assert entry["tau"] == 0.02
        assert entry["direction"] == -1
        assert entry["state"] == [0.5, 0.3, 0.4, 0.6]


class TestBuildRunDiagnostics:
    """Test the diagnostics document."""

    def test_minimal(self) -> None:
        """Test only version and config are always present."""
        data = build_run_diagnostics(build_run_config({"command": "sweep"}))
        assert data["version"] == __version__
        assert data["config"]["command"] == "sweep"
        assert set(data) == {"version", "config"}

    def test_full(self, region_ii_params: ModelParams, tmp_path: Path) -> None:
        """Test every section serialises to JSON."""
        cfg = build_run_config({"command": "simulate", "r": 4e-3})
        label = RegionLabel(
            region=Region.II,
            small_r_kind=FoldedKind.FOCUS,
            delta=math.nan,
            alpha_fs=0.6,
            alpha_plus=0.62,
        )
        outcome = Outcome(
            OutcomeLabel.CANARD_TIPPED,
            tip_tau=3.0,
            tip_alpha=0.61,
            dwell_tau=0.4,
            passed_thresholds=("alpha_plus",),
            funnel=True,
        )
        data = build_run_diagnostics(
            cfg,
            ramp=cfg.ramp(region_ii_params),
            trajectory=_trajectory(),
            outcome=outcome,
            thresholds=threshold_set(region_ii_params),
            region=label,
        )
        assert data["region"]["delta"] is None
        assert data["outcome"]["label"] == "CanardTipped"
        assert data["integrator"]["termination"] == "event"
        assert data["integrator"]["n_steps"] == 7
        assert data["integrator"]["tau_end"] == 0.04
        assert data["ramp"]["rule"] == "min"
        path = tmp_path / "diag.json"
        write_diagnostics(data, path)
        loaded = json.loads(path.read_text())
        assert loaded["outcome"]["passed_thresholds"] == ["alpha_plus"]
        assert loaded["outcome"]["funnel"] is True
        assert loaded["thresholds"]["ordering"] == "alpha+<alpha^<alpha*"
