"""
Stiff integration with dense output and event detection.

integrate_stiff drives scipy's variable-order BDF stepper one step at a time
so that events can be located on the step's own interpolant, terminal events
can cut a run short, and a step cap can truncate it. integrate_ramped splits
a ramped run at the clamp of alpha and restarts the stepper there, so the
stepper never sees the kink in dalpha/dt.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from ._compat import StrEnum
from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import BDF, OdeSolution
from scipy.optimize import brentq

from .const import EVENT_TIME_TOL
from .exceptions import DomainError, IntegrationError, PreconditionError
from .model_core import q_function, ramped_jacobian, rhs_fast
from .models import ExperimentSettings, IntegratorConfig

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from numpy.typing import ArrayLike, NDArray

    from .models import ModelParams, RampConfig

    Field = Callable[[float, NDArray[np.float64]], NDArray[np.float64]]
    Indicator = Callable[[float, NDArray[np.float64]], float]

_LOGGER = logging.getLogger(__name__)


class EventKind(StrEnum):
    """Kinds of events recorded along a trajectory."""

    ALPHA_CLAMP_HIT = "alpha-clamp-hit"
    FOLD_CROSSING = "fold-crossing"
    EQUILIBRIUM_CONVERGED = "equilibrium-converged"
    LEFT_DOMAIN = "left-domain"
    TIP_COMPLETED = "tip-completed"


class TerminationReason(StrEnum):
    """Why an integration stopped."""

    END_OF_SPAN = "end-of-span"
    EVENT = "event"
    MAX_STEPS = "max-steps"


@dataclass(frozen=True)
class Event:
    """A located event: kind, time, state and crossing direction."""

    kind: EventKind
    t: float
    state: tuple[float, ...]
    direction: int


@dataclass(frozen=True)
class EventSpec:
    """
    A scalar indicator whose zero crossings are events.

    direction restricts detection to upward (+1) or downward (-1)
    crossings; 0 accepts both.
    """

    kind: EventKind
    indicator: Indicator
    terminal: bool = False
    direction: int = 0


@dataclass(frozen=True)
class Trajectory:
    """
    Samples of an integration with their dense interpolants.

    t holds fast time; tau = time_scale * t is slow time. y has one row per
    sample.
    """

    t: NDArray[np.float64]
    y: NDArray[np.float64]
    events: tuple[Event, ...] = ()
    termination: TerminationReason = TerminationReason.END_OF_SPAN
    time_scale: float = 1.0
    segments: tuple[OdeSolution, ...] = field(default=(), repr=False)
    n_steps: int = 0

    @property
    def tau(self) -> NDArray[np.float64]:
        """Return slow time."""
        return self.t * self.time_scale

    @property
    def final_state(self) -> NDArray[np.float64]:
        """Return the last sampled state."""
        return self.y[-1]

    def events_of(self, kind: EventKind) -> list[Event]:
        """Return events of one kind in time order."""
        return [e for e in self.events if e.kind is kind]

    def first_event(self, kind: EventKind) -> Event | None:
        """Return the earliest event of one kind, if any."""
        found = self.events_of(kind)
        return found[0] if found else None

    def sample(self, times: ArrayLike) -> NDArray[np.float64]:
        """Return dense-output states at the given fast times, one row each."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        out = np.full((times.size, self.y.shape[1]), np.nan)
        done = np.zeros(times.size, dtype=bool)
        for seg in self.segments:
            mask = (~done) & (times >= seg.t_min) & (times <= seg.t_max)
            if np.any(mask):
                out[mask] = np.asarray(seg(times[mask])).T
                done |= mask
        if not np.all(done):
            exact = np.isin(times, self.t) & ~done
            for k in np.flatnonzero(exact):
                out[k] = self.y[np.searchsorted(self.t, times[k])]
                done[k] = True
        if not np.all(done):
            msg = "requested times lie outside the trajectory"
            raise DomainError(msg)
        return out

    def refined(self, factor: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Return (t, y) with factor dense samples per accepted step."""
        if not self.segments:
            return self.t, self.y
        frac = np.arange(factor) / factor
        times: list[NDArray[np.float64]] = []
        states: list[NDArray[np.float64]] = []
        for seg in self.segments:
            bps = np.asarray(seg.ts)
            fine = (bps[:-1, None] + np.diff(bps)[:, None] * frac[None, :]).ravel()
            fine = np.append(fine, bps[-1])
            if times and fine[0] <= times[-1][-1]:
                fine = fine[fine > times[-1][-1]]
            times.append(fine)
            states.append(np.asarray(seg(fine)).T)
        return np.concatenate(times), np.concatenate(states)

    def extend(self, other: Trajectory) -> Trajectory:
        """Return this trajectory followed by other (same time scale)."""
        skip = 1 if other.t.size and other.t[0] <= self.t[-1] else 0
        return Trajectory(
            t=np.concatenate([self.t, other.t[skip:]]),
            y=np.concatenate([self.y, other.y[skip:]]),
            events=self.events + other.events,
            termination=other.termination,
            time_scale=self.time_scale,
            segments=self.segments + other.segments,
            n_steps=self.n_steps + other.n_steps,
        )


def _crossed(before: float, after: float, direction: int) -> int:
    """Return the crossing direction (+1 / -1) or 0 when none counts."""
    if before < 0 <= after and direction >= 0:
        return 1
    if before > 0 >= after and direction <= 0:
        return -1
    return 0


def _locate(
    spec: EventSpec, dense: Callable, t_old: float, t_new: float, xtol: float
) -> float:
    def g(t: float) -> float:
        return spec.indicator(t, dense(t))

    g_old, g_new = g(t_old), g(t_new)
    if g_old * g_new > 0:
        # Interpolant disagrees with the step-end values; keep the step end.
        return t_new
    if g_new == 0:
        return t_new
    return brentq(g, t_old, t_new, xtol=xtol)


def integrate_stiff(  # noqa: PLR0913
    rhs: Field,
    y0: ArrayLike,
    t_span: tuple[float, float],
    config: IntegratorConfig,
    events: Sequence[EventSpec] = (),
    *,
    jac: Callable | None = None,
    time_scale: float = 1.0,
) -> Trajectory:
    """
    Integrate y' = rhs(t, y) with the BDF method and locate events.

    Stops at t_span[1], at the first terminal event, or after
    config.max_steps steps (termination MAX_STEPS). Raises
    IntegrationError when the step size collapses.
    """
    y_start = np.asarray(y0, dtype=float)
    if not np.all(np.isfinite(y_start)):
        msg = f"initial state must be finite, got {y_start!r}"
        raise DomainError(msg)
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        msg = f"integration span must be increasing, got {t_span!r}"
        raise PreconditionError(msg)
    solver = BDF(
        rhs,
        t0,
        y_start,
        t1,
        rtol=config.rtol,
        atol=config.atol,
        max_step=config.max_step,
        first_step=config.initial_step,
        jac=jac,
    )
    xtol = EVENT_TIME_TOL * (t1 - t0)
    ts = [t0]
    ys = [y_start.copy()]
    interpolants = []
    log: list[Event] = []
    g_prev = [spec.indicator(t0, y_start) for spec in events]
    termination = TerminationReason.END_OF_SPAN
    steps = 0
    while solver.status == "running":
        if steps >= config.max_steps:
            _LOGGER.warning(
                "Integration truncated after %d steps at t=%.6g", steps, solver.t
            )
            termination = TerminationReason.MAX_STEPS
            break
        message = solver.step()
        steps += 1
        if solver.status == "failed":
            msg = f"stepper failed at t={solver.t:.6g}: {message}"
            raise IntegrationError(msg)
        t_old, t_new = solver.t_old, solver.t
        if t_new <= t_old:
            break
        dense = solver.dense_output()
        y_new = solver.y.copy()
        if config.trace:
            _LOGGER.debug(
                "step %d order %d t=%.9g h=%.3g", steps, solver.order, t_new,
                t_new - t_old,
            )
        g_new = [spec.indicator(t_new, y_new) for spec in events]
        hits = []
        for k, spec in enumerate(events):
            direction = _crossed(g_prev[k], g_new[k], spec.direction)
            if direction:
                hits.append((_locate(spec, dense, t_old, t_new, xtol), k, direction))
        stop_at = None
        for t_event, k, direction in sorted(hits):
            if stop_at is not None and t_event > stop_at:
                break
            log.append(
                Event(events[k].kind, t_event, tuple(dense(t_event)), direction)
            )
            if events[k].terminal:
                stop_at = t_event
        if stop_at is not None:
            if stop_at > t_old:
                ts.append(stop_at)
                ys.append(np.asarray(dense(stop_at)))
                interpolants.append(dense)
            termination = TerminationReason.EVENT
            break
        ts.append(t_new)
        ys.append(y_new)
        interpolants.append(dense)
        g_prev = g_new
    segments = (OdeSolution(np.array(ts), interpolants),) if interpolants else ()
    return Trajectory(
        t=np.array(ts),
        y=np.array(ys),
        events=tuple(log),
        termination=termination,
        time_scale=time_scale,
        segments=segments,
        n_steps=steps,
    )


def ramp_phase_field(
    params: ModelParams, alpha_rate: float
) -> tuple[Field, Callable]:
    """Return (rhs, jac) in (H, A, C, alpha) with constant dalpha/dt."""

    def fun(_t: float, y: NDArray[np.float64]) -> NDArray[np.float64]:
        out = np.empty(4)
        out[:3] = rhs_fast(y, y[3], params)
        out[3] = alpha_rate
        return out

    def jac(_t: float, y: NDArray[np.float64]) -> NDArray[np.float64]:
        return ramped_jacobian(y, params)

    return fun, jac


def _common_events(
    params: ModelParams,
    config: IntegratorConfig,
    settings: ExperimentSettings,
    *,
    stop_on_tip: bool,
) -> list[EventSpec]:
    slack = 10.0 * config.atol

    def fold(_t: float, y: NDArray[np.float64]) -> float:
        return float(q_function(max(y[0], 0.0), y[3], params))

    def domain(_t: float, y: NDArray[np.float64]) -> float:
        return float(min(y[0], y[1], y[2], 1.0 - y[1], 1.0 - y[2]) + slack)

    def tip(_t: float, y: NDArray[np.float64]) -> float:
        return float(y[0] - settings.tip_floor)

    return [
        EventSpec(EventKind.FOLD_CROSSING, fold),
        EventSpec(EventKind.LEFT_DOMAIN, domain, direction=-1),
        EventSpec(EventKind.TIP_COMPLETED, tip, terminal=stop_on_tip, direction=-1),
    ]


def integrate_frozen(
    params: ModelParams,
    y0: ArrayLike,
    config: IntegratorConfig,
    *,
    settings: ExperimentSettings | None = None,
    t0: float = 0.0,
) -> Trajectory:
    """
    Integrate at the fixed alpha stored in y0 until the field nearly vanishes.

    Runs for at most settings.settle_tau slow time; an already converged
    start returns immediately with an equilibrium-converged event.
    """
    settings = settings or ExperimentSettings()
    y_start = np.asarray(y0, dtype=float)
    eps = params.epsilon
    fun, jac = ramp_phase_field(params, 0.0)

    def residual(_t: float, y: NDArray[np.float64]) -> float:
        return float(np.max(np.abs(rhs_fast(y, y[3], params))) - settings.tol_eq)

    if residual(t0, y_start) <= 0:
        event = Event(EventKind.EQUILIBRIUM_CONVERGED, t0, tuple(y_start), -1)
        return Trajectory(
            t=np.array([t0]),
            y=y_start[None, :].copy(),
            events=(event,),
            termination=TerminationReason.EVENT,
            time_scale=eps,
        )
    events = _common_events(params, config, settings, stop_on_tip=False)
    events.append(
        EventSpec(
            EventKind.EQUILIBRIUM_CONVERGED, residual, terminal=True, direction=-1
        )
    )
    return integrate_stiff(
        fun,
        y_start,
        (t0, t0 + settings.settle_tau / eps),
        config,
        events,
        jac=jac,
        time_scale=eps,
    )


def integrate_ramped(
    params: ModelParams,
    ramp: RampConfig,
    y0: ArrayLike,
    config: IntegratorConfig,
    *,
    settings: ExperimentSettings | None = None,
    stop_on_tip: bool = False,
) -> Trajectory:
    """
    Integrate the ramped system from y0 = (H, A, C, alpha).

    Phase one ramps alpha at dalpha/dt = eps * r until the clamp at
    alpha_max_delta; phase two restarts the stepper with alpha frozen there
    and runs until convergence. Fold crossings, domain exits and fish
    collapse are logged; with stop_on_tip the run ends at collapse.
    """
    settings = settings or ExperimentSettings()
    y_start = np.asarray(y0, dtype=float).copy()
    alpha0 = float(y_start[3])
    slack = 1e-12
    if not ramp.alpha_min_delta - slack <= alpha0 <= ramp.alpha_max_delta + slack:
        msg = (
            f"initial alpha {alpha0!r} outside the ramp window "
            f"[{ramp.alpha_min_delta!r}, {ramp.alpha_max_delta!r}]"
        )
        raise PreconditionError(msg)
    eps = params.epsilon
    if not ramp.is_ramping(alpha0):
        _LOGGER.debug("No ramp phase (r=%g, alpha0=%.6g)", ramp.r, alpha0)
        return integrate_frozen(params, y_start, config, settings=settings)

    rate = eps * ramp.r
    fun, jac = ramp_phase_field(params, rate)
    events = _common_events(params, config, settings, stop_on_tip=stop_on_tip)
    events.append(
        EventSpec(
            EventKind.ALPHA_CLAMP_HIT,
            lambda _t, y: float(y[3] - ramp.alpha_max_delta),
            terminal=True,
            direction=1,
        )
    )
    duration = (ramp.alpha_max_delta - alpha0) / rate
    _LOGGER.debug(
        "Ramp phase: alpha %.6g -> %.6g over t=%.6g", alpha0, ramp.alpha_max_delta,
        duration,
    )
    first = integrate_stiff(
        fun,
        y_start,
        (0.0, 1.01 * duration + 1.0),
        config,
        events,
        jac=jac,
        time_scale=eps,
    )
    if first.first_event(EventKind.ALPHA_CLAMP_HIT) is None:
        if first.termination is TerminationReason.END_OF_SPAN:
            msg = "ramp phase ended without reaching the clamp"
            raise IntegrationError(msg)
        return first
    clamped = first.final_state.copy()
    clamped[3] = ramp.alpha_max_delta
    second = integrate_frozen(
        params, clamped, config, settings=settings, t0=float(first.t[-1])
    )
    if stop_on_tip and first.first_event(EventKind.TIP_COMPLETED) is None:
        # Collapse after the clamp still ends the run.
        tip = second.first_event(EventKind.TIP_COMPLETED)
        if tip is not None:
            second = _truncate(second, tip)
    return first.extend(second)


def _truncate(traj: Trajectory, event: Event) -> Trajectory:
    """Return traj cut at an event time, keeping events and steps up to it."""
    keep = traj.t < event.t
    segments = []
    n_steps = 0
    for seg in traj.segments:
        starts = np.asarray(seg.ts)[:-1]
        kept = int(np.count_nonzero(starts < event.t))
        if kept == 0:
            break
        ts = np.append(starts[:kept], min(event.t, float(seg.ts[kept])))
        segments.append(OdeSolution(ts, seg.interpolants[:kept]))
        n_steps += kept
    return Trajectory(
        t=np.append(traj.t[keep], event.t),
        y=np.vstack([traj.y[keep], np.asarray(event.state)[None, :]]),
        events=tuple(e for e in traj.events if e.t <= event.t),
        termination=TerminationReason.EVENT,
        time_scale=traj.time_scale,
        segments=tuple(segments),
        n_steps=n_steps,
    )
