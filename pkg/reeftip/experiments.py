"""
Ramped tipping experiments and their classification.

A run starts on the coexistence state at the bottom of the ramp, integrates
the full fast-slow system and labels the endpoint: tracked, tipped through
a bifurcation threshold, tipped after a canard along the repelling sheet,
or tipped by a fast jump.
"""

from __future__ import annotations

import asyncio
import logging
import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np
from scipy.optimize import brentq
from scipy.signal import find_peaks

from .const import DEFAULT_ATOL, DEFAULT_DELTA, DEFAULT_EPSILON, DEFAULT_LIMIT_TAU
from .coordinator import SweepCoordinator, SweepCoordinatorConfig
from .exceptions import (
    NoTipToReverseError,
    NotBistableError,
    PreconditionError,
    ReductionViolationError,
    ReefTipError,
    UnresolvedOutcomeError,
)
from .folded import in_funnel, region_classify, relevant_singularity
from .integrate import (
    EventKind,
    TerminationReason,
    Trajectory,
    integrate_frozen,
    integrate_ramped,
    integrate_stiff,
)
from .manifold import (
    bistability_screen,
    build_ramp,
    coexistence_equilibrium,
    fold_point,
    reduced_flow_regime,
    threshold_set,
)
from .model_core import (
    coral_on_s02,
    fast_jacobian,
    feeding_rate,
    q_function,
    rhs_fast,
    rhs_reduced_s02,
)
from .models import (
    CellResult,
    CellTask,
    Equilibrium,
    ExperimentSettings,
    FoldedKind,
    FoldedSingularity,
    IntegratorConfig,
    ModelParams,
    Outcome,
    OutcomeLabel,
    RampConfig,
    RegimeItem,
    SweepMode,
    SweepResult,
)

if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import ArrayLike, NDArray

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResurgenceResult:
    """A collapse followed by a reset of alpha below d."""

    trajectory: Trajectory
    reset_tau: float
    reset_state: tuple[float, ...]
    target: Equilibrium
    distance: float
    recovered: bool


@dataclass(frozen=True)
class LimitCheckRow:
    """Sup-norm gap in H between the full and reduced flows at one epsilon."""

    epsilon: float
    error: float


def _max_distance(state: ArrayLike, target: Sequence[float]) -> float:
    diff = np.asarray(state, dtype=float)[:3] - np.asarray(target, dtype=float)
    return float(np.max(np.abs(diff)))


def initial_state(params: ModelParams, ramp: RampConfig) -> NDArray[np.float64]:
    """Return e_I at the bottom of the ramp as (H, A, C, alpha)."""
    alpha0 = ramp.alpha_min_delta
    e_i = coexistence_equilibrium(alpha0, params)
    return np.array([e_i.H, e_i.A, e_i.C, alpha0])


def run_tipping_experiment(
    params: ModelParams,
    ramp: RampConfig,
    config: IntegratorConfig | None = None,
    *,
    y0: ArrayLike | None = None,
    settings: ExperimentSettings | None = None,
) -> tuple[Trajectory, Outcome]:
    """Integrate one ramped run from e_I and classify its outcome."""
    config = config or IntegratorConfig()
    settings = settings or ExperimentSettings()
    if not bistability_screen(params, ramp.delta):
        msg = (
            f"beta={params.beta!r}, lambda={params.lam!r} is not bistable at the "
            "bottom of the ramp"
        )
        raise NotBistableError(msg)
    start = initial_state(params, ramp) if y0 is None else np.asarray(y0, float)
    _LOGGER.info(
        "Ramp run: beta=%g lambda=%g r=%g alpha %.6g -> %.6g",
        params.beta, params.lam, ramp.r, ramp.alpha_min_delta, ramp.alpha_max_delta,
    )
    traj = integrate_ramped(params, ramp, start, config, settings=settings)
    outcome = classify_outcome(
        traj,
        params,
        config=config,
        settings=settings,
        node=_governing_singularity(params, ramp.r),
    )
    _LOGGER.info(
        "Outcome %s after %d steps (tip alpha=%s)",
        outcome.label, traj.n_steps, outcome.tip_alpha,
    )
    return traj, outcome


def _governing_singularity(
    params: ModelParams, r: float
) -> FoldedSingularity | None:
    if r <= 0:
        return None
    try:
        return relevant_singularity(params, r)
    except ReefTipError as err:
        _LOGGER.debug("No governing singularity at r=%g: %s", r, err)
        return None


def _tip_time(traj: Trajectory, settings: ExperimentSettings) -> float | None:
    event = traj.first_event(EventKind.TIP_COMPLETED)
    if event is not None:
        return event.t
    below = np.flatnonzero(traj.y[:, 0] < settings.tip_floor)
    return float(traj.t[below[0]]) if below.size else None


def _passed_thresholds(params: ModelParams, alpha_reached: float) -> tuple[str, ...]:
    ts = threshold_set(params)
    ordered = sorted(
        (("alpha_plus", ts.alpha_plus), ("alpha_star", ts.alpha_star),
         ("alpha_hat", ts.alpha_hat)),
        key=lambda item: item[1],
    )
    return tuple(name for name, value in ordered if value <= alpha_reached)


def classify_outcome(
    traj: Trajectory,
    params: ModelParams,
    *,
    config: IntegratorConfig | None = None,
    settings: ExperimentSettings | None = None,
    node: FoldedSingularity | None = None,
) -> Outcome:
    """
    Label a ramped trajectory by its endpoint and its path to it.

    Raises UnresolvedOutcomeError (with the trajectory attached) when the
    endpoint is near neither e_A nor e_I, or when the step cap cut the run
    before it either collapsed or reached the clamp. With a governing node
    the outcome records whether the run passed through its funnel.
    """
    config = config or IntegratorConfig()
    settings = settings or ExperimentSettings()
    final = traj.final_state
    alpha_end = float(final[3])
    dist_a = _max_distance(final, (0.0, 1.0, 0.0))
    e_i = coexistence_equilibrium(alpha_end, params)
    dist_i = _max_distance(final, e_i.state) if e_i.relevant else math.inf
    oscillations = count_subthreshold_oscillations(
        traj, params, atol=config.atol, settings=settings
    )
    funnel = None
    if node is not None:
        funnel = passes_through_funnel(traj, params, node, settings=settings)
        if funnel and oscillations > node.sectors:
            _LOGGER.warning(
                "%d oscillations exceed the %d sectors of the funnel",
                oscillations, node.sectors,
            )
    if dist_a <= settings.tol_track:
        t_tip = _tip_time(traj, settings)
        if t_tip is None:
            t_tip = float(traj.t[-1])
        tip_alpha = float(traj.sample(t_tip)[0, 3])
        passed = _passed_thresholds(params, tip_alpha)
        common = {
            "tip_tau": t_tip * traj.time_scale,
            "tip_alpha": tip_alpha,
            "oscillations": oscillations,
            "endpoint_distance": dist_a,
            "passed_thresholds": passed,
            "funnel": funnel,
        }
        if tip_alpha >= threshold_set(params).alpha_max:
            return Outcome(OutcomeLabel.BIFURCATION_TIPPED, **common)
        dwell = repelling_dwell(traj, params, settings=settings, t_end=t_tip)
        label = (
            OutcomeLabel.CANARD_TIPPED
            if dwell >= settings.dwell_threshold
            else OutcomeLabel.JUMP_TIPPED
        )
        return Outcome(label, dwell_tau=dwell, **common)
    if (
        traj.termination is TerminationReason.MAX_STEPS
        and traj.first_event(EventKind.ALPHA_CLAMP_HIT) is None
    ):
        msg = (
            f"integration truncated after {traj.n_steps} steps at "
            f"alpha={alpha_end:.6g}, before the clamp"
        )
        raise UnresolvedOutcomeError(msg, trajectory=traj)
    if dist_i <= settings.tol_track:
        return Outcome(
            OutcomeLabel.TRACKED,
            oscillations=oscillations,
            endpoint_distance=dist_i,
            passed_thresholds=_passed_thresholds(params, alpha_end),
            funnel=funnel,
        )
    msg = (
        f"endpoint {tuple(final)} is {dist_a:.3g} from e_A and {dist_i:.3g} "
        "from e_I"
    )
    raise UnresolvedOutcomeError(msg, trajectory=traj)


def _repelling_sheet_point(
    C: float, alpha: float, params: ModelParams
) -> tuple[float, float] | None:
    """Return (H, A) on the repelling sheet at coral cover C, if it exists."""
    if alpha <= params.lam * params.d**3:
        return None
    H0 = fold_point(alpha, params)

    def gap(H: float) -> float:
        return float(coral_on_s02(H, alpha, params)) - C

    if gap(0.0) * gap(H0) > 0:
        return None
    H_r = H0 if gap(H0) == 0 else brentq(gap, 0.0, H0, xtol=1e-13)
    return H_r, alpha / float(feeding_rate(H_r, params))


def repelling_dwell(
    traj: Trajectory,
    params: ModelParams,
    *,
    settings: ExperimentSettings | None = None,
    t_end: float | None = None,
) -> float:
    """
    Return the slow time spent near the repelling sheet before t_end.

    Counting starts at the first downward fold crossing. A sample counts
    when Q < 0 at its (H, alpha), fish have not collapsed, and it lies
    within tube_constant * sqrt(eps) of the repelling sheet at the same C.
    """
    settings = settings or ExperimentSettings()
    crossing = next(
        (e for e in traj.events_of(EventKind.FOLD_CROSSING) if e.direction < 0),
        None,
    )
    end = float(traj.t[-1]) if t_end is None else t_end
    if crossing is None or crossing.t >= end:
        return 0.0
    t, y = traj.refined(settings.refine_factor)
    window = (t >= crossing.t) & (t <= end)
    t, y = t[window], y[window]
    if t.size < 2:  # noqa: PLR2004
        return 0.0
    radius = settings.tube_constant * math.sqrt(params.epsilon)
    inside = np.zeros(t.size)
    for k, (H, A, C, alpha) in enumerate(y):
        if H <= settings.tip_floor or q_function(H, alpha, params) >= 0:
            continue
        point = _repelling_sheet_point(C, alpha, params)
        if point is None:
            continue
        if max(abs(H - point[0]), abs(A - point[1])) < radius:
            inside[k] = 1.0
    weights = 0.5 * (inside[:-1] + inside[1:])
    return float(np.sum(weights * np.diff(t)) * traj.time_scale)


def oscillation_amplitudes(
    traj: Trajectory,
    params: ModelParams,
    *,
    atol: float = DEFAULT_ATOL,
    settings: ExperimentSettings | None = None,
    from_start: bool = False,
) -> NDArray[np.float64]:
    """
    Return the prominences of the local maxima of H, in time order.

    The window runs from funnel entry (first sample with Q below
    fold_proximity) or, with from_start, from the first sample; it ends at
    collapse or at the end of the run.
    """
    settings = settings or ExperimentSettings()
    _t, y = traj.refined(settings.refine_factor)
    H, alpha = y[:, 0], y[:, 3]
    if from_start:
        entry = 0
    else:
        near = np.flatnonzero(
            q_function(np.maximum(H, 0.0), alpha, params) <= settings.fold_proximity
        )
        if near.size == 0:
            return np.empty(0)
        entry = int(near[0])
    collapsed = np.flatnonzero(H[entry:] < settings.tip_floor)
    stop = entry + int(collapsed[0]) if collapsed.size else H.size
    _peaks, props = find_peaks(
        H[entry:stop], prominence=settings.prominence_factor * atol
    )
    return np.asarray(props["prominences"], dtype=float)


def count_subthreshold_oscillations(
    traj: Trajectory,
    params: ModelParams,
    *,
    atol: float = DEFAULT_ATOL,
    settings: ExperimentSettings | None = None,
) -> int:
    """
    Return the number of small oscillations of H before collapse.

    Maxima count between funnel entry and tip completion, so a run that
    never collapses has none.
    """
    settings = settings or ExperimentSettings()
    if _tip_time(traj, settings) is None:
        return 0
    return int(oscillation_amplitudes(traj, params, atol=atol, settings=settings).size)


def passes_through_funnel(
    traj: Trajectory,
    params: ModelParams,
    node: FoldedSingularity,
    *,
    settings: ExperimentSettings | None = None,
) -> bool:
    """Return True if a sample before collapse lies in the funnel of node."""
    settings = settings or ExperimentSettings()
    if node.kind is not FoldedKind.NODE:
        return False
    _t, y = traj.refined(settings.refine_factor)
    for H, _A, _C, alpha in y:
        if H < settings.tip_floor:
            break
        if in_funnel(float(H), float(alpha), node, params):
            return True
    return False


def has_delayed_hopf_signature(amplitudes: ArrayLike) -> bool:
    """Return True when amplitudes decay then grow with an interior minimum."""
    amps = np.asarray(amplitudes, dtype=float)
    if amps.size < 3:  # noqa: PLR2004
        return False
    low = int(np.argmin(amps))
    return bool(0 < low < amps.size - 1 and amps[low] < min(amps[0], amps[-1]))


def resurgence_experiment(  # noqa: PLR0913
    params: ModelParams,
    ramp: RampConfig,
    reset_alpha: float,
    config: IntegratorConfig | None = None,
    *,
    y0: ArrayLike | None = None,
    settings: ExperimentSettings | None = None,
) -> ResurgenceResult:
    """
    Ramp until the fish collapse, drop alpha to reset_alpha < d and settle.

    Raises NoTipToReverseError when the ramp never collapses the fish.
    """
    config = config or IntegratorConfig()
    settings = settings or ExperimentSettings()
    if not 0 < reset_alpha < params.d:
        msg = f"reset alpha must lie in (0, d={params.d!r}), got {reset_alpha!r}"
        raise PreconditionError(msg)
    if not bistability_screen(params, ramp.delta):
        msg = f"beta={params.beta!r}, lambda={params.lam!r} is not bistable"
        raise NotBistableError(msg)
    start = initial_state(params, ramp) if y0 is None else np.asarray(y0, float)
    collapse = integrate_ramped(
        params, ramp, start, config, settings=settings, stop_on_tip=True
    )
    tip = collapse.first_event(EventKind.TIP_COMPLETED)
    if tip is None:
        msg = f"no collapse at r={ramp.r!r}; nothing to reverse"
        raise NoTipToReverseError(msg)
    reset = collapse.final_state.copy()
    reset[3] = reset_alpha
    _LOGGER.info(
        "Collapse at tau=%.6g; resetting alpha to %.6g", tip.t * params.epsilon,
        reset_alpha,
    )
    recovery = integrate_frozen(
        params, reset, config, settings=settings, t0=float(collapse.t[-1])
    )
    traj = collapse.extend(recovery)
    target = coexistence_equilibrium(reset_alpha, params)
    distance = _max_distance(traj.final_state, target.state)
    return ResurgenceResult(
        trajectory=traj,
        reset_tau=float(collapse.t[-1]) * params.epsilon,
        reset_state=tuple(float(x) for x in reset),
        target=target,
        distance=distance,
        recovered=distance <= settings.tol_track,
    )


def singular_limit_check(  # noqa: PLR0913
    params: ModelParams,
    alpha: float,
    eps_list: Sequence[float],
    *,
    tau_end: float = DEFAULT_LIMIT_TAU,
    H_start: float | None = None,
    config: IntegratorConfig | None = None,
    samples: int = 201,
) -> list[LimitCheckRow]:
    """
    Compare the full flow at fixed alpha with the reduced flow on S0^2.

    Both start at H_start on the attracting sheet (default: midway between
    H_I and the attracting coral-free equilibrium). Raises
    ReductionViolationError unless the sup-norm gap in H shrinks strictly
    as epsilon decreases.
    """
    config = config or IntegratorConfig()
    eps_values = [float(e) for e in eps_list]
    if len(eps_values) < 2 or any(  # noqa: PLR2004
        b >= a for a, b in zip(eps_values, eps_values[1:], strict=False)
    ):
        msg = f"eps_list must hold at least two decreasing values, got {eps_list!r}"
        raise PreconditionError(msg)
    regime = reduced_flow_regime(alpha, params)
    if regime.item is not RegimeItem.BISTABLE:
        msg = f"alpha={alpha!r} is not in the bistable regime ({regime.item})"
        raise PreconditionError(msg)
    if H_start is None:
        H_start = 0.5 * (regime.positions["H_I"] + regime.positions["H_nC_a"])
    if q_function(H_start, alpha, params) <= 0:
        msg = f"H_start={H_start!r} is not on the attracting sheet"
        raise PreconditionError(msg)

    reduced = integrate_stiff(
        lambda _t, h: np.array([rhs_reduced_s02(float(h[0]), alpha, params)]),
        [H_start],
        (0.0, tau_end),
        config,
    )
    grid = np.linspace(0.0, tau_end, samples)
    H_reduced = reduced.sample(grid)[:, 0]
    start = (
        H_start,
        alpha / float(feeding_rate(H_start, params)),
        float(coral_on_s02(H_start, alpha, params)),
    )
    rows = []
    for eps in eps_values:
        p = replace(params, epsilon=eps)
        full = integrate_stiff(
            lambda _t, y, p=p: rhs_fast(y, alpha, p),
            start,
            (0.0, tau_end / eps),
            config,
            jac=lambda _t, y, p=p: fast_jacobian(y, alpha, p),
            time_scale=eps,
        )
        H_full = full.sample(grid / eps)[:, 0]
        rows.append(LimitCheckRow(eps, float(np.max(np.abs(H_full - H_reduced)))))
        _LOGGER.debug("eps=%g: sup |H - H_reduced| = %.3g", eps, rows[-1].error)
    errors = [row.error for row in rows]
    if any(b >= a for a, b in zip(errors, errors[1:], strict=False)):
        msg = f"reduction error does not shrink with epsilon: {errors!r}"
        raise ReductionViolationError(msg)
    return rows


def evaluate_cell(task: CellTask) -> CellResult:
    """Classify (and optionally simulate) one sweep cell."""
    base = {"i": task.i, "j": task.j, "beta": task.beta, "lam": task.lam}
    try:
        params = ModelParams(
            lam=task.lam, beta=task.beta, d=task.d, epsilon=task.epsilon
        )
        if not bistability_screen(params, task.delta):
            return CellResult(**base, excluded=True)
        label = region_classify(
            task.beta, task.lam, task.d, task.r,
            epsilon=task.epsilon, delta=task.delta,
        )
        outcome = None
        if task.mode is SweepMode.SIMULATE:
            ramp = build_ramp(params, task.r, delta=task.delta)
            _traj, outcome = run_tipping_experiment(
                params, ramp, task.config, settings=task.settings
            )
    except ReefTipError as err:
        _LOGGER.warning(
            "Cell beta=%g lambda=%g failed: %s", task.beta, task.lam, err
        )
        return CellResult(**base, error=str(err))
    return CellResult(**base, region=label, outcome=outcome)


async def async_sweep_regime_map(  # noqa: PLR0913
    betas: Sequence[float],
    lambdas: Sequence[float],
    d: float,
    r: float,
    mode: SweepMode = SweepMode.CLASSIFY,
    *,
    jobs: int = 1,
    seed: int | None = None,
    epsilon: float = DEFAULT_EPSILON,
    delta: float = DEFAULT_DELTA,
    config: IntegratorConfig | None = None,
    settings: ExperimentSettings | None = None,
) -> SweepResult:
    """Evaluate every (beta, lambda) cell through a worker coordinator."""
    outside = [
        float(v) for v in (*betas, *lambdas) if not 0.0 < float(v) < 1.0
    ]
    if outside:
        msg = f"sweep grid must lie inside (0, 1)^2, got {outside[0]!r}"
        raise PreconditionError(msg)
    config = config or IntegratorConfig()
    settings = settings or ExperimentSettings()
    tasks = [
        CellTask(
            i=i, j=j, beta=float(beta), lam=float(lam), d=d, r=r,
            epsilon=epsilon, delta=delta, mode=mode, config=config,
            settings=settings,
        )
        for i, beta in enumerate(betas)
        for j, lam in enumerate(lambdas)
    ]
    coordinator = SweepCoordinator(
        SweepCoordinatorConfig(jobs=jobs, seed=seed), evaluate=evaluate_cell
    )
    await coordinator.start()
    try:
        cells = await coordinator.run(tasks)
    finally:
        await coordinator.stop()
    failed = sum(1 for c in cells if c.error is not None)
    _LOGGER.info(
        "Sweep done: %d cells, %d excluded, %d failed",
        len(cells), sum(1 for c in cells if c.excluded), failed,
    )
    return SweepResult(
        betas=tuple(float(b) for b in betas),
        lambdas=tuple(float(lam) for lam in lambdas),
        d=d,
        r=r,
        mode=mode,
        cells=tuple(cells),
    )


def sweep_regime_map(  # noqa: PLR0913
    betas: Sequence[float],
    lambdas: Sequence[float],
    d: float,
    r: float,
    mode: SweepMode = SweepMode.CLASSIFY,
    *,
    jobs: int = 1,
    seed: int | None = None,
    epsilon: float = DEFAULT_EPSILON,
    delta: float = DEFAULT_DELTA,
    config: IntegratorConfig | None = None,
    settings: ExperimentSettings | None = None,
) -> SweepResult:
    """Run async_sweep_regime_map on a fresh event loop."""
    return asyncio.run(
        async_sweep_regime_map(
            betas, lambdas, d, r, mode,
            jobs=jobs, seed=seed, epsilon=epsilon, delta=delta,
            config=config, settings=settings,
        )
    )
