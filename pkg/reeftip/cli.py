"""
Command-line entry point: ``python -m reeftip <command> [flags]``.

Exit codes: 0 on success, 2 for invalid input (bad flags, parameters or
preconditions), 3 for numerical failures.
"""

# ruff: noqa: T201
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING, Any

import colorlog
import numpy as np
import voluptuous as vol

from .config import COMMANDS, load_run_config
from .const import DOMAIN, FLOAT_FORMAT, SWEEP_COLUMNS, TRAJECTORY_COLUMNS
from .diagnostics import build_run_diagnostics, write_diagnostics
from .exceptions import (
    DomainError,
    InvalidParameterError,
    NoTipToReverseError,
    NumericalError,
    PreconditionError,
)
from .experiments import (
    resurgence_experiment,
    run_tipping_experiment,
    singular_limit_check,
    sweep_regime_map,
)
from .folded import critical_rate, find_folded_singularities, region_classify
from .manifold import bifurcation_curve_lambda, threshold_set
from .models import AlphaMaxRule, SweepMode

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from .config import RunConfig
    from .integrate import Trajectory
    from .models import SweepResult

_LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

_LOG_FORMAT = "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return format(float(value), FLOAT_FORMAT)


def setup_logging(*, verbose: bool) -> None:
    """Attach a colored stderr handler to the package logger."""
    logger = logging.getLogger(DOMAIN)
    if not any(getattr(h, "_reeftip", False) for h in logger.handlers):
        handler = colorlog.StreamHandler(sys.stderr)
        handler.setFormatter(colorlog.ColoredFormatter(_LOG_FORMAT))
        handler._reeftip = True  # type: ignore[attr-defined]  # noqa: SLF001
        logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON run configuration")
    common.add_argument("--beta", type=float)
    common.add_argument("--lambda", dest="lambda", type=float)
    common.add_argument("--d", type=float)
    common.add_argument("--eps", type=float)
    common.add_argument("--r", type=float, help="ramp rate in slow time")
    common.add_argument("--delta", type=float)
    common.add_argument(
        "--alpha-max-rule",
        dest="alpha_max_rule",
        choices=[rule.value for rule in AlphaMaxRule],
    )
    common.add_argument("--alpha-max", dest="alpha_max", type=float)
    common.add_argument("--rtol", type=float)
    common.add_argument("--atol", type=float)
    common.add_argument("--max-step", dest="max_step", type=float)
    common.add_argument("--max-steps", dest="max_steps", type=int)
    common.add_argument("--output", "--output-dir", dest="output")
    common.add_argument("--jobs", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--trace", action="store_true", default=None)
    common.add_argument("--verbose", "-v", action="store_true", default=None)

    parser = argparse.ArgumentParser(prog=DOMAIN, description=__doc__.splitlines()[1])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name, parents=[common])
        if name == "sweep":
            cmd.add_argument("--grid", type=int)
            cmd.add_argument("--mode", choices=[m.value for m in SweepMode])
            cmd.add_argument(
                "--beta-range", dest="beta_range", type=float, nargs=2
            )
            cmd.add_argument(
                "--lambda-range", dest="lambda_range", type=float, nargs=2
            )
        elif name == "resurgence":
            cmd.add_argument("--reset-alpha", dest="reset_alpha", type=float)
        elif name == "limit-check":
            cmd.add_argument("--alpha", type=float)
            cmd.add_argument("--eps-list", dest="eps_list", type=float, nargs="+")
            cmd.add_argument("--tau-end", dest="tau_end", type=float)
    return parser


def _write_trajectory_csv(traj: Trajectory, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for t, tau, row in zip(traj.t, traj.tau, traj.y, strict=True):
            writer.writerow([_fmt(t), _fmt(tau), *(_fmt(x) for x in row[:4])])


def _write_sweep_csv(result: SweepResult, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for cell in result.cells:
            if cell.excluded:
                region = "excluded"
            elif cell.region is None:
                region = "error"
            else:
                region = cell.region.region.value
            outcome = cell.outcome.label.value if cell.outcome is not None else ""
            writer.writerow(
                [
                    _fmt(cell.beta),
                    _fmt(cell.lam),
                    region,
                    outcome,
                    _fmt(cell.alpha_fs if cell.region is not None else None),
                    _fmt(cell.mu),
                ]
            )


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def _cmd_analyze(cfg: RunConfig) -> str:
    params = cfg.model_params()
    params.warn_if_unusual()
    ts = threshold_set(params)
    lam_c = bifurcation_curve_lambda(cfg.beta, cfg.d) if 0 < cfg.beta < 1 else None
    r_crit = critical_rate(params)
    if cfg.output:
        data = build_run_diagnostics(cfg, thresholds=ts)
        data["lambda_C"] = lam_c
        data["r_crit"] = r_crit
        write_diagnostics(data, Path(cfg.output))
    summary = {
        "beta": cfg.beta,
        "lambda": cfg.lam,
        "d": cfg.d,
        "H_I": ts.H_I,
        "H_hat": ts.H_hat,
        "alpha_plus": ts.alpha_plus,
        "alpha_star": ts.alpha_star,
        "alpha_hat": ts.alpha_hat,
        "regime": ts.ordering.value,
        "lambda_C": lam_c,
        "r_crit": r_crit,
    }
    return json.dumps(summary, sort_keys=True)


def _cmd_classify(cfg: RunConfig) -> str:
    label = region_classify(
        cfg.beta, cfg.lam, cfg.d, cfg.r, epsilon=cfg.eps, delta=cfg.delta
    )
    if cfg.output:
        data = build_run_diagnostics(cfg, region=label)
        data["singularities"] = [
            {
                "H": p.H,
                "alpha": p.alpha,
                "kind": p.kind.value,
                "anchor": p.anchor,
                "relevant": p.relevant,
            }
            for p in find_folded_singularities(cfg.model_params(), cfg.r)
        ]
        write_diagnostics(data, Path(cfg.output))
    return (
        f"classify: region={label.region.value} "
        f"small_r_kind={label.small_r_kind.value} "
        f"alpha_FS={_fmt(label.alpha_fs)} mu={_fmt(label.mu) or 'none'}"
    )


def _cmd_simulate(cfg: RunConfig) -> str:
    params = cfg.model_params()
    ramp = cfg.ramp(params)
    traj, outcome = run_tipping_experiment(
        params, ramp, cfg.integrator_config(), settings=cfg.experiment_settings()
    )
    if cfg.output:
        path = Path(cfg.output)
        _write_trajectory_csv(traj, path)
        write_diagnostics(
            build_run_diagnostics(
                cfg, ramp=ramp, trajectory=traj, outcome=outcome,
                thresholds=threshold_set(params),
            ),
            _sidecar(path),
        )
    return (
        f"simulate: outcome={outcome.label.value} "
        f"tip_alpha={_fmt(outcome.tip_alpha) or 'none'} "
        f"oscillations={outcome.oscillations} steps={traj.n_steps}"
    )


def _cmd_sweep(cfg: RunConfig) -> str:
    betas = np.linspace(*cfg.beta_range, cfg.grid)
    lambdas = np.linspace(*cfg.lambda_range, cfg.grid)
    result = sweep_regime_map(
        betas,
        lambdas,
        cfg.d,
        cfg.r,
        cfg.mode,
        jobs=cfg.jobs,
        seed=cfg.seed,
        epsilon=cfg.eps,
        delta=cfg.delta,
        config=cfg.integrator_config(),
        settings=cfg.experiment_settings(),
    )
    if cfg.output:
        path = Path(cfg.output)
        _write_sweep_csv(result, path)
        write_diagnostics(build_run_diagnostics(cfg), _sidecar(path))
    excluded = sum(1 for c in result.cells if c.excluded)
    failed = sum(1 for c in result.cells if c.error is not None)
    return (
        f"sweep: cells={len(result.cells)} excluded={excluded} failed={failed}"
    )


def _cmd_rcrit(cfg: RunConfig) -> str:
    value = critical_rate(cfg.model_params())
    return f"r_crit = {_fmt(value) or 'none'}"


def _cmd_resurgence(cfg: RunConfig) -> str:
    if cfg.reset_alpha is None:
        msg = "resurgence needs --reset-alpha"
        raise PreconditionError(msg)
    params = cfg.model_params()
    ramp = cfg.ramp(params)
    result = resurgence_experiment(
        params,
        ramp,
        cfg.reset_alpha,
        cfg.integrator_config(),
        settings=cfg.experiment_settings(),
    )
    if cfg.output:
        path = Path(cfg.output)
        _write_trajectory_csv(result.trajectory, path)
        data = build_run_diagnostics(cfg, ramp=ramp, trajectory=result.trajectory)
        data["resurgence"] = {
            "reset_tau": result.reset_tau,
            "reset_state": list(result.reset_state),
            "distance": result.distance,
            "recovered": result.recovered,
        }
        write_diagnostics(data, _sidecar(path))
    return (
        f"resurgence: reset_tau={_fmt(result.reset_tau)} "
        f"distance={_fmt(result.distance)} recovered={result.recovered}"
    )


def _cmd_limit_check(cfg: RunConfig) -> str:
    if cfg.alpha is None:
        msg = "limit-check needs --alpha"
        raise PreconditionError(msg)
    rows = singular_limit_check(
        cfg.model_params(),
        cfg.alpha,
        cfg.eps_list,
        tau_end=cfg.tau_end,
        config=cfg.integrator_config(),
    )
    if cfg.output:
        with Path(cfg.output).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(("epsilon", "error"))
            for row in rows:
                writer.writerow((_fmt(row.epsilon), _fmt(row.error)))
    pairs = " ".join(f"{_fmt(row.epsilon)}:{row.error:.3e}" for row in rows)
    return f"limit-check: {pairs}"


_HANDLERS: dict[str, Callable[[RunConfig], str]] = {
    "analyze": _cmd_analyze,
    "classify": _cmd_classify,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "rcrit": _cmd_rcrit,
    "resurgence": _cmd_resurgence,
    "limit-check": _cmd_limit_check,
}


def run(argv: Sequence[str]) -> int:
    """Parse argv, run one command and return its exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exit_:
        return int(exit_.code or 0)
    overrides: dict[str, Any] = {
        k: v for k, v in vars(args).items() if k != "config" and v is not None
    }
    setup_logging(verbose=bool(overrides.get("verbose")))
    try:
        cfg = load_run_config(args.config, overrides)
        summary = _HANDLERS[cfg.command](cfg)
    except (vol.Invalid, InvalidParameterError, PreconditionError, DomainError) as err:
        print(f"{DOMAIN}: error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as err:
        print(f"{DOMAIN}: error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, NoTipToReverseError) as err:
        print(f"{DOMAIN}: numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(summary)
    return EXIT_OK


def main() -> None:
    """Console-script entry point."""
    raise SystemExit(run(sys.argv[1:]))


__all__ = ["EXIT_INVALID", "EXIT_NUMERICAL", "EXIT_OK", "main", "run"]
