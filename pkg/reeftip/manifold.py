"""
Critical-manifold geometry of the reef model at fixed alpha.

Covers the fold point, the equilibria, the alpha thresholds (alpha_plus,
alpha_star, alpha_hat), layer stability, the regimes of the reduced flow on
the coral-fish sheet and the (beta, lambda) curve where all three thresholds
coincide.
"""

from __future__ import annotations

import functools
import logging
import math
from typing import TYPE_CHECKING

import numpy as np
from scipy.optimize import brentq, minimize_scalar, newton

from .const import (
    COINCIDENCE_TOL,
    DEFAULT_DELTA,
    H_BIG,
    HYPERBOLICITY_TOL,
    MANIFOLD_RESIDUAL_TOL,
    ROOT_RESIDUAL_TOL,
    ROOT_XTOL,
)
from .exceptions import (
    DomainError,
    InvalidParameterError,
    NumericalError,
    PreconditionError,
)
from .model_core import (
    _s,
    coral_on_s02,
    fold_curve_alpha,
    layer_jacobian,
    pi_function,
    q_function,
    q_prime,
    u_function,
    u_prime,
    v_function,
)
from .models import (
    AlphaMaxRule,
    Branch,
    Equilibrium,
    EquilibriumSet,
    LayerClass,
    LayerStability,
    ModelParams,
    RampConfig,
    ReducedFlowRegime,
    RegimeItem,
    Stability,
    ThresholdOrdering,
    ThresholdSet,
)

if TYPE_CHECKING:
    from collections.abc import Callable

    from numpy.typing import ArrayLike

_LOGGER = logging.getLogger(__name__)

_BRACKET_LIMIT = H_BIG * 1.0e3


def _bracketed_root(
    f: Callable[[float], float],
    fprime: Callable[[float], float] | None,
    a: float,
    b: float,
) -> float:
    """Return a root of f in [a, b] by Brent's method plus one Newton polish."""
    try:
        root = brentq(f, a, b, xtol=ROOT_XTOL, maxiter=500)
    except (ValueError, RuntimeError) as err:
        msg = f"root bracketing failed on [{a!r}, {b!r}]"
        raise NumericalError(msg) from err
    if fprime is None:
        return root
    fr = f(root)
    slope = fprime(root)
    if slope != 0 and fr != 0:
        candidate = root - fr / slope
        if a <= candidate <= b and abs(f(candidate)) < abs(fr):
            root = candidate
    return root


def _upper_bracket(f: Callable[[float], float], start: float, sign: float) -> float:
    """Double start until f changes to the given sign."""
    b = max(start, 1.0)
    while np.sign(f(b)) != sign:
        b *= 2.0
        if b > _BRACKET_LIMIT:
            msg = "no sign change found below the bracketing limit"
            raise NumericalError(msg)
    return b


def _require(condition: bool, msg: str) -> None:  # noqa: FBT001
    if not condition:
        raise PreconditionError(msg)


def coexistence_fish_density(params: ModelParams) -> float:
    """
    Return H_I, the positive root of lam * H * s(H) = beta.

    H_I does not depend on alpha. The quadratic is evaluated in the form
    that avoids cancellation.
    """
    k = params.beta / params.lam
    d = params.d
    root = math.sqrt((k + d) ** 2 + 4.0 * k)
    if d - k > 0:
        return 2.0 * k / ((d - k) + root)
    return (k - d + root) / (2.0 * (d + 1.0))


def fold_point(alpha: float, params: ModelParams) -> float:
    """Return H0, the unique root of Q(., alpha) and the maximiser of C on S0^2."""
    threshold = params.lam * params.d**3
    _require(
        alpha > threshold,
        f"fold point needs alpha > lambda*d^3 = {threshold:.6g}, got {alpha!r}",
    )

    def f(H: float) -> float:
        return float(q_function(H, alpha, params))

    b = _upper_bracket(f, 1.0, 1.0)
    H0 = _bracketed_root(f, lambda H: float(q_prime(H, alpha, params)), 0.0, b)
    if abs(f(H0)) > ROOT_RESIDUAL_TOL * max(1.0, alpha / params.d**2):
        _LOGGER.debug("Fold point residual %.3g at alpha=%.6g", f(H0), alpha)
    return H0


@functools.lru_cache(maxsize=4096)
def pi_maximum(params: ModelParams) -> tuple[float, float]:
    """Return (H_hat, alpha_hat), the location and value of the maximum of Pi."""
    _require(params.lam_d2 < 1, "Pi has no interior maximum unless lambda*d^2 < 1")
    result = minimize_scalar(
        lambda H: -float(pi_function(H, params)),
        bounds=(0.0, H_BIG),
        method="bounded",
        options={"xatol": 1e-10},
    )
    guess = float(result.x)
    try:
        H_hat = float(
            newton(
                lambda H: u_function(H, params),
                guess,
                fprime=lambda H: u_prime(H, params),
                tol=1e-14,
                maxiter=50,
            )
        )
    except RuntimeError:
        H_hat = math.nan
    if not (0.0 <= H_hat <= H_BIG) or abs(u_function(H_hat, params)) > 1e-12:  # noqa: PLR2004
        _LOGGER.debug("Newton polish of H_hat failed from %.6g; bracketing", guess)
        H_hat = _bracketed_root(
            lambda H: float(u_function(H, params)), None, 0.0, H_BIG
        )
    return H_hat, float(pi_function(H_hat, params))


def coexistence_equilibrium(alpha: float, params: ModelParams) -> Equilibrium:
    """Return the coexistence equilibrium e_I, flagged irrelevant when C_I < 0."""
    _require(params.beta < 1, f"coexistence needs beta < 1, got {params.beta!r}")
    H = coexistence_fish_density(params)
    residual = float(v_function(H, params))
    if abs(residual) > 1e-10 * max(1.0, params.beta):  # noqa: PLR2004
        msg = f"coexistence residual {residual:.3g} too large"
        raise NumericalError(msg)
    s = _s(H, params.d)
    A = alpha / s
    C = 1.0 - params.beta - alpha / s
    q = float(q_function(H, alpha, params))
    if abs(q) <= ROOT_RESIDUAL_TOL:
        branch = Branch.FOLD
    elif q > 0:
        branch = Branch.S0_2_ATTRACTING
    else:
        branch = Branch.S0_2_REPELLING
    stability = _sign_stability(-q * C)
    return Equilibrium(
        "eI", H, A, C, branch, stability, relevant=C >= -ROOT_RESIDUAL_TOL
    )


def _sign_stability(derivative: float) -> Stability:
    if abs(derivative) <= ROOT_RESIDUAL_TOL:
        return Stability.NEUTRAL
    return Stability.ATTRACTING if derivative < 0 else Stability.REPELLING


def coral_free_equilibria(alpha: float, params: ModelParams) -> tuple[float, ...]:
    """
    Return the fish densities where S0^2 meets C = 0, in increasing order.

    These solve Pi(H) = alpha: two roots for d <= alpha < alpha_hat, one for
    alpha < d or alpha = alpha_hat, none above alpha_hat.
    """
    _require(params.lam_d2 < 1, "coral-free points need lambda*d^2 < 1")
    H_hat, alpha_hat = pi_maximum(params)
    if abs(alpha - alpha_hat) <= ROOT_RESIDUAL_TOL:
        return (H_hat,)
    if alpha > alpha_hat:
        return ()

    def g(H: float) -> float:
        return float(pi_function(H, params)) - alpha

    roots: list[float] = []
    if alpha >= params.d:
        roots.append(0.0 if g(0.0) == 0 else _bracketed_root(g, None, 0.0, H_hat))
    b = _upper_bracket(g, 2.0 * H_hat, -1.0)
    roots.append(_bracketed_root(g, None, H_hat, b))
    return tuple(roots)


@functools.lru_cache(maxsize=4096)
def threshold_set(params: ModelParams) -> ThresholdSet:
    """Return alpha_plus, alpha_star, alpha_hat with H_hat, H_I and their ordering."""
    _require(params.beta < 1, f"thresholds need beta < 1, got {params.beta!r}")
    _require(params.lam_d2 < 1, "thresholds need lambda*d^2 < 1")
    H_I = coexistence_fish_density(params)
    alpha_plus = (1.0 - params.beta) * _s(H_I, params.d)
    alpha_star = float(fold_curve_alpha(H_I, params))
    H_hat, alpha_hat = pi_maximum(params)
    if (
        abs(alpha_plus - alpha_star) <= COINCIDENCE_TOL
        or abs(alpha_plus - alpha_hat) <= COINCIDENCE_TOL
    ):
        ordering = ThresholdOrdering.COINCIDENT
    elif alpha_star < alpha_plus:
        ordering = ThresholdOrdering.STAR_PLUS_HAT
    else:
        ordering = ThresholdOrdering.PLUS_HAT_STAR
    return ThresholdSet(
        alpha_plus=alpha_plus,
        alpha_star=alpha_star,
        alpha_hat=alpha_hat,
        H_hat=H_hat,
        H_I=H_I,
        ordering=ordering,
    )


def s02_trace_det(H: float, alpha: float, params: ModelParams) -> tuple[float, float]:
    """Return trace and determinant of the layer Jacobian on S0^2."""
    s = _s(H, params.d)
    trace = alpha / s * (params.lam * H / (1.0 + H) ** 2 - 1.0)
    det = params.lam * alpha * H * q_function(H, alpha, params) / (1.0 + H) ** 2
    return float(trace), float(det)


def _branch_of(point: ArrayLike, alpha: float, params: ModelParams) -> Branch:
    H, A, C = (float(x) for x in point)
    tol = MANIFOLD_RESIDUAL_TOL
    if abs(H) <= tol and abs(A) <= tol:
        return Branch.S0_0
    if abs(H) <= tol and abs(A - (1.0 - C)) <= tol:
        return Branch.S0_1
    if H > -tol:
        H = max(H, 0.0)
        on_sheet = (
            abs(A - alpha / _s(H, params.d)) <= tol
            and abs(C - coral_on_s02(H, alpha, params)) <= tol
        )
        if on_sheet:
            q = float(q_function(H, alpha, params))
            if abs(q) <= tol:
                return Branch.FOLD
            return Branch.S0_2_ATTRACTING if q > 0 else Branch.S0_2_REPELLING
    msg = f"point {tuple(point)!r} is not on the critical manifold"
    raise DomainError(msg)


def layer_stability(
    point: ArrayLike, alpha: float, params: ModelParams
) -> LayerStability:
    """Classify the normal stability of a point of S0 from its fast Jacobian."""
    branch = _branch_of(point, alpha, params)
    eig = np.linalg.eigvals(layer_jacobian(point, alpha, params))
    real = eig.real
    scale = max(1.0, float(np.max(np.abs(eig))))
    if np.any(np.abs(real) <= HYPERBOLICITY_TOL * scale):
        classification = LayerClass.NON_HYPERBOLIC
    elif np.all(real < 0):
        classification = LayerClass.ATTRACTING
    elif np.all(real > 0):
        classification = LayerClass.REPELLING
    else:
        classification = LayerClass.SADDLE
    return LayerStability(
        branch=branch,
        eigenvalues=(complex(eig[0]), complex(eig[1])),
        classification=classification,
    )


def reduced_flow_regime(alpha: float, params: ModelParams) -> ReducedFlowRegime:
    """Return the regime of the reduced flow on S0^2 and its equilibria's stability."""
    _require(params.lam_d2 < 1, "regimes need lambda*d^2 < 1")
    _require(params.beta < 1, f"regimes need beta < 1, got {params.beta!r}")
    _require(alpha > params.d, f"regimes need alpha > d, got {alpha!r}")
    ts = threshold_set(params)
    a_plus, a_star = ts.alpha_plus, ts.alpha_star
    distinct = ts.ordering is not ThresholdOrdering.COINCIDENT
    if distinct and abs(alpha - a_plus) <= COINCIDENCE_TOL and a_plus < a_star:
        item = RegimeItem.TRANSCRITICAL
    elif distinct and abs(alpha - a_star) <= COINCIDENCE_TOL and a_star < a_plus:
        item = RegimeItem.FOLD_CROSSING
    elif alpha < min(a_plus, a_star):
        item = RegimeItem.BISTABLE
    elif a_plus < alpha < a_star:
        item = RegimeItem.PAST_TRANSCRITICAL
    elif a_star < alpha < a_plus:
        item = RegimeItem.REPELLING_COEXISTENCE
    else:
        item = RegimeItem.BEYOND

    positions: dict[str, float] = {"H_I": ts.H_I}
    stability: dict[str, Stability] = {}
    H_fold = fold_point(alpha, params)
    positions["H_fold"] = H_fold
    roots = coral_free_equilibria(alpha, params)
    if len(roots) == 2:  # noqa: PLR2004
        names = ("H_nC_r", "H_nC_a")
    else:
        names = tuple(
            "H_nC_a" if q_function(H, alpha, params) > 0 else "H_nC_r" for H in roots
        )
    for name, H in zip(names, roots, strict=True):
        positions[name] = H
        stability[name] = _sign_stability(float(v_function(H, params)))
    stability["H_I"] = coexistence_equilibrium(alpha, params).stability
    _LOGGER.debug("alpha=%.6g falls in %s: %s", alpha, item, positions)
    return ReducedFlowRegime(
        alpha=alpha,
        item=item,
        thresholds=ts,
        H_fold=H_fold,
        stability=stability,
        positions=positions,
    )


def equilibrium_set(alpha: float, params: ModelParams) -> EquilibriumSet:
    """Return every equilibrium at fixed alpha with branch and reduced stability."""
    one_minus_beta = 1.0 - params.beta
    e0 = Equilibrium("e0", 0.0, 0.0, 0.0, Branch.S0_0, _sign_stability(one_minus_beta))
    eC = Equilibrium(
        "eC",
        0.0,
        0.0,
        one_minus_beta,
        Branch.S0_0,
        _sign_stability(-one_minus_beta),
        relevant=one_minus_beta >= 0,
    )
    eA = Equilibrium("eA", 0.0, 1.0, 0.0, Branch.S0_1, _sign_stability(-params.beta))
    eI = coexistence_equilibrium(alpha, params)
    found: dict[str, Equilibrium] = {}
    for H in coral_free_equilibria(alpha, params):
        q = float(q_function(H, alpha, params))
        name = "enC_a" if q > 0 else "enC_r"
        branch = Branch.S0_2_ATTRACTING if q > 0 else Branch.S0_2_REPELLING
        found[name] = Equilibrium(
            name,
            H,
            alpha / _s(H, params.d),
            0.0,
            branch,
            _sign_stability(float(v_function(H, params))),
        )
    return EquilibriumSet(
        alpha=alpha,
        e0=e0,
        eC=eC,
        eA=eA,
        eI=eI,
        enC_r=found.get("enC_r"),
        enC_a=found.get("enC_a"),
    )


def _threshold_gap(beta: float, lam: float, d: float) -> float:
    """Return alpha_star - alpha_plus without computing alpha_hat."""
    params = ModelParams(lam=lam, beta=beta, d=d)
    H_I = coexistence_fish_density(params)
    return float(fold_curve_alpha(H_I, params)) - (1.0 - beta) * _s(H_I, d)


def bifurcation_curve_lambda_numeric(
    beta: float, d: float, *, points: int = 400
) -> float | None:
    """Return lambda in (0, 1) with alpha_star = alpha_plus by scan and bisection."""
    grid = np.geomspace(1e-6, 1.0 - 1e-9, points)
    gaps = [_threshold_gap(beta, lam, d) for lam in grid]
    for k in range(points - 1):
        if gaps[k] == 0:
            return float(grid[k])
        if gaps[k] * gaps[k + 1] < 0:
            return _bracketed_root(
                lambda lam: _threshold_gap(beta, lam, d),
                None,
                float(grid[k]),
                float(grid[k + 1]),
            )
    return None


def bifurcation_curve_lambda(beta: float, d: float) -> float | None:
    """
    Return lambda_C(beta, d) where alpha_plus = alpha_star = alpha_hat.

    Both branches of the closed form are evaluated and the one satisfying
    lambda >= beta**2 / (1 - 2 beta - 2 beta d) inside (0, 1) is kept. Returns
    None when no real admissible curve exists.
    """
    _require(0 < beta < 1, f"beta must lie in (0, 1), got {beta!r}")
    _require(d > 0, f"d must be positive, got {d!r}")
    if abs(2.0 * beta - 1.0) < 1e-12:  # noqa: PLR2004
        return bifurcation_curve_lambda_numeric(beta, d)
    bound_den = 1.0 - 2.0 * beta - 2.0 * beta * d
    if bound_den <= 0:
        _LOGGER.debug("beta=%.6g: alpha_star > alpha_plus for every lambda", beta)
        return None
    disc = 4.0 * beta * d * (2.0 * beta - 1.0) + (3.0 * beta - 1.0) ** 2
    if disc < 0:
        _LOGGER.debug("beta=%.6g, d=%.6g: no real curve (disc=%.3g)", beta, d, disc)
        return None
    base = 2.0 * beta * d * (2.0 * beta - 1.0) + (3.0 * beta - 1.0) ** 2
    spread = (3.0 * beta - 1.0) * math.sqrt(disc)
    denom = 2.0 * d * d * (2.0 * beta - 1.0)
    bound = beta * beta / bound_den
    admissible = [
        lam
        for lam in (-(base + spread) / denom, -(base - spread) / denom)
        if 0 < lam < 1 and lam >= bound * (1.0 - 1e-12)
    ]
    if not admissible:
        return None
    return min(admissible, key=lambda lam: abs(_threshold_gap(beta, lam, d)))


def bistability_screen(params: ModelParams, delta: float = DEFAULT_DELTA) -> bool:
    """Return True when e_I and e_A are both attracting at alpha = d + delta."""
    try:
        ts = threshold_set(params)
        regime = reduced_flow_regime(params.d + delta, params)
    except PreconditionError:
        return False
    return (
        regime.item is RegimeItem.BISTABLE
        and params.d + delta < ts.alpha_max - delta
    )


def build_ramp(
    params: ModelParams,
    r: float,
    *,
    delta: float = DEFAULT_DELTA,
    rule: AlphaMaxRule = AlphaMaxRule.MIN_THRESHOLDS,
    alpha_max: float | None = None,
) -> RampConfig:
    """
    Return the ramp from d + delta to the rule's alpha_max minus delta.

    With the explicit rule, alpha_max is the clamped end itself.
    """
    if rule is AlphaMaxRule.EXPLICIT:
        if alpha_max is None:
            msg = "explicit ramp rule needs alpha_max"
            raise InvalidParameterError(msg)
        top = alpha_max
    else:
        ts = threshold_set(params)
        end = ts.alpha_plus if rule is AlphaMaxRule.ALPHA_PLUS else ts.alpha_max
        top = end - delta
    try:
        return RampConfig(
            r=r,
            delta=delta,
            alpha_min_delta=params.d + delta,
            alpha_max_delta=top,
            alpha_max_rule=rule,
        )
    except InvalidParameterError as err:
        if r < 0 or delta <= 0:
            raise
        msg = f"no room to ramp: {err}"
        raise PreconditionError(msg) from err
