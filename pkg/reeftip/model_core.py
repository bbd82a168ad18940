"""
Closed-form functions and vector fields of the fast-slow reef model.

State variables are fish density H, algal cover A and coral cover C, with
fishing effort alpha as the slow parameter. The fast system reads

    H' = lam * H * (s(H) * A - alpha)
    A' = A * (1 - A - C - lam * H * s(H))
    C' = eps * C * (1 - beta - A - C)

with feeding rate s(H) = d + H / (1 + H). Scalar helpers accept floats or
numpy arrays and broadcast; vector fields take one state at a time.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np

from .const import ROOT_RESIDUAL_TOL
from .exceptions import DomainError, InvalidParameterError, SingularPointError
from .models import ModelParams
from .ranges import check_dimensional

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    from .models import DimensionalParams, RampConfig

_LOGGER = logging.getLogger(__name__)


def nondimensionalize(
    p: DimensionalParams, *, validate_ranges: bool = True
) -> tuple[ModelParams, float]:
    """
    Map dimensional rates to (ModelParams, alpha).

    lam = lambda0 / rA, beta = m / rC, eps = rC / rA and
    alpha = (mu + f) / lambda0.
    """
    for name in ("rA", "rC", "lambda0"):
        if getattr(p, name) == 0:
            msg = f"{name} must be nonzero to scale the model"
            raise InvalidParameterError(msg)
    params = ModelParams(
        lam=p.lambda0 / p.rA,
        beta=p.m / p.rC,
        d=p.d,
        epsilon=p.rC / p.rA,
    )
    alpha = (p.mu + p.f) / p.lambda0
    if validate_ranges:
        for issue in check_dimensional(p):
            _LOGGER.warning("Parameter check: %s", issue)
        params.warn_if_unusual(alpha)
    return params, alpha


def _s(H: ArrayLike, d: float) -> NDArray[np.float64] | float:
    return d + H / (1.0 + H)


def _check_nonnegative(H: ArrayLike) -> None:
    if np.any(np.asarray(H) < 0):
        msg = "fish density H must be nonnegative"
        raise DomainError(msg)


def feeding_rate(H: ArrayLike, params: ModelParams) -> NDArray[np.float64] | float:
    """Return s(H) = d + H / (1 + H)."""
    _check_nonnegative(H)
    return _s(H, params.d)


def feeding_rate_prime(H: ArrayLike) -> NDArray[np.float64] | float:
    """Return s'(H) = (1 + H)**-2."""
    _check_nonnegative(H)
    return 1.0 / (1.0 + H) ** 2


def q_function(H: ArrayLike, alpha: ArrayLike, params: ModelParams) -> ArrayLike:
    """
    Return Q(H; alpha) = lam * (H + s (1+H)**2) - alpha / s**2.

    Q vanishes on the fold of the coral-fish sheet: Q > 0 on the attracting
    side, Q < 0 on the repelling side.
    """
    s = _s(H, params.d)
    return params.lam * (H + s * (1.0 + H) ** 2) - alpha / s**2


def q_prime(H: ArrayLike, alpha: ArrayLike, params: ModelParams) -> ArrayLike:
    """Return dQ/dH, which is positive for H >= 0."""
    s = _s(H, params.d)
    return 2.0 * params.lam * (params.d + 1.0) * (1.0 + H) + 2.0 * alpha / (
        (1.0 + H) ** 2 * s**3
    )


def pi_function(H: ArrayLike, params: ModelParams) -> ArrayLike:
    """Return Pi(H) = s - lam * H * s**2; Pi(H) = alpha marks C = 0 on S0^2."""
    s = _s(H, params.d)
    return s - params.lam * H * s**2


def u_function(H: ArrayLike, params: ModelParams) -> ArrayLike:
    """Return u(H) = 1 - 2 lam H s - lam s**2 (1+H)**2."""
    s = _s(H, params.d)
    return 1.0 - 2.0 * params.lam * H * s - params.lam * s**2 * (1.0 + H) ** 2


def u_prime(H: ArrayLike, params: ModelParams) -> ArrayLike:
    """Return u'(H), negative for H >= 0."""
    s = _s(H, params.d)
    lam = params.lam
    return (
        -2.0 * lam * H / (1.0 + H) ** 2
        - 4.0 * lam * s
        - 2.0 * lam * s**2 * (1.0 + H)
    )


def v_function(H: ArrayLike, params: ModelParams) -> ArrayLike:
    """Return v(H) = lam H s - beta, zero at the coexistence fish density."""
    return params.lam * H * _s(H, params.d) - params.beta


def v_prime(H: ArrayLike, params: ModelParams) -> ArrayLike:
    """Return v'(H) = lam (s + H / (1+H)**2)."""
    return params.lam * (_s(H, params.d) + H / (1.0 + H) ** 2)


def pi_prime(H: ArrayLike, params: ModelParams) -> ArrayLike:
    """Return Pi'(H) = u(H) / (1+H)**2."""
    return u_function(H, params) / (1.0 + H) ** 2


def coral_on_s02(H: ArrayLike, alpha: ArrayLike, params: ModelParams) -> ArrayLike:
    """Return the coral cover C(H) = 1 - alpha/s - lam H s on the sheet S0^2."""
    s = _s(H, params.d)
    return 1.0 - alpha / s - params.lam * H * s


def coral_on_s02_prime(
    H: ArrayLike, alpha: ArrayLike, params: ModelParams
) -> ArrayLike:
    """Return dC/dH on S0^2, equal to -Q / (1+H)**2."""
    return -q_function(H, alpha, params) / (1.0 + H) ** 2


def fold_curve_alpha(H: ArrayLike, params: ModelParams) -> ArrayLike:
    """Return the alpha at which H is the fold point (Q = 0 solved for alpha)."""
    s = _s(H, params.d)
    return params.lam * s**2 * (H + s * (1.0 + H) ** 2)


def f_function(H: ArrayLike, params: ModelParams, r: float) -> ArrayLike:
    """Return F(H) = u v + r / s; its roots are the folded singularities."""
    return u_function(H, params) * v_function(H, params) + r / _s(H, params.d)


def f_prime(H: ArrayLike, params: ModelParams, r: float) -> ArrayLike:
    """Return dF/dH."""
    s = _s(H, params.d)
    return (
        u_function(H, params) * v_prime(H, params)
        + u_prime(H, params) * v_function(H, params)
        - r / (s**2 * (1.0 + H) ** 2)
    )


def rhs_fast(
    state: ArrayLike, alpha: float, params: ModelParams
) -> NDArray[np.float64]:
    """Return (dH/dt, dA/dt, dC/dt) of the fast system at fixed alpha."""
    H, A, C = state[0], state[1], state[2]
    s = _s(H, params.d)
    lam = params.lam
    return np.array(
        [
            lam * H * (s * A - alpha),
            A * (1.0 - A - C - lam * H * s),
            params.epsilon * C * (1.0 - params.beta - A - C),
        ]
    )


def fast_jacobian(
    state: ArrayLike, alpha: float, params: ModelParams
) -> NDArray[np.float64]:
    """Return the 3x3 Jacobian of rhs_fast with respect to (H, A, C)."""
    H, A, C = state[0], state[1], state[2]
    s = _s(H, params.d)
    lam = params.lam
    eps = params.epsilon
    ds = s + H / (1.0 + H) ** 2  # d(H s)/dH
    return np.array(
        [
            [lam * (ds * A - alpha), lam * H * s, 0.0],
            [-lam * A * ds, 1.0 - 2.0 * A - C - lam * H * s, -A],
            [0.0, -eps * C, eps * (1.0 - params.beta - A - 2.0 * C)],
        ]
    )


def layer_jacobian(
    state: ArrayLike, alpha: float, params: ModelParams
) -> NDArray[np.float64]:
    """Return the 2x2 Jacobian of the layer problem in (H, A)."""
    return fast_jacobian(state, alpha, params)[:2, :2]


def rhs_reduced_s02(H: float, alpha: float, params: ModelParams) -> float:
    """
    Return dH/dtau of the reduced flow on the coral-fish sheet S0^2.

    Raises SingularPointError on the fold, where the flow is undefined.
    """
    q = float(q_function(H, alpha, params))
    if abs(q) < ROOT_RESIDUAL_TOL:
        msg = f"reduced flow is singular at the fold (H={H!r}, alpha={alpha!r})"
        raise SingularPointError(msg)
    coral = coral_on_s02(H, alpha, params)
    return float(-((1.0 + H) ** 2) / q * coral * v_function(H, params))


def rhs_reduced_s00(C: float, params: ModelParams) -> float:
    """Return dC/dtau on S0^0 (no fish, no algae)."""
    return C * (1.0 - params.beta - C)


def rhs_reduced_s01(C: float, params: ModelParams) -> float:
    """Return dC/dtau on S0^1 (no fish, A = 1 - C)."""
    return -params.beta * C


def rhs_ramped(
    state: ArrayLike, params: ModelParams, ramp: RampConfig
) -> NDArray[np.float64]:
    """
    Return the fast-time field of the ramped system in (H, A, C, alpha).

    The first three components are rhs_fast at the state's alpha; the last is
    dalpha/dt = eps * r inside the half-open ramp window and zero otherwise
    (dalpha/dtau = r under tau = eps * t).
    """
    alpha = float(state[3])
    rate = params.epsilon * ramp.r if ramp.is_ramping(alpha) else 0.0
    return np.append(rhs_fast(state, alpha, params), rate)


def ramped_jacobian(state: ArrayLike, params: ModelParams) -> NDArray[np.float64]:
    """Return the 4x4 Jacobian of the ramped field in (H, A, C, alpha)."""
    jac = np.zeros((4, 4))
    jac[:3, :3] = fast_jacobian(state, float(state[3]), params)
    jac[0, 3] = -params.lam * state[0]
    return jac


def lambda_function(
    H: ArrayLike, alpha: ArrayLike, params: ModelParams, r: float
) -> ArrayLike:
    """Return Lambda = -(1+H)**2 * (C(H, alpha) v(H) + r / s)."""
    s = _s(H, params.d)
    coral = coral_on_s02(H, alpha, params)
    return -((1.0 + H) ** 2) * (coral * v_function(H, params) + r / s)


def rhs_desingularized(
    H: float, alpha: float, params: ModelParams, r: float
) -> tuple[float, float]:
    """
    Return (dH/ds, dalpha/ds) of the desingularised ramped reduced flow.

    Time s runs backwards relative to tau where Q < 0.
    """
    if H <= 0:
        msg = "desingularised flow needs H > 0"
        raise DomainError(msg)
    return (
        float(lambda_function(H, alpha, params, r)),
        float(r * q_function(H, alpha, params)),
    )


def desingularized_jacobian(
    H: float, alpha: float, params: ModelParams, r: float
) -> NDArray[np.float64]:
    """
    Return the exact 2x2 Jacobian of rhs_desingularized in (H, alpha).

    At a folded singularity this reduces to the closed form
    [[r/s**2 - lam K u, (1+H)**2 v / s], [r Q'(H), -r / s**2]] with
    K = H + s (1+H)**2.
    """
    s = _s(H, params.d)
    ds = 1.0 / (1.0 + H) ** 2
    coral = coral_on_s02(H, alpha, params)
    v = v_function(H, params)
    g = coral * v + r / s
    g_h = (
        coral_on_s02_prime(H, alpha, params) * v
        + coral * v_prime(H, params)
        - r * ds / s**2
    )
    return np.array(
        [
            [-2.0 * (1.0 + H) * g - (1.0 + H) ** 2 * g_h, (1.0 + H) ** 2 * v / s],
            [r * q_prime(H, alpha, params), -r / s**2],
        ]
    )
