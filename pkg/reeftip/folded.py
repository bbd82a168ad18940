"""
Folded singularities of the ramped reduced flow.

With alpha ramped at rate r the reduced problem on the coral-fish sheet is
two-dimensional in (H, alpha). After rescaling time by Q it becomes the
desingularised system

    dH/ds = Lambda(H, alpha),  dalpha/ds = r Q(H, alpha)

whose equilibria on the fold curve Q = 0 are the folded singularities. On
the fold curve alpha = lam s**2 (H + s (1+H)**2), and the singularities are
the roots of F(H) = u(H) v(H) + r / s(H).
"""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING

import numpy as np

from .const import (
    DEFAULT_DELTA,
    DEFAULT_EPSILON,
    DEGENERATE_DELTA_TOL,
    FOLDED_RESIDUAL_TOL,
    H_BIG,
    H_SCAN_MIN,
    H_SCAN_POINTS,
    MAX_RAMP_RATE,
    RCRIT_SCAN_MIN,
    RCRIT_SCAN_POINTS,
)
from .exceptions import NotBistableError, NumericalError, PreconditionError
from .manifold import _bracketed_root, _upper_bracket, bistability_screen, threshold_set
from .model_core import (
    _s,
    coral_on_s02,
    desingularized_jacobian,
    f_function,
    f_prime,
    fold_curve_alpha,
    lambda_function,
    q_function,
    u_function,
    u_prime,
    v_function,
    v_prime,
)
from .models import (
    FoldedKind,
    FoldedSingularity,
    ModelParams,
    Region,
    RegionLabel,
    ThresholdOrdering,
)

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from .models import ThresholdSet

_LOGGER = logging.getLogger(__name__)

ANCHOR_H_HAT = "H_hat"
ANCHOR_H_I = "H_I"


def _check_rate(params: ModelParams, r: float) -> None:
    if not 0 <= r <= MAX_RAMP_RATE:
        msg = f"ramp rate must lie in [0, {MAX_RAMP_RATE:g}], got {r!r}"
        raise PreconditionError(msg)
    if params.beta >= 1 or params.lam_d2 >= 1:
        msg = "folded analysis needs beta < 1 and lambda*d^2 < 1"
        raise PreconditionError(msg)


def _anchors(ts: ThresholdSet) -> dict[str, float]:
    return {ANCHOR_H_HAT: ts.H_hat, ANCHOR_H_I: ts.H_I}


def _nearest_anchor(H: float, ts: ThresholdSet) -> str:
    return min(_anchors(ts).items(), key=lambda item: abs(item[1] - H))[0]


def _unit(vec: NDArray[np.float64]) -> tuple[float, float]:
    norm = float(np.hypot(vec[0], vec[1]))
    x, y = float(vec[0]) / norm, float(vec[1]) / norm
    # Orient towards increasing alpha, then increasing H.
    if y < 0 or (y == 0 and x < 0):
        x, y = -x, -y
    return (x, y)


def _eigenvector(jac: NDArray[np.float64], value: float) -> tuple[float, float]:
    first = np.array([jac[0, 1], value - jac[0, 0]])
    second = np.array([value - jac[1, 1], jac[1, 0]])
    best = first if np.hypot(*first) >= np.hypot(*second) else second
    return _unit(best)


def classify_folded(
    H: float,
    alpha: float,
    params: ModelParams,
    r: float,
    *,
    anchor: str | None = None,
) -> FoldedSingularity:
    """
    Classify a folded singularity from the Jacobian of the desingularised flow.

    Node when Delta > 0 and det > 0, focus when Delta < 0, saddle when
    det < 0. For nodes mu is the ratio of the larger to the smaller
    eigenvalue magnitude and sectors = floor((mu - 1) / 2).
    """
    q = float(q_function(H, alpha, params))
    lam_val = float(lambda_function(H, alpha, params, r))
    if abs(q) >= FOLDED_RESIDUAL_TOL or abs(lam_val) >= FOLDED_RESIDUAL_TOL:
        msg = f"(H={H!r}, alpha={alpha!r}) is not a folded singularity"
        raise PreconditionError(msg)
    jac = desingularized_jacobian(H, alpha, params, r)
    a, b, c, e = jac[0, 0], jac[0, 1], jac[1, 0], jac[1, 1]
    trace = float(a + e)
    det = float(a * e - b * c)
    delta = float((a - e) ** 2 + 4.0 * b * c)
    scale = float((a - e) ** 2 + 4.0 * abs(b * c))
    det_scale = float(abs(a * e) + abs(b * c))
    flat = scale == 0 or abs(delta) <= DEGENERATE_DELTA_TOL * scale
    if det < 0 and abs(det) > DEGENERATE_DELTA_TOL * det_scale:
        kind = FoldedKind.SADDLE
    elif flat or abs(det) <= DEGENERATE_DELTA_TOL * det_scale:
        kind = FoldedKind.DEGENERATE
    elif delta > 0:
        kind = FoldedKind.NODE
    else:
        kind = FoldedKind.FOCUS
    if kind is FoldedKind.DEGENERATE and r > 0:
        _LOGGER.warning(
            "Folded singularity at H=%.6g, alpha=%.6g is on a classification "
            "boundary (Delta=%.3g, det=%.3g)",
            H,
            alpha,
            delta,
            det,
        )

    strong = weak = None
    mu = None
    sectors = None
    if delta >= 0:
        root = math.sqrt(delta)
        big = 0.5 * (trace + math.copysign(root, trace))
        small = det / big if big != 0 else 0.0
        eigenvalues = (complex(big), complex(small))
        if kind in (FoldedKind.NODE, FoldedKind.SADDLE):
            strong = _eigenvector(jac, big)
            weak = _eigenvector(jac, small)
        if kind is FoldedKind.NODE and small != 0:
            mu = abs(big) / abs(small)
            sectors = math.floor((mu - 1.0) / 2.0)
    else:
        half = 0.5 * math.sqrt(-delta)
        eigenvalues = (complex(0.5 * trace, half), complex(0.5 * trace, -half))

    ts = threshold_set(params)
    return FoldedSingularity(
        H=float(H),
        alpha=float(alpha),
        kind=kind,
        trace=trace,
        det=det,
        delta=delta,
        eigenvalues=eigenvalues,
        coral=float(coral_on_s02(H, alpha, params)),
        anchor=anchor if anchor is not None else _nearest_anchor(H, ts),
        strong_direction=strong,
        weak_direction=weak,
        mu=mu,
        sectors=sectors,
    )


def _scan_roots(params: ModelParams, r: float) -> list[float]:
    grid = np.geomspace(H_SCAN_MIN, H_BIG, H_SCAN_POINTS)
    values = f_function(grid, params, r)
    roots: list[float] = []
    for k in range(len(grid) - 1):
        if values[k] == 0:
            roots.append(float(grid[k]))
        elif values[k] * values[k + 1] < 0:
            roots.append(
                _bracketed_root(
                    lambda H: float(f_function(H, params, r)),
                    lambda H: float(f_prime(H, params, r)),
                    float(grid[k]),
                    float(grid[k + 1]),
                )
            )
    return roots


def find_folded_singularities(
    params: ModelParams, r: float
) -> list[FoldedSingularity]:
    """
    Return every folded singularity for ramp rate r, sorted by H.

    At r = 0 the roots are exactly H_hat and H_I. Each singularity records
    which of the two r = 0 roots it continues.
    """
    _check_rate(params, r)
    ts = threshold_set(params)
    if r == 0:
        roots = sorted({ts.H_hat, ts.H_I})
    else:
        roots = _scan_roots(params, r)
    if len(roots) == 2:  # noqa: PLR2004
        ordered = (
            (ANCHOR_H_HAT, ANCHOR_H_I)
            if ts.H_hat < ts.H_I
            else (ANCHOR_H_I, ANCHOR_H_HAT)
        )
        anchors = list(ordered)
    else:
        _LOGGER.warning(
            "Found %d folded singularities for beta=%.6g, lambda=%.6g, r=%.3g; "
            "roots coincide near the curve alpha+=alpha*",
            len(roots),
            params.beta,
            params.lam,
            r,
        )
        anchors = [_nearest_anchor(H, ts) for H in roots]
    return [
        classify_folded(H, float(fold_curve_alpha(H, params)), params, r, anchor=anc)
        for H, anc in zip(roots, anchors, strict=True)
    ]


def relevant_singularity(params: ModelParams, r: float) -> FoldedSingularity | None:
    """
    Return the ecologically relevant folded singularity (C >= 0).

    The one continuing H_I governs when alpha* < alpha+, the one continuing
    H_hat when alpha+ < alpha*.
    """
    ts = threshold_set(params)
    preferred = (
        ANCHOR_H_I if ts.ordering is ThresholdOrdering.STAR_PLUS_HAT else ANCHOR_H_HAT
    )
    relevant = [p for p in find_folded_singularities(params, r) if p.relevant]
    for p in relevant:
        if p.anchor == preferred:
            return p
    return relevant[0] if relevant else None


def anchored_root(params: ModelParams, r: float, anchor: str) -> float:
    """Return the root of F continuing the given r = 0 root."""
    ts = threshold_set(params)
    a = _anchors(ts)[anchor]
    if r == 0:
        return a
    if anchor == ANCHOR_H_HAT:
        slope = float(u_prime(a, params) * v_function(a, params))
    else:
        slope = float(u_function(a, params) * v_prime(a, params))

    def f(H: float) -> float:
        return float(f_function(H, params, r))

    def fp(H: float) -> float:
        return float(f_prime(H, params, r))

    # F(a) = r / s > 0 and the root moves by -1 / (s F'(a)) per unit r.
    if slope > 0:
        if f(0.0) >= 0:
            msg = f"root continuing {anchor} left the domain at r={r!r}"
            raise NumericalError(msg)
        return _bracketed_root(f, fp, 0.0, a)
    b = _upper_bracket(f, 2.0 * a, -1.0)
    return _bracketed_root(f, fp, a, b)


def _kmv(H: float, params: ModelParams) -> tuple[float, float, float, float]:
    """Return s, K = H + s(1+H)**2, v and M = 2 + (1+H)s + H / (s (1+H)**2)."""
    s = float(_s(H, params.d))
    K = H + s * (1.0 + H) ** 2
    v = float(v_function(H, params))
    M = 2.0 + (1.0 + H) * s + H / (s * (1.0 + H) ** 2)
    return s, K, v, M


def _scaled_discriminant(H: float, params: ModelParams, r: float) -> float:
    """Return Delta / r at a folded singularity, using u = -r / (s v) there."""
    s, K, v, M = _kmv(H, params)
    lam = params.lam
    return r * (2.0 / s**2 + lam * K / (s * v)) ** 2 + 8.0 * lam * v * (
        1.0 + H
    ) ** 2 * M / s


def discriminant(params: ModelParams, r: float, anchor: str = ANCHOR_H_HAT) -> float:
    """
    Return Delta(r) = tr**2 - 4 det along the singularity continuing anchor.

    Delta(0) is zero at H_hat and equals tr**2 at H_I.
    """
    _check_rate(params, r)
    H = anchored_root(params, r, anchor)
    if r == 0:
        s, K, _, _ = _kmv(H, params)
        return float((params.lam * K * u_function(H, params)) ** 2)
    return r * _scaled_discriminant(H, params, r)


def discriminant_slope_at_zero(params: ModelParams) -> float:
    """Return dDelta/dr at r = 0 along the singularity continuing H_hat."""
    H_hat = threshold_set(params).H_hat
    s, _, v, M = _kmv(H_hat, params)
    return 8.0 * params.lam * v * (1.0 + H_hat) ** 2 * M / s


def critical_rate(params: ModelParams) -> float | None:
    """
    Return r_crit, the smallest r > 0 where the folded focus becomes a node.

    Only defined when alpha+ < alpha_hat < alpha*; returns None otherwise or
    when Delta keeps its sign on (0, 0.1].
    """
    _check_rate(params, 0.0)
    ts = threshold_set(params)
    if ts.ordering is not ThresholdOrdering.PLUS_HAT_STAR:
        _LOGGER.debug("No critical rate: ordering is %s", ts.ordering)
        return None

    def g(r: float) -> float:
        return _scaled_discriminant(anchored_root(params, r, ANCHOR_H_HAT), params, r)

    rates = np.geomspace(RCRIT_SCAN_MIN, MAX_RAMP_RATE, RCRIT_SCAN_POINTS)
    previous = None
    for k, rate in enumerate(rates):
        try:
            value = g(float(rate))
        except NumericalError:
            break
        if previous is not None and previous < 0 <= value:
            r_crit = _bracketed_root(g, None, float(rates[k - 1]), float(rate))
            _LOGGER.debug("r_crit=%.10g for %s", r_crit, params)
            return r_crit
        previous = value
    _LOGGER.debug("Delta keeps its sign for r in (0, %g]", MAX_RAMP_RATE)
    return None


def _boundary_label(
    ts: ThresholdSet, small_r_kind: FoldedKind, p: FoldedSingularity | None
) -> RegionLabel:
    _LOGGER.warning(
        "Region classification on a boundary: small-r kind %s, singularity %s",
        small_r_kind,
        None if p is None else p.kind,
    )
    return RegionLabel(
        region=Region.BOUNDARY,
        small_r_kind=small_r_kind,
        delta=math.nan if p is None else p.delta,
        alpha_fs=math.nan if p is None else p.alpha,
        alpha_plus=ts.alpha_plus,
        mu=None if p is None else p.mu,
        singularity=p,
    )


def region_classify(  # noqa: PLR0913
    beta: float,
    lam: float,
    d: float,
    r: float,
    *,
    epsilon: float = DEFAULT_EPSILON,
    delta: float = DEFAULT_DELTA,
) -> RegionLabel:
    """
    Return the region of (beta, lambda, d) at ramp rate r.

    I: node at r and node as r -> 0; II: node at r, focus as r -> 0;
    IIIa / IIIb: focus at r with alpha_FS below / above alpha+.
    """
    params = ModelParams(lam=lam, beta=beta, d=d, epsilon=epsilon)
    if not bistability_screen(params, delta):
        msg = f"beta={beta!r}, lambda={lam!r} is not bistable at alpha=d+{delta!r}"
        raise NotBistableError(msg)
    ts = threshold_set(params)
    small_r_kind = {
        ThresholdOrdering.STAR_PLUS_HAT: FoldedKind.NODE,
        ThresholdOrdering.PLUS_HAT_STAR: FoldedKind.FOCUS,
    }.get(ts.ordering, FoldedKind.DEGENERATE)
    p = relevant_singularity(params, r)
    if (
        p is None
        or small_r_kind is FoldedKind.DEGENERATE
        or p.kind in (FoldedKind.SADDLE, FoldedKind.DEGENERATE)
    ):
        return _boundary_label(ts, small_r_kind, p)
    if p.kind is FoldedKind.NODE:
        region = Region.I if small_r_kind is FoldedKind.NODE else Region.II
    else:
        region = Region.IIIA if p.alpha < ts.alpha_plus else Region.IIIB
    return RegionLabel(
        region=region,
        small_r_kind=small_r_kind,
        delta=p.delta,
        alpha_fs=p.alpha,
        alpha_plus=ts.alpha_plus,
        mu=p.mu,
        singularity=p,
    )


def in_funnel(
    H: float, alpha: float, node: FoldedSingularity, params: ModelParams
) -> bool:
    """
    Return True if (H, alpha) lies in the funnel of a folded node.

    The funnel is the part of the attracting sheet below the node bounded by
    the fold curve and the weak eigendirection through the node.
    """
    if node.kind is not FoldedKind.NODE or node.weak_direction is None:
        return False
    if alpha >= node.alpha or q_function(H, alpha, params) <= 0:
        return False
    wh, wa = node.weak_direction

    def side(ph: float, pa: float) -> float:
        return wh * (pa - node.alpha) - wa * (ph - node.H)

    ref_H = node.H - 1e-3 * (1.0 + node.H)
    ref = side(ref_H, float(fold_curve_alpha(ref_H, params)))
    here = side(H, alpha)
    return here != 0 and math.copysign(1.0, here) == math.copysign(1.0, ref)
