"""Data models for the coral reef tipping analysis."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from ._compat import StrEnum

from .const import (
    DEFAULT_ATOL,
    DEFAULT_EPSILON,
    DEFAULT_MAX_STEPS,
    DEFAULT_RTOL,
    DWELL_THRESHOLD,
    EPSILON_SOFT_MAX,
    FOLD_PROXIMITY,
    H_TIP_FLOOR,
    PROMINENCE_FACTOR,
    REFINE_FACTOR,
    SETTLE_TAU,
    TOL_EQUILIBRIUM,
    TOL_TRACK,
    TUBE_CONSTANT,
)
from .exceptions import InvalidParameterError
from .ranges import check_dimensionless

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class DimensionalParams:
    """Raw model rates (per year) before scaling."""

    mu: float  # fish natural mortality
    m: float  # coral mortality
    f: float  # fishing mortality
    rA: float  # noqa: N815 - algae growth rate
    rC: float  # noqa: N815 - coral growth rate
    d: float  # minimum per-capita feeding rate (dimensionless)
    lambda0: float  # herbivory rate

    def __post_init__(self) -> None:
        """Reject negative or non-finite rates."""
        for name in ("mu", "m", "f", "rA", "rC", "d", "lambda0"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                msg = f"{name} must be finite and nonnegative, got {value!r}"
                raise InvalidParameterError(msg)


@dataclass(frozen=True)
class ModelParams:
    """
    Dimensionless parameters of the fast-slow reef model.

    lam is the scaled herbivory, beta the scaled coral mortality, d the
    minimum feeding rate and epsilon the ratio of coral to algae growth.
    Hard invariants raise; soft concerns (beta >= 1, epsilon above the
    timescale split, lambda * d**2 >= 1, values outside the analysed ranges)
    are reported by validation_issues().
    """

    lam: float
    beta: float
    d: float
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self) -> None:
        """Enforce the hard invariants."""
        checks = (
            ("lam", self.lam > 0),
            ("beta", self.beta >= 0),
            ("d", self.d > 0),
            ("epsilon", self.epsilon > 0),
        )
        for name, ok in checks:
            value = getattr(self, name)
            if not math.isfinite(value) or not ok:
                msg = f"{name}={value!r} violates its parameter invariant"
                raise InvalidParameterError(msg)

    @property
    def lam_d2(self) -> float:
        """Return lambda * d**2, which must stay below one for Pi to peak."""
        return self.lam * self.d * self.d

    def validation_issues(self, alpha: float | None = None) -> list[str]:
        """Return soft validation concerns as readable strings."""
        issues = []
        if self.beta >= 1:
            issues.append(f"beta={self.beta:g} >= 1: coexistence is never relevant")
        if self.epsilon > EPSILON_SOFT_MAX:
            issues.append(
                f"epsilon={self.epsilon:g} exceeds {EPSILON_SOFT_MAX:g}: "
                "no timescale separation"
            )
        if self.lam_d2 >= 1:
            issues.append(f"lambda*d^2={self.lam_d2:g} >= 1: Pi has no interior max")
        issues.extend(check_dimensionless(self, alpha))
        return issues

    def warn_if_unusual(self, alpha: float | None = None) -> list[str]:
        """Log every soft validation concern and return them."""
        issues = self.validation_issues(alpha)
        for issue in issues:
            _LOGGER.warning("Parameter check: %s", issue)
        return issues


class AlphaMaxRule(StrEnum):
    """Which threshold sets the upper end of the ramp."""

    MIN_THRESHOLDS = "min"  # min(alpha_plus, alpha_star)
    ALPHA_PLUS = "alpha-plus"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class RampConfig:
    """Linear ramp of alpha at rate r per slow time, clamped to a window."""

    r: float
    delta: float
    alpha_min_delta: float
    alpha_max_delta: float
    alpha_max_rule: AlphaMaxRule = AlphaMaxRule.MIN_THRESHOLDS

    def __post_init__(self) -> None:
        """Validate rate, margin and window."""
        if not self.r >= 0:
            msg = f"ramp rate must be >= 0, got {self.r!r}"
            raise InvalidParameterError(msg)
        if not self.delta > 0:
            msg = f"ramp margin must be > 0, got {self.delta!r}"
            raise InvalidParameterError(msg)
        if not self.alpha_min_delta < self.alpha_max_delta:
            msg = (
                f"empty ramp window [{self.alpha_min_delta!r}, "
                f"{self.alpha_max_delta!r}]"
            )
            raise InvalidParameterError(msg)

    def is_ramping(self, alpha: float) -> bool:
        """Return True inside the half-open window where alpha moves."""
        return self.r > 0 and self.alpha_min_delta <= alpha < self.alpha_max_delta


class Branch(StrEnum):
    """Branches of the critical manifold."""

    S0_0 = "S0^0"  # H = 0, A = 0
    S0_1 = "S0^1"  # H = 0, A = 1 - C
    S0_2_ATTRACTING = "S0^2,a"
    S0_2_REPELLING = "S0^2,r"
    FOLD = "fold"


class Stability(StrEnum):
    """Stability of an equilibrium along a one-dimensional flow."""

    ATTRACTING = "attracting"
    REPELLING = "repelling"
    NEUTRAL = "neutral"


class LayerClass(StrEnum):
    """Normal stability of a point on the critical manifold."""

    ATTRACTING = "attracting"
    REPELLING = "repelling"
    SADDLE = "saddle"
    NON_HYPERBOLIC = "non-hyperbolic"


@dataclass(frozen=True)
class LayerStability:
    """Eigenvalues of the fast (H, A) Jacobian at a point of S0."""

    branch: Branch
    eigenvalues: tuple[complex, complex]
    classification: LayerClass

    @property
    def normally_repelling(self) -> bool:
        """Return True when some fast direction is unstable."""
        return self.classification in (LayerClass.REPELLING, LayerClass.SADDLE)


@dataclass(frozen=True)
class Equilibrium:
    """A named equilibrium of the frozen-alpha system."""

    name: str
    H: float
    A: float
    C: float
    branch: Branch
    stability: Stability | None = None
    relevant: bool = True

    @property
    def state(self) -> tuple[float, float, float]:
        """Return (H, A, C)."""
        return (self.H, self.A, self.C)


@dataclass(frozen=True)
class EquilibriumSet:
    """All equilibria at a fixed alpha; absent coral-free points are None."""

    alpha: float
    e0: Equilibrium
    eC: Equilibrium  # noqa: N815
    eA: Equilibrium  # noqa: N815
    eI: Equilibrium  # noqa: N815
    enC_r: Equilibrium | None  # noqa: N815
    enC_a: Equilibrium | None  # noqa: N815

    def all(self) -> list[Equilibrium]:
        """Return the equilibria that exist."""
        found = [self.e0, self.eC, self.eA, self.eI, self.enC_r, self.enC_a]
        return [e for e in found if e is not None]


class ThresholdOrdering(StrEnum):
    """Ordering of the three alpha thresholds."""

    STAR_PLUS_HAT = "alpha*<alpha+<alpha^"  # folded node for small r
    PLUS_HAT_STAR = "alpha+<alpha^<alpha*"  # folded focus for small r
    COINCIDENT = "alpha+=alpha*=alpha^"


@dataclass(frozen=True)
class ThresholdSet:
    """Bifurcation thresholds of a (beta, lambda, d) triple."""

    alpha_plus: float
    alpha_star: float
    alpha_hat: float
    H_hat: float
    H_I: float
    ordering: ThresholdOrdering

    @property
    def alpha_max(self) -> float:
        """Return min(alpha_plus, alpha_star), the end of bistability."""
        return min(self.alpha_plus, self.alpha_star)


class RegimeItem(StrEnum):
    """The alpha regimes of the reduced flow on the coral-fish branch."""

    BISTABLE = "item1"  # alpha < min(alpha+, alpha*)
    TRANSCRITICAL = "item2"  # alpha = alpha+ < alpha*
    PAST_TRANSCRITICAL = "item3"  # alpha+ < alpha < alpha*
    FOLD_CROSSING = "item4"  # alpha = alpha* < alpha+
    REPELLING_COEXISTENCE = "item5"  # alpha* < alpha < alpha+
    BEYOND = "beyond"  # alpha >= max(alpha+, alpha*)


@dataclass(frozen=True)
class ReducedFlowRegime:
    """Regime of the reduced flow plus stability of its equilibria."""

    alpha: float
    item: RegimeItem
    thresholds: ThresholdSet
    H_fold: float | None
    stability: dict[str, Stability] = field(default_factory=dict)
    positions: dict[str, float] = field(default_factory=dict)


class FoldedKind(StrEnum):
    """Type of a folded singularity."""

    NODE = "node"
    FOCUS = "focus"
    SADDLE = "saddle"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class FoldedSingularity:
    """A classified equilibrium of the desingularised system on the fold."""

    H: float
    alpha: float
    kind: FoldedKind
    trace: float
    det: float
    delta: float
    eigenvalues: tuple[complex, complex]
    coral: float  # C coordinate on the fold curve
    anchor: str  # "H_hat" or "H_I": the r = 0 root this continues
    strong_direction: tuple[float, float] | None = None
    weak_direction: tuple[float, float] | None = None
    mu: float | None = None
    sectors: int | None = None

    @property
    def relevant(self) -> bool:
        """Return True when the coral coordinate is nonnegative."""
        return self.coral >= 0


class Region(StrEnum):
    """Parameter regions of the ramped system."""

    I = "I"  # noqa: E741
    II = "II"
    IIIA = "IIIa"
    IIIB = "IIIb"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class RegionLabel:
    """Region of a (beta, lambda, d, r) point with its supporting scalars."""

    region: Region
    small_r_kind: FoldedKind
    delta: float
    alpha_fs: float
    alpha_plus: float
    mu: float | None = None
    singularity: FoldedSingularity | None = None


class OutcomeLabel(StrEnum):
    """Result of a ramped run."""

    TRACKED = "Tracked"
    CANARD_TIPPED = "CanardTipped"
    JUMP_TIPPED = "JumpTipped"
    BIFURCATION_TIPPED = "BifurcationTipped"

    @property
    def tipped(self) -> bool:
        """Return True for every tipped label."""
        return self is not OutcomeLabel.TRACKED


@dataclass(frozen=True)
class Outcome:
    """Classification of a ramped run."""

    label: OutcomeLabel
    tip_tau: float | None = None
    tip_alpha: float | None = None
    oscillations: int = 0
    dwell_tau: float = 0.0
    endpoint_distance: float = 0.0
    passed_thresholds: tuple[str, ...] = ()
    funnel: bool | None = None  # None without a governing folded node


@dataclass(frozen=True)
class IntegratorConfig:
    """Controls for the stiff stepper (fast-time units)."""

    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    max_step: float = math.inf
    initial_step: float | None = None
    max_steps: int = DEFAULT_MAX_STEPS
    trace: bool = False

    def __post_init__(self) -> None:
        """Validate tolerance ranges and caps."""
        if not 1e-12 <= self.rtol <= 1e-2:  # noqa: PLR2004
            msg = f"rtol must lie in [1e-12, 1e-2], got {self.rtol!r}"
            raise InvalidParameterError(msg)
        if not self.atol > 0:
            msg = f"atol must be > 0, got {self.atol!r}"
            raise InvalidParameterError(msg)
        if self.max_steps <= 0:
            msg = f"max_steps must be > 0, got {self.max_steps!r}"
            raise InvalidParameterError(msg)
        if not self.max_step > 0:
            msg = f"max_step must be > 0, got {self.max_step!r}"
            raise InvalidParameterError(msg)


@dataclass(frozen=True)
class ExperimentSettings:
    """Classification constants for ramped runs."""

    tol_track: float = TOL_TRACK
    tube_constant: float = TUBE_CONSTANT
    dwell_threshold: float = DWELL_THRESHOLD
    tip_floor: float = H_TIP_FLOOR
    tol_eq: float = TOL_EQUILIBRIUM
    settle_tau: float = SETTLE_TAU
    fold_proximity: float = FOLD_PROXIMITY
    prominence_factor: float = PROMINENCE_FACTOR
    refine_factor: int = REFINE_FACTOR


class SweepMode(StrEnum):
    """What a sweep computes per cell."""

    CLASSIFY = "classify"
    SIMULATE = "simulate"


@dataclass(frozen=True)
class CellTask:
    """Work item for one sweep cell; picklable for process workers."""

    i: int
    j: int
    beta: float
    lam: float
    d: float
    r: float
    epsilon: float
    delta: float
    mode: SweepMode = SweepMode.CLASSIFY
    config: IntegratorConfig = field(default_factory=IntegratorConfig)
    settings: ExperimentSettings = field(default_factory=ExperimentSettings)


@dataclass(frozen=True)
class CellResult:
    """One (beta, lambda) cell of a sweep."""

    i: int
    j: int
    beta: float
    lam: float
    excluded: bool = False
    region: RegionLabel | None = None
    outcome: Outcome | None = None
    error: str | None = None

    @property
    def alpha_fs(self) -> float | None:
        """Return the governing folded singularity's alpha, if classified."""
        return None if self.region is None else self.region.alpha_fs

    @property
    def mu(self) -> float | None:
        """Return the eigenvalue ratio of a governing node, if any."""
        return None if self.region is None else self.region.mu


@dataclass(frozen=True)
class SweepResult:
    """A (beta, lambda) regime map."""

    betas: tuple[float, ...]
    lambdas: tuple[float, ...]
    d: float
    r: float
    mode: SweepMode
    cells: tuple[CellResult, ...]

    @property
    def resolution(self) -> tuple[int, int]:
        """Return (n_beta, n_lambda)."""
        return (len(self.betas), len(self.lambdas))

    def count(self, region: Region) -> int:
        """Return the number of cells classified into region."""
        return sum(
            1 for c in self.cells if c.region is not None and c.region.region is region
        )
