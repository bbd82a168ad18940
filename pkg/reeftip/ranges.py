"""
Parameter range tables for the coral reef model.

DIMENSIONAL_RANGES lists the ecologically possible values of the raw rates
(per year unless noted). DIMENSIONLESS_RANGES lists, for each scaled
parameter, the possible range implied by the dimensional table and the
narrower range the analysis considers.

The checkers never raise: they return human-readable issues so callers can
log or surface them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .models import DimensionalParams, ModelParams


@dataclass(frozen=True)
class ParamRange:
    """Closed interval, optionally open at the top."""

    low: float
    high: float
    high_open: bool = False

    def contains(self, value: float) -> bool:
        """Return True if value lies in the interval."""
        if value < self.low:
            return False
        if self.high_open:
            return value < self.high
        return value <= self.high

    def describe(self) -> str:
        """Return interval notation."""
        close = ")" if self.high_open or math.isinf(self.high) else "]"
        return f"[{self.low:g}, {self.high:g}{close}"


DIMENSIONAL_RANGES: dict[str, ParamRange] = {
    "mu": ParamRange(0.02, 0.02),
    "m": ParamRange(0.008, 0.08),
    "f": ParamRange(0.0, 0.5),
    "rA": ParamRange(1.0, 8.0),
    "rC": ParamRange(0.02, 0.2),
    "d": ParamRange(0.22, 0.22),  # dimensionless
    "lambda0": ParamRange(0.0, 3.2),
}

# name -> (possible, considered)
DIMENSIONLESS_RANGES: dict[str, tuple[ParamRange, ParamRange]] = {
    "lam": (ParamRange(0.0, 3.2), ParamRange(0.0, 1.0)),
    "alpha": (ParamRange(0.00625, math.inf), ParamRange(0.1, 0.7)),
    "beta": (ParamRange(0.04, 4.0), ParamRange(0.04, 1.0, high_open=True)),
    "epsilon": (ParamRange(0.0025, 0.2), ParamRange(0.0025, 0.01)),
}


def check_dimensional(params: DimensionalParams) -> list[str]:
    """Return issues for dimensional rates outside their possible ranges."""
    issues = []
    for name, rng in DIMENSIONAL_RANGES.items():
        value = getattr(params, name)
        if not rng.contains(value):
            issues.append(f"{name}={value:g} outside possible range {rng.describe()}")
    return issues


def check_dimensionless(
    params: ModelParams, alpha: float | None = None, *, considered: bool = True
) -> list[str]:
    """
    Return issues for scaled parameters outside the tabulated ranges.

    With considered=True the narrower analysed range is used, otherwise the
    possible range.
    """
    values: dict[str, float] = {
        "lam": params.lam,
        "beta": params.beta,
        "epsilon": params.epsilon,
    }
    if alpha is not None:
        values["alpha"] = alpha
    label = "considered" if considered else "possible"
    issues = []
    for name, value in values.items():
        possible, analysed = DIMENSIONLESS_RANGES[name]
        rng = analysed if considered else possible
        if not rng.contains(value):
            issues.append(f"{name}={value:g} outside {label} range {rng.describe()}")
    return issues
