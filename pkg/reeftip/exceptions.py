"""Exceptions for the reeftip package."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .integrate import Trajectory


class ReefTipError(Exception):
    """Base class for every error raised by reeftip."""


class InvalidParameterError(ReefTipError, ValueError):
    """A parameter violates a hard invariant of the model."""


class PreconditionError(ReefTipError, ValueError):
    """
    An operation was called outside the hypothesis it relies on.

    Examples are a fold point requested for alpha <= lambda * d**3, a
    coexistence equilibrium for beta >= 1, or a resurgence reset at or above
    d. The inputs are individually valid; the combination is not.
    """


class NotBistableError(PreconditionError):
    """The (beta, lambda, d) triple fails the bistability screen."""


class DomainError(ReefTipError, ValueError):
    """A state lies outside the region where the quantity is defined."""


class NumericalError(ReefTipError, ArithmeticError):
    """A numerical procedure failed to produce a trustworthy answer."""


class SingularPointError(NumericalError):
    """The reduced flow was evaluated on the fold where Q vanishes."""


class IntegrationError(NumericalError):
    """The stiff stepper could not continue (step size collapsed)."""


class ReductionViolationError(NumericalError):
    """Singular-limit errors did not shrink monotonically with epsilon."""


class UnresolvedOutcomeError(NumericalError):
    """
    A run ended near neither the coexistence nor the algae attractor.

    The trajectory is attached so callers can inspect where it stalled.
    """

    def __init__(self, msg: str, trajectory: Trajectory | None = None) -> None:
        """Store the message and the offending trajectory."""
        super().__init__(msg)
        self.trajectory = trajectory


class NoTipToReverseError(ReefTipError):
    """A resurgence run never tipped, so there is nothing to reverse."""
