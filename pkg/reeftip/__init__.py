"""Fast-slow analysis of rate-induced tipping in a coral reef model."""

from __future__ import annotations

__version__ = "2026.10.0"

from .exceptions import ReefTipError
from .models import ModelParams, RampConfig

__all__ = ["ModelParams", "RampConfig", "ReefTipError", "__version__"]
