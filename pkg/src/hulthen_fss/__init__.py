"""Hulthen critical parameters from exponential-basis spectral solves and finite-size scaling."""

__version__ = "0.1.0"

from hulthen_fss.basis import BasisSpec, DecayRateGrid, build_decay_rates
from hulthen_fss.errors import (
    BracketError,
    ConditioningError,
    ConfigError,
    ConvergenceError,
    HulthenError,
    NoBoundState,
    QuadratureError,
    SurfaceParseError,
    UndefinedPoint,
)

__all__ = [
    "BasisSpec",
    "DecayRateGrid",
    "build_decay_rates",
    "BracketError",
    "ConditioningError",
    "ConfigError",
    "ConvergenceError",
    "HulthenError",
    "NoBoundState",
    "QuadratureError",
    "SurfaceParseError",
    "UndefinedPoint",
]
