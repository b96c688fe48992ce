"""Pulse-level simulation of selective-pulse gates on two dipolar-coupled
spin-3/2 electron spins (N@C60 / P@C60)."""

from .errors import (
    DimensionMismatch,
    InvalidStep,
    NonHermitianInput,
    SimulationError,
    TimeOutOfRange,
    ZeroDetuning,
)
from .spin_model import SystemParams

__version__ = "0.1.0"

__all__ = [
    "DimensionMismatch",
    "InvalidStep",
    "NonHermitianInput",
    "SimulationError",
    "SystemParams",
    "TimeOutOfRange",
    "ZeroDetuning",
]
