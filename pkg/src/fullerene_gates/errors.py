"""Exception types raised across the package."""


class SimulationError(Exception):
    """Base class for all errors raised by fullerene_gates."""


class NonHermitianInput(SimulationError, ValueError):
    pass


class DimensionMismatch(SimulationError, ValueError):
    pass


class TimeOutOfRange(SimulationError, ValueError):
    pass


class InvalidStep(SimulationError, ValueError):
    pass


class ZeroDetuning(SimulationError, ValueError):
    """A detuning of the two-tone drive vanished (effective model is singular)."""
