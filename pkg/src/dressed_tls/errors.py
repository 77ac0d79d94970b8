"""Shared exceptions and warnings."""

from __future__ import annotations


class EnvelopeUnderflowError(ValueError):
    """Envelope fell below the configured floor where a log-derivative is needed."""

    def __init__(self, t: float, value: float, floor: float):
        self.t = t
        self.value = value
        self.floor = floor
        super().__init__(
            f"envelope {value:.3e} below floor {floor:.3e} at t={t:.6g}; "
            "log-derivatives are undefined there"
        )


class DegenerateCrossingError(ArithmeticError):
    """Generalized Rabi frequency vanished (complex level crossing).

    The closed-form solution divides by this quantity and is invalid at and
    around such a point; only direct integration applies there.
    """

    def __init__(self, t: float, magnitude: float):
        self.t = t
        self.magnitude = magnitude
        super().__init__(
            f"|generalized Rabi| = {magnitude:.3e} at t={t:.6g}: degenerate "
            "crossing, closed-form solution aborted"
        )


class BranchAmbiguityWarning(UserWarning):
    """Both square-root branches are (nearly) equidistant from the previous value."""


class StepSizeUnderflowError(RuntimeError):
    """Adaptive integrator drove the step size below the representable limit."""

    def __init__(self, t: float, h: float):
        self.t = t
        self.h = h
        super().__init__(f"step size underflow (h={h:.3e}) at t={t:.6g}")


class GridMismatchError(ValueError):
    """Two trajectories were compared on different time grids."""


class ConfigError(ValueError):
    """Config file failed to parse or validate. Carries the offending field."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
