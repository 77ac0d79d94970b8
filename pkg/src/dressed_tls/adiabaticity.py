"""Generalized adiabatic condition as a family of dimensionless ratios.

The closed-form dressed-state solution is trustworthy where the drive's
phase and amplitude variations are slow against the detuning and Rabi
scales.  This is quantified by the (n, k) family of ratios

    r[n,k](t) = |d^n/dt^n (phi' - i L)| / (|detuning - i gamma/2|^(n+1-k) |W(t)|^k)

with L the envelope log-derivative, n = 0..n_max and k = 0..min(n+1, k_max).
The two classic special cases are kept verbatim in the forms they are
usually quoted in (note the standard condition uses gamma, not gamma/2; the
two conventions are reported side by side rather than harmonized):

    standard:   |L| / |detuning - i gamma|            (n=0, k=0 family)
    Born-Fock:  |d/dt W^-1| = |L| / W                 (n=0, k=1 family)

The margin, the maximum ratio over all stored pairs and times, is the
headline validity figure: small margin means the closed form tracks the
exact integration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SystemParams
from .errors import EnvelopeUnderflowError
from .field import PulseSpec, sample

DEFAULT_N_MAX = 3
DEFAULT_K_MAX = 2


@dataclass(frozen=True)
class AdiabaticityReport:
    """Per-(n, k) ratio time series and the worst-case margin."""

    grid: np.ndarray
    ratios: dict[tuple[int, int], np.ndarray]
    margin: float
    standard: np.ndarray
    born_fock: np.ndarray
    underflow: np.ndarray  # mask of grid points where the envelope hit the floor

    @property
    def pointwise_margin(self) -> np.ndarray:
        """Max ratio over all (n, k) at each grid point."""
        return np.max(np.stack(list(self.ratios.values())), axis=0)

    def pairs(self) -> list[tuple[int, int]]:
        return sorted(self.ratios)


def _field_arrays(pulse: PulseSpec, grid: np.ndarray):
    """Envelope, |d^n(phi' - iL)| for n = 0..3, and the underflow mask."""
    n = grid.size
    omega = np.full(n, np.nan)
    lhs = np.full((4, n), np.nan)
    under = np.zeros(n, dtype=bool)
    for i, t in enumerate(grid):
        try:
            s = sample(pulse, float(t))
        except EnvelopeUnderflowError:
            under[i] = True
            omega[i] = 0.0
            continue
        omega[i] = s.omega
        lhs[0, i] = abs(complex(s.phi_d[0], -s.log_deriv))
        lhs[1, i] = abs(complex(s.phi_d[1], -s.log_d[0]))
        lhs[2, i] = abs(complex(s.phi_d[2], -s.log_d[1]))
        lhs[3, i] = abs(complex(s.phi_d[3], -s.log_d[2]))
    return omega, lhs, under


def evaluate(
    pulse: PulseSpec,
    sys: SystemParams,
    grid,
    n_max: int = DEFAULT_N_MAX,
    k_max: int = DEFAULT_K_MAX,
) -> AdiabaticityReport:
    """Evaluate the ratio family on a grid.

    Grid points where the envelope is below the floor get infinite ratios for
    k >= 1 (and for the derivative numerators, which are undefined there);
    they are flagged in ``report.underflow`` rather than raising, so a report
    can still be produced for windows that clip a pulse tail.
    """
    if n_max < 0 or n_max > 3:
        raise ValueError("n_max must be in 0..3 (field contract bounds)")
    grid = np.asarray(grid, dtype=float)
    omega, lhs, under = _field_arrays(pulse, grid)
    base = abs(complex(pulse.detuning, 0.0) - 0.5j * sys.gamma)

    ratios: dict[tuple[int, int], np.ndarray] = {}
    for n in range(n_max + 1):
        for k in range(min(n + 1, k_max) + 1):
            with np.errstate(divide="ignore", invalid="ignore"):
                denom = base ** (n + 1 - k) * omega**k
                r = lhs[n] / denom
            r[under] = np.inf
            ratios[(n, k)] = r

    margin = float(max(np.max(r) for r in ratios.values()))
    return AdiabaticityReport(
        grid=grid,
        ratios=ratios,
        margin=margin,
        standard=standard_condition(pulse, sys, grid),
        born_fock=born_fock_condition(pulse, grid),
        underflow=under,
    )


def standard_condition(pulse: PulseSpec, sys: SystemParams, grid) -> np.ndarray:
    """|L| / |detuning - i gamma| per grid point (the textbook form)."""
    grid = np.asarray(grid, dtype=float)
    out = np.empty(grid.size)
    denom = abs(complex(pulse.detuning, 0.0) - 1j * sys.gamma)
    for i, t in enumerate(grid):
        try:
            s = sample(pulse, float(t))
        except EnvelopeUnderflowError:
            out[i] = np.inf
            continue
        out[i] = abs(s.log_deriv) / denom
    return out


def born_fock_condition(pulse: PulseSpec, grid) -> np.ndarray:
    """|d/dt W^-1| = |dW/dt| / W^2 per grid point."""
    grid = np.asarray(grid, dtype=float)
    out = np.empty(grid.size)
    for i, t in enumerate(grid):
        try:
            s = sample(pulse, float(t))
        except EnvelopeUnderflowError:
            out[i] = np.inf
            continue
        out[i] = abs(s.omega_d[0]) / s.omega**2
    return out
