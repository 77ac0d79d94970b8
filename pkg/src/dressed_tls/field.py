"""Driving field: envelope and phase families with closed-form derivatives.

Every family provides the envelope (on-resonance Rabi frequency, rad/time)
and its first four time derivatives analytically; phases provide the phase
and its first four derivatives.  Log-derivatives of the envelope, needed up
to third order by the downstream formulas, are assembled exactly from the
envelope derivatives.

Derivative orders follow from what the dressed-state formulas and the
adiabaticity ratios consume: the generalized adiabatic ratios up to n = 3
need the fourth phase derivative and the third log-derivative.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import EnvelopeUnderflowError

ENVELOPE_FAMILIES = ("constant", "gaussian", "sech", "smooth_step", "spline")
PHASE_FAMILIES = ("none", "linear_chirp", "polynomial")

#: default envelope floor, relative to the peak; log-derivatives error below it
DEFAULT_FLOOR = 1e-12
#: default grid-anchor level, relative to the peak; trajectory grids should
#: start where the envelope has grown past this (no dressing exists at zero
#: field, and the closed-form amplitudes divide by the envelope)
DEFAULT_ANCHOR = 1e-6

Derivs4 = tuple[float, float, float, float]


@dataclass(frozen=True)
class PulseSpec:
    """Analytic drive field: envelope, optical phase, and carrier detuning.

    Parameters
    ----------
    envelope : str
        One of ``constant``, ``gaussian``, ``sech``, ``smooth_step``,
        ``spline``.
    omega_peak : float
        Peak Rabi frequency (angular frequency units), >= 0.
    center : float
        Envelope center (gaussian, sech) or turn-on time (smooth_step); also
        the expansion point of the phase polynomial.
    width : float
        Envelope time scale tau, > 0 for pulsed families.
    phase : str
        ``none``, ``linear_chirp`` (phi = chirp_rate/2 * (t-center)^2) or
        ``polynomial`` (phi = sum_k phase_coeffs[k] * (t-center)^k).
    detuning : float
        Carrier detuning of the drive from the bare transition.
    floor, anchor : float
        Relative envelope floor below which log-derivatives error out, and
        the relative anchor level recommended for grid starts.
    samples : tuple of (tuple, tuple), optional
        For the ``spline`` family: (times, values) of a sampled envelope,
        fitted by a quintic spline with analytic spline derivatives.  Samples
        are lower-trust than closed-form families and flagged as such.
    """

    envelope: str
    omega_peak: float
    center: float = 0.0
    width: float | None = None
    phase: str = "none"
    chirp_rate: float = 0.0
    phase_coeffs: tuple[float, ...] = ()
    detuning: float = 0.0
    floor: float = DEFAULT_FLOOR
    anchor: float = DEFAULT_ANCHOR
    samples: tuple[tuple[float, ...], tuple[float, ...]] | None = None

    def __post_init__(self):
        if self.envelope not in ENVELOPE_FAMILIES:
            raise ValueError(f"unknown envelope family {self.envelope!r}")
        if self.phase not in PHASE_FAMILIES:
            raise ValueError(f"unknown phase family {self.phase!r}")
        if self.omega_peak < 0:
            raise ValueError("omega_peak must be >= 0")
        if self.envelope in ("gaussian", "sech", "smooth_step"):
            if self.width is None or self.width <= 0:
                raise ValueError(f"{self.envelope} envelope requires width > 0")
        if self.envelope == "spline":
            if self.samples is None:
                raise ValueError("spline envelope requires samples=(times, values)")
            times, values = self.samples
            if len(times) != len(values) or len(times) < 6:
                raise ValueError("spline samples need >= 6 matching (time, value) pairs")
        if not (0 < self.floor < 1):
            raise ValueError("floor must be a relative level in (0, 1)")

    # -- envelope ----------------------------------------------------------

    def envelope_value(self, t: float) -> float:
        """Envelope value only; cheap path for integrators."""
        a = self.omega_peak
        if self.envelope == "constant":
            return a
        if self.envelope == "gaussian":
            x = (t - self.center) / self.width
            return a * math.exp(-x * x)
        if self.envelope == "sech":
            x = (t - self.center) / self.width
            return a / math.cosh(x)
        if self.envelope == "smooth_step":
            x = (t - self.center) / self.width
            return a / (1.0 + math.exp(-2.0 * x))
        return float(_spline_fit(self.samples)(t))

    def envelope_derivs(self, t: float) -> tuple[float, Derivs4]:
        """Envelope value and its first four derivatives."""
        a = self.omega_peak
        if self.envelope == "constant":
            return a, (0.0, 0.0, 0.0, 0.0)
        tau = self.width
        x = t - self.center
        if self.envelope == "gaussian":
            om = a * math.exp(-(x / tau) ** 2)
            t2 = tau * tau
            p1 = -2.0 * x / t2
            p2 = (4.0 * x * x - 2.0 * t2) / t2**2
            p3 = (12.0 * x * t2 - 8.0 * x**3) / t2**3
            p4 = (12.0 * t2 * t2 - 48.0 * x * x * t2 + 16.0 * x**4) / t2**4
            return om, (om * p1, om * p2, om * p3, om * p4)
        if self.envelope == "sech":
            u = x / tau
            s = 1.0 / math.cosh(u)
            h = math.tanh(u)
            om = a * s
            d1 = -a * s * h / tau
            d2 = a * s * (h * h - s * s) / tau**2
            d3 = a * s * h * (5.0 * s * s - h * h) / tau**3
            d4 = a * s * (5.0 * s**4 - 18.0 * s * s * h * h + h**4) / tau**4
            return om, (d1, d2, d3, d4)
        if self.envelope == "smooth_step":
            u = x / tau
            p = 1.0 / (1.0 + math.exp(-2.0 * u))  # logistic step
            q = p * (1.0 - p)
            r = 1.0 - 2.0 * p
            om = a * p
            d1 = 2.0 * a * q / tau
            d2 = 4.0 * a * q * r / tau**2
            d3 = 8.0 * a * q * (r * r - 2.0 * q) / tau**3
            d4 = 16.0 * a * q * r * (r * r - 8.0 * q) / tau**4
            return om, (d1, d2, d3, d4)
        spline = _spline_fit(self.samples)
        return float(spline(t)), tuple(
            float(spline.derivative(n)(t)) for n in range(1, 5)
        )

    # -- phase -------------------------------------------------------------

    def phase_value(self, t: float) -> float:
        if self.phase == "none":
            return 0.0
        x = t - self.center
        if self.phase == "linear_chirp":
            return 0.5 * self.chirp_rate * x * x
        return sum(c * x**k for k, c in enumerate(self.phase_coeffs))

    def phase_derivs(self, t: float) -> tuple[float, Derivs4]:
        if self.phase == "none":
            return 0.0, (0.0, 0.0, 0.0, 0.0)
        x = t - self.center
        if self.phase == "linear_chirp":
            b = self.chirp_rate
            return 0.5 * b * x * x, (b * x, b, 0.0, 0.0)
        coeffs = self.phase_coeffs
        out = []
        for n in range(5):
            acc = 0.0
            for k in range(n, len(coeffs)):
                acc += coeffs[k] * math.perm(k, n) * x ** (k - n)
            out.append(acc)
        return out[0], tuple(out[1:])

    def delta_phi(self, t: float) -> float:
        """Accumulated drive-frame phase detuning*t - phi(t)."""
        return self.detuning * t - self.phase_value(t)

    def support_window(self, spans: float = 5.0) -> tuple[float, float]:
        """Default simulation window, |t - center| <= spans * width."""
        if self.envelope == "constant":
            raise ValueError("constant envelope has no natural window")
        if self.envelope == "spline":
            times = self.samples[0]
            return times[0], times[-1]
        return self.center - spans * self.width, self.center + spans * self.width

    def anchor_time(self) -> float:
        """Earliest time where the envelope reaches the anchor level.

        Closed-form for gaussian/sech/smooth_step; grid starts before this
        point are rejected by the closed-form solution assembly.
        """
        if self.envelope == "constant":
            return -math.inf
        lvl = self.anchor
        if self.envelope == "gaussian":
            return self.center - self.width * math.sqrt(-math.log(lvl))
        if self.envelope == "sech":
            return self.center - self.width * math.acosh(1.0 / lvl)
        if self.envelope == "smooth_step":
            return self.center - 0.5 * self.width * math.log(1.0 / lvl - 1.0)
        times, values = self.samples
        peak = max(values)
        for tt, vv in zip(times, values):
            if vv >= lvl * peak:
                return tt
        return times[0]


@functools.lru_cache(maxsize=32)
def _spline_fit(samples):
    from scipy.interpolate import make_interp_spline

    times, values = samples
    return make_interp_spline(np.asarray(times), np.asarray(values), k=5)


@dataclass(frozen=True)
class FieldSample:
    """All field quantities at one instant.

    ``omega_d``/``phi_d`` hold derivatives of order 1..4, ``log_d`` holds
    derivatives of order 1..3 of the envelope log-derivative
    L = (d/dt omega)/omega.
    """

    t: float
    omega: float
    omega_d: Derivs4
    phi: float
    phi_d: Derivs4
    log_deriv: float
    log_d: tuple[float, float, float]
    detuning: float
    delta_phi: float
    lower_trust: bool = dc_field(default=False, compare=False)


def sample(pulse: PulseSpec, t: float) -> FieldSample:
    """Evaluate the field and all contracted derivatives at time t.

    Raises
    ------
    EnvelopeUnderflowError
        If the envelope is below ``pulse.floor * omega_peak`` (the
        log-derivative is undefined or numerically meaningless there).
    """
    omega, om_d = pulse.envelope_derivs(t)
    floor = pulse.floor * pulse.omega_peak
    if omega < floor or omega <= 0.0:
        raise EnvelopeUnderflowError(t, omega, floor)
    phi, phi_d = pulse.phase_derivs(t)

    # derivatives of log(omega) from the envelope derivatives; exact algebra
    m1 = om_d[0] / omega
    m2 = om_d[1] / omega
    m3 = om_d[2] / omega
    m4 = om_d[3] / omega
    l1 = m2 - m1 * m1
    l2 = m3 - 3.0 * m1 * m2 + 2.0 * m1**3
    l3 = m4 - 4.0 * m1 * m3 - 3.0 * m2 * m2 + 12.0 * m1 * m1 * m2 - 6.0 * m1**4

    return FieldSample(
        t=t,
        omega=omega,
        omega_d=om_d,
        phi=phi,
        phi_d=phi_d,
        log_deriv=m1,
        log_d=(l1, l2, l3),
        detuning=pulse.detuning,
        delta_phi=pulse.detuning * t - phi,
        lower_trust=(pulse.envelope == "spline"),
    )


# 4th-order central first-derivative stencil, offsets (-2, -1, 1, 2)
_STENCIL = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)


def verify_derivatives(
    pulse: PulseSpec,
    grid,
    order: int = 4,
    step: float | None = None,
) -> float:
    """Cross-check analytic derivatives against central finite differences.

    For each derivative order n <= `order` and each of the envelope, phase
    and log-derivative chains, the analytic n-th derivative is compared
    against a 4th-order central difference of the analytic (n-1)-th
    derivative.  Deviations are normalized by the largest magnitude of the
    analytic n-th derivative over the grid (pointwise normalization is
    meaningless at derivative zeros); for identically-zero chains the raw
    deviation is returned.

    Returns the worst normalized deviation over all orders and quantities.
    """
    if order < 1 or order > 4:
        raise ValueError("order must be in 1..4")
    grid = np.asarray(grid, dtype=float)
    if grid.size < 3:
        raise ValueError("grid needs at least 3 points")
    if step is None:
        scale = pulse.width if pulse.width else (grid[-1] - grid[0])
        step = 1e-3 * scale

    def chains(t: float) -> dict[str, list[float]]:
        s = sample(pulse, t)
        return {
            "omega": [s.omega, *s.omega_d],
            "phi": [s.phi, *s.phi_d],
            "log": [s.log_deriv, *s.log_d],
        }

    names = ("omega", "phi", "log")
    ana: dict[tuple[str, int], list[float]] = {}
    fd: dict[tuple[str, int], list[float]] = {}
    value_scale = {name: 0.0 for name in names}
    for t in grid:
        here = chains(t)
        offs = [chains(t + k * step) for k in (-2.0, -1.0, 1.0, 2.0)]
        for name in names:
            value_scale[name] = max(value_scale[name], abs(here[name][0]))
            depth = len(here[name])  # log chain is one shorter
            for n in range(1, min(order + 1, depth)):
                est = sum(w * o[name][n - 1] for w, o in zip(_STENCIL, offs)) / step
                ana.setdefault((name, n), []).append(here[name][n])
                fd.setdefault((name, n), []).append(est)

    # an analytically-zero chain must not be normalized by its own roundoff;
    # each order inherits at least the previous order's scale over the
    # characteristic time from which the step was derived
    char_time = step * 1e3
    worst = 0.0
    for name in names:
        scale = value_scale[name]
        for n in range(1, order + 1):
            if (name, n) not in ana:
                continue
            a = np.asarray(ana[(name, n)])
            f = np.asarray(fd[(name, n)])
            scale = max(np.max(np.abs(a)), scale / char_time)
            dev = np.max(np.abs(a - f))
            worst = max(worst, dev / scale if scale > 0 else dev)
    return float(worst)
