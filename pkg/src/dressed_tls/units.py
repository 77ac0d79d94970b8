"""Unit helpers.

All internal quantities are angular frequencies in one consistent unit system
chosen by the caller (typically dimensionless, or rad/ps for spectroscopy
scenarios).  These helpers are the single authority for converting
spectroscopic wavenumbers (cm^-1) into angular frequencies, and for mapping a
spectral bandwidth onto a Gaussian envelope width.
"""

from __future__ import annotations

import math

SPEED_OF_LIGHT_CM_S = 2.99792458e10

#: seconds per supported time unit
_TIME_UNITS = {"s": 1.0, "ns": 1e-9, "ps": 1e-12, "fs": 1e-15}


def _seconds_per_unit(time_unit: str | float) -> float:
    if isinstance(time_unit, str):
        try:
            return _TIME_UNITS[time_unit]
        except KeyError:
            raise ValueError(
                f"unknown time unit {time_unit!r}; use one of {sorted(_TIME_UNITS)} "
                "or a float (seconds per unit)"
            ) from None
    return float(time_unit)


def wavenumber_to_angular(nu_cm: float, time_unit: str | float = "ps") -> float:
    """Convert a wavenumber in cm^-1 to an angular frequency.

    Parameters
    ----------
    nu_cm : float
        Wavenumber in cm^-1.
    time_unit : str or float
        Target time unit ("s", "ns", "ps", "fs") or seconds per unit.

    Returns
    -------
    float
        Angular frequency 2*pi*c*nu in rad per `time_unit`.
    """
    c = SPEED_OF_LIGHT_CM_S * _seconds_per_unit(time_unit)
    return 2.0 * math.pi * c * nu_cm


def angular_to_wavenumber(omega: float, time_unit: str | float = "ps") -> float:
    """Inverse of :func:`wavenumber_to_angular`."""
    c = SPEED_OF_LIGHT_CM_S * _seconds_per_unit(time_unit)
    return omega / (2.0 * math.pi * c)


def gaussian_width_from_bandwidth(
    bandwidth_cm: float,
    time_unit: str | float = "ps",
    convention: str = "intensity_fwhm",
) -> float:
    """Width tau of a transform-limited Gaussian field envelope exp(-(t/tau)^2).

    Parameters
    ----------
    bandwidth_cm : float
        Spectral bandwidth in cm^-1 (an ordinary-frequency width, as quoted in
        spectroscopy).
    convention : str
        "intensity_fwhm" (default): bandwidth is the FWHM of the spectral
        intensity.  "field_fwhm": bandwidth is the FWHM of the spectral field
        amplitude.

    Notes
    -----
    For the envelope exp(-(t/tau)^2) the temporal intensity FWHM is
    tau*sqrt(2 ln 2) and the transform-limited time-bandwidth product (both
    intensity FWHM) is 2 ln 2 / pi, giving tau = sqrt(2 ln 2)/(pi * dnu).
    The field-amplitude spectrum is sqrt(2) wider in FWHM than the intensity
    spectrum.
    """
    if bandwidth_cm <= 0:
        raise ValueError("bandwidth must be positive")
    dnu = SPEED_OF_LIGHT_CM_S * _seconds_per_unit(time_unit) * bandwidth_cm
    if convention == "intensity_fwhm":
        return math.sqrt(2.0 * math.log(2.0)) / (math.pi * dnu)
    if convention == "field_fwhm":
        dnu_int = dnu / math.sqrt(2.0)
        return math.sqrt(2.0 * math.log(2.0)) / (math.pi * dnu_int)
    raise ValueError(f"unknown bandwidth convention {convention!r}")
