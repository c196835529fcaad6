"""Physical constants (CODATA, via scipy) and unit converters."""

from scipy import constants as _c

h = _c.h
hbar = _c.hbar
k_B = _c.k
e = _c.e

UEV = 1e-6 * e
"""One micro-electronvolt in joules."""

UEV_TO_HZ = UEV / h
"""Frequency equivalent of 1 ueV (about 0.2417989 GHz)."""

FREE_SPACE_IMPEDANCE = _c.physical_constants["characteristic impedance of vacuum"][0]


def uev_to_hz(energy_uev):
    return energy_uev * UEV_TO_HZ


def hz_to_uev(freq_hz):
    return freq_hz / UEV_TO_HZ


def uev_to_joule(energy_uev):
    return energy_uev * UEV


def kelvin_to_hz(temperature_k):
    """Thermal energy k_B*T expressed as a frequency."""
    return k_B * temperature_k / h


def kelvin_to_uev(temperature_k):
    return k_B * temperature_k / UEV


def charging_energy_hz(capacitance_f):
    """E_C/h for total capacitance C using the e^2/(2C) convention.

    15 fF gives about 1.29 GHz.
    """
    return e**2 / (2 * capacitance_f) / h
