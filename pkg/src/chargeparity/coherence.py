"""Coherence fits and dephasing noise models.

Rates are ordinary frequencies (Hz) unless a name says otherwise; the charge
noise relation converts to angular frequency explicitly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .numerics import FitProblem, FitResult, Parameter, levmar_fit
from .units import h, k_B


@dataclass
class DecayCurve:
    times_s: np.ndarray
    populations: np.ndarray
    kind: str = "relaxation"

    def __post_init__(self):
        self.times_s = np.asarray(self.times_s, dtype=float)
        self.populations = np.asarray(self.populations, dtype=float)
        if self.kind not in ("relaxation", "echo"):
            raise ValueError("kind must be 'relaxation' or 'echo'")
        if self.times_s.shape != self.populations.shape or self.times_s.size < 5:
            raise ValueError("need >= 5 (time, population) pairs")
        if np.any(self.times_s <= 0) or np.any(np.diff(self.times_s) <= 0):
            raise ValueError("times must be positive and increasing")
        if np.any(self.populations < -0.1) or np.any(self.populations > 1.1):
            raise ValueError("populations must lie in [-0.1, 1.1]")


@dataclass
class CoherenceFit:
    """Fitted time constant (``t1_s`` or ``tphi_s``) with amplitude and offset."""

    time_s: float
    time_err: float
    a: float
    b: float
    covariance: np.ndarray
    result: FitResult


def t1_model(t, a, b, t1):
    return a * np.exp(-np.asarray(t) / t1) + b


def echo_model(t, a, b, t1, tphi):
    t = np.asarray(t, dtype=float)
    q = 0.0 if math.isinf(tphi) else 1 / tphi**2
    return a * np.exp(-t / (2 * t1) - q * t**2) + b


def fit_t1(curve: DecayCurve) -> CoherenceFit:
    """Fit ``A exp(-t/T1) + B``.

    T1 starts from a log-linear regression of ``population - min`` and is
    log-parameterised.

    Raises
    ------
    ValueError
        For a flat curve, where T1 is unbounded.
    """
    t, y = curve.times_s, curve.populations
    if curve.kind != "relaxation":
        raise ValueError("fit_t1 needs a relaxation curve")
    if np.ptp(y) == 0:
        raise ValueError("flat curve: T1 unbounded")
    sign = 1.0 if y[0] >= y[-1] else -1.0
    if sign < 0:
        warnings.warn("population rises with time (negative decay amplitude)", RuntimeWarning, stacklevel=2)
    z = sign * (y - (y.min() if sign > 0 else y.max()))
    ok = z > 0.05 * np.max(z)
    slope = np.polyfit(t[ok], np.log(z[ok]), 1)[0] if ok.sum() >= 2 else -1 / np.median(t)
    t1_0 = -1 / slope if slope < 0 else t[-1]
    b0 = float(y[-1])
    a0 = float(y[0] - b0) * math.exp(t[0] / t1_0)

    def residual(v):
        return t1_model(t, v["a"], v["b"], v["t1"]) - y

    res = levmar_fit(FitProblem(residual, [
        Parameter("a", a0), Parameter("b", b0), Parameter("t1", t1_0, lower=0.0),
    ]))
    v = res.values
    if v["t1"] > 1e3 * t[-1]:
        raise ValueError("T1 not constrained by the data (decay too slow)")
    return CoherenceFit(v["t1"], res.errors["t1"], v["a"], v["b"], res.covariance, res)


def fit_echo(curve: DecayCurve, t1_s: float) -> CoherenceFit:
    """Fit ``A exp(-t/2T1 - (t/T_phi)^2) + B`` with ``T1`` held fixed.

    The Gaussian rate ``1/T_phi^2`` is fitted linearly, so data without
    Gaussian dephasing give a rate consistent with zero and ``T_phi = inf``.
    The reported ``time_err`` is propagated from the rate.
    """
    t, y = curve.times_s, curve.populations
    if curve.kind != "echo":
        raise ValueError("fit_echo needs an echo curve")
    if not t1_s > 0:
        raise ValueError("t1_s must be > 0")
    b0 = float(y[-1])
    a0 = float(y[0] - b0)
    # half-decay time of (y - B)/A fixes the starting Gaussian rate
    frac = (y - b0) / a0 if a0 != 0 else np.ones_like(y)
    half = np.nonzero(frac < 0.5)[0]
    th = t[half[0]] if half.size else t[-1]
    q0 = max((math.log(2) - th / (2 * t1_s)) / th**2, 0.0)
    qs = 1 / t[-1] ** 2  # internal scale keeps the parameter O(1)

    def residual(v):
        return v["a"] * np.exp(-t / (2 * t1_s) - v["q"] * qs * t**2) + v["b"] - y

    res = levmar_fit(FitProblem(residual, [
        Parameter("a", a0), Parameter("b", b0), Parameter("q", q0 / qs),
    ]))
    q, dq = res.values["q"] * qs, res.errors["q"] * qs
    tphi = 1 / math.sqrt(q) if q > 0 else math.inf
    terr = 0.5 * dq / q**1.5 if q > 0 else math.inf
    return CoherenceFit(tphi, terr, res.values["a"], res.values["b"], res.covariance, res)


@dataclass(frozen=True)
class ResonatorParams:
    """Readout resonator: linewidth kappa/2pi, dispersive shift chi/2pi, frequency."""

    kappa_hz: float
    chi_hz: float
    fr_hz: float

    def __post_init__(self):
        if not (self.kappa_hz > 0 and self.chi_hz > 0 and self.fr_hz > 0):
            raise ValueError("kappa, chi and f_r must be > 0")


def bose_einstein(fr_hz, T):
    """Thermal occupation ``1 / (exp(h f / k_B T) - 1)``."""
    T = np.asarray(T, dtype=float)
    if np.any(~(T > 0)) or not fr_hz > 0:
        raise ValueError("need T > 0 and f > 0")
    x = h * fr_hz / (k_B * T)
    # exp(-x) / (1 - exp(-x)) underflows quietly instead of overflowing
    out = np.exp(-x) / -np.expm1(-x)
    return out if out.ndim else float(out)


def dephasing_prefactor(res: ResonatorParams) -> float:
    """``kappa^2/(kappa^2 + 4 chi^2) * 4 chi^2 / kappa`` in the units of kappa."""
    k, c = res.kappa_hz, res.chi_hz
    return k**2 / (k**2 + 4 * c**2) * 4 * c**2 / k


def thermal_photon_dephasing(res: ResonatorParams, T):
    """Dephasing rate from thermal photons in the readout resonator.

    kappa and chi enter as ordinary frequencies; the prefactor is a ratio
    times a rate, so the result is in the same units as kappa.
    """
    out = dephasing_prefactor(res) * np.asarray(bose_einstein(res.fr_hz, T))
    return out if out.ndim else float(out)


def echo_rate_from_charge_noise(amp_e2: float, slope_hz_per_ng: float) -> float:
    """Echo dephasing rate (1/s) for 1/f charge noise ``S_q = A / f``.

    ``Gamma_phi = sqrt(A ln 2) |d omega / d q|``, with ``q = 2 n_g`` in
    electrons and ``omega = 2 pi f_ge``.
    """
    dw_dq = 2 * math.pi * slope_hz_per_ng / 2
    return math.sqrt(amp_e2 * math.log(2)) * abs(dw_dq)


def charge_noise_amplitude(tphi_s: float, slope_hz_per_ng: float) -> float:
    """1/f charge-noise amplitude at 1 Hz (e^2/Hz) from an echo ``T_phi``.

    Inverse of :func:`echo_rate_from_charge_noise`.

    Raises
    ------
    ValueError
        At a sweet spot (zero slope), where first-order charge noise
        does not dephase.
    """
    if slope_hz_per_ng == 0:
        raise ValueError("zero charge dispersion slope: amplitude not identifiable")
    if not tphi_s > 0:
        raise ValueError("tphi_s must be > 0")
    dw_dq = 2 * math.pi * slope_hz_per_ng / 2
    return (1 / (tphi_s * dw_dq)) ** 2 / math.log(2)
