"""Quasiparticle thermodynamics and the temperature dependence of parity switching.

Energies enter as ueV (gaps, chemical potential) or Hz (E_J, eps_0) at the
interface and are converted to joules before forming ratios. The kernel is
built from exponentially scaled Bessel functions, so ``cosh(x) K_1(x)`` is
finite for every ``x`` and the ``exp(-(Delta - mu)/kT)`` suppression can
underflow to zero without ever meeting an infinity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .antenna import GapFrequencies
from .numerics import FitProblem, FitResult, Parameter, SingularJacobianError, bessel_k0e, bessel_k1e, levmar_fit
from .units import UEV, UEV_TO_HZ, h, k_B

NU0 = 0.73e47
"""Single-spin density of states at the Fermi level of Al, J^-1 m^-3."""

DELTA0_UEV = 180.0
"""Bulk-like gap of thick Al pads."""

RECOMB_RATE = 1 / 120e-9
TRAP_RATE = 50.0


class KernelValidityWarning(UserWarning):
    """F(x, y) evaluated outside the range where the approximation holds."""


def _f_kernel(x, y, warn=True):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("F(x, y) requires x > 0")
    if warn and (np.any(y > 0.1) or np.any(x * y > 0.08)):
        warnings.warn("F(x, y) used with y > 0.1 or x*y > 0.08", KernelValidityWarning, stacklevel=3)
    # cosh(x) K_nu(x) = (1 + exp(-2x))/2 * K_nu(x) exp(x): no exponential left over
    return 0.5 * (1 + np.exp(-2 * x)) * (bessel_k1e(x) - x * y * bessel_k0e(x))


def f_kernel(x, y, warn: bool = True):
    """``F(x, y) = cosh(x) [K_1(x) - x y K_0(x)]``.

    Evaluated with exponentially scaled Bessel functions, so it stays finite
    for any ``x > 0``. Emits :class:`KernelValidityWarning` outside
    ``y <= 0.1``, ``x y <= 0.08``; far outside, the bracket turns negative.
    """
    out = _f_kernel(x, y, warn)
    return out if out.ndim else float(out)


def _kt(temperature_k):
    t = np.asarray(temperature_k, dtype=float)
    if np.any(~(t > 0)):
        raise ValueError("temperature must be > 0")
    return k_B * t


def gamma_qp(T, ej_hz, eps0_hz, c0sq, delta_uev, mu_uev, warn: bool = True):
    """Quasiparticle tunnelling rate (Hz) at temperature ``T`` (K).

    Parameters
    ----------
    T : float or array
    ej_hz, eps0_hz : float
        Josephson energy and even/odd ground-state splitting, over h.
    c0sq : float
        Squared ``cos(phi/2)`` matrix element.
    delta_uev, mu_uev : float
        Gap at the junction and effective quasiparticle chemical potential.
    """
    kt = _kt(T)
    delta = delta_uev * UEV
    if not delta > mu_uev * UEV:
        raise ValueError("require delta > mu")
    pref = 16 * ej_hz * h / delta * c0sq * eps0_hz
    x = eps0_hz * h / (2 * kt)
    y = kt / (2 * delta)
    # the activation factor underflows cleanly to 0 while F stays finite
    out = pref * np.exp(-(delta - mu_uev * UEV) / kt) * _f_kernel(x, y, warn)
    return out if out.ndim else float(out)


def xqp_from_mu(T, mu_uev, delta0_uev=DELTA0_UEV):
    """Normalised pad quasiparticle density for chemical potential ``mu``."""
    kt = _kt(T)
    d0 = delta0_uev * UEV
    out = np.sqrt(2 * np.pi * kt / d0) * np.exp(-(d0 - mu_uev * UEV) / kt)
    return out if out.ndim else float(out)


def mu_from_xqp(T, xqp, delta0_uev=DELTA0_UEV):
    """Inverse of :func:`xqp_from_mu`; returns ``mu`` in ueV."""
    kt = _kt(T)
    xqp = np.asarray(xqp, dtype=float)
    if np.any(~(xqp > 0)):
        raise ValueError("x_qp must be > 0 to take its logarithm")
    d0 = delta0_uev * UEV
    mu = d0 + kt * (np.log(xqp) - 0.5 * np.log(2 * np.pi * kt / d0))
    out = mu / UEV
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ThermalModelParams:
    """Parameters of the temperature-dependent parity-switching model.

    ``xqp = 0`` is allowed and switches the thermal term off.
    """

    gp0_hz: float
    xqp: float
    gaps: GapFrequencies
    ej_hz: float
    eps0_hz: float
    c0sq: float

    def __post_init__(self):
        if self.gp0_hz < 0:
            raise ValueError("gp0_hz must be >= 0")
        if not 0 <= self.xqp < 1e-3:
            raise ValueError("xqp must lie in [0, 1e-3)")
        if not 0 <= self.c0sq <= 1:
            raise ValueError("c0sq must lie in [0, 1]")


def _thermal_term(T, ej_hz, eps0_hz, c0sq, delta_j, delta0_j, warn=True):
    """Thermal rate per unit x_qp (Hz); energies in joules."""
    kt = _kt(T)
    pref = 16 * ej_hz * h / delta_j * c0sq * eps0_hz
    x = eps0_hz * h / (2 * kt)
    y = kt / (2 * delta_j)
    act = np.exp(-(delta_j - delta0_j) / kt) * np.sqrt(delta0_j / (2 * np.pi * kt))
    return pref * act * _f_kernel(x, y, warn)


def gamma_p_of_T(T, params: ThermalModelParams, warn: bool = True):
    """``Gamma_P(T) = Gamma_P(0) + x_qp * (thermal activation term)`` in Hz."""
    g = params.gaps
    term = _thermal_term(
        T, params.ej_hz, params.eps0_hz, params.c0sq,
        g.delta_junction_uev * UEV, g.delta_pad_uev * UEV, warn,
    )
    out = params.gp0_hz + params.xqp * term
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Quasiparticle balance


@dataclass(frozen=True)
class QpBalance:
    """Generation ``g``, trapping ``s = s0 + s_v`` and recombination ``r`` (s^-1)."""

    gen_rate: float
    recomb_rate: float = RECOMB_RATE
    trap_background: float = TRAP_RATE
    trap_vortex: float = 0.0

    def __post_init__(self):
        if min(self.gen_rate, self.recomb_rate, self.trap_background, self.trap_vortex) < 0:
            raise ValueError("rates must be >= 0")

    @property
    def trap_rate(self) -> float:
        return self.trap_background + self.trap_vortex


def generation_rate(gp0_hz, delta0_uev=DELTA0_UEV, volume_um3=4.0):
    """Normalised generation rate ``Gamma_P(0) / (2 nu0 Delta0 V)`` in s^-1."""
    if not volume_um3 > 0:
        raise ValueError("volume must be > 0")
    return gp0_hz / (2 * NU0 * delta0_uev * UEV * volume_um3 * 1e-18)


def steady_state_density(balance: QpBalance) -> float:
    """Non-negative root of ``g - s x - r x^2 = 0``."""
    g, s, r = balance.gen_rate, balance.trap_rate, balance.recomb_rate
    if g == 0:
        return 0.0
    if r == 0 and s == 0:
        raise ValueError("no trapping or recombination: density grows without bound")
    # rationalised root, exact in both the r -> 0 and s -> 0 limits
    return 2 * g / (s + math.sqrt(s * s + 4 * r * g))


# ---------------------------------------------------------------------------
# Global temperature fit


@dataclass
class ThermalSeries:
    """Measured ``Gamma_P`` versus temperature for one qubit.

    The spectral inputs ``ej_hz``, ``eps0_hz`` and ``c0sq`` are fixed during
    fitting. Series with the same ``chip_id`` share the junction gap.
    """

    qubit_id: str
    chip_id: str
    temperature_k: np.ndarray
    gamma_p_hz: np.ndarray
    sigma_hz: np.ndarray
    ej_hz: float
    eps0_hz: float
    c0sq: float

    def __post_init__(self):
        self.temperature_k = np.asarray(self.temperature_k, dtype=float)
        self.gamma_p_hz = np.asarray(self.gamma_p_hz, dtype=float)
        self.sigma_hz = np.asarray(self.sigma_hz, dtype=float)
        n = self.temperature_k.size
        if self.gamma_p_hz.size != n or self.sigma_hz.size != n:
            raise ValueError(f"{self.qubit_id}: column lengths differ")
        if n and (np.any(self.temperature_k <= 0) or np.any(np.diff(self.temperature_k) <= 0)):
            raise ValueError(f"{self.qubit_id}: temperatures must be positive and increasing")
        if np.any(self.gamma_p_hz <= 0) or np.any(self.sigma_hz <= 0):
            raise ValueError(f"{self.qubit_id}: rates and uncertainties must be positive")


@dataclass
class ThermalFit:
    gp0_hz: dict[str, float]
    gp0_err: dict[str, float]
    xqp: dict[str, float]
    xqp_err: dict[str, float]
    delta_hz: dict[str, float]
    delta_err: dict[str, float]
    result: FitResult
    residuals: dict[str, np.ndarray] = field(default_factory=dict)

    def params_for(self, series: ThermalSeries, delta0_uev=DELTA0_UEV) -> ThermalModelParams:
        return ThermalModelParams(
            self.gp0_hz[series.qubit_id],
            max(self.xqp[series.qubit_id], 0.0),
            GapFrequencies(self.delta_hz[series.chip_id] / UEV_TO_HZ, delta0_uev),
            series.ej_hz, series.eps0_hz, series.c0sq,
        )


XQP_UNIT = 1e-7


def fit_thermal_series(
    series_list: Sequence[ThermalSeries],
    delta_init_hz: float | dict[str, float] = 50e9,
    delta0_uev: float = DELTA0_UEV,
    fix_delta: bool = False,
    max_iter: int = 200,
) -> ThermalFit:
    """Weighted log-space fit of ``Gamma_P(T)`` with a gap shared per chip.

    Free parameters: ``Gamma_P(0)`` per qubit (log-parameterised),
    ``x_qp`` per qubit (linear, in units of 1e-7, so zero is reachable) and
    ``Delta`` per chip (bounded below by ``Delta_0``) unless ``fix_delta``.
    Residuals are ``(ln model - ln data) / (sigma / data)``.

    Raises
    ------
    SingularJacobianError
        If a series has fewer than three distinct temperatures.
    """
    if not series_list:
        raise ValueError("no series to fit")
    ids = [s.qubit_id for s in series_list]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate qubit ids")
    for s in series_list:
        if np.unique(s.temperature_k).size < 3:
            raise SingularJacobianError(
                f"{s.qubit_id}: need >= 3 temperatures to separate Gamma_P(0), x_qp and Delta"
            )
    delta0_hz = delta0_uev * UEV_TO_HZ
    delta0_j = delta0_uev * UEV
    chips = sorted({s.chip_id for s in series_list})

    def d_init(chip):
        return delta_init_hz[chip] if isinstance(delta_init_hz, dict) else delta_init_hz

    params = []
    for s in series_list:
        params.append(Parameter(f"gp0:{s.qubit_id}", float(np.min(s.gamma_p_hz)), lower=0.0))
        params.append(Parameter(f"xqp:{s.qubit_id}", 1.0))
    for c in chips:
        d = d_init(c) / 1e9
        if not d > delta0_hz / 1e9:
            raise ValueError(f"initial Delta for chip {c} must exceed Delta_0")
        params.append(Parameter(f"delta:{c}", d, lower=delta0_hz / 1e9, vary=not fix_delta))

    # thermal term is linear in x_qp: precompute nothing, evaluate per call
    def model(s, v):
        dj = v[f"delta:{s.chip_id}"] * 1e9 * h
        term = _thermal_term(s.temperature_k, s.ej_hz, s.eps0_hz, s.c0sq, dj, delta0_j, warn=False)
        return v[f"gp0:{s.qubit_id}"] + v[f"xqp:{s.qubit_id}"] * XQP_UNIT * term

    def residual(v):
        out = []
        for s in series_list:
            m = model(s, v)
            with np.errstate(invalid="ignore", divide="ignore"):
                out.append((np.log(m) - np.log(s.gamma_p_hz)) * s.gamma_p_hz / s.sigma_hz)
        return np.concatenate(out)

    res = levmar_fit(FitProblem(residual, params, max_iter=max_iter))
    v, e = res.values, res.errors
    fit = ThermalFit(
        gp0_hz={s.qubit_id: v[f"gp0:{s.qubit_id}"] for s in series_list},
        gp0_err={s.qubit_id: e[f"gp0:{s.qubit_id}"] for s in series_list},
        xqp={s.qubit_id: v[f"xqp:{s.qubit_id}"] * XQP_UNIT for s in series_list},
        xqp_err={s.qubit_id: e[f"xqp:{s.qubit_id}"] * XQP_UNIT for s in series_list},
        delta_hz={c: v[f"delta:{c}"] * 1e9 for c in chips},
        delta_err={c: e.get(f"delta:{c}", 0.0) * 1e9 for c in chips},
        result=res,
    )
    for s in series_list:
        fit.residuals[s.qubit_id] = s.gamma_p_hz - model(s, v)
    return fit
