"""Lumped-circuit antenna model for photon absorption at a Josephson junction.

The qubit pads seen from the junction are a series capacitor C0 followed by
two parallel RLC resonators (fundamental and first higher-order mode). The
junction is a resistor R_n shunted by C_J. Photons at ``f* = 2 Delta / h``
break Cooper pairs; the fraction of incident power delivered to the junction
is the coupling efficiency ``e_c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from os import PathLike

import numpy as np
from scipy import integrate

from .units import FREE_SPACE_IMPEDANCE, UEV_TO_HZ, h, k_B

__all__ = [
    "EquivCircuit",
    "JunctionParams",
    "GapFrequencies",
    "ImpedanceTable",
    "DEFAULT_CIRCUIT",
    "FREE_SPACE_IMPEDANCE",
    "z_rad",
    "z_junction",
    "coupling_efficiency",
    "pair_breaking_frequency",
    "predict_parity_rate",
    "folded_dipole_impedance",
    "efficiency_map",
    "integrated_efficiency",
    "read_impedance_table",
]


def _positive(**kw):
    for name, val in kw.items():
        if not (val > 0 and math.isfinite(val)):
            raise ValueError(f"{name} must be finite and > 0, got {val}")


@dataclass(frozen=True)
class EquivCircuit:
    """Series C0 plus two parallel RLC branches (SI units)."""

    c0_f: float
    r1_ohm: float
    l1_h: float
    c1_f: float
    r2_ohm: float
    l2_h: float
    c2_f: float

    def __post_init__(self):
        _positive(**self.__dict__)

    def mode_frequencies(self) -> tuple[float, float]:
        """Parallel-resonance frequencies 1/(2 pi sqrt(L C)) of the two branches."""
        return (
            1 / (2 * math.pi * math.sqrt(self.l1_h * self.c1_f)),
            1 / (2 * math.pi * math.sqrt(self.l2_h * self.c2_f)),
        )


DEFAULT_CIRCUIT = EquivCircuit(
    c0_f=15e-15, r1_ohm=40.0, l1_h=5.3e-12, c1_f=17e-15, r2_ohm=130.0, l2_h=2e-12, c2_f=10e-15
)


@dataclass(frozen=True)
class JunctionParams:
    rn_ohm: float
    cj_f: float

    def __post_init__(self):
        _positive(rn_ohm=self.rn_ohm, cj_f=self.cj_f)

    @property
    def tau_s(self) -> float:
        return self.rn_ohm * self.cj_f


@dataclass(frozen=True)
class GapFrequencies:
    """Superconducting gaps at the junction leads and in the pads (ueV)."""

    delta_junction_uev: float
    delta_pad_uev: float

    def __post_init__(self):
        if not (self.delta_junction_uev > self.delta_pad_uev > 0):
            raise ValueError("require delta_junction_uev > delta_pad_uev > 0")

    @property
    def delta_hz(self) -> float:
        return self.delta_junction_uev * UEV_TO_HZ

    @property
    def delta0_hz(self) -> float:
        return self.delta_pad_uev * UEV_TO_HZ


def z_rad(circuit: EquivCircuit, f):
    """Radiation impedance of the pads as seen from the junction (ohm)."""
    f = np.asarray(f, dtype=float)
    if np.any(~(f > 0)):
        raise ValueError("frequency must be > 0")
    w = 2 * np.pi * f
    z = 1 / (1j * w * circuit.c0_f)
    for r, l, c in (
        (circuit.r1_ohm, circuit.l1_h, circuit.c1_f),
        (circuit.r2_ohm, circuit.l2_h, circuit.c2_f),
    ):
        z = z + 1 / (1 / r + 1j * w * c + 1 / (1j * w * l))
    z = np.asarray(z)
    return z if z.ndim else complex(z)


def z_junction(j: JunctionParams, f):
    """Junction impedance ``R_n (1 - j w tau) / (1 + w^2 tau^2)``."""
    f = np.asarray(f, dtype=float)
    if np.any(~(f > 0)):
        raise ValueError("frequency must be > 0")
    wt = 2 * np.pi * f * j.tau_s
    z = j.rn_ohm * (1 - 1j * wt) / (1 + wt**2)
    z = np.asarray(z)
    return z if z.ndim else complex(z)


def coupling_efficiency(z_rad, z_j):
    """Power-transfer efficiency ``4 R_rad R_J / |Z_rad + Z_J|^2``.

    Symmetric in its arguments and equal to 1 exactly at conjugate match.
    """
    zr = np.asarray(z_rad, dtype=complex)
    zj = np.asarray(z_j, dtype=complex)
    if np.any(zr.real < 0) or np.any(zj.real < 0):
        raise ValueError("impedances must have non-negative real part")
    den = np.abs(zr + zj) ** 2
    if np.any(den == 0):
        raise ZeroDivisionError("Z_rad + Z_J vanishes; efficiency undefined")
    out = 4 * zr.real * zj.real / den
    return out if out.ndim else float(out)


def pair_breaking_frequency(gaps: GapFrequencies) -> float:
    """``f* = 2 Delta / h`` in Hz, from the junction-lead gap."""
    return 2 * gaps.delta_hz


def predict_parity_rate(ec_star, gamma_conv: float):
    """Photon-assisted parity-switching rate ``gamma * e_c(f*)`` in Hz."""
    ec_star = np.asarray(ec_star, dtype=float)
    if np.any((ec_star < 0) | (ec_star > 1)):
        raise ValueError("efficiency must lie in [0, 1]")
    if not gamma_conv > 0:
        raise ValueError("gamma_conv must be > 0")
    out = gamma_conv * ec_star
    return out if out.ndim else float(out)


def folded_dipole_impedance(z_t, z_d):
    """Folded-dipole input impedance ``4 Z_t Z_d / (Z_t + 2 Z_d)``.

    ``z_t`` is the shorted-stub impedance of one folded arm and ``z_d`` that
    of a plain dipole. The dual slot follows as ``Z_fs = Z0**2 / Z_fd`` with
    ``Z0 = FREE_SPACE_IMPEDANCE``, and the paired slot seen by the junction as
    ``2 Z_fs``.
    """
    z_t = np.asarray(z_t, dtype=complex)
    z_d = np.asarray(z_d, dtype=complex)
    den = z_t + 2 * z_d
    if np.any(den == 0):
        raise ZeroDivisionError("Z_t + 2 Z_d vanishes (pole)")
    out = 4 * z_t * z_d / den
    return out if out.ndim else complex(out)


def efficiency_map(rn_ohm, cj_f, circuit, f: float, table: "ImpedanceTable | None" = None):
    """Coupling efficiency on a (R_n, C_J) grid.

    Returns an array of shape ``(len(rn_ohm), len(cj_f))``. The antenna side
    comes from ``circuit`` unless an impedance ``table`` is given.
    """
    rn = np.atleast_1d(np.asarray(rn_ohm, dtype=float))
    cj = np.atleast_1d(np.asarray(cj_f, dtype=float))
    if np.any(rn <= 0) or np.any(cj <= 0):
        raise ValueError("grid values must be positive")
    zr = table(f) if table is not None else z_rad(circuit, f)
    wt = 2 * np.pi * f * rn[:, None] * cj[None, :]
    zj = rn[:, None] * (1 - 1j * wt) / (1 + wt**2)
    return coupling_efficiency(zr, zj)


def integrated_efficiency(
    circuit: EquivCircuit, j: JunctionParams, f_star: float, t_rad_k: float, span: float = 40.0
) -> float:
    """Efficiency averaged over photon energies above ``f_star``.

    Photons are weighted by ``exp(-h f / k_B T_rad)``; the weight is
    normalised over ``[f_star, f_star + span * k_B T_rad / h]``.
    """
    _positive(f_star=f_star, t_rad_k=t_rad_k, span=span)
    ft = k_B * t_rad_k / h
    hi = f_star + span * ft

    def weight(f):
        return math.exp(-(f - f_star) / ft)

    def integrand(f):
        return coupling_efficiency(z_rad(circuit, f), z_junction(j, f)) * weight(f)

    num, _ = integrate.quad(integrand, f_star, hi, limit=400, epsrel=1e-10)
    den = ft * (1 - math.exp(-span))
    return num / den


@dataclass(frozen=True)
class ImpedanceTable:
    """Tabulated antenna impedance with linear interpolation in frequency."""

    freq_hz: np.ndarray
    z_ohm: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.freq_hz, dtype=float)
        if f.ndim != 1 or f.size < 2 or np.any(np.diff(f) <= 0):
            raise ValueError("impedance table needs >= 2 strictly increasing frequencies")
        if len(self.z_ohm) != f.size:
            raise ValueError("frequency and impedance columns differ in length")

    def __call__(self, f):
        f = np.asarray(f, dtype=float)
        lo, hi = self.freq_hz[0], self.freq_hz[-1]
        if np.any((f < lo) | (f > hi)):
            raise ValueError(f"frequency outside table range [{lo:g}, {hi:g}] Hz")
        z = np.interp(f, self.freq_hz, self.z_ohm.real) + 1j * np.interp(
            f, self.freq_hz, self.z_ohm.imag
        )
        z = np.asarray(z)
        return z if z.ndim else complex(z)


def read_impedance_table(path: str | PathLike) -> ImpedanceTable:
    """Read ``frequency_hz, re_ohm[, im_ohm]`` rows (tab, comma or space separated).

    A header line is allowed; lines starting with ``#`` are ignored.
    """
    rows = []
    first = True
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.replace(",", " ").split()
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                if first:
                    first = False
                    continue  # header
                raise ValueError(f"{path}:{lineno}: non-numeric field") from None
            first = False
            if len(vals) not in (2, 3):
                raise ValueError(f"{path}:{lineno}: expected 2 or 3 columns, got {len(vals)}")
            rows.append(vals if len(vals) == 3 else vals + [0.0])
    if not rows:
        raise ValueError(f"{path}: no data rows")
    a = np.array(rows)
    return ImpedanceTable(a[:, 0], a[:, 1] + 1j * a[:, 2])
