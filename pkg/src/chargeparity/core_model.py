"""Parity-resolved Cooper-pair-box spectra.

The Hamiltonian is represented on the integer electron-number lattice

    H = E_C (k - 2 n_g)^2 - (E_J / 2) (|k><k+2| + |k+2><k|),

which splits into an even-k block (even charge parity) and an odd-k block
(odd parity). ``cos(phi/2)`` is half the single-electron hop ``k -> k +- 1``
and therefore couples the two blocks. Offset charge ``n_g`` is in units of 2e.

Each block is tridiagonal and solved with LAPACK (``stemr``). The float64
eigenpairs are then refined with a Rayleigh quotient evaluated in extended
precision, which keeps exponentially small quantities such as the even/odd
ground-state splitting accurate far into the transmon regime.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .numerics import central_difference

PARITIES = ("even", "odd")
MAX_CUTOFF = 2048
LEVEL_RTOL = 1e-9


class CutoffError(RuntimeError):
    """Levels did not converge before the basis reached ``MAX_CUTOFF``."""


class DegeneracyError(ValueError):
    """A requested quantity is ill-defined at a degenerate point."""


@dataclass(frozen=True)
class QubitParams:
    """Cooper-pair-box parameters.

    Parameters
    ----------
    ej_hz, ec_hz : float
        Josephson and charging energies divided by h.
    ng : float
        Offset charge in units of 2e.
    cutoff : int
        Half-width of the electron-number basis around ``2 n_g``. Doubled
        automatically until the requested levels converge.
    """

    ej_hz: float
    ec_hz: float
    ng: float = 0.0
    cutoff: int = 60

    def __post_init__(self):
        if not (self.ej_hz >= 0 and math.isfinite(self.ej_hz)):
            raise ValueError("ej_hz must be finite and >= 0")
        if not (self.ec_hz > 0 and math.isfinite(self.ec_hz)):
            raise ValueError("ec_hz must be finite and > 0")
        if not math.isfinite(self.ng):
            raise ValueError("ng must be finite")
        if int(self.cutoff) != self.cutoff or self.cutoff < 10:
            raise ValueError("cutoff must be an integer >= 10")

    @property
    def ratio(self) -> float:
        return self.ej_hz / self.ec_hz


@dataclass(frozen=True)
class ParitySpectrum:
    even_levels: tuple[float, ...]
    odd_levels: tuple[float, ...]
    ng: float


@dataclass(frozen=True)
class CoupledSystem:
    """Qubit dispersively coupled to a readout resonator (g/2pi and f_r in Hz)."""

    qubit: QubitParams
    g_hz: float
    fr_bare_hz: float

    def __post_init__(self):
        if self.g_hz < 0:
            raise ValueError("g_hz must be >= 0")
        if not self.fr_bare_hz > 0:
            raise ValueError("fr_bare_hz must be > 0")


def _check_parity(parity: str) -> str:
    if parity not in PARITIES:
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    return parity


def _lattice(ng: float, parity: str, cutoff: int):
    """Charge offsets ``k - 2 n_g`` of one parity block.

    The lattice is centred on the even integer nearest ``2 n_g`` so that
    shifting ``n_g`` by one period only relabels basis states.
    """
    center = 2 * round(ng)
    frac = 2 * ng - center
    j = np.arange(-cutoff, cutoff + 1)
    j = j[(j % 2) == (0 if parity == "even" else 1)]
    return j, frac


@lru_cache(maxsize=4096)
def _solve(ej_hz: float, ec_hz: float, ng: float, parity: str, n: int, cutoff: int):
    """Lowest ``n`` eigenpairs of one block; energies in extended precision."""
    j, frac = _lattice(ng, parity, cutoff)
    d = ec_hz * (j - frac) ** 2
    off = np.full(len(j) - 1, -0.5 * ej_hz)
    w, v = eigh_tridiagonal(d, off, select="i", select_range=(0, n - 1), lapack_driver="stemr")

    # Rayleigh-quotient refinement in long double: error is second order in
    # the eigenvector error, so it removes the float64 cancellation floor.
    ld = np.longdouble
    x = v.astype(ld)
    q = j.astype(ld) - ld(2) * ld(ng) + ld(2 * round(ng))
    hx = (ld(ec_hz) * q**2)[:, None] * x
    hx[:-1] -= ld(0.5) * ld(ej_hz) * x[1:]
    hx[1:] -= ld(0.5) * ld(ej_hz) * x[:-1]
    levels = np.einsum("ij,ij->j", x, hx) / np.einsum("ij,ij->j", x, x)

    # fix the sign: largest-magnitude amplitude positive
    idx = np.argmax(np.abs(v), axis=0)
    v = v * np.sign(v[idx, np.arange(v.shape[1])])
    order = np.argsort(levels, kind="stable")
    levels, v = levels[order], v[:, order]
    v.setflags(write=False)
    levels.setflags(write=False)
    return levels, v, j


def _converged(params: QubitParams, parity: str, n: int):
    """Double the basis until the lowest ``n`` levels stop moving."""
    _check_parity(parity)
    cutoff = max(int(params.cutoff), n + 2)
    ej, ec, ng = float(params.ej_hz), float(params.ec_hz), float(params.ng)
    prev = _solve(ej, ec, ng, parity, n, cutoff)
    while True:
        if 2 * cutoff > MAX_CUTOFF:
            raise CutoffError(
                f"levels not converged at cutoff {cutoff}; E_J/E_C={params.ratio:.3g} too large"
            )
        nxt = _solve(ej, ec, ng, parity, n, 2 * cutoff)
        scale = np.maximum(np.abs(nxt[0]), ec)
        if np.all(np.abs(nxt[0] - prev[0]) <= LEVEL_RTOL * scale):
            return cutoff, nxt
        cutoff *= 2
        prev = nxt


def _levels_ld(params: QubitParams, parity: str, k: int):
    if int(k) != k or k < 1:
        raise ValueError("level count must be a positive integer")
    if k > 2 * params.cutoff - 2:
        raise ValueError(f"k={k} exceeds 2*cutoff-2={2 * params.cutoff - 2}")
    return _converged(params, parity, int(k))[1][0]


def eigenlevels(params: QubitParams, parity: str, k: int = 2) -> list[float]:
    """Lowest ``k`` eigenenergies (Hz, ascending) of the given parity block.

    Absolute energies are returned, so with ``E_J = 0`` the even ground state
    at ``n_g = 0`` sits at 0 Hz.
    """
    return [float(x) for x in _levels_ld(params, parity, k)]


def parity_spectrum(params: QubitParams, k: int = 2) -> ParitySpectrum:
    return ParitySpectrum(
        tuple(eigenlevels(params, "even", k)),
        tuple(eigenlevels(params, "odd", k)),
        params.ng,
    )


def transition_frequency(params: QubitParams, parity: str, lower: int = 0, upper: int = 1) -> float:
    """Transition frequency ``level[upper] - level[lower]`` in Hz."""
    levels = _levels_ld(params, parity, max(lower, upper) + 1)
    return float(levels[upper] - levels[lower])


def epsilon0(params: QubitParams) -> float:
    """Even/odd ground-state splitting ``|E_g^O - E_g^E|`` in Hz at ``params.ng``."""
    ge = _levels_ld(params, "even", 1)[0]
    go = _levels_ld(params, "odd", 1)[0]
    return float(abs(go - ge))


def cos_half_phi_element(params: QubitParams) -> float:
    """Matrix element ``|<g^E| cos(phi/2) |g^O>|`` between parity ground states.

    Raises
    ------
    DegeneracyError
        If either ground state is degenerate (e.g. ``E_J = 0`` at ``n_g = 0``).
    """
    cut = 0
    vecs = {}
    for parity in PARITIES:
        c, (levels, _, _) = _converged(params, parity, 2)
        if levels[1] - levels[0] <= 1e-12 * max(params.ec_hz, abs(float(levels[0]))):
            raise DegeneracyError(f"{parity} ground state is degenerate; c0 is ill-defined")
        cut = max(cut, c)
    for parity in PARITIES:
        levels, v, j = _solve(
            float(params.ej_hz), float(params.ec_hz), float(params.ng), parity, 2, 2 * cut
        )
        vecs[parity] = (v[:, 0], j)
    ge, je = vecs["even"]
    go, jo = vecs["odd"]
    # odd site j couples to even sites j-1 and j+1 with amplitude 1/2 each
    full = np.zeros(4 * cut + 3)
    full[je + 2 * cut + 1] = ge
    s = 0.5 * (full[jo + 2 * cut] + full[jo + 2 * cut + 2])
    return float(min(abs(np.dot(go, s)), 1.0))


def charge_dispersion_slope(params: QubitParams, parity: str, step: float = 1e-4) -> float:
    """``d f_ge / d n_g`` in Hz per unit n_g by checked central difference."""
    _check_parity(parity)

    def f(ng):
        return transition_frequency(replace(params, ng=ng), parity)

    d = central_difference(f, params.ng, step, rtol=1e-6)
    if not d.ok:
        warnings.warn(
            f"charge dispersion slope failed the step-halving check at ng={params.ng}",
            RuntimeWarning,
            stacklevel=2,
        )
    return d.value


def dressed_resonator_frequency(sys: CoupledSystem, parity: str, qubit_state: str) -> float:
    """Resonator frequency dressed by a two-level qubit (exact Jaynes-Cummings).

    Parameters
    ----------
    sys : CoupledSystem
    parity : {'even', 'odd'}
        Selects which g-e frequency is used for the qubit.
    qubit_state : {'g', 'e'}

    Raises
    ------
    DegeneracyError
        If ``|f_r - f_ge| <= g``, where resonator and qubit hybridize.
    """
    if qubit_state not in ("g", "e"):
        raise ValueError("qubit_state must be 'g' or 'e'")
    fq = transition_frequency(sys.qubit, parity)
    fr, g = sys.fr_bare_hz, sys.g_hz
    delta = fq - fr
    if abs(delta) <= g:
        raise DegeneracyError(
            f"|f_r - f_ge| = {abs(delta):.4g} Hz is within g = {g:.4g} Hz"
        )
    sgn = math.copysign(1.0, delta)
    d2 = 0.25 * delta**2
    one = math.sqrt(d2 + g**2)
    if qubit_state == "g":
        return fr - sgn * (one - 0.5 * abs(delta))
    return fr + sgn * (math.sqrt(d2 + 2 * g**2) - one)


@dataclass
class SpectrumTable:
    """Transition frequencies sampled on an offset-charge grid.

    ``columns`` maps ``"<parity>_<lower>_<upper>"`` to an array in Hz.
    """

    ng: np.ndarray
    columns: dict[str, np.ndarray] = field(default_factory=dict)


def spectrum_vs_ng(
    params: QubitParams,
    ng_grid: Sequence[float],
    parities: Sequence[str] = PARITIES,
    pairs: Sequence[tuple[int, int]] = ((0, 1),),
) -> SpectrumTable:
    grid = np.atleast_1d(np.asarray(ng_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("ng grid is empty")
    table = SpectrumTable(grid)
    for parity in parities:
        _check_parity(parity)
        for lo, hi in pairs:
            table.columns[f"{parity}_{lo}_{hi}"] = np.array(
                [transition_frequency(replace(params, ng=float(x)), parity, lo, hi) for x in grid]
            )
    return table
