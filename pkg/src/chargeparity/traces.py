"""Charge-parity telegraph traces: simulation, cleanup and rate estimation.

Convention: ``Gamma_P`` is the per-direction rate of a symmetric two-state
Markov chain. The mean rate of observed switches equals ``Gamma_P``, the
autocorrelation is ``exp(-2 Gamma_P tau)`` and the one-sided spectrum of a
+-1 trace is the Lorentzian ``A 4 Gamma / ((2 Gamma)^2 + (2 pi f)^2)`` with
``A = 2``, whose knee sits at ``f = Gamma_P / pi``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .numerics import FitError, FitProblem, Parameter, RngStream, SingularJacobianError, levmar_fit, periodogram


class KneeOutsideBandWarning(UserWarning):
    """Lorentzian corner frequency is not inside the fitted band."""


class UnimodalWarning(UserWarning):
    """Two-level classification requested on data without two clear levels."""


class ShortTraceWarning(UserWarning):
    """Autocorrelation lags extend beyond a tenth of the record length."""


@dataclass
class TelegraphTrace:
    dt_s: float
    samples: np.ndarray
    origin: str = "simulated"

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if not self.dt_s > 0:
            raise ValueError("dt_s must be > 0")
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError("samples must be a nonempty 1-D sequence")
        if self.origin not in ("simulated", "measured"):
            raise ValueError("origin must be 'simulated' or 'measured'")

    @property
    def duration_s(self) -> float:
        return self.samples.size * self.dt_s

    @property
    def times_s(self) -> np.ndarray:
        return np.arange(self.samples.size) * self.dt_s

    @property
    def is_classified(self) -> bool:
        return bool(np.all(np.abs(self.samples) == 1))


@dataclass
class PsdEstimate:
    """One-sided PSD.

    ``dt_s`` and ``n_samples`` describe the record each periodogram came
    from; they are ``None`` for spectra of unknown provenance.
    """

    frequencies: np.ndarray
    power: np.ndarray
    n_averages: int
    dt_s: float | None = None
    n_samples: int | None = None


@dataclass
class RtsFit:
    gamma_p_hz: float
    amplitude: float
    offset: float
    covariance: np.ndarray
    gamma_err: float = math.nan
    warnings: list[str] = field(default_factory=list)

    @property
    def tp_s(self) -> float:
        return 1.0 / self.gamma_p_hz


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, RngStream):
        return seed.generator()
    return RngStream(int(seed)).generator()


# ---------------------------------------------------------------------------
# Simulation


def _switch_times(rng: np.random.Generator, gamma: float, duration: float) -> np.ndarray:
    if gamma == 0:
        return np.empty(0)
    # draw in chunks so the expected count is covered in one pass
    mean_n = gamma * duration
    chunk = int(mean_n + 6 * math.sqrt(mean_n) + 16)
    times = np.cumsum(rng.exponential(1 / gamma, chunk))
    while times[-1] <= duration:
        more = times[-1] + np.cumsum(rng.exponential(1 / gamma, chunk))
        times = np.concatenate([times, more])
    return times[times <= duration]


def simulate_switch_times(gamma_p_hz: float, duration_s: float, seed) -> np.ndarray:
    """Switch instants of the continuous-time chain on ``[0, duration_s]``.

    Dwell times between consecutive switches are i.i.d. ``Exp(gamma_p_hz)``.
    """
    if gamma_p_hz < 0 or not duration_s > 0:
        raise ValueError("need gamma_p_hz >= 0 and duration_s > 0")
    rng = _rng(seed)
    rng.integers(2)  # same draw order as simulate_rts
    return _switch_times(rng, gamma_p_hz, duration_s)


def simulate_rts(gamma_p_hz: float, duration_s: float, dt_s: float, seed) -> TelegraphTrace:
    """Sample a symmetric random telegraph signal with values +-1.

    The initial state is drawn from the stationary distribution, so the
    process is stationary from the first sample. ``seed`` is an integer or
    an :class:`RngStream`; equal seeds give bit-identical traces.
    """
    if gamma_p_hz < 0:
        raise ValueError("gamma_p_hz must be >= 0")
    if not (dt_s > 0 and duration_s >= dt_s):
        raise ValueError("need 0 < dt_s <= duration_s")
    if gamma_p_hz * dt_s >= 0.1:
        raise ValueError(f"gamma_p*dt = {gamma_p_hz * dt_s:.3g} >= 0.1; sampling too coarse")
    rng = _rng(seed)
    s0 = 1.0 if rng.integers(2) else -1.0
    n = int(round(duration_s / dt_s))
    sw = _switch_times(rng, gamma_p_hz, n * dt_s)
    flips = np.searchsorted(sw, np.arange(n) * dt_s, side="right")
    samples = np.where(flips % 2 == 0, s0, -s0)
    return TelegraphTrace(dt_s, samples, "simulated")


def simulate_ensemble(gamma_p_hz, duration_s, dt_s, n_traces, seed) -> Iterable[TelegraphTrace]:
    """Lazily yield ``n_traces`` independent traces, one random stream each."""
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    for i in range(n_traces):
        yield simulate_rts(gamma_p_hz, duration_s, dt_s, RngStream(seed, i))


def inject_readout_noise(
    trace: TelegraphTrace,
    gaussian_sigma: float,
    excitation_prob: float,
    seed=0,
    outlier_level: float = 3.0,
) -> TelegraphTrace:
    """Add white Gaussian noise and random jumps to an outlier level.

    Each sample is independently replaced by ``outlier_level`` with
    probability ``excitation_prob`` (after the Gaussian noise is added).
    """
    if gaussian_sigma < 0:
        raise ValueError("sigma must be >= 0")
    if not 0 <= excitation_prob <= 0.1:
        raise ValueError("excitation_prob must lie in [0, 0.1]")
    rng = _rng(seed)
    x = trace.samples.copy()
    if gaussian_sigma > 0:
        x = x + gaussian_sigma * rng.standard_normal(x.size)
    if excitation_prob > 0:
        x[rng.random(x.size) < excitation_prob] = outlier_level
    return TelegraphTrace(trace.dt_s, x, trace.origin)


# ---------------------------------------------------------------------------
# Cleanup


def moving_median(trace: TelegraphTrace, window: int = 10) -> TelegraphTrace:
    """Sliding median over ``[i - (w-1)//2, i + w//2]``.

    The window shrinks at the ends, so the length is preserved. For an even
    number of points the lower of the two middle values is taken.
    """
    w = int(window)
    if w < 1:
        raise ValueError("window must be >= 1")
    x = trace.samples
    n = x.size
    if w == 1:
        return TelegraphTrace(trace.dt_s, x.copy(), trace.origin)
    left, right = (w - 1) // 2, w // 2
    out = np.empty(n)
    if n >= w:
        win = np.sort(sliding_window_view(x, w), axis=1)
        out[left : n - right] = win[:, (w - 1) // 2]
    edge = [i for i in range(n) if i < left or i >= n - right]
    for i in edge:
        seg = np.sort(x[max(0, i - left) : min(n, i + right + 1)])
        out[i] = seg[(seg.size - 1) // 2]
    return TelegraphTrace(trace.dt_s, out, trace.origin)


def _two_means_split(x):
    """Exact 1-D two-cluster split minimising within-cluster variance."""
    s = np.sort(x)
    n = s.size
    c1 = np.cumsum(s)
    c2 = np.cumsum(s**2)
    k = np.arange(1, n)  # left cluster size
    lm = c1[:-1] / k
    rm = (c1[-1] - c1[:-1]) / (n - k)
    sse = (c2[:-1] - k * lm**2) + ((c2[-1] - c2[:-1]) - (n - k) * rm**2)
    i = int(np.argmin(sse))
    return lm[i], rm[i], max(sse[i], 0.0) / n


def _mixture_separation(x, lo, hi, var, max_iter=200, max_points=20_000):
    """Separation of a two-Gaussian mixture in units of its pooled sigma.

    EM started from the hard two-means split. The hard split of a single
    Gaussian already looks separated (1.6 sigma apart with 0.6 sigma
    spread); the soft mixture collapses towards one component instead.
    """
    if x.size > max_points:
        x = x[:: -(-x.size // max_points)]
    m = np.array([lo, hi])
    v = np.full(2, max(var, 1e-12 * max(1.0, float(np.var(x)))))
    w = np.array([0.5, 0.5])
    for _ in range(max_iter):
        ll = -0.5 * (x[:, None] - m) ** 2 / v - 0.5 * np.log(v) + np.log(w)
        ll -= ll.max(axis=1, keepdims=True)
        r = np.exp(ll)
        r /= r.sum(axis=1, keepdims=True)
        nk = r.sum(axis=0)
        if np.any(nk < 1):
            break
        m_new = (r * x[:, None]).sum(axis=0) / nk
        v = np.maximum((r * (x[:, None] - m_new) ** 2).sum(axis=0) / nk, v * 1e-6)
        w = nk / x.size
        done = np.all(np.abs(m_new - m) < 1e-6 * np.sqrt(v))
        m = m_new
        if done:
            break
    return abs(m[1] - m[0]) / math.sqrt(v.mean())


def classify_parity(raw: TelegraphTrace, threshold: float | str = "auto"):
    """Map an analog parity record to +-1.

    Returns ``(trace, threshold)``. With ``threshold="auto"`` the threshold
    is the midpoint between the means of the best two-cluster split. Samples
    at or above the threshold map to +1. A :class:`UnimodalWarning` is raised
    when the two components of a Gaussian mixture refined from that split
    lie closer than twice their pooled spread.
    """
    x = raw.samples
    if raw.is_classified:
        return TelegraphTrace(raw.dt_s, x.copy(), raw.origin), 0.0
    if threshold == "auto":
        if x.size < 2 or np.ptp(x) == 0:
            warnings.warn("all samples identical; no two levels", UnimodalWarning, stacklevel=2)
            thr = float(x[0])
        else:
            lo, hi, var = _two_means_split(x)
            thr = 0.5 * (lo + hi)
            sep = _mixture_separation(x, lo, hi, var)
            if sep < 2:
                warnings.warn(
                    f"cluster separation {sep:.3g} sigma is below 2 sigma",
                    UnimodalWarning,
                    stacklevel=2,
                )
    else:
        thr = float(threshold)
    out = np.where(x >= thr, 1.0, -1.0)
    return TelegraphTrace(raw.dt_s, out, raw.origin), float(thr)


# ---------------------------------------------------------------------------
# Estimators


def _as_list(traces) -> list[TelegraphTrace]:
    return [traces] if isinstance(traces, TelegraphTrace) else traces


def psd_estimate(traces, concatenate: bool = False, window: str | None = None) -> PsdEstimate:
    """One-sided PSD averaged over traces (Bartlett) or of their concatenation.

    ``traces`` may be a single trace, a list or any iterable (consumed once,
    so long ensembles can be streamed). Normalisation: ``sum(power) * df``
    equals the sample variance.
    """
    if isinstance(traces, TelegraphTrace):
        traces = [traces]
    if concatenate:
        traces = list(traces)
        if not traces:
            raise ValueError("no traces")
        dts = {t.dt_s for t in traces}
        if len(dts) > 1:
            raise ValueError(f"mixed sample intervals: {sorted(dts)}")
        x = np.concatenate([t.samples for t in traces])
        f, p = periodogram(x, traces[0].dt_s, window)
        return PsdEstimate(f, p, 1, traces[0].dt_s, x.size if window is None else None)
    acc = None
    count = 0
    dt = n = None
    for t in traces:
        if dt is None:
            dt, n = t.dt_s, t.samples.size
        elif t.dt_s != dt:
            raise ValueError(f"mixed sample intervals: {dt} and {t.dt_s}")
        elif t.samples.size != n:
            raise ValueError("Bartlett averaging needs equal-length traces; use concatenate")
        f, p = periodogram(t.samples, dt, window)
        acc = p if acc is None else acc + p
        count += 1
    if not count:
        raise ValueError("no traces")
    return PsdEstimate(f, acc / count, count, dt, n if window is None else None)


def lorentzian(f, gamma, amplitude, offset=0.0):
    """RTS spectrum ``A 4 Gamma / ((2 Gamma)^2 + (2 pi f)^2) + B``."""
    f = np.asarray(f, dtype=float)
    return amplitude * 4 * gamma / ((2 * gamma) ** 2 + (2 * np.pi * f) ** 2) + offset


def finite_record_lorentzian(f, gamma, amplitude, dt_s, n_samples, offset=0.0):
    """Expected periodogram of a sampled RTS record of ``n_samples`` points.

    Same parameters as :func:`lorentzian`, but includes the finite record
    (leakage into the lowest bins) and aliasing of the sampled process.
    Exact at the Fourier frequencies ``k / (n dt)``; tends to
    :func:`lorentzian` for ``n -> inf`` and ``dt -> 0``.
    """
    f = np.asarray(f, dtype=float)
    n = int(n_samples)
    rho = math.exp(-2 * gamma * dt_s)
    z = np.exp(-2j * np.pi * f * dt_s)
    rz = rho * z
    s = n * (1 - rho**2) / np.abs(1 - rz) ** 2 - 2 * np.real(rz * (1 - rho**n) / (1 - rz) ** 2)
    p = amplitude * dt_s / n * s
    if n % 2 == 0:
        p = np.where(np.isclose(f * dt_s, 0.5), 0.5 * p, p)
    return p + offset


def _log_bins(f, per_decade):
    idx = np.floor(np.log10(f) * per_decade).astype(int)
    _, inv, counts = np.unique(idx, return_inverse=True, return_counts=True)
    return inv, counts


def fit_lorentzian(
    psd: PsdEstimate,
    fmax: float | None = None,
    bins_per_decade: int = 30,
    fit_offset: bool = True,
    finite_record: bool | None = None,
) -> RtsFit:
    """Fit the RTS Lorentzian plus a white offset to a PSD.

    Bins are averaged on a logarithmic grid and compared in log space, the
    model being averaged over the same bins. ``Gamma``, ``A`` and ``B`` are
    log-parameterised; an offset too small to resolve is fixed at zero and
    a warning recorded.

    With ``finite_record`` (default: whenever ``psd`` carries ``dt_s`` and
    ``n_samples``) the model is the exact expected periodogram of a sampled
    record, see :func:`finite_record_lorentzian`, and the whole band is used.
    Otherwise the continuous Lorentzian is fitted up to ``fmax``, by default
    0.2 of the Nyquist frequency to keep aliasing out.
    """
    f, p = np.asarray(psd.frequencies), np.asarray(psd.power)
    if finite_record is None:
        finite_record = psd.dt_s is not None and psd.n_samples is not None
    if finite_record and (psd.dt_s is None or psd.n_samples is None):
        raise ValueError("finite-record model needs psd.dt_s and psd.n_samples")
    if fmax is None:
        fmax = math.inf if finite_record else 0.2 * (f[-1] + 0.5 * (f[1] - f[0] if f.size > 1 else f[0]))
    sel = (f <= fmax) & (p > 0)
    f, p = f[sel], p[sel]
    inv, counts = _log_bins(f, bins_per_decade)
    nb = counts.size
    if nb < 8:
        raise ValueError(f"only {nb} frequency bins; need >= 8")
    pb = np.bincount(inv, p) / counts
    fb = np.bincount(inv, f) / counts
    wts = np.sqrt(counts)
    notes = []

    def note(msg, category):
        warnings.warn(msg, category, stacklevel=3)
        notes.append(msg)

    # initial guess from the low-frequency plateau and the half-power point
    plateau = float(np.median(pb[: max(3, nb // 20)]))
    below = np.nonzero(pb < plateau / 2)[0]
    f_half = fb[below[0]] if below.size else fb[-1]
    knee_seen = below.size and below[0] >= 2
    if not knee_seen:
        note(f"knee not resolved inside [{fb[0]:.3g}, {fb[-1]:.3g}] Hz", KneeOutsideBandWarning)
    g0 = math.pi * f_half
    a0 = plateau * g0
    b0 = max(float(np.min(pb)) * 0.1, 1e-300)

    if finite_record:
        dt, n = psd.dt_s, psd.n_samples
        if g0 * dt >= 0.5:
            g0 = 0.1 / dt

        def shape(ff, g, a, b):
            return finite_record_lorentzian(ff, g, a, dt, n, b)
    else:
        shape = lorentzian

    def make(with_b):
        params = [
            Parameter("gamma", g0, lower=0.0),
            Parameter("amplitude", a0, lower=0.0),
            Parameter("offset", b0, lower=0.0) if with_b else Parameter("offset", 0.0, vary=False),
        ]

        def residual(v):
            mb = np.bincount(inv, shape(f, v["gamma"], v["amplitude"], v["offset"]), minlength=nb) / counts
            with np.errstate(divide="ignore", invalid="ignore"):
                return wts * (np.log(mb) - np.log(pb))

        return FitProblem(residual, params)

    res = None
    if fit_offset:
        try:
            res = levmar_fit(make(True))
        except SingularJacobianError:
            res = None
        if res is not None and res.values["offset"] < 1e-9 * float(np.min(pb)):
            res = None
        if res is None:
            note("white offset not resolved; fixed at 0", RuntimeWarning)
    if res is None:
        res = levmar_fit(make(False))
    g = res.values["gamma"]
    knee = g / math.pi
    if knee_seen and not fb[0] <= knee <= fb[-1]:
        note(f"fitted knee {knee:.3g} Hz outside [{fb[0]:.3g}, {fb[-1]:.3g}] Hz", KneeOutsideBandWarning)
    return RtsFit(
        gamma_p_hz=g,
        amplitude=res.values["amplitude"],
        offset=res.values["offset"],
        covariance=res.covariance,
        gamma_err=res.errors["gamma"],
        warnings=notes,
    )


@dataclass
class Autocorrelation:
    lags_s: np.ndarray
    values: np.ndarray
    n_traces: int

    def __iter__(self):
        return iter((self.lags_s, self.values))


def _acf_sums(x, maxlag):
    n = x.size
    nfft = 1 << (2 * n - 1).bit_length()
    X = np.fft.rfft(x, nfft)
    return np.fft.irfft(X * np.conj(X), nfft)[: maxlag + 1]


def autocorrelation(traces, max_lag_s: float | None = None) -> Autocorrelation:
    """Normalised autocorrelation ``<P(t) P(t + tau)>`` of +-1 traces.

    Products are averaged over all available pairs at each lag (and over the
    ensemble), without mean removal, so lag 0 is exactly 1 and a constant
    trace gives 1 at every lag. Default maximum lag: a tenth of the trace.
    """
    if isinstance(traces, TelegraphTrace):
        traces = [traces]
    sums = None
    pairs = None
    count = 0
    for t in traces:
        if not t.is_classified:
            raise ValueError("autocorrelation needs a classified +-1 trace")
        n = t.samples.size
        if sums is None:
            dt = t.dt_s
            if max_lag_s is None:
                maxlag = max(1, n // 10)
            else:
                maxlag = int(round(max_lag_s / dt))
                if maxlag > n // 10:
                    warnings.warn("max lag exceeds a tenth of the trace", ShortTraceWarning, stacklevel=2)
            maxlag = min(maxlag, n - 1)
            sums = np.zeros(maxlag + 1)
            pairs = np.zeros(maxlag + 1)
        elif t.dt_s != dt:
            raise ValueError("mixed sample intervals")
        m = min(maxlag, n - 1)
        sums[: m + 1] += _acf_sums(t.samples, m)
        pairs[: m + 1] += n - np.arange(m + 1)
        count += 1
    if not count:
        raise ValueError("no traces")
    vals = sums / pairs
    vals = vals / vals[0]
    return Autocorrelation(np.arange(vals.size) * dt, vals, count)


def fit_exponential(acf: Autocorrelation) -> float:
    """Fit ``exp(-2 Gamma_P tau)`` and return ``Gamma_P`` in Hz.

    Raises
    ------
    ValueError
        If the autocorrelation shows no decay.
    """
    lags, vals = np.asarray(acf.lags_s), np.asarray(acf.values)
    if lags.size < 3 or np.all(vals[1:] >= 1 - 1e-9):
        raise ValueError("autocorrelation does not decay; rate undefined")
    # start from the 1/e crossing or the initial slope
    below = np.nonzero(vals < math.exp(-1))[0]
    if below.size:
        g0 = 0.5 / lags[below[0]]
    else:
        g0 = max(-math.log(max(vals[-1], 1e-3)) / (2 * lags[-1]), 1e-12)

    def residual(v):
        return np.exp(-2 * v["gamma"] * lags) - vals

    try:
        res = levmar_fit(FitProblem(residual, [Parameter("gamma", g0, lower=0.0)]))
    except FitError as exc:
        raise ValueError(f"exponential fit failed: {exc}") from exc
    return res.values["gamma"]


def count_switches(traces) -> float:
    """Sign changes per unit time (Hz), pooled over one or more traces."""
    if isinstance(traces, TelegraphTrace):
        traces = [traces]
    n_sw = 0
    span = 0.0
    for t in traces:
        s = np.sign(t.samples)
        n_sw += int(np.count_nonzero(s[1:] != s[:-1]))
        span += (t.samples.size - 1) * t.dt_s
    if span == 0:
        raise ValueError("need at least two samples")
    return n_sw / span


# ---------------------------------------------------------------------------
# Offset-charge jumps


@dataclass
class JumpCatalog:
    times_s: np.ndarray
    amplitudes_e: np.ndarray
    duration_s: float

    @property
    def count(self) -> int:
        return int(self.times_s.size)

    @property
    def rate_hz(self) -> float:
        return self.count / self.duration_s if self.duration_s > 0 else 0.0


def wrap_charge(dq):
    """Minimal image of a charge difference modulo 1e, in ``[-0.5, 0.5)``."""
    return (np.asarray(dq, dtype=float) + 0.5) % 1.0 - 0.5


def detect_charge_jumps(time_s, ng_e, threshold_e: float = 0.1) -> JumpCatalog:
    """Find jumps in an offset-charge record.

    Consecutive differences are wrapped to ``[-0.5, 0.5)`` e; those with
    ``|dq| > threshold_e`` are events, time-stamped at the later sample.
    """
    t = np.asarray(time_s, dtype=float)
    q = np.asarray(ng_e, dtype=float)
    if t.shape != q.shape or t.ndim != 1:
        raise ValueError("time and offset arrays must be 1-D and equal length")
    if np.any(np.diff(t) < 0):
        raise ValueError("samples must be time ordered")
    if t.size < 2:
        return JumpCatalog(np.empty(0), np.empty(0), 0.0)
    d = wrap_charge(np.diff(q))
    hit = np.abs(d) > threshold_e
    return JumpCatalog(t[1:][hit], d[hit], float(t[-1] - t[0]))


# ---------------------------------------------------------------------------
# Ramsey parity mapping


@dataclass
class RamseyMap:
    drive_hz: float
    tau_s: float
    p_excited_even: float
    p_excited_odd: float

    @property
    def even_to_excited(self) -> bool:
        return self.p_excited_even > self.p_excited_odd

    @property
    def fidelity_even(self) -> float:
        """Probability that an even-parity qubit lands in its assigned state."""
        return self.p_excited_even if self.even_to_excited else 1 - self.p_excited_even

    @property
    def fidelity_odd(self) -> float:
        return 1 - self.p_excited_odd if self.even_to_excited else self.p_excited_odd

    @property
    def discrimination(self) -> float:
        return abs(self.p_excited_even - self.p_excited_odd)


def _rot(theta, phi):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s * np.exp(-1j * phi)], [-1j * s * np.exp(1j * phi), c]])


def ramsey_excited_population(nu_hz: float, drive_hz: float, tau_s: float, phase2: float = -math.pi / 2):
    """Excited population after pi/2 (x) -- free evolution -- pi/2 (phase2).

    Ideal instantaneous pulses in the frame rotating at ``drive_hz``.
    """
    free = np.diag([1.0, np.exp(-2j * np.pi * (nu_hz - drive_hz) * tau_s)])
    psi = _rot(math.pi / 2, phase2) @ free @ _rot(math.pi / 2, 0.0) @ np.array([1.0, 0.0])
    return float(abs(psi[1]) ** 2)


def ramsey_parity_map(omega_e_hz: float, omega_o_hz: float, tau_s: float | None = None) -> RamseyMap:
    """Ramsey sequence that maps charge parity onto the qubit state.

    The drive sits midway between the two parity branches and the free
    evolution ``tau = 1 / (2 |nu_E - nu_O|)`` gives them a relative phase of
    pi. The second pulse is about -y, which sends the higher-frequency
    branch to the excited state.
    """
    if omega_e_hz == omega_o_hz:
        raise ValueError("parity branches are degenerate; no mapping possible")
    drive = 0.5 * (omega_e_hz + omega_o_hz)
    if tau_s is None:
        tau_s = 1 / (2 * abs(omega_e_hz - omega_o_hz))
    return RamseyMap(
        drive,
        tau_s,
        ramsey_excited_population(omega_e_hz, drive, tau_s),
        ramsey_excited_population(omega_o_hz, drive, tau_s),
    )
