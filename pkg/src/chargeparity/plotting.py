"""SVG figures for the command-line reports.

Output is byte-reproducible: fixed hash salt for element ids, text kept as
text (no glyph paths) and no creation date in the metadata.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {
    "svg.hashsalt": "chargeparity",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": "chargeparity"})
    plt.close(fig)


def spectrum_figure(path, ng, even_hz, odd_hz, title=""):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(ng, np.asarray(even_hz) / 1e9, label="even", color="tab:blue")
        ax.plot(ng, np.asarray(odd_hz) / 1e9, label="odd", color="tab:red")
        ax.set_xlabel("offset charge $n_g$ (2e)")
        ax.set_ylabel("$f_{ge}$ (GHz)")
        ax.set_title(title)
        ax.legend()
        _save(fig, path)


def psd_figure(path, f, power, f_fit, model, acf_lags=None, acf=None, gamma_acf=None, title=""):
    with plt.rc_context(_RC):
        ncol = 2 if acf is not None else 1
        fig, axes = plt.subplots(1, ncol, figsize=(4.5 * ncol, 3.5), squeeze=False)
        ax = axes[0, 0]
        ax.loglog(f, power, ".", ms=3, color="0.4", label="data")
        ax.loglog(f_fit, model, color="tab:red", label="Lorentzian fit")
        ax.set_xlabel("frequency (Hz)")
        ax.set_ylabel("PSD (1/Hz)")
        ax.set_title(title)
        ax.legend()
        if acf is not None:
            ax = axes[0, 1]
            ax.plot(acf_lags, acf, color="0.3", label="autocorrelation")
            if gamma_acf is not None:
                ax.plot(acf_lags, np.exp(-2 * gamma_acf * np.asarray(acf_lags)), "--", color="tab:red",
                        label="exponential fit")
            ax.set_xlabel("lag (s)")
            ax.set_ylabel("normalised ACF")
            ax.legend()
        _save(fig, path)


def thermal_figure(path, series, curves, title=""):
    """``series``: {id: (T_K, gamma, sigma)}; ``curves``: {id: (T_K, model)}."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.8))
        for i, (qid, (t, g, s)) in enumerate(series.items()):
            color = f"C{i % 10}"
            ax.errorbar(np.asarray(t) * 1e3, g, yerr=s, fmt="o", ms=3, color=color, label=qid)
            if qid in curves:
                tc, mc = curves[qid]
                ax.plot(np.asarray(tc) * 1e3, mc, color=color)
        ax.set_yscale("log")
        ax.set_xlabel("temperature (mK)")
        ax.set_ylabel(r"$\Gamma_P$ (Hz)")
        ax.set_title(title)
        ax.legend(fontsize=7)
        _save(fig, path)


def density_figure(path, gp0, xqp, labels, g_line, x_line, band=3.0):
    """x_qp versus Gamma_P(0) with the sqrt(g/r) line and a multiplicative band."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.5))
        ax.loglog(gp0, xqp, "o", ms=4, color="tab:blue")
        for x, y, lab in zip(gp0, xqp, labels):
            ax.annotate(lab, (x, y), fontsize=6, xytext=(2, 2), textcoords="offset points")
        ax.loglog(g_line, x_line, color="k")
        ax.loglog(g_line, np.asarray(x_line) * band, "--", color="k")
        ax.loglog(g_line, np.asarray(x_line) / band, "--", color="k")
        ax.set_xlabel(r"$\Gamma_P(0)$ (Hz)")
        ax.set_ylabel(r"$x_{qp}$")
        _save(fig, path)


def antenna_figure(path, f, z, ec, f_star=None, ec_alt=None, title=""):
    with plt.rc_context(_RC):
        fig, (a1, a2) = plt.subplots(2, 1, figsize=(5, 5), sharex=True)
        fg = np.asarray(f) / 1e9
        a1.plot(fg, np.real(z), label="Re $Z_{rad}$")
        a1.plot(fg, np.imag(z), label="Im $Z_{rad}$")
        a1.set_ylabel("impedance (ohm)")
        a1.set_yscale("symlog", linthresh=10)
        a1.legend()
        a1.set_title(title)
        a2.semilogy(fg, ec, label="$e_c$")
        if ec_alt is not None:
            a2.semilogy(fg, ec_alt, label="$e_c$ (comparison)")
        if f_star is not None:
            for a in (a1, a2):
                a.axvline(f_star / 1e9, color="k", ls="--", lw=0.8)
        a2.set_xlabel("frequency (GHz)")
        a2.set_ylabel("coupling efficiency")
        a2.legend()
        _save(fig, path)


def jumps_figure(path, catalogs, threshold):
    """``catalogs``: {qubit_id: JumpCatalog}."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ids = list(catalogs)
        x = np.arange(len(ids))
        ax2 = ax.twinx()
        ax2.bar(x, [catalogs[q].count for q in ids], alpha=0.3, color="tab:gray")
        ax2.set_ylabel("jump count")
        for i, q in enumerate(ids):
            amp = np.abs(catalogs[q].amplitudes_e)
            ax.plot(np.full(amp.size, i), amp, "o", ms=4, color="tab:blue")
        ax.axhline(threshold, color="k", ls="--", lw=0.8)
        ax.set_xticks(x, ids, rotation=45, fontsize=7)
        ax.set_ylabel("|dq| (e)")
        ax.set_ylim(0, 0.55)
        _save(fig, path)


def coherence_figure(path, curves, fits):
    """``curves``: list of DecayCurve; ``fits``: matching list of (t, model)."""
    with plt.rc_context(_RC):
        n = max(len(curves), 1)
        fig, axes = plt.subplots(1, n, figsize=(4.2 * n, 3.3), squeeze=False)
        for ax, c, (tm, m) in zip(axes[0], curves, fits):
            ax.plot(c.times_s * 1e6, c.populations, ".", ms=3, color="0.4")
            ax.plot(np.asarray(tm) * 1e6, m, color="tab:red")
            ax.set_xlabel("time (us)")
            ax.set_ylabel("population")
            ax.set_title(c.kind)
        _save(fig, path)


def nice_log_grid(lo, hi, n):
    return np.logspace(math.log10(lo), math.log10(hi), n)
