"""Command-line entry point.

Every command reads an optional JSON run configuration, writes TSV tables,
a ``key = value`` report and SVG figures into the output directory, and
stamps each file with the tool version, the configuration hash and the seed.
Exit codes: 0 success, 2 invalid input, 3 fit did not converge.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import antenna as ant
from . import coherence as coh
from . import core_model as cm
from . import io
from . import plotting
from . import qp_thermo as qt
from . import traces as tr
from .numerics import FitError, RngStream
from .units import UEV_TO_HZ

COMMANDS = ("spectrum", "fit-tp", "simulate-rts", "thermal-fit", "antenna", "jumps", "coherence-fit")

# Allowed keys per section with defaults; ``None`` means "no default".
_SCHEMA: dict[str, dict] = {
    "spectrum": {"ng_min": -1.0, "ng_max": 1.0, "n_points": 201, "ec_ghz": None, "ej_ghz": None},
    "fit_tp": {
        "traces_dir": None,
        "simulate": None,
        "median_window": 0,
        "threshold": "auto",
        "bins_per_decade": 30,
        "max_lag_s": None,
        "cross_check_tolerance": 0.15,
    },
    "simulate_rts": {
        "gamma_p_hz": 0.37,
        "duration_s": 18.0,
        "dt_s": 3e-4,
        "n_traces": 20,
        "readout_sigma": 0.0,
        "outlier_prob": 0.0,
    },
    "thermal_fit": {
        "series_file": None,
        "synthesize": None,
        "delta_init_ghz": 50.0,
        "delta0_uev": qt.DELTA0_UEV,
        "fix_delta": False,
        "volume_um3": 4.0,
    },
    "antenna": {
        "circuit": None,
        "rn_kohm": 30.0,
        "cj_ff": 2.4,
        "f_star_ghz": None,
        "delta_uev": None,
        "gamma_conv_hz": 3e5,
        "f_min_ghz": 20.0,
        "f_max_ghz": 300.0,
        "n_points": 561,
        "impedance_table": None,
        "compare_table": None,
        "t_rad_k": None,
    },
    "jumps": {"trajectories_file": None, "threshold_e": 0.1},
    "coherence_fit": {
        "relaxation_file": None,
        "echo_file": None,
        "kappa_mhz": None,
        "chi_mhz": None,
        "fr_ghz": None,
        "temperature_mk": None,
        "ng": None,
    },
}
_TOP = {"command", "device", "seed", "output_dir", "data_dir", *_SCHEMA}
_SIMULATE = {"gamma_p_hz": 0.37, "duration_s": 18.0, "dt_s": 3e-4, "n_traces": 1200}
_SYNTH = {"devices": None, "temperatures_mk": None, "noise": 0.02, "chips": None}
_CIRCUIT_KEYS = ("c0_ff", "r1_ohm", "l1_ph", "c1_ff", "r2_ohm", "l2_ph", "c2_ff")
_PATH_KEYS = {
    "fit_tp": ("traces_dir",),
    "thermal_fit": ("series_file",),
    "antenna": ("impedance_table", "compare_table"),
    "jumps": ("trajectories_file",),
    "coherence_fit": ("relaxation_file", "echo_file"),
}


class ConfigError(ValueError):
    """Invalid run configuration."""


# ---------------------------------------------------------------------------
# Configuration


def _merge(section: str, given: dict, defaults: dict, where: str) -> dict:
    if not isinstance(given, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    out = dict(defaults)
    out.update(given)
    return out


def load_config(path: str | None, args: argparse.Namespace) -> dict:
    """Read, override from the command line, fill defaults and validate."""
    raw: dict = {}
    base = Path.cwd()
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be an object")
        base = p.parent
    unknown = sorted(set(raw) - _TOP)
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {', '.join(unknown)}")
    if raw.get("command", args.command) != args.command:
        raise ConfigError(f"config is for '{raw['command']}', not '{args.command}'")

    cfg = {
        "command": args.command,
        "device": args.device if args.device is not None else raw.get("device", "S1-Q1"),
        "seed": args.seed if args.seed is not None else raw.get("seed", 0),
        "output_dir": args.out if args.out is not None else raw.get("output_dir", "out"),
        "data_dir": raw.get("data_dir"),
    }
    if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool) or cfg["seed"] < 0:
        raise ConfigError("seed must be a non-negative integer")
    for name, defaults in _SCHEMA.items():
        cfg[name] = _merge(name, raw.get(name, {}), defaults, name)
    if cfg["fit_tp"]["simulate"] is not None:
        cfg["fit_tp"]["simulate"] = _merge("simulate", cfg["fit_tp"]["simulate"], _SIMULATE, "fit_tp.simulate")
    if cfg["thermal_fit"]["synthesize"] is not None:
        cfg["thermal_fit"]["synthesize"] = _merge(
            "synthesize", cfg["thermal_fit"]["synthesize"], _SYNTH, "thermal_fit.synthesize"
        )
    circ = cfg["antenna"]["circuit"]
    if circ is not None:
        cfg["antenna"]["circuit"] = _merge("circuit", circ, dict.fromkeys(_CIRCUIT_KEYS), "antenna.circuit")
        missing = [k for k, v in cfg["antenna"]["circuit"].items() if v is None]
        if missing:
            raise ConfigError(f"antenna.circuit: missing {', '.join(missing)}")

    # resolve and check every input path before anything runs
    if cfg["data_dir"] is not None:
        cfg["data_dir"] = _resolve(base, cfg["data_dir"], "data_dir", directory=True)
    for sec, keys in _PATH_KEYS.items():
        for k in keys:
            if cfg[sec][k] is not None:
                cfg[sec][k] = _resolve(base, cfg[sec][k], f"{sec}.{k}", directory=(k == "traces_dir"))
    return cfg


def _resolve(base: Path, value, where: str, directory: bool = False) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{where}: expected a path string")
    p = Path(value)
    if not p.is_absolute():
        p = base / p
    ok = p.is_dir() if directory else p.is_file()
    if not ok:
        raise ConfigError(f"{where}: {'directory' if directory else 'file'} not found: {value}")
    return str(p)


def config_hash(cfg: dict) -> str:
    """SHA-256 of the canonical JSON form of the resolved configuration.

    The output directory is left out: it does not change what is computed.
    """
    body = {k: v for k, v in cfg.items() if k != "output_dir"}
    blob = json.dumps(body, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Helpers


class _Run:
    """Output directory, header metadata and collected warnings for one command."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.out = Path(cfg["output_dir"])
        self.out.mkdir(parents=True, exist_ok=True)
        self.meta = {
            "tool": f"chargeparity {__version__}",
            "command": cfg["command"],
            "config_sha256": config_hash(cfg),
            "seed": cfg["seed"],
        }
        self.warnings: list[str] = []
        self.written: list[str] = []

    def path(self, name: str) -> Path:
        self.written.append(name)
        return self.out / name

    def tsv(self, name, columns, extra=None):
        io.write_tsv(self.path(name), columns, {**self.meta, **(extra or {})})

    def report(self, name, items):
        body = dict(items)
        for i, w in enumerate(dict.fromkeys(self.warnings), 1):
            body[f"warning_{i}"] = w
        io.write_report(self.path(name), body, self.meta)

    def svg(self, name, fn, *args, **kw):
        fn(self.path(name), *args, **kw)


def _records(cfg):
    return io.load_device_tables(cfg["data_dir"])


def _device(cfg) -> io.DeviceRecord:
    return io.device_by_id(_records(cfg), cfg["device"])


def _g(x):
    """Round-trippable float for reports."""
    return float(x)


# ---------------------------------------------------------------------------
# Commands


def cmd_spectrum(run: _Run) -> None:
    c = run.cfg["spectrum"]
    if c["ej_ghz"] is not None and c["ec_ghz"] is not None:
        ej, ec, title = c["ej_ghz"] * 1e9, c["ec_ghz"] * 1e9, "custom"
    else:
        rec = _device(run.cfg)
        ej, ec = rec.require("ej_hz", "ec_hz")
        title = rec.device_id
    n = int(c["n_points"])
    if n < 1:
        raise ConfigError("spectrum.n_points must be >= 1")
    grid = np.linspace(c["ng_min"], c["ng_max"], n) if n > 1 else np.array([float(c["ng_min"])])
    table = cm.spectrum_vs_ng(cm.QubitParams(ej, ec), grid)
    even, odd = table.columns["even_0_1"], table.columns["odd_0_1"]
    run.tsv("spectrum.tsv", {"ng": grid, "even_ghz": even / 1e9, "odd_ghz": odd / 1e9},
            {"device": title, "ej_ghz": ej / 1e9, "ec_ghz": ec / 1e9})
    both = np.concatenate([even, odd])
    run.svg("spectrum.svg", plotting.spectrum_figure, grid, even, odd, title=title)
    run.report("spectrum_report.txt", {
        "device": title,
        "f_max_ghz": _g(both.max() / 1e9),
        "f_min_ghz": _g(both.min() / 1e9),
        "even_max_ghz": _g(even.max() / 1e9),
        "odd_min_ghz": _g(odd.min() / 1e9),
        "n_points": n,
    })


def _trace_source(run: _Run):
    """Return a zero-argument factory that yields the classified ensemble afresh."""
    c = run.cfg["fit_tp"]
    if c["traces_dir"] is not None:
        if c["simulate"] is not None:
            raise ConfigError("fit_tp: give either traces_dir or simulate, not both")
        ensemble = []
        for t in io.read_trace_dir(c["traces_dir"]):
            if not t.is_classified:
                if c["median_window"]:
                    t = tr.moving_median(t, int(c["median_window"]))
                t, _ = tr.classify_parity(t, c["threshold"])
            ensemble.append(t)
        return (lambda: iter(ensemble)), f"{len(ensemble)} files from {c['traces_dir']}"
    s = c["simulate"] or dict(_SIMULATE)

    def factory():
        return tr.simulate_ensemble(s["gamma_p_hz"], s["duration_s"], s["dt_s"], s["n_traces"], run.cfg["seed"])

    return factory, (f"simulated: {s['n_traces']} x {s['duration_s']} s, dt {s['dt_s']} s, "
                     f"Gamma_P {s['gamma_p_hz']} Hz")


def cmd_fit_tp(run: _Run) -> None:
    c = run.cfg["fit_tp"]
    source, label = _trace_source(run)
    psd = tr.psd_estimate(source())
    fit = tr.fit_lorentzian(psd, bins_per_decade=int(c["bins_per_decade"]))
    acf = tr.autocorrelation(source(), c["max_lag_s"])
    try:
        g_acf = tr.fit_exponential(acf)
    except ValueError as exc:
        run.warnings.append(f"autocorrelation fit failed: {exc}")
        g_acf = math.nan
    g_sw = tr.count_switches(source())
    dev = abs(g_acf / fit.gamma_p_hz - 1) if math.isfinite(g_acf) else math.inf
    agree = dev <= c["cross_check_tolerance"]
    if not agree:
        run.warnings.append(
            f"cross-check disagreement: autocorrelation {g_acf:.4g} Hz vs Lorentzian {fit.gamma_p_hz:.4g} Hz"
        )

    model = tr.finite_record_lorentzian(psd.frequencies, fit.gamma_p_hz, fit.amplitude, psd.dt_s,
                                        psd.n_samples, fit.offset) if psd.n_samples else \
        tr.lorentzian(psd.frequencies, fit.gamma_p_hz, fit.amplitude, fit.offset)
    run.tsv("psd.tsv", {"frequency_hz": psd.frequencies, "power_per_hz": psd.power, "model_per_hz": model},
            {"n_averages": psd.n_averages})
    run.tsv("autocorrelation.tsv", {"lag_s": acf.lags_s, "acf": acf.values}, {"n_traces": acf.n_traces})
    # the figure shows log-binned averages; the TSVs keep every point
    fb, pb, mb = _log_binned(psd.frequencies, psd.power, model)
    stride = max(1, acf.lags_s.size // 500)
    run.svg("fit_tp.svg", plotting.psd_figure, fb, pb, fb, mb, acf.lags_s[::stride], acf.values[::stride],
            g_acf if math.isfinite(g_acf) else None, title="parity switching")
    run.report("fit_tp_report.txt", {
        "source": label,
        "gamma_p_hz": _g(fit.gamma_p_hz),
        "gamma_p_err_hz": _g(fit.gamma_err),
        "tp_s": _g(fit.tp_s),
        "amplitude": _g(fit.amplitude),
        "offset_per_hz": _g(fit.offset),
        "gamma_acf_hz": _g(g_acf),
        "gamma_switch_count_hz": _g(g_sw),
        "cross_check_deviation": _g(dev),
        "cross_check": "agree" if agree else "DISAGREE",
    })


def _log_binned(f, *ys, per_decade=20):
    idx = np.floor(np.log10(f) * per_decade).astype(int)
    _, inv, counts = np.unique(idx, return_inverse=True, return_counts=True)
    return [np.bincount(inv, y) / counts for y in (f, *ys)]


def cmd_simulate_rts(run: _Run) -> None:
    c = run.cfg["simulate_rts"]
    d = run.out / "traces"
    d.mkdir(exist_ok=True)
    seed = run.cfg["seed"]
    n = int(c["n_traces"])
    width = max(4, len(str(n - 1)))
    for i, t in enumerate(tr.simulate_ensemble(c["gamma_p_hz"], c["duration_s"], c["dt_s"], n, seed)):
        if c["readout_sigma"] > 0 or c["outlier_prob"] > 0:
            t = tr.inject_readout_noise(t, c["readout_sigma"], c["outlier_prob"],
                                        seed=RngStream(seed, n + i))
        io.write_trace(run.path(f"traces/trace_{i:0{width}d}.tsv"), t, {**run.meta, "trace": i})
    run.report("simulate_rts_report.txt", {
        "gamma_p_hz": _g(c["gamma_p_hz"]),
        "duration_s": _g(c["duration_s"]),
        "dt_s": _g(c["dt_s"]),
        "n_traces": n,
        "traces_dir": "traces",
    })


def _thermal_inputs(run: _Run):
    c = run.cfg["thermal_fit"]
    recs = {r.device_id: r for r in _records(run.cfg)}

    def spectral(qid):
        if qid not in recs:
            raise ConfigError(f"qubit {qid} not in device tables")
        return recs[qid].require("ej_hz", "eps0_hz", "c0sq")

    if c["series_file"] is not None:
        if c["synthesize"] is not None:
            raise ConfigError("thermal_fit: give either series_file or synthesize, not both")
        rows = io.read_thermal_series(c["series_file"])
        return [qt.ThermalSeries(r.qubit_id, r.chip_id, r.temperature_k, r.gamma_p_hz, r.sigma_hz,
                                 *spectral(r.qubit_id)) for r in rows], "file"
    s = c["synthesize"]
    if s is None:
        raise ConfigError("thermal_fit: need series_file or synthesize")
    if not s["devices"] or not s["temperatures_mk"]:
        raise ConfigError("thermal_fit.synthesize: devices and temperatures_mk are required")
    temps = np.asarray(s["temperatures_mk"], dtype=float) * 1e-3
    out = []
    for i, qid in enumerate(s["devices"]):
        if qid not in recs:
            raise ConfigError(f"qubit {qid} not in device tables")
        rec = recs[qid]
        ej, eps0, c0sq = spectral(qid)
        gp0, delta, xqp = rec.require("gp0_hz", "delta_hz", "xqp")
        chip = (s["chips"] or {}).get(qid, rec.sample)
        params = qt.ThermalModelParams(gp0, xqp, ant.GapFrequencies(delta / UEV_TO_HZ, c["delta0_uev"]),
                                       ej, eps0, c0sq)
        truth = qt.gamma_p_of_T(temps, params, warn=False)
        rng = RngStream(run.cfg["seed"], i).generator()
        noisy = truth * (1 + s["noise"] * rng.standard_normal(temps.size))
        out.append(qt.ThermalSeries(qid, chip, temps, noisy, np.maximum(s["noise"], 1e-6) * truth,
                                    ej, eps0, c0sq))
    return out, "synthesized"


def cmd_thermal_fit(run: _Run) -> None:
    c = run.cfg["thermal_fit"]
    series, origin = _thermal_inputs(run)
    dinit = c["delta_init_ghz"]
    dinit = {k: v * 1e9 for k, v in dinit.items()} if isinstance(dinit, dict) else dinit * 1e9
    fit = qt.fit_thermal_series(series, dinit, delta0_uev=c["delta0_uev"], fix_delta=c["fix_delta"])

    r = qt.RECOMB_RATE
    ids = [s.qubit_id for s in series]
    balance = [math.sqrt(qt.generation_rate(fit.gp0_hz[q], c["delta0_uev"], c["volume_um3"]) / r) for q in ids]
    run.tsv("thermal_params.tsv", {
        "qubit_id": ids,
        "chip_id": [s.chip_id for s in series],
        "gp0_hz": [fit.gp0_hz[q] for q in ids],
        "gp0_err_hz": [fit.gp0_err[q] for q in ids],
        "xqp": [fit.xqp[q] for q in ids],
        "xqp_err": [fit.xqp_err[q] for q in ids],
        "delta_ghz": [fit.delta_hz[s.chip_id] / 1e9 for s in series],
        "delta_err_ghz": [fit.delta_err[s.chip_id] / 1e9 for s in series],
        "xqp_balance": balance,
    }, {"origin": origin})

    data = {s.qubit_id: (s.temperature_k, s.gamma_p_hz, s.sigma_hz) for s in series}
    curves = {}
    for s in series:
        tc = np.linspace(s.temperature_k.min(), s.temperature_k.max(), 200)
        curves[s.qubit_id] = (tc, qt.gamma_p_of_T(tc, fit.params_for(s, c["delta0_uev"]), warn=False))
    run.svg("thermal_fit.svg", plotting.thermal_figure, data, curves, title="parity rate vs temperature")
    gp = np.array([fit.gp0_hz[q] for q in ids])
    gl = np.logspace(math.log10(gp.min() / 3), math.log10(gp.max() * 3), 50)
    xl = np.sqrt(qt.generation_rate(gl, c["delta0_uev"], c["volume_um3"]) / r)
    run.svg("density.svg", plotting.density_figure, gp, [max(fit.xqp[q], 1e-12) for q in ids], ids, gl, xl)

    items = {"origin": origin, "n_series": len(series), "cost": _g(fit.result.cost),
             "iterations": fit.result.n_iter}
    for chip in sorted(fit.delta_hz):
        items[f"delta_ghz[{chip}]"] = _g(fit.delta_hz[chip] / 1e9)
        items[f"delta_err_ghz[{chip}]"] = _g(fit.delta_err[chip] / 1e9)
    for q in ids:
        items[f"gp0_hz[{q}]"] = _g(fit.gp0_hz[q])
        items[f"xqp[{q}]"] = _g(fit.xqp[q])
    run.report("thermal_fit_report.txt", items)


def _circuit(c) -> ant.EquivCircuit:
    if c["circuit"] is None:
        return ant.DEFAULT_CIRCUIT
    k = c["circuit"]
    return ant.EquivCircuit(k["c0_ff"] * 1e-15, k["r1_ohm"], k["l1_ph"] * 1e-12, k["c1_ff"] * 1e-15,
                            k["r2_ohm"], k["l2_ph"] * 1e-12, k["c2_ff"] * 1e-15)


def cmd_antenna(run: _Run) -> None:
    c = run.cfg["antenna"]
    if c["f_star_ghz"] is not None and c["delta_uev"] is not None:
        raise ConfigError("antenna: give f_star_ghz or delta_uev, not both")
    if c["delta_uev"] is not None:
        f_star = 2 * c["delta_uev"] * UEV_TO_HZ
    else:
        f_star = (c["f_star_ghz"] if c["f_star_ghz"] is not None else 105.0) * 1e9
    j = ant.JunctionParams(c["rn_kohm"] * 1e3, c["cj_ff"] * 1e-15)
    table = ant.read_impedance_table(c["impedance_table"]) if c["impedance_table"] else None
    if table is not None:
        lo, hi = max(c["f_min_ghz"] * 1e9, table.freq_hz[0]), min(c["f_max_ghz"] * 1e9, table.freq_hz[-1])
    else:
        lo, hi = c["f_min_ghz"] * 1e9, c["f_max_ghz"] * 1e9
    if not 0 < lo < hi:
        raise ConfigError("antenna: empty frequency range")
    f = np.linspace(lo, hi, int(c["n_points"]))
    circuit = _circuit(c)

    def zr(x):
        return table(x) if table is not None else ant.z_rad(circuit, x)

    z = zr(f)
    ec = ant.coupling_efficiency(z, ant.z_junction(j, f))
    ec_star = ant.coupling_efficiency(zr(f_star), ant.z_junction(j, f_star))
    cols = {"frequency_ghz": f / 1e9, "re_z_ohm": z.real, "im_z_ohm": z.imag, "ec": ec}
    items = {
        "source": "impedance table" if table is not None else "equivalent circuit",
        "f_star_ghz": _g(f_star / 1e9),
        "ec_star": _g(ec_star),
        "gamma_conv_hz": _g(c["gamma_conv_hz"]),
        "gamma_p_pred_hz": _g(ant.predict_parity_rate(ec_star, c["gamma_conv_hz"])),
        "z_junction_re_ohm": _g(ant.z_junction(j, f_star).real),
        "z_junction_im_ohm": _g(ant.z_junction(j, f_star).imag),
    }
    ec_alt = None
    if c["compare_table"]:
        other = ant.read_impedance_table(c["compare_table"])
        ec_alt = ant.coupling_efficiency(other(f), ant.z_junction(j, f))
        cols["ec_compare"] = ec_alt
        star_alt = ant.coupling_efficiency(other(f_star), ant.z_junction(j, f_star))
        items["ec_star_compare"] = _g(star_alt)
        items["gamma_p_pred_compare_hz"] = _g(ant.predict_parity_rate(star_alt, c["gamma_conv_hz"]))
    if c["t_rad_k"] is not None:
        if table is not None:
            raise ConfigError("antenna.t_rad_k needs the equivalent circuit, not a table")
        items["ec_integrated"] = _g(ant.integrated_efficiency(circuit, j, f_star, c["t_rad_k"]))
    run.tsv("antenna.tsv", cols)
    run.svg("antenna.svg", plotting.antenna_figure, f, z, np.maximum(ec, 1e-12), f_star,
            None if ec_alt is None else np.maximum(ec_alt, 1e-12), title="radiation impedance")
    run.report("antenna_report.txt", items)


def cmd_jumps(run: _Run) -> None:
    c = run.cfg["jumps"]
    if c["trajectories_file"] is None:
        raise ConfigError("jumps.trajectories_file is required")
    traj = io.read_offset_trajectories(c["trajectories_file"])
    cats = {q: tr.detect_charge_jumps(t, ng, c["threshold_e"]) for q, (t, ng) in traj.items()}
    run.tsv("jumps.tsv", {
        "qubit_id": [q for q, k in cats.items() for _ in range(k.count)],
        "time_s": np.concatenate([k.times_s for k in cats.values()]),
        "amplitude_e": np.concatenate([k.amplitudes_e for k in cats.values()]),
    }, {"threshold_e": c["threshold_e"]})
    ids = list(cats)
    run.tsv("jump_rates.tsv", {
        "qubit_id": ids,
        "count": [cats[q].count for q in ids],
        "duration_h": [cats[q].duration_s / 3600 for q in ids],
        "rate_mhz": [cats[q].rate_hz * 1e3 for q in ids],
    })
    run.svg("jumps.svg", plotting.jumps_figure, cats, c["threshold_e"])
    total = sum(k.count for k in cats.values())
    span = sum(k.duration_s for k in cats.values())
    run.report("jumps_report.txt", {
        "n_qubits": len(ids),
        "total_jumps": total,
        "pooled_rate_mhz": _g(total / span * 1e3 if span > 0 else 0.0),
        **{f"rate_mhz[{q}]": _g(cats[q].rate_hz * 1e3) for q in ids},
    })


def cmd_coherence_fit(run: _Run) -> None:
    c = run.cfg["coherence_fit"]
    if c["relaxation_file"] is None:
        raise ConfigError("coherence_fit.relaxation_file is required")
    items: dict[str, object] = {}
    relax = io.read_decay_curve(c["relaxation_file"])
    t1 = coh.fit_t1(relax)
    items["t1_us"] = _g(t1.time_s * 1e6)
    items["t1_err_us"] = _g(t1.time_err * 1e6)
    curves = [relax]
    fits = [coh.t1_model(relax.times_s, t1.a, t1.b, t1.time_s)]
    if c["echo_file"] is not None:
        echo = io.read_decay_curve(c["echo_file"])
        e = coh.fit_echo(echo, t1.time_s)
        items["tphi_us"] = _g(e.time_s * 1e6)
        items["tphi_err_us"] = _g(e.time_err * 1e6)
        curves.append(echo)
        fits.append(coh.echo_model(echo.times_s, e.a, e.b, t1.time_s, e.time_s))
        if c["ng"] is not None and math.isfinite(e.time_s):
            rec = _device(run.cfg)
            ej, ec = rec.require("ej_hz", "ec_hz")
            slope = cm.charge_dispersion_slope(cm.QubitParams(ej, ec, ng=float(c["ng"])), "even")
            items["slope_ghz_per_ng"] = _g(slope / 1e9)
            items["charge_noise_e2_per_hz"] = _g(coh.charge_noise_amplitude(e.time_s, slope))
    res_keys = ("kappa_mhz", "chi_mhz", "fr_ghz", "temperature_mk")
    given = [c[k] is not None for k in res_keys]
    if any(given) and not all(given):
        raise ConfigError("coherence_fit: kappa_mhz, chi_mhz, fr_ghz and temperature_mk go together")
    if all(given):
        rp = coh.ResonatorParams(c["kappa_mhz"] * 1e6, c["chi_mhz"] * 1e6, c["fr_ghz"] * 1e9)
        items["thermal_photon_dephasing_hz"] = _g(coh.thermal_photon_dephasing(rp, c["temperature_mk"] * 1e-3))
    for cur, m in zip(curves, fits):
        run.tsv(f"{cur.kind}_fit.tsv", {"time_s": cur.times_s, "population": cur.populations, "model": m},
                {"kind": cur.kind})
    run.svg("coherence.svg", plotting.coherence_figure, curves, [(cur.times_s, m) for cur, m in zip(curves, fits)])
    run.report("coherence_report.txt", items)


_DISPATCH = {
    "spectrum": cmd_spectrum,
    "fit-tp": cmd_fit_tp,
    "simulate-rts": cmd_simulate_rts,
    "thermal-fit": cmd_thermal_fit,
    "antenna": cmd_antenna,
    "jumps": cmd_jumps,
    "coherence-fit": cmd_coherence_fit,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chargeparity", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"chargeparity {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON run configuration")
        s.add_argument("--seed", type=int, help="random seed (overrides config)")
        s.add_argument("--out", help="output directory (overrides config)")
        s.add_argument("--device", help="device id such as S1-Q1 (overrides config)")
    return p


def run_command(argv=None) -> _Run:
    """Parse ``argv`` and execute; exceptions propagate (used by :func:`main`)."""
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config, args)
    run = _Run(copy.deepcopy(cfg))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            _DISPATCH[args.command](run)
        except Exception as exc:
            # keep what was said before the failure for the caller to show
            exc.run_warnings = list(dict.fromkeys(run.warnings + [str(w.message) for w in caught]))
            raise
    for w in caught:
        msg = str(w.message)
        if msg not in run.warnings:
            run.warnings.append(msg)
    if caught:
        # rewrite the report so late warnings are included
        _rewrite_warnings(run)
    return run


def _rewrite_warnings(run: _Run) -> None:
    reports = [n for n in run.written if n.endswith("_report.txt")]
    for name in reports:
        path = run.out / name
        items = {k: v for k, v in io.read_report(path).items() if not k.startswith("warning_")}
        for i, w in enumerate(run.warnings, 1):
            items[f"warning_{i}"] = w
        io.write_report(path, items, run.meta)


def main(argv=None) -> int:
    try:
        run = run_command(argv)
    except FitError as exc:
        for w in getattr(exc, "run_warnings", ()):
            print(f"chargeparity: warning: {w}", file=sys.stderr)
        print(f"chargeparity: fit failed: {exc}", file=sys.stderr)
        return 3
    except KeyError as exc:
        print(f"chargeparity: error: {exc.args[0]}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"chargeparity: error: {exc}", file=sys.stderr)
        return 2
    for w in run.warnings:
        print(f"chargeparity: warning: {w}", file=sys.stderr)
    print(os.fspath(run.out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
