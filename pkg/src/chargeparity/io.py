"""Bundled device tables and flat-file formats.

Tables are tab-separated with one header row. Lines starting with ``#`` carry
``key: value`` metadata. Empty cells mean "not measured" and load as
``None``; nothing is ever filled in by default.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .coherence import DecayCurve
from .traces import TelegraphTrace

DATA_ENV = "CHARGEPARITY_DATA_DIR"


class SchemaError(ValueError):
    """Malformed table; the message names the file, line and column."""


# ---------------------------------------------------------------------------
# Generic TSV


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else repr(float(v))
    return str(v)


def write_tsv(path, columns: Mapping[str, Iterable], meta: Mapping[str, object] | None = None) -> None:
    """Write named columns with ``# key: value`` metadata lines first.

    Floats use ``repr`` so that :func:`read_tsv` recovers them exactly.
    """
    cols = {k: list(v) for k, v in columns.items()}
    n = {len(v) for v in cols.values()}
    if len(n) > 1:
        raise ValueError("columns differ in length")
    rows = zip(*cols.values()) if cols else []
    with open(path, "w", newline="") as fh:
        for k, v in (meta or {}).items():
            fh.write(f"# {k}: {v}\n")
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(cols.keys())
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def _parse_cell(s: str):
    # csv quotes a lone empty cell so that the row is not a blank line
    if s in ("", '""'):
        return None
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_tsv(path, required: Iterable[str] = ()) -> tuple[dict[str, str], dict[str, list]]:
    """Read a table written by :func:`write_tsv` (or by hand).

    Returns ``(meta, columns)``. Numeric-looking cells become ``int`` or
    ``float``, blanks ``None``.
    """
    path = Path(path)
    meta: dict[str, str] = {}
    header = None
    rows = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                meta[key.strip()] = val.strip()
                continue
            if not line.strip():
                continue
            cells = line.split("\t")
            if header is None:
                header = [c.strip() for c in cells]
                if len(set(header)) != len(header):
                    raise SchemaError(f"{path}:{lineno}: duplicate column names")
                continue
            if len(cells) != len(header):
                raise SchemaError(
                    f"{path}:{lineno}: expected {len(header)} columns, found {len(cells)}"
                )
            rows.append((lineno, cells))
    if header is None:
        raise SchemaError(f"{path}: empty file (no header)")
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    cols: dict[str, list] = {h: [] for h in header}
    for _, cells in rows:
        for h, c in zip(header, cells):
            cols[h].append(_parse_cell(c))
    cols["__lines__"] = [ln for ln, _ in rows]
    return meta, cols


def _numeric(path, cols, name, allow_missing=False) -> np.ndarray:
    out = []
    for ln, v in zip(cols["__lines__"], cols[name]):
        if v is None and allow_missing:
            out.append(math.nan)
        elif isinstance(v, (int, float)):
            out.append(float(v))
        else:
            raise SchemaError(f"{path}:{ln}: column {name!r}: expected a number, got {v!r}")
    return np.array(out, dtype=float)


# ---------------------------------------------------------------------------
# Device tables


@dataclass(frozen=True)
class DeviceRecord:
    """One qubit from the device tables, in SI units (geometry in um)."""

    device_id: str
    l_um: float | None = None
    w_um: float | None = None
    d_um: float | None = None
    ej_hz: float | None = None
    ec_hz: float | None = None
    omega_max_hz: float | None = None
    omega_min_hz: float | None = None
    g_hz: float | None = None
    fr_hz: float | None = None
    t1_s: float | None = None
    tphi_s: float | None = None
    tp_s: float | None = None
    eps0_hz: float | None = None
    c0sq: float | None = None
    gp0_hz: float | None = None
    delta_hz: float | None = None
    xqp: float | None = None
    holder: str | None = None
    cap_um: str | None = None
    cr110: str | None = None
    figures: str | None = None

    @property
    def sample(self) -> str:
        return self.device_id.split("-")[0]

    def require(self, *names: str):
        """Return the named fields, failing loudly if any is missing."""
        vals = tuple(getattr(self, n) for n in names)
        missing = [n for n, v in zip(names, vals) if v is None]
        if missing:
            raise ValueError(f"{self.device_id}: missing {', '.join(missing)}")
        return vals


# column -> (field, scale to SI)
_COLUMNS = {
    "L_um": ("l_um", 1.0),
    "W_um": ("w_um", 1.0),
    "d_um": ("d_um", 1.0),
    "ej_ghz": ("ej_hz", 1e9),
    "ec_ghz": ("ec_hz", 1e9),
    "omega_max_ghz": ("omega_max_hz", 1e9),
    "omega_min_ghz": ("omega_min_hz", 1e9),
    "g_mhz": ("g_hz", 1e6),
    "fr_ghz": ("fr_hz", 1e9),
    "t1_us": ("t1_s", 1e-6),
    "tphi_us": ("tphi_s", 1e-6),
    "tp_s": ("tp_s", 1.0),
    "eps0_ghz": ("eps0_hz", 1e9),
    "c0sq": ("c0sq", 1.0),
    "gp0_hz": ("gp0_hz", 1.0),
    "delta_ghz": ("delta_hz", 1e9),
    "xqp_1e7": ("xqp", 1e-7),
}
_TEXT = {"holder", "cap_um", "cr110", "figures"}
_IGNORED = {"ej_over_ec"}


def builtin_data_dir() -> Path:
    env = os.environ.get(DATA_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("chargeparity") / "data"))


def _parse_device_file(path) -> dict[str, dict]:
    _, cols = read_tsv(path, required=["device_id"])
    known = set(_COLUMNS) | _TEXT | _IGNORED | {"device_id", "__lines__"}
    for c in cols:
        if c not in known:
            raise SchemaError(f"{path}: unknown column {c!r}")
    out: dict[str, dict] = {}
    for i, ln in enumerate(cols["__lines__"]):
        dev = cols["device_id"][i]
        if not isinstance(dev, str) or not dev:
            raise SchemaError(f"{path}:{ln}: column 'device_id': missing identifier")
        if dev in out:
            raise SchemaError(f"{path}:{ln}: duplicate device_id {dev!r}")
        rec: dict = {}
        for col, (name, scale) in _COLUMNS.items():
            if col not in cols:
                continue
            v = cols[col][i]
            if v is None:
                continue
            if not isinstance(v, (int, float)):
                raise SchemaError(f"{path}:{ln}: column {col!r}: expected a number, got {v!r}")
            if v < 0:
                raise SchemaError(f"{path}:{ln}: column {col!r}: negative value {v}")
            rec[name] = float(v) * scale
        for col in _TEXT & set(cols):
            v = cols[col][i]
            if v is not None:
                rec[col] = str(v)
        out[dev] = rec
    return out


def load_device_tables(path=None) -> list[DeviceRecord]:
    """Load device records.

    With no ``path`` the bundled tables are used (from ``$CHARGEPARITY_DATA_DIR``
    if set): device and setup parameters merged with the fitted
    quasiparticle parameters by ``device_id``. A ``path`` may name one
    table file or a directory holding ``table1.tsv`` and ``table2.tsv``.
    """
    if path is None:
        path = builtin_data_dir()
    path = Path(path)
    files = [path / "table1.tsv", path / "table2.tsv"] if path.is_dir() else [path]
    merged: dict[str, dict] = {}
    for f in files:
        for dev, rec in _parse_device_file(f).items():
            base = merged.setdefault(dev, {})
            for k, v in rec.items():
                if k in base and base[k] != v:
                    # the two tables repeat a few columns; they must agree
                    raise SchemaError(f"{f}: {dev}: {k} disagrees between tables")
                base[k] = v
    return [DeviceRecord(device_id=d, **r) for d, r in merged.items()]


def device_by_id(records: Iterable[DeviceRecord], device_id: str) -> DeviceRecord:
    for r in records:
        if r.device_id == device_id:
            return r
    raise KeyError(f"unknown device {device_id!r}")


def write_device_tables(path, records: Iterable[DeviceRecord], meta=None) -> None:
    """Write records in the merged column layout (inverse of loading)."""
    records = list(records)
    cols: dict[str, list] = {"device_id": [r.device_id for r in records]}
    for col, (name, scale) in _COLUMNS.items():
        cols[col] = [None if getattr(r, name) is None else getattr(r, name) / scale for r in records]
    for col in sorted(_TEXT):
        cols[col] = [getattr(r, col) for r in records]
    write_tsv(path, cols, meta)


# ---------------------------------------------------------------------------
# Measurement files


def read_trace(path, origin: str = "measured") -> TelegraphTrace:
    """Read a ``time_s, value`` record with uniform sampling."""
    _, cols = read_tsv(path, required=["time_s", "value"])
    t = _numeric(path, cols, "time_s")
    v = _numeric(path, cols, "value")
    if t.size < 2:
        raise SchemaError(f"{path}: need at least two samples")
    d = np.diff(t)
    dt = (t[-1] - t[0]) / (t.size - 1)
    if not dt > 0 or np.max(np.abs(d - dt)) > 1e-6 * dt:
        raise SchemaError(f"{path}: time_s must be uniformly spaced and increasing")
    return TelegraphTrace(float(dt), v, origin)


def write_trace(path, trace: TelegraphTrace, meta=None) -> None:
    write_tsv(path, {"time_s": trace.times_s, "value": trace.samples}, meta)


def read_trace_dir(path) -> list[TelegraphTrace]:
    """All ``*.tsv`` traces in a directory, one repetition per file, name order."""
    files = sorted(Path(path).glob("*.tsv"))
    if not files:
        raise SchemaError(f"{path}: no trace files")
    return [read_trace(f) for f in files]


def read_offset_trajectories(path) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """``time_s, ng_e, qubit_id`` rows grouped by qubit."""
    _, cols = read_tsv(path, required=["time_s", "ng_e", "qubit_id"])
    t = _numeric(path, cols, "time_s")
    q = _numeric(path, cols, "ng_e")
    ids = [str(x) for x in cols["qubit_id"]]
    out = {}
    for qid in dict.fromkeys(ids):
        m = np.array([i == qid for i in ids])
        out[qid] = (t[m], q[m])
    return out


def read_decay_curve(path) -> DecayCurve:
    """``time_s, population`` with the curve kind in a ``# kind:`` header line."""
    meta, cols = read_tsv(path, required=["time_s", "population"])
    kind = meta.get("kind")
    if kind not in ("relaxation", "echo"):
        raise SchemaError(f"{path}: header must contain '# kind: relaxation' or '# kind: echo'")
    return DecayCurve(_numeric(path, cols, "time_s"), _numeric(path, cols, "population"), kind)


def write_decay_curve(path, curve: DecayCurve, meta=None) -> None:
    m = {"kind": curve.kind}
    m.update(meta or {})
    write_tsv(path, {"time_s": curve.times_s, "population": curve.populations}, m)


@dataclass
class ThermalRows:
    qubit_id: str
    chip_id: str
    temperature_k: np.ndarray
    gamma_p_hz: np.ndarray
    sigma_hz: np.ndarray


def read_thermal_series(path) -> list[ThermalRows]:
    """``qubit_id, chip_id, temperature_mk, gamma_p_hz, sigma_hz`` grouped by qubit."""
    req = ["qubit_id", "chip_id", "temperature_mk", "gamma_p_hz", "sigma_hz"]
    _, cols = read_tsv(path, required=req)
    t = _numeric(path, cols, "temperature_mk") * 1e-3
    g = _numeric(path, cols, "gamma_p_hz")
    s = _numeric(path, cols, "sigma_hz")
    ids = [str(x) for x in cols["qubit_id"]]
    chips = [str(x) for x in cols["chip_id"]]
    out = []
    for qid in dict.fromkeys(ids):
        idx = [i for i, x in enumerate(ids) if x == qid]
        cs = {chips[i] for i in idx}
        if len(cs) != 1:
            raise SchemaError(f"{path}: qubit {qid} listed under several chips")
        order = np.argsort(t[idx], kind="stable")
        sel = np.array(idx)[order]
        out.append(ThermalRows(qid, cs.pop(), t[sel], g[sel], s[sel]))
    return out


def write_thermal_series(path, rows: Iterable[ThermalRows], meta=None) -> None:
    cols: dict[str, list] = {k: [] for k in ["qubit_id", "chip_id", "temperature_mk", "gamma_p_hz", "sigma_hz"]}
    for r in rows:
        n = r.temperature_k.size
        cols["qubit_id"] += [r.qubit_id] * n
        cols["chip_id"] += [r.chip_id] * n
        cols["temperature_mk"] += list(r.temperature_k * 1e3)
        cols["gamma_p_hz"] += list(r.gamma_p_hz)
        cols["sigma_hz"] += list(r.sigma_hz)
    write_tsv(path, cols, meta)


def write_report(path, items: Mapping[str, object], meta=None) -> None:
    """Key/value report, one ``key = value`` per line."""
    with open(path, "w") as fh:
        for k, v in (meta or {}).items():
            fh.write(f"# {k}: {v}\n")
        for k, v in items.items():
            fh.write(f"{k} = {_fmt(v) if not isinstance(v, str) else v}\n")


def read_report(path) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or "=" not in line:
                continue
            k, _, v = line.partition("=")
            out[k.strip()] = v.strip()
    return out


__all__ = [
    "SchemaError", "DeviceRecord", "load_device_tables", "device_by_id", "write_device_tables",
    "read_tsv", "write_tsv", "read_trace", "write_trace", "read_trace_dir",
    "read_offset_trajectories", "read_decay_curve", "write_decay_curve",
    "ThermalRows", "read_thermal_series", "write_thermal_series", "write_report", "read_report",
    "builtin_data_dir", "DATA_ENV",
]
