import hashlib
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chargeparity import io
from chargeparity.coherence import DecayCurve
from chargeparity.io import SchemaError
from chargeparity.traces import TelegraphTrace

# sha256 of the bundled tables, recorded when they were transcribed
CHECKSUMS = {
    "table1.tsv": "cae9df51c4499b859041d72652fdb23fd1cd790045a63884a02cb49d8570704c",
    "table2.tsv": "56936a2601327c574f17bdf7f500320aa7e7d98049590119a30bd3b9d59aecd5",
}


@pytest.fixture(scope="module")
def records():
    return io.load_device_tables()


class TestBundledTables:
    @pytest.mark.parametrize("name", sorted(CHECKSUMS))
    def test_checksum(self, name):
        data = (io.builtin_data_dir() / name).read_bytes()
        assert hashlib.sha256(data).hexdigest() == CHECKSUMS[name]

    def test_counts(self, records):
        assert len(records) == 55
        assert sum(r.gp0_hz is not None for r in records) == 15
        assert len({r.device_id for r in records}) == len(records)

    def test_s1q1(self, records):
        r = io.device_by_id(records, "S1-Q1")
        assert r.ej_hz == pytest.approx(4.67e9)
        assert r.ec_hz == pytest.approx(1.40e9)
        assert r.tp_s == pytest.approx(1.918)
        assert r.g_hz == pytest.approx(24.3e6)
        assert r.t1_s == pytest.approx(24.4e-6)
        assert r.l_um == 80 and r.d_um == 5
        assert r.sample == "S1"

    def test_s5q2(self, records):
        r = io.device_by_id(records, "S5-Q2")
        assert r.eps0_hz == pytest.approx(0.027e9)
        assert r.c0sq == pytest.approx(0.850)
        assert r.delta_hz == pytest.approx(49.50e9)
        assert r.xqp == pytest.approx(3.90e-7)

    def test_blanks_stay_missing(self, records):
        r = io.device_by_id(records, "S2-Q1")
        assert r.ej_hz is None and r.t1_s is None and r.gp0_hz is None
        assert r.fr_hz == pytest.approx(5.552e9)
        with pytest.raises(ValueError, match="ej_hz"):
            r.require("ej_hz", "fr_hz")

    def test_text_metadata(self, records):
        r = io.device_by_id(records, "S1-Q3")
        assert (r.holder, r.cap_um, r.cr110) == ("Al", "no", "yes")

    def test_unknown_device(self, records):
        with pytest.raises(KeyError):
            io.device_by_id(records, "S99-Q1")

    def test_environment_override(self, tmp_path, monkeypatch, records):
        io.write_device_tables(tmp_path / "table1.tsv", records[:3])
        io.write_device_tables(tmp_path / "table2.tsv", [])
        monkeypatch.setenv(io.DATA_ENV, str(tmp_path))
        assert [r.device_id for r in io.load_device_tables()] == [r.device_id for r in records[:3]]


class TestDeviceSchema:
    def write(self, path, text):
        path.write_text(text)
        return path

    def test_empty_file(self, tmp_path):
        with pytest.raises(SchemaError, match="empty"):
            io.load_device_tables(self.write(tmp_path / "t.tsv", ""))

    def test_bad_number(self, tmp_path):
        p = self.write(tmp_path / "t.tsv", "device_id\tej_ghz\nA\t4.5\nB\tabc\n")
        with pytest.raises(SchemaError, match=r":3: column 'ej_ghz'"):
            io.load_device_tables(p)

    def test_wrong_width(self, tmp_path):
        p = self.write(tmp_path / "t.tsv", "device_id\tej_ghz\nA\t4.5\t1\n")
        with pytest.raises(SchemaError, match=r":2: expected 2 columns"):
            io.load_device_tables(p)

    def test_unknown_column(self, tmp_path):
        p = self.write(tmp_path / "t.tsv", "device_id\tfoo\nA\t1\n")
        with pytest.raises(SchemaError, match="unknown column"):
            io.load_device_tables(p)

    def test_duplicate_id(self, tmp_path):
        p = self.write(tmp_path / "t.tsv", "device_id\tej_ghz\nA\t1\nA\t2\n")
        with pytest.raises(SchemaError, match="duplicate"):
            io.load_device_tables(p)

    def test_negative(self, tmp_path):
        p = self.write(tmp_path / "t.tsv", "device_id\tej_ghz\nA\t-1\n")
        with pytest.raises(SchemaError, match="negative"):
            io.load_device_tables(p)

    def test_tables_must_agree(self, tmp_path):
        self.write(tmp_path / "table1.tsv", "device_id\tej_ghz\nA\t1\n")
        self.write(tmp_path / "table2.tsv", "device_id\tej_ghz\nA\t2\n")
        with pytest.raises(SchemaError, match="disagrees"):
            io.load_device_tables(tmp_path)

    def test_round_trip(self, tmp_path, records):
        io.write_device_tables(tmp_path / "all.tsv", records)
        back = io.load_device_tables(tmp_path / "all.tsv")
        assert back == records


class TestGenericTsv:
    @settings(max_examples=50, deadline=None)
    @given(vals=st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=20))
    def test_float_round_trip(self, tmp_path_factory, vals):
        p = tmp_path_factory.mktemp("tsv") / "x.tsv"
        io.write_tsv(p, {"x": vals, "i": range(len(vals))}, {"seed": 3})
        meta, cols = io.read_tsv(p)
        assert meta == {"seed": "3"}
        assert [float(v) for v in cols["x"]] == vals
        assert cols["i"] == list(range(len(vals)))

    def test_missing_column(self, tmp_path):
        io.write_tsv(tmp_path / "x.tsv", {"a": [1]})
        with pytest.raises(SchemaError, match="missing column"):
            io.read_tsv(tmp_path / "x.tsv", required=["b"])

    def test_unequal_columns(self, tmp_path):
        with pytest.raises(ValueError):
            io.write_tsv(tmp_path / "x.tsv", {"a": [1, 2], "b": [1]})

    def test_nan_written_blank(self, tmp_path):
        io.write_tsv(tmp_path / "x.tsv", {"a": [1.0, math.nan]})
        _, cols = io.read_tsv(tmp_path / "x.tsv")
        assert cols["a"] == [1.0, None]

    def test_report_round_trip(self, tmp_path):
        io.write_report(tmp_path / "r.txt", {"gamma_p_hz": 0.37, "flag": "agree"}, {"seed": 1})
        assert io.read_report(tmp_path / "r.txt") == {"gamma_p_hz": "0.37", "flag": "agree"}


class TestMeasurementFiles:
    def test_trace_round_trip(self, tmp_path):
        t = TelegraphTrace(3e-4, np.where(np.arange(100) % 7 < 3, 1.0, -1.0), "measured")
        io.write_trace(tmp_path / "t.tsv", t)
        back = io.read_trace(tmp_path / "t.tsv")
        assert back.dt_s == pytest.approx(3e-4, rel=1e-12)
        assert np.array_equal(back.samples, t.samples)
        assert back.origin == "measured"

    def test_trace_nonuniform(self, tmp_path):
        io.write_tsv(tmp_path / "t.tsv", {"time_s": [0, 1, 3], "value": [1, 1, -1]})
        with pytest.raises(SchemaError, match="uniformly"):
            io.read_trace(tmp_path / "t.tsv")

    def test_trace_dir(self, tmp_path):
        for i in range(3):
            io.write_trace(tmp_path / f"trace_{i:04d}.tsv", TelegraphTrace(1e-3, np.full(10, (-1.0) ** i)))
        tr = io.read_trace_dir(tmp_path)
        assert [t.samples[0] for t in tr] == [1.0, -1.0, 1.0]
        with pytest.raises(SchemaError):
            io.read_trace_dir(tmp_path / "nothing")

    def test_decay_round_trip(self, tmp_path):
        c = DecayCurve(np.linspace(1e-6, 1e-4, 20), np.linspace(0.9, 0.1, 20), "echo")
        io.write_decay_curve(tmp_path / "d.tsv", c)
        back = io.read_decay_curve(tmp_path / "d.tsv")
        assert back.kind == "echo"
        assert np.array_equal(back.times_s, c.times_s)
        assert np.array_equal(back.populations, c.populations)

    def test_decay_needs_kind(self, tmp_path):
        io.write_tsv(tmp_path / "d.tsv", {"time_s": [1, 2, 3, 4, 5], "population": [1, 1, 1, 1, 1]})
        with pytest.raises(SchemaError, match="kind"):
            io.read_decay_curve(tmp_path / "d.tsv")

    def test_thermal_round_trip(self, tmp_path):
        rows = [
            io.ThermalRows("A", "S1", np.array([0.02, 0.05, 0.1]), np.array([1.0, 2.0, 9.0]), np.array([0.1, 0.1, 0.2])),
            io.ThermalRows("B", "S1", np.array([0.03, 0.06]), np.array([3.0, 4.0]), np.array([0.3, 0.4])),
        ]
        io.write_thermal_series(tmp_path / "s.tsv", rows)
        back = io.read_thermal_series(tmp_path / "s.tsv")
        assert [r.qubit_id for r in back] == ["A", "B"]
        np.testing.assert_allclose(back[0].temperature_k, rows[0].temperature_k, rtol=1e-15)
        assert np.array_equal(back[1].gamma_p_hz, rows[1].gamma_p_hz)

    def test_thermal_sorted_by_temperature(self, tmp_path):
        io.write_tsv(tmp_path / "s.tsv", {
            "qubit_id": ["A"] * 3, "chip_id": ["S1"] * 3, "temperature_mk": [50, 20, 100],
            "gamma_p_hz": [2, 1, 3], "sigma_hz": [0.1] * 3,
        })
        r = io.read_thermal_series(tmp_path / "s.tsv")[0]
        assert r.gamma_p_hz.tolist() == [1, 2, 3]

    def test_thermal_chip_conflict(self, tmp_path):
        io.write_tsv(tmp_path / "s.tsv", {
            "qubit_id": ["A", "A"], "chip_id": ["S1", "S2"], "temperature_mk": [20, 50],
            "gamma_p_hz": [1, 2], "sigma_hz": [0.1, 0.1],
        })
        with pytest.raises(SchemaError, match="several chips"):
            io.read_thermal_series(tmp_path / "s.tsv")

    def test_offset_trajectories(self, tmp_path):
        io.write_tsv(tmp_path / "o.tsv", {
            "time_s": [0, 0, 60, 60], "ng_e": [0.1, 0.2, 0.1, 0.5], "qubit_id": ["Q1", "Q2", "Q1", "Q2"],
        })
        tr = io.read_offset_trajectories(tmp_path / "o.tsv")
        assert list(tr) == ["Q1", "Q2"]
        assert tr["Q2"][1].tolist() == [0.2, 0.5]
