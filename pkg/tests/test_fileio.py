import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bridgeloss.errors import DomainError, ParseError
from bridgeloss.fileio import (
    CONFIG_ENV,
    ReportError,
    format_csv_traces,
    format_loss_csv,
    format_report,
    format_table,
    format_touchstone,
    load_config,
    parse_csv_complex,
    parse_csv_complex_text,
    parse_csv_sweep_text,
    parse_loss_csv,
    parse_option_line,
    parse_touchstone,
    parse_touchstone_text,
    read_report,
    read_traces,
    write_csv_trace,
    write_report,
)
from bridgeloss.regression import synthetic_dataset
from bridgeloss.resonator import S21Trace, linewidth_grid, simulate_s21

ROW_ZERO = "0 0 {} {} 0 0"


def ts(option, rows):
    return "\n".join([option] + rows) + "\n"


class TestTouchstone:
    def test_ri_ghz(self):
        (tr,) = parse_touchstone_text(ts("# GHz S RI R 50", ["6.0 0 0 0.318 0.0 0.318 0.0 0 0"]))
        assert tr.frequencies[0] == 6e9
        assert tr.s21[0] == 0.318 + 0j

    def test_db_format(self):
        (tr,) = parse_touchstone_text(ts("# GHz S DB R 50", ["6.0 0 0 -9.95 0 -9.95 0 0 0"]))
        assert abs(tr.s21[0]) == pytest.approx(10 ** (-9.95 / 20), rel=1e-14)
        assert abs(tr.s21[0]) == pytest.approx(0.318, abs=1e-3)

    def test_ma_format_degrees(self):
        (tr,) = parse_touchstone_text(ts("# MHz S MA R 50", ["6000 0 0 0.5 90 0.5 90 0 0"]))
        assert tr.frequencies[0] == 6e9
        assert tr.s21[0] == pytest.approx(0.5j, abs=1e-15)

    @pytest.mark.parametrize("unit, scale", [("HZ", 1), ("kHz", 1e3), ("MHz", 1e6), ("GHZ", 1e9)])
    def test_units(self, unit, scale):
        (tr,) = parse_touchstone_text(ts(f"# {unit} S RI R 50", ["2 0 0 1 0 1 0 0 0"]))
        assert tr.frequencies[0] == 2 * scale

    def test_defaults_without_option_line(self):
        (tr,) = parse_touchstone_text("1.5 0 0 0.5 0 0.5 0 0 0\n")
        assert tr.frequencies[0] == 1.5e9
        assert tr.s21[0] == pytest.approx(0.5)

    def test_comments_ignored(self):
        text = "! header\n# GHz S RI R 50\n6.0 0 0 0.3 0.1 0.3 0.1 0 0 ! trailing\n"
        (tr,) = parse_touchstone_text(text)
        assert tr.s21[0] == pytest.approx(0.3 + 0.1j)

    def test_power_blocks(self):
        text = ts("# GHz S RI R 50", [
            "! input_power_dbm = -120",
            "6.0 0 0 0.3 0 0.3 0 0 0",
            "6.1 0 0 0.4 0 0.4 0 0 0",
            "! input_power_dbm = -100",
            "6.0 0 0 0.5 0 0.5 0 0 0",
        ])
        a, b = parse_touchstone_text(text)
        assert (a.input_power, len(a), b.input_power, len(b)) == (-120.0, 2, -100.0, 1)

    def test_round_trip(self, tmp_path):
        f = linewidth_grid(6e9, 4e5, points=50)
        src = [simulate_s21(6e9, 1e6, 7e5, 0.1, f, 1e-3, seed=1, input_power=p) for p in (-130.0, -110.0)]
        path = tmp_path / "sweep.s2p"
        path.write_text(format_touchstone(src))
        back = parse_touchstone(path)
        for a, b in zip(src, back):
            assert np.array_equal(a.frequencies, b.frequencies)
            assert np.array_equal(a.s21, b.s21)
            assert a.input_power == b.input_power

    @pytest.mark.parametrize("text, line", [
        ("# GHz S XX R 50\n", 1),
        ("# GHz Y RI R 50\n", 1),
        ("# GHz S RI R\n", 1),
        ("# GHz S RI R 50\n6.0 0 0 0.3 0 0.3 0\n", 2),
        ("# GHz S RI R 50\n6.0 0 0 0.3 0 0.3 0 0 0\n5.9 0 0 0.3 0 0.3 0 0 0\n", 3),
        ("# GHz S RI R 50\n6.0 0 0 abc 0 0.3 0 0 0\n", 2),
        ("# GHz S RI R 50\n# GHz S RI R 50\n", 2),
        ("[Version] 2.0\n", 1),
    ])
    def test_errors_name_line(self, text, line):
        with pytest.raises(ParseError) as info:
            parse_touchstone_text(text, "f.s2p")
        assert info.value.location == f"f.s2p:{line}"

    def test_empty(self):
        with pytest.raises(ParseError, match="no data rows"):
            parse_touchstone_text("# GHz S RI R 50\n! nothing\n")

    def test_option_line(self):
        opts = parse_option_line("# khz s db r 75")
        assert (opts.freq_unit, opts.data_format, opts.reference) == ("KHZ", "DB", 75.0)
        with pytest.raises(ParseError):
            parse_option_line("# GHz MHz S RI R 50")


class TestCsv:
    def test_minimal(self):
        tr = parse_csv_complex_text("freq_hz,s21_re,s21_im\n1,1,0\n2,0.5,0.1\n3,1,0\n")
        assert len(tr) == 3
        assert tr.input_power is None
        assert tr.s21[1] == 0.5 + 0.1j

    def test_power_column(self):
        tr = parse_csv_complex_text("freq_hz,s21_re,s21_im,power_dbm\n1,1,0,-120\n2,1,0,-120\n")
        assert tr.input_power == -120.0

    def test_mixed_line_endings(self, tmp_path):
        path = tmp_path / "mixed.csv"
        path.write_bytes(b"freq_hz,s21_re,s21_im\r\n1,1,0\n2,0.5,0\r3,1,0\r\n")
        assert len(parse_csv_complex(path)) == 3

    def test_sweep_groups(self):
        text = "freq_hz,s21_re,s21_im,power_dbm\n1,1,0,-120\n2,1,0,-120\n1,1,0,-100\n"
        a, b = parse_csv_sweep_text(text)
        assert (len(a), len(b), b.input_power) == (2, 1, -100.0)
        with pytest.raises(ParseError):
            parse_csv_complex_text(text)

    @pytest.mark.parametrize("text, where", [
        ("freq,s21_re,s21_im\n1,1,0\n", "row 0"),
        ("freq_hz,s21_re\n1,1\n", "row 0"),
        ("freq_hz,s21_re,s21_im\n1,1,0\n2,x,0\n", "row 2"),
        ("freq_hz,s21_re,s21_im\n1,1\n", "row 1"),
        ("freq_hz,s21_re,s21_im\n2,1,0\n1,1,0\n", "row 2"),
    ])
    def test_errors_name_row(self, text, where):
        with pytest.raises(ParseError) as info:
            parse_csv_complex_text(text, "t.csv")
        assert info.value.location == f"t.csv: {where}"

    def test_empty(self):
        with pytest.raises(ParseError):
            parse_csv_complex_text("")
        with pytest.raises(ParseError):
            parse_csv_complex_text("freq_hz,s21_re,s21_im\n")

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**31), qi=st.floats(1e4, 3e6), phi=st.floats(-0.3, 0.3))
    def test_round_trip_17_digits(self, tmp_path_factory, seed, qi, phi):
        tr = simulate_s21(6e9, qi, 7e5, phi, linewidth_grid(6e9, 3e5, points=64), 1e-4, seed)
        path = write_csv_trace(tr, tmp_path_factory.mktemp("rt") / "t.csv")
        back = parse_csv_complex(path)
        assert np.array_equal(back.frequencies, tr.frequencies)
        assert np.array_equal(back.s21, tr.s21)
        assert format_csv_traces([back]) == path.read_text()

    def test_read_traces_dispatch(self, tmp_path):
        tr = S21Trace([1.0, 2.0], [1, 0.5])
        csv_path = write_csv_trace(tr, tmp_path / "a.csv")
        ts_path = tmp_path / "a.s2p"
        ts_path.write_text(format_touchstone([tr]))
        assert np.array_equal(read_traces(csv_path)[0].s21, read_traces(ts_path)[0].s21)
        with pytest.raises(DomainError):
            read_traces(csv_path, "xml")


class TestLossCsv:
    def test_round_trip(self, tmp_path):
        ds = synthetic_dataset(6.7e-7, 3.9e-8, noise=2e-8, seed=3)
        path = tmp_path / "loss.csv"
        path.write_text(format_loss_csv(ds))
        back = parse_loss_csv(path)
        assert back.points == ds.points

    def test_errors(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("bridge_count,loss\n0,1e-6\n1.5,2e-6\n")
        with pytest.raises(ParseError, match="row 2"):
            parse_loss_csv(path)
        path.write_text("bridge_count,loss\n0,1e-6\n0,2e-6\n")
        with pytest.raises(ParseError):
            parse_loss_csv(path)


class TestReports:
    def test_sorted_flat_json(self, tmp_path):
        path = write_report({"b_hz": 2.0, "a": np.float64(1.5), "n": np.int64(3), "q": float("inf")},
                            tmp_path / "r.json")
        text = path.read_text()
        assert list(json.loads(text)) == ["a", "b_hz", "n", "q"]
        assert read_report(path)["q"] == "inf"
        assert format_report({"a": 1.5}) == '{\n  "a": 1.5\n}\n'

    def test_rejects_nested(self):
        with pytest.raises(DomainError):
            format_report({"a": {"b": 1}})
        with pytest.raises(DomainError):
            format_report({"a": [1, 2]})

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(ReportError):
            write_report({"a": 1}, blocker / "sub" / "r.json")

    def test_table(self):
        assert format_table({"x": [1, 2], "y": [0.1, 1 / 3]}) == (
            "x,y\n1,0.10000000000000001\n2,0.33333333333333331\n")
        with pytest.raises(DomainError):
            format_table({"x": [1], "y": [1, 2]})


class TestConfig:
    def test_defaults(self, monkeypatch):
        monkeypatch.delenv(CONFIG_ENV, raising=False)
        cfg = load_config()
        assert cfg.dielectrics["SiO2"].rel_permittivity == 4
        assert cfg.dielectrics["AlOx"].rel_permittivity == 10
        assert cfg.geometry.center_width == 10e-6
        assert cfg.max_iterations == 200

    def test_file_and_env(self, tmp_path, monkeypatch):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({
            "geometry": {"center_width_um": 12, "gap_um": 6},
            "bridge": {"height_um": 2},
            "dielectrics": {"SiO2": {"thickness_nm": 5}, "resist": {"thickness_nm": 10, "rel_permittivity": 3}},
            "fit": {"max_iterations": 50},
            "output_dir": "out",
        }))
        monkeypatch.setenv(CONFIG_ENV, str(path))
        cfg = load_config()
        assert cfg.geometry.center_width == pytest.approx(12e-6)
        assert cfg.bridge.height == pytest.approx(2e-6)
        assert cfg.dielectrics["SiO2"].thickness == pytest.approx(5e-9)
        assert cfg.dielectrics["SiO2"].rel_permittivity == 4
        assert cfg.dielectrics["resist"].rel_permittivity == 3
        assert (cfg.max_iterations, cfg.output_dir) == (50, "out")

    def test_rejects_unknown_and_bad_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{"geometry": {}, "colour": 1}')
        with pytest.raises(ParseError, match="colour"):
            load_config(path)
        path.write_text('{"geometry": \n oops}')
        with pytest.raises(ParseError) as info:
            load_config(path)
        assert info.value.location.endswith(":2")
