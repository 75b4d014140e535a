"""Tests for the command-line front end."""

import json

import pytest

from fcollide.cli import main, parse_state
from fcollide.device import (
    device_to_dict,
    load_fixture,
)
from fcollide.floquet import FloquetState


def write_device(tmp_path, name="dev.json", control_freq=None, drives=None):
    device, schedules = load_fixture("cr2")
    data = device_to_dict(device, schedules)
    if control_freq is not None:
        data["qubits"][0]["frequency"] = control_freq
    if drives is not None:
        data["drives"] = drives
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestParseState:
    def test_round_trip_labels_and_bz(self):
        assert parse_state("1.+;0.-1") == FloquetState((1, "+"), (0, -1))

    def test_empty_bz(self):
        assert parse_state("1.0;") == FloquetState((1, 0), ())


class TestAnalyze:
    def test_quiet_point_exits_zero(self, tmp_path, capsys):
        dev = write_device(tmp_path, control_freq=4.5e9)
        code = main([
            "analyze", "--device", dev, "--schedule", "CR",
            "--order", "2", "--threshold", "0.1",
            "--output", str(tmp_path / "report.txt"),
        ])
        assert code == 0

    def test_near_resonance_exits_two_with_type_1(self, tmp_path):
        dev = write_device(tmp_path, control_freq=5.0e9 + 2e6)
        out = tmp_path / "report.txt"
        code = main([
            "analyze", "--device", dev, "--schedule", "CR",
            "--order", "1", "--threshold", "0.1",
            "--output", str(out),
        ])
        assert code == 2
        body = out.read_text()
        assert "|1" in body.splitlines()[-2]

    def test_missing_file_exits_one(self, tmp_path, capsys):
        code = main(["analyze", "--device", str(tmp_path / "nope.json")])
        assert code == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_unknown_schedule_exits_one(self, tmp_path, capsys):
        dev = write_device(tmp_path)
        code = main(["analyze", "--device", dev, "--schedule", "XX"])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestSweep:
    def test_csv_written_with_header(self, tmp_path):
        dev = write_device(tmp_path)
        csv = tmp_path / "out.csv"
        code = main([
            "sweep", "--device", dev, "--schedule", "CR", "--order", "1",
            "--axis1", "qubits.c.frequency:4.55e9:4.60e9:3",
            "--csv", str(csv),
        ])
        assert code in (0, 2)
        lines = csv.read_text().splitlines()
        assert lines[0] == (
            "axis1,axis2,order,theta_max,state_a,state_b,"
            "delta_hz,g_abs_hz,condition_type"
        )
        assert len(lines) == 4

    def test_identical_runs_identical_bytes(self, tmp_path):
        dev = write_device(tmp_path)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = [
            "sweep", "--device", dev, "--schedule", "CR", "--order", "1",
            "--axis1", "qubits.c.frequency:4.55e9:4.60e9:3",
        ]
        main(argv + ["--csv", str(a)])
        main(argv + ["--csv", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_zero_length_sweep_rejected(self, tmp_path, capsys):
        dev = write_device(tmp_path)
        code = main([
            "sweep", "--device", dev, "--schedule", "CR",
            "--axis1", "qubits.c.frequency:4.5e9:4.6e9:1",
            "--csv", str(tmp_path / "x.csv"),
        ])
        assert code == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_bad_parameter_path_rejected(self, tmp_path, capsys):
        dev = write_device(tmp_path)
        code = main([
            "sweep", "--device", dev, "--schedule", "CR",
            "--axis1", "qubits.zz.frequency:4.5e9:4.6e9:3",
            "--csv", str(tmp_path / "x.csv"),
        ])
        assert code == 1
        assert capsys.readouterr().err.startswith("error:")


class TestCensus:
    def test_counts_reported(self, tmp_path, capsys):
        dev = write_device(tmp_path)
        code = main([
            "census", "--device", dev, "--schedule", "CR",
            "--center", "t", "--max-order", "1",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "n_F=10" in out and "n_f=3" in out

    def test_max_order_zero_empty(self, tmp_path, capsys):
        dev = write_device(tmp_path)
        code = main([
            "census", "--device", dev, "--schedule", "CR",
            "--center", "t", "--max-order", "0",
        ])
        assert code == 0
        assert "empty census" in capsys.readouterr().out

    def test_unknown_center_rejected(self, tmp_path, capsys):
        dev = write_device(tmp_path)
        code = main([
            "census", "--device", dev, "--schedule", "CR", "--center", "zz",
        ])
        assert code == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_table_mode_needs_declared_centers(self, tmp_path, capsys):
        dev = write_device(tmp_path)
        code = main(["census", "--device", dev, "--table-iv"])
        assert code == 1
        assert capsys.readouterr().err.startswith("error:")


class TestFidelity:
    def test_uncoupled_pair_unit_fidelity(self, tmp_path, capsys):
        data = {
            "qubits": [
                {"id": "a", "frequency": 5.0e9, "anharmonicity": -0.3e9},
                {"id": "b", "frequency": 4.8e9, "anharmonicity": -0.3e9},
            ],
            "couplings": [],
        }
        path = tmp_path / "pair.json"
        path.write_text(json.dumps(data))
        code = main([
            "fidelity", "--device", str(path),
            "--pair", "1.0;/0.1;", "--gate-time", "100e-9",
        ])
        assert code == 0
        out = capsys.readouterr().out
        line = [l for l in out.splitlines() if l.startswith("fidelity:")][0]
        assert float(line.split()[1]) == pytest.approx(1.0)

    def test_malformed_pair_rejected(self, tmp_path, capsys):
        dev = write_device(tmp_path)
        code = main([
            "fidelity", "--device", dev, "--pair", "1.0;0",
            "--gate-time", "1e-7",
        ])
        assert code == 1
        assert capsys.readouterr().err.startswith("error:")
