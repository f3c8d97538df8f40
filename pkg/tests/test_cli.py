"""
Tests for the command-line interface: sub-commands, overrides and exit codes.
"""

import csv
import io
import json

import pytest

from wlanbalance.errors import ScenarioError
from wlanbalance.harness.cli import (
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_SCENARIO,
    apply_overrides,
    build_parser,
    main,
)
from wlanbalance.harness.csv_writer import CSV_HEADER

from .fixtures import SCENARIO_DIR, TestFixtures


def scenario_path(name):
    return str(SCENARIO_DIR / f"{name}.json")


def read_file(path):
    with open(path, newline="") as f:
        return f.read()


def read_rows(text):
    return list(csv.DictReader(io.StringIO(text, newline="")))


class TestParser:
    """Argument parsing"""

    def test_sweep_lists(self):
        args = build_parser().parse_args(
            ["exp1", "--scenario", "x.json", "--snr", "30,50", "--load", "480,12237", "--seeds", "1,2"]
        )
        assert args.snr == [30.0, 50.0]
        assert args.load == [480.0, 12237.0]
        assert args.seeds == [1, 2]
        assert args.jobs == 1
        assert args.backend == "auto"

    def test_default_seeds(self):
        args = build_parser().parse_args(["exp2", "--scenario", "x.json", "--snr", "80"])
        assert args.seeds == [1, 2, 3, 4, 5]
        assert args.source_snr is None


class TestValidateCommand:
    """validate prints a report and signals validity through the exit code"""

    def test_valid(self, capsys):
        assert main(["validate", "--scenario", scenario_path("minimal")]) == EXIT_OK
        assert "✅ VALID" in capsys.readouterr().out

    def test_invalid(self, capsys):
        assert main(["validate", "--scenario", scenario_path("invalid_test")]) == EXIT_SCENARIO
        out = capsys.readouterr().out
        assert "❌ INVALID" in out
        assert "chanel" in out

    def test_syntax_error(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text('{"name": ')
        assert main(["validate", "--scenario", str(path)]) == EXIT_SCENARIO
        assert "❌" in capsys.readouterr().out

    def test_missing_file(self, tmp_path):
        assert main(["validate", "--scenario", str(tmp_path / "absent.json")]) == EXIT_SCENARIO


class TestRunCommand:
    """run simulates one scenario and writes one row per traffic station"""

    def test_stdout(self, capsys):
        assert main(["run", "--scenario", scenario_path("minimal"), "--seed", "3"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith(",".join(CSV_HEADER) + "\r\n")
        rows = read_rows(out)
        assert len(rows) == 1
        assert rows[0]["station"] == "cam"
        assert rows[0]["seed"] == "3"
        assert rows[0]["snr_db"] == "50"
        assert rows[0]["throughput_kbps"] == "585"

    def test_out_file(self, tmp_path):
        out = tmp_path / "run.csv"
        argv = ["run", "--scenario", scenario_path("exp2"), "--duration", "1", "--out", str(out)]
        assert main(argv) == EXIT_OK
        rows = read_rows(read_file(out))
        assert [r["station"] for r in rows] == ["bg1", "bg2", "bg3", "cam"]
        assert {r["policy"] for r in rows} == {"lba"}
        assert next(r for r in rows if r["station"] == "cam")["handoffs"] == "1"

    def test_policy_override(self, tmp_path):
        out = tmp_path / "run.csv"
        argv = [
            "run", "--scenario", scenario_path("exp2"), "--duration", "1",
            "--policy", "strongest-snr", "--out", str(out),
        ]
        assert main(argv) == EXIT_OK
        rows = read_rows(read_file(out))
        assert {r["policy"] for r in rows} == {"strongest-snr"}
        assert {r["handoffs"] for r in rows} == {"0"}

    def test_scenario_error(self):
        assert main(["run", "--scenario", scenario_path("invalid_test")]) == EXIT_SCENARIO

    @pytest.mark.parametrize("flag,value", [("--beta", "0"), ("--beta", "-0.5"), ("--duration", "0")])
    def test_invalid_override(self, flag, value):
        assert main(["run", "--scenario", scenario_path("minimal"), flag, value]) == EXIT_SCENARIO

    def test_invalid_override_location(self):
        args = build_parser().parse_args(["run", "--scenario", "x.json", "--beta", "0"])
        with pytest.raises(ScenarioError) as excinfo:
            apply_overrides(TestFixtures.shipped("minimal"), args)
        assert excinfo.value.kind == "invariant"
        assert excinfo.value.location == "--beta"

    def test_invalid_override_on_sweep(self):
        argv = ["exp1", "--scenario", scenario_path("exp1"), "--snr", "30", "--load", "480", "--beta", "0"]
        assert main(argv) == EXIT_SCENARIO

    def test_runtime_error(self, tmp_path):
        doc = TestFixtures.minimal_document()
        doc["stations"][0]["position"] = [100000, 0]
        del doc["snr_overrides"]
        path = tmp_path / "unreachable.json"
        path.write_text(json.dumps(doc))
        # the station hears no AP, so its traffic has nowhere to go
        assert main(["run", "--scenario", str(path)]) == EXIT_RUNTIME


class TestSweepCommands:
    """exp1 and exp2 write sweep CSVs"""

    def test_exp1(self, tmp_path):
        out = tmp_path / "exp1.csv"
        argv = [
            "exp1", "--scenario", scenario_path("exp1"), "--snr", "30", "--load", "480,960",
            "--seeds", "1", "--duration", "2", "--out", str(out),
        ]
        assert main(argv) == EXIT_OK
        rows = read_rows(read_file(out))
        assert [(r["scenario"], r["seed"]) for r in rows] == [
            ("exp1/load=480", "1"),
            ("exp1/load=480", "median"),
            ("exp1/load=960", "1"),
            ("exp1/load=960", "median"),
        ]

    def test_exp2_with_source_snr(self, tmp_path):
        out = tmp_path / "exp2.csv"
        argv = [
            "exp2", "--scenario", scenario_path("exp2"), "--snr", "40", "--source-snr", "80",
            "--seeds", "1", "--duration", "2", "--out", str(out),
        ]
        assert main(argv) == EXIT_OK
        rows = read_rows(read_file(out))
        handoffs = {r["policy"]: r["handoffs"] for r in rows if r["seed"] == "1"}
        assert handoffs == {"unbalanced": "0", "lba": "1", "snr-lba": "0"}

    def test_exp2_on_single_cell(self):
        argv = ["exp2", "--scenario", scenario_path("exp1"), "--snr", "40", "--duration", "1"]
        assert main(argv) == EXIT_SCENARIO

    def test_empty_axis(self):
        argv = ["exp1", "--scenario", scenario_path("exp1"), "--snr", "", "--load", "480"]
        assert main(argv) == EXIT_SCENARIO
