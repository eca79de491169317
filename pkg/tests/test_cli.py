# SPDX-License-Identifier: MIT
"""Tests for the command-line front end."""

import csv
from fractions import Fraction
import json

import pytest

from pywmeq import cli, verify
from pywmeq.types import CirclePoint, SuiteResult, SystemDescriptor
from pywmeq.utils import ConfigError, InvariantError, content_hash

FIFTH = SystemDescriptor.rotation(Fraction(1, 5))


def _write(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
    return str(path)


def _metric_config():
    return {
        "system": FIFTH.to_payload(),
        "pairs": [[CirclePoint(Fraction(0)).to_payload(), CirclePoint(Fraction(2, 5)).to_payload()]],
        "stats": ["weakMean", "besicovitch", {"kind": "exceedance", "epsilon": "1/10"}],
        "schedule": [5, 10, 20],
    }


def _result(path):
    with open(path / "result.json") as f:
        return json.load(f)


def test_cli_metric(tmp_path):
    """Test the metric task with both output files."""
    config = _write(tmp_path, _metric_config())
    out = tmp_path / "out"
    assert cli.main(["metric", "--config", config, "--out", str(out), "--format", "both"]) == 0

    data = _result(out)
    record = data["record"]
    assert record["task"] == "metric"
    assert record["schema_version"] == cli.SCHEMA_VERSION
    assert record["provenance"]["schedule"] == [5, 10, 20]
    assert data["record_hash"] == content_hash(record)

    with open(out / "table.csv", newline="") as f:
        reader = csv.DictReader(f)
        assert tuple(reader.fieldnames) == cli.CSV_COLUMNS
        rows = list(reader)
    assert len(rows) == 9
    weak = {r["n"]: r for r in rows if r["statKind"] == "weakMean"}
    assert weak["10"]["num"] == "0"
    mean = {r["n"]: r for r in rows if r["statKind"] == "besicovitch"}
    assert (mean["20"]["num"], mean["20"]["den"], mean["20"]["approx"]) == ("2", "5", "0.4")

    # Same configuration, same record
    again = tmp_path / "again"
    assert cli.main(["metric", "--config", config, "--out", str(again)]) == 0
    assert _result(again)["record_hash"] == data["record_hash"]
    assert not (again / "table.csv").exists()


def test_cli_overrides(tmp_path):
    """Test that command-line options override the configuration."""
    config = cli.load_config(_write(tmp_path, _metric_config()), cli.Task.METRIC)
    args = cli.build_parser().parse_args(["metric", "--config", "x", "--seed", "7", "--schedule", "4,8"])
    args.config = tmp_path / "config.json"
    overridden = cli._configure(args)
    assert overridden.seed == 7
    assert overridden.schedule == [4, 8]
    assert overridden.probe_config.schedule == [4, 8]
    assert overridden.threads == 1
    assert content_hash(overridden.to_payload()) != content_hash(config.to_payload())

    # Worker processes only apply to sweeps
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["metric", "--config", "x", "--threads", "2"])
    args = cli.build_parser().parse_args(["sweep", "--config", "x", "--threads", "2"])
    args.config = tmp_path / "sweep.json"
    args.config.write_text(json.dumps({"system": FIFTH.to_payload()}))
    assert cli._configure(args).threads == 2


def test_cli_density(tmp_path, capsys):
    """Test the density task printing its record."""
    config = _write(
        tmp_path,
        {
            "system": FIFTH.to_payload(),
            "density": {"set": "four_blocks", "horizon": 5000},
            "schedule": [512, 1024, 2048, 4096],
        },
    )
    assert cli.main(["density", "--config", config]) == 0
    record = json.loads(capsys.readouterr().out)["record"]
    assert record["payload"]["upper_density"] == {"num": "1365", "den": "2048"}
    assert record["payload"]["lower_density"] == {"num": "341", "den": "1024"}


def test_cli_config_errors(tmp_path, capsys):
    """Test that configuration problems exit with code 2."""
    path = _write(tmp_path, '{"system": ', "broken.json")
    assert cli.main(["metric", "--config", path]) == 2
    assert f"{path}:1:" in capsys.readouterr().err

    bad_field = dict(_metric_config(), colour="blue")
    assert cli.main(["metric", "--config", _write(tmp_path, bad_field)]) == 2
    wrong_task = dict(_metric_config(), task="density")
    assert cli.main(["metric", "--config", _write(tmp_path, wrong_task)]) == 2
    bad_pair = dict(_metric_config(), pairs=[[CirclePoint(Fraction(0)).to_payload()]])
    assert cli.main(["metric", "--config", _write(tmp_path, bad_pair)]) == 2
    assert cli.main(["metric", "--config", _write(tmp_path, _metric_config()), "--schedule", "4,2"]) == 2
    assert cli.main(["metric", "--config", str(tmp_path / "missing.json")]) == 2

    with pytest.raises(ConfigError):
        cli.parse_config(["not", "an", "object"])


def test_cli_probe(tmp_path):
    """Test the probe task on a rotation point."""
    config = _write(
        tmp_path,
        {
            "system": SystemDescriptor.rotation(Fraction(89, 144)).to_payload(),
            "probe_kind": "weakMeanPoint",
            "point": CirclePoint(Fraction(1, 3)).to_payload(),
            "probe": {
                "delta_grid": ["1/8", "1/32", "1/128", "1/512"],
                "schedule": [144, 288, 576],
                "samples_per_ball": 4,
            },
        },
    )
    out = tmp_path / "out"
    assert cli.main(["probe", "--config", config, "--out", str(out)]) == 0
    record = _result(out)["record"]
    assert record["payload"]["probe"] == "weakMeanPoint"
    assert record["payload"]["result"]["verdict"] == "equicontinuous-consistent"


def test_cli_sweep_order(tmp_path):
    """Test that sweep rows follow the configuration order for any worker count."""
    payload = {
        "system": FIFTH.to_payload(),
        "sweep_convergents": 2,
        "probe": {
            "delta_grid": ["1/8", "1/32", "1/128", "1/512"],
            "schedule": [8, 16, 32],
            "samples_per_ball": 2,
            "centers": 1,
            "late_n": 16,
        },
    }
    config = _write(tmp_path, payload)
    hashes = []
    for threads in ("1", "2"):
        out = tmp_path / f"out{threads}"
        assert cli.main(["sweep", "--config", config, "--out", str(out), "--threads", threads]) == 0
        data = _result(out)
        rows = data["record"]["payload"]["rows"]
        assert [r["system"] for r in rows] == [
            SystemDescriptor.rotation(Fraction(1, 2)).to_payload(),
            SystemDescriptor.rotation(Fraction(2, 3)).to_payload(),
        ]
        hashes.append(data["record_hash"])
    assert hashes[0] == hashes[1]


def test_cli_verify(tmp_path, monkeypatch, capsys):
    """Test the verify task and its exit codes."""
    out = tmp_path / "out"
    assert cli.main(["verify", "--out", str(out)]) == 0
    record = _result(out)["record"]
    assert record["ok"]
    assert record["payload"]["passed"]

    def failing(level, rng):
        return SuiteResult("joint-visit", 1, ["joint-visit: broken"])

    monkeypatch.setitem(verify.SUITES, "joint-visit", failing)
    assert cli.main(["verify", "--level", "quick"]) == 1
    assert "FAIL" in capsys.readouterr().err


def test_cli_invariant_exit_code(tmp_path, monkeypatch, capsys):
    """Test that violated invariants exit with code 3."""

    def broken(config):
        raise InvariantError("weak mean above besicovitch")

    monkeypatch.setitem(cli.DRIVERS, cli.Task.METRIC, broken)
    assert cli.main(["metric", "--config", _write(tmp_path, _metric_config())]) == 3
    assert "[invariant] weak mean above besicovitch" in capsys.readouterr().err
