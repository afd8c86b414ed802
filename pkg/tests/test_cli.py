"""Command line entry points: exit codes, artifacts, determinism."""
from __future__ import annotations

import json

import pytest

from artbot.agent import default_scenario_path
from artbot.cli import EXIT_CONFIG, EXIT_DEADLOCK, EXIT_ERROR, EXIT_OK, main


def test_run_default_scenario(tmp_path, capsys):
    out = tmp_path / "bundle"
    code = main(["run", "--out", str(out)])
    assert code == EXIT_OK
    stdout = capsys.readouterr().out
    assert "painted 4 canvases, 4 sold" in stdout
    assert "loans repaid: 1.5/1.5" in stdout
    assert "log sha256: " in stdout
    for name in ("events.log", "timeline.csv", "summary.json"):
        assert (out / name).is_file()
    assert (out / "paintings" / "03" / "trajectory.txt").is_file()


def test_run_same_seed_is_byte_identical(tmp_path, capsys):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--seed", "5", "--out", str(out_a)]) == EXIT_OK
    assert main(["run", "--seed", "5", "--out", str(out_b)]) == EXIT_OK
    capsys.readouterr()
    assert (out_a / "events.log").read_bytes() \
        == (out_b / "events.log").read_bytes()
    assert (out_a / "summary.json").read_bytes() \
        == (out_b / "summary.json").read_bytes()


def test_run_missing_scenario_file(tmp_path, capsys):
    code = main(["run", "--scenario", str(tmp_path / "absent.json"),
                 "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_run_bad_schema_lists_keys(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"seed": "x", "mystery": 1,
                                "paintings": {"target": 0}}),
                    encoding="utf-8")
    code = main(["run", "--scenario", str(path),
                 "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "wrong type for seed" in err
    assert "unknown key: mystery" in err


def test_run_deadlock_exit_code(tmp_path, capsys):
    data = json.loads(default_scenario_path().read_text(encoding="utf-8"))
    data["bidders"] = []
    data["supplies"]["bundle_price"] = "10.0"
    data["genesis_inventory"] = {"canvases": 1, "paint_units": 1,
                                 "brushes": 1}
    path = tmp_path / "starved.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    code = main(["run", "--scenario", str(path),
                 "--out", str(tmp_path / "out")])
    assert code == EXIT_DEADLOCK
    assert "deadlock:" in capsys.readouterr().err


def test_pipeline_by_date(tmp_path, capsys):
    out = tmp_path / "art"
    code = main(["pipeline", "2021-03-22", "--out", str(out)])
    assert code == EXIT_OK
    stdout = capsys.readouterr().out
    assert "topic: Women's History Month -> 女性史月間" in stdout
    assert "coverage:" in stdout
    for name in ("raster.png", "skeleton.png", "painted.png", "strokes.svg",
                 "strokes.txt", "trajectory.txt", "metrics.json"):
        assert (out / name).is_file()
    metrics = json.loads((out / "metrics.json").read_text(encoding="utf-8"))
    assert metrics["coverage"] >= 0.95
    assert metrics["spurious"] <= 0.05


def test_pipeline_rerun_identical_artifacts(tmp_path, capsys):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["pipeline", "Women's History Month",
                 "--out", str(out_a)]) == EXIT_OK
    assert main(["pipeline", "Women's History Month",
                 "--out", str(out_b)]) == EXIT_OK
    capsys.readouterr()
    for name in ("painted.png", "strokes.txt", "trajectory.txt",
                 "metrics.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_pipeline_empty_keyword(tmp_path, capsys):
    code = main(["pipeline", "   ", "--out", str(tmp_path / "out")])
    assert code == EXIT_ERROR
    assert "empty keyword" in capsys.readouterr().err


def test_unknown_command_rejected():
    with pytest.raises(SystemExit):
        main(["paint-the-moon"])
