"""Command-line behavior: exit codes, output files, stderr routing."""

import json
from pathlib import Path

import pytest

from treesep.cli import main


def read_summary(out_dir):
    return json.loads((Path(out_dir) / "summary.json").read_text())


def test_oracle_run_passes(tmp_path, capsys):
    code = main(["oracle", "--d", "3", "--out-dir", str(tmp_path)])
    captured = capsys.readouterr()
    assert code == 0
    assert "[oracle] pass" in captured.out
    assert "summary.json" in captured.out
    summary = read_summary(tmp_path)
    assert summary["pass"] is True and summary["exit_code"] == 0
    entries = [e for e in summary["oracle"]["entries"] if not e.get("skipped")]
    assert entries
    for entry in entries:
        assert entry["invariance_residual"] < 1e-10
        assert entry["detailed_balance_residual"] < 1e-10


def test_invalid_density_exits_2(tmp_path, capsys):
    code = main(["speed", "--d", "3", "--rho", "1.5", "--out-dir", str(tmp_path)])
    captured = capsys.readouterr()
    assert code == 2
    assert "config error" in captured.err
    assert "[0, 1]" in captured.err
    assert not (tmp_path / "summary.json").exists()


def test_unknown_experiment_or_flag_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["warmup", "--d", "3"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["speed", "--d", "3", "--fast"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main([])


def test_line_clt_warns_and_passes(tmp_path, capsys):
    code = main(
        [
            "clt",
            "--d", "2",
            "--t", "2,6",
            "--replicas", "500",
            "--seed", "5",
            "--out-dir", str(tmp_path),
        ]
    )
    captured = capsys.readouterr()
    assert code == 0
    assert "subdiffusive" in captured.err
    summary = read_summary(tmp_path)
    assert summary["clt"]["skipped"] is True
    assert summary["variance_growth"]["below_reference"] is True


def test_worker_count_does_not_change_artifacts(tmp_path):
    outs = []
    for workers, label in ((1, "a"), (3, "b")):
        out = tmp_path / label
        code = main(
            [
                "martingale",
                "--d", "3",
                "--t", "4",
                "--replicas", "40",
                "--workers", str(workers),
                "--out-dir", str(out),
            ]
        )
        assert code == 0
        outs.append(out)
    for name in ("summary.json", "replicas.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_truncation_breach_exits_2(tmp_path, capsys):
    code = main(
        [
            "speed",
            "--d", "3",
            "--t", "30",
            "--replicas", "2",
            "--ball-radius", "3",
            "--strict-boundary", "on",
            "--out-dir", str(tmp_path),
        ]
    )
    captured = capsys.readouterr()
    assert code == 2
    assert "ball_radius" in captured.err
    summary = read_summary(tmp_path)
    assert summary["exit_code"] == 2
    assert "rerun with ball_radius" in summary["error"]


def test_config_file_with_flag_override(tmp_path, capsys):
    doc = tmp_path / "run.cfg"
    doc.write_text("experiment = simulate\nd = 3\nrho = 0.3\nt = [0, 1, 2]\nreplicas = 4\n")
    out = tmp_path / "out"
    code = main(["simulate", "--config", str(doc), "--t", "0,2,5", "--out-dir", str(out)])
    assert code == 0
    summary = read_summary(out)
    assert summary["config"]["rho"] == 0.3
    assert summary["config"]["t"] == [0.0, 2.0, 5.0]
    assert (out / "replicas.csv").exists()


def test_missing_config_file_exits_3(tmp_path, capsys):
    code = main(["simulate", "--d", "3", "--config", str(tmp_path / "absent.cfg")])
    captured = capsys.readouterr()
    assert code == 3
    assert "absent.cfg" in captured.err


def test_plots_flag_writes_svgs(tmp_path):
    code = main(
        [
            "simulate",
            "--d", "3",
            "--t", "0,1,2",
            "--replicas", "3",
            "--plots", "on",
            "--out-dir", str(tmp_path),
        ]
    )
    assert code == 0
    svgs = list(tmp_path.glob("*.svg"))
    assert svgs, "plots=on must write at least one SVG"
    assert (tmp_path / "summary.json").exists()
