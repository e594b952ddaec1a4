"""Strict config parsing and CLI dispatch."""

import json
import os

import numpy as np
import pytest

from thinfilmlab.cli import main
from thinfilmlab.config import ConfigError, parse_config, serialize_config


def test_defaults_fill_empty_document():
    cfg = parse_config("")
    assert cfg["solver"]["n"] == 2.5
    assert cfg["solver"]["mobility_variant"] == "entropy_consistent"
    assert cfg["grid"]["n_nodes"] == 512


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config("physics:\n  n: 2.0\n")


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="solver.nn"):
        parse_config("solver:\n  nn: 2.0\n")


def test_mobility_exponent_constraint_named():
    with pytest.raises(ConfigError, match=r"\(0, 3\)"):
        parse_config("solver:\n  n: 3.5\n")


def test_type_errors_are_reported():
    with pytest.raises(ConfigError, match="grid.n_nodes"):
        parse_config("grid:\n  n_nodes: many\n")


def test_bool_is_not_an_int():
    with pytest.raises(ConfigError, match="grid.n_nodes"):
        parse_config("grid:\n  n_nodes: true\n")


def test_cross_validation_domain():
    with pytest.raises(ConfigError, match="x_max"):
        parse_config("grid:\n  x_min: 1.0\n  x_max: 0.0\n")


def test_cross_validation_dt_ladder():
    with pytest.raises(ConfigError, match="dt_min"):
        parse_config("solver:\n  dt_init: 1.0e-18\n")


def test_cross_validation_theta_vs_precursor():
    with pytest.raises(ConfigError, match="theta_rel"):
        parse_config(
            "diagnostics:\n  theta_rel: 1.0e-7\n"
            "initial_data:\n  precursor_rel: 1.0e-6\n"
        )


def test_round_trip():
    text = "solver:\n  n: 2.2\n  t_end: 0.05\ngrid:\n  n_nodes: 130\n"
    cfg = parse_config(text)
    assert parse_config(serialize_config(cfg)) == cfg


def test_yaml_syntax_error_positions():
    with pytest.raises(ConfigError, match="line"):
        parse_config("solver:\n  n: [unclosed\n")


def _write(tmp_path, text):
    path = tmp_path / "cfg.yaml"
    path.write_text(text)
    return str(path)


FAST_RUN = (
    "grid:\n  n_nodes: 96\n"
    "solver:\n  t_end: 1.0e-4\n  dt_max: 1.0e-5\n"
    "initial_data:\n  kind: power_law\n  beta: 1.6\n"
    "output:\n  snapshots: false\n"
)


def test_cli_schema_command(capsys):
    assert main(["schema"]) == 0
    out = capsys.readouterr().out
    assert "solver:" in out
    assert "mobility exponent" in out


def test_cli_config_error_exit_code(tmp_path):
    path = _write(tmp_path, "solver:\n  n: 9.0\n")
    assert main(["run", "--config", path, "--out", str(tmp_path / "o")]) == 2


def test_cli_run_writes_artifacts(tmp_path):
    path = _write(tmp_path, FAST_RUN)
    out = tmp_path / "out"
    assert main(["run", "--config", path, "--out", str(out)]) == 0
    assert (out / "manifest.json").exists()
    assert (out / "series.csv").exists()
    assert (out / "interface.csv").exists()
    assert (out / "waiting_time.json").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["solver"]["t_end"] == 1e-4
    assert len(manifest["config_sha256"]) == 64
    assert "series.csv" in manifest["outputs"]


def test_cli_run_t_end_zero_single_snapshot(tmp_path):
    path = _write(
        tmp_path,
        "grid:\n  n_nodes: 96\nsolver:\n  t_end: 0.0\n",
    )
    out = tmp_path / "out"
    assert main(["run", "--config", path, "--out", str(out)]) == 0
    series = (out / "series.csv").read_text().strip().splitlines()
    assert len(series) == 2  # header + the t = 0 record


def test_cli_criteria_zero_profile(tmp_path):
    path = _write(
        tmp_path,
        "grid:\n  n_nodes: 96\ninitial_data:\n  amplitude: 0.0\n",
    )
    out = tmp_path / "out"
    assert main(["criteria", "--config", path, "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["mass"]["supremum"] == 0.0


def test_cli_criteria_outputs(tmp_path):
    path = _write(tmp_path, "grid:\n  n_nodes: 256\n")
    out = tmp_path / "out"
    assert main(["criteria", "--config", path, "--out", str(out)]) == 0
    for name in ("mass", "energy", "pnorm"):
        lines = (out / f"criterion_{name}.csv").read_text().splitlines()
        assert lines[0] == "r,value"
        assert len(lines) > 2


def test_cli_determinism(tmp_path):
    path = _write(tmp_path, FAST_RUN)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["run", "--config", path, "--out", str(out1)])
    main(["run", "--config", path, "--out", str(out2)])
    assert (out1 / "series.csv").read_bytes() == (out2 / "series.csv").read_bytes()
