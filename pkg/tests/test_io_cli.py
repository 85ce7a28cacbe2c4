import csv
import json
import os

import numpy as np
import pytest

from eigenmc import cli
from eigenmc.io import fmt, read_config_file


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def _run(*argv):
    return cli.main([str(a) for a in argv])


def test_fmt_round_trips():
    x = 0.1 + 0.2
    assert float(fmt(x)) == x
    assert fmt(True) == "true" and fmt(np.bool_(False)) == "false"
    assert fmt(np.int64(7)) == "7"
    assert fmt(float("nan")) == "nan"


def test_read_config_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\npaths = 500\ngrid_states=21  # trailing\ndump-paths\n\n")
    assert read_config_file(p) == {"paths": "500", "grid-states": "21", "dump-paths": "true"}
    p.write_text("= 3\n")
    with pytest.raises(ValueError):
        read_config_file(p)


def test_binomial_outputs(tmp_path):
    out = tmp_path / "r"
    assert _run("binomial", "--paths", 400, "--replications", 2, "--out", out) == 0
    for name in ("convergence.csv", "bands.csv", "terminal.csv", "transition_counts.csv",
                 "transition_probs.csv", "manifest.json"):
        assert (out / name).exists(), name
    rows = _rows(out / "convergence.csv")
    assert rows[0] == ["n_paths", "paper_w", "w1", "converged", "lambda_max"]
    assert rows[-1][:3] == ["400", "0", "0"]
    term = np.array(_rows(out / "terminal.csv")[1:], dtype=float)
    assert term.shape == (21, 4)
    assert abs(term[:, 2].sum() - 1) <= 1e-10 and abs(term[:, 3].sum() - 1) <= 1e-10
    man = json.loads((out / "manifest.json").read_text())
    for key in ("version", "created", "command", "config", "seeds", "solver_reports",
                "runtimes_seconds", "prices", "variance", "converged"):
        assert key in man, key
    assert man["config"]["n_paths"] == 400
    assert man["seeds"]["replication_master_seeds"] == [1, 2]


def test_metric_flag_selects_columns(tmp_path):
    assert _run("binomial", "--paths", 50, "--replications", 2, "--metric", "w1", "--out", tmp_path) == 0
    assert _rows(tmp_path / "convergence.csv")[0] == ["n_paths", "w1", "converged", "lambda_max"]
    assert _rows(tmp_path / "bands.csv")[0] == ["n_paths", "w1_mean", "w1_std"]


def test_dump_paths(tmp_path):
    assert _run("binomial", "--paths", 7, "--replications", 1, "--dump-paths", "--out", tmp_path) == 0
    rows = _rows(tmp_path / "paths.csv")
    assert rows[0] == ["path_id", "t", "value"]
    assert len(rows) == 1 + 7 * 10
    assert rows[1] == ["0", "0", "1"]


def test_diffusion_outputs(tmp_path):
    assert _run("diffusion", "--replications", 3, "--out", tmp_path) == 0
    var = _rows(tmp_path / "variance.csv")
    assert var[0] == ["state_value", "var_eigen", "var_classic"]
    assert len(var) == 42
    assert float(var[1][0]) == 80.0
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["variance"]["n_replications_classic"] == 3
    assert man["config"]["grid"]["n_states"] == 41


def test_diffusion_nonconvergence_warns(tmp_path, capsys):
    assert _run("diffusion", "--replications", 2, "--solver", "svd", "--out", tmp_path) == 0
    assert "did not converge" in capsys.readouterr().err
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["converged"] is False
    assert [e["replication"] for e in man["nonconverged"]] == [0, 1]


def test_sweep_outputs(tmp_path):
    assert _run("sweep", "--sweep-paths", "10,100", "--sweep-grid-states", "21,41", "--out", tmp_path) == 0
    rows = _rows(tmp_path / "sweep.csv")
    assert len(rows) == 5
    assert rows[0][:2] == ["n_paths", "n_states"]
    assert {r[2] for r in rows[1:]} == {"ok"}


def test_sweep_without_ranges_fails(tmp_path, capsys):
    assert _run("sweep", "--out", tmp_path) == 2
    assert "invalid configuration" in capsys.readouterr().err


def test_config_file_with_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("paths = 30\nreplications = 1\nseed = 4\n")
    out = tmp_path / "o"
    assert _run("binomial", "--config", cfg, "--seed", 5, "--out", out) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["config"]["n_paths"] == 30
    assert man["config"]["master_seed"] == 5


@pytest.mark.parametrize("argv", [
    ["binomial", "--no-such-flag", "--out", "x"],
    ["binomial"],
    ["frobnicate", "--out", "x"],
    ["binomial", "--paths", "0", "--out", "{tmp}"],
    ["binomial", "--grid-states", "1", "--out", "{tmp}"],
])
def test_usage_errors(tmp_path, argv, capsys):
    argv = [a.replace("{tmp}", str(tmp_path)) for a in argv]
    assert _run(*argv) == 2
    assert capsys.readouterr().err


def test_unreadable_config(tmp_path, capsys):
    assert _run("binomial", "--config", tmp_path / "missing.cfg", "--out", tmp_path) == 2
    assert "config" in capsys.readouterr().err


@pytest.mark.skipif(hasattr(os, "geteuid") and os.geteuid() == 0, reason="root ignores directory permissions")
def test_unwritable_out_dir_permissions(tmp_path):
    locked = tmp_path / "locked"
    locked.mkdir(mode=0o500)
    assert _run("binomial", "--paths", 5, "--out", locked / "r") == 1


def test_out_path_is_a_file(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert _run("binomial", "--paths", 5, "--replications", 1, "--out", blocker / "r") == 1
    assert "I/O" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["binomial", "--paths", "300", "--replications", "2"],
    ["diffusion", "--replications", "3"],
    ["sweep", "--sweep-paths", "10,50"],
])
def test_csv_payloads_are_byte_identical(tmp_path, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(*argv, "--out", a) == 0
    assert _run(*argv, "--out", b) == 0
    names = sorted(p.name for p in a.glob("*.csv"))
    assert names and names == sorted(p.name for p in b.glob("*.csv"))
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_workers_do_not_change_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run("binomial", "--paths", 300, "--replications", 1, "--out", a) == 0
    assert _run("binomial", "--paths", 300, "--replications", 1, "--workers", 2, "--out", b) == 0
    assert (a / "convergence.csv").read_bytes() == (b / "convergence.csv").read_bytes()


@pytest.mark.parametrize("argv", [["--help"], ["binomial", "--help"], ["diffusion", "--help"], ["sweep", "--help"]])
def test_help_exits_cleanly(argv, capsys):
    assert _run(*argv) == 0
    assert "usage" in capsys.readouterr().out
