"""CLI tests: config parsing, every subcommand, exit codes, manifests and
byte-identical reruns.

Commands run in-process through cli.main(argv); one subprocess test covers
the installed console script.
"""
import json
import subprocess
import sys

import pytest

from urnbound import cli
from urnbound.cli import ConfigError, parse_config

TWO_COLOR = """\
# two-color experiment
0.7, 0.3
0.4, 0.6
initial = 1, 0
horizon = 12
thresholds = 0.1, 0.2, 0.3, 0.4
replicas = 2000
seed = 11
statistic = eigen:0
mode = exact
"""

JORDAN_TEXT = """\
0.625, 0.375, 0
0.125, 0.375, 0.5
0.25, 0.25, 0.5
initial = 1, 0, 0
horizon = 40
seed = 4
statistic = eigen:0
"""


def write(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(argv):
    return cli.main(argv)


# -- config parsing -------------------------------------------------------------

def test_parse_flat_config():
    cfg = parse_config(TWO_COLOR)
    assert cfg.matrix == [[0.7, 0.3], [0.4, 0.6]]
    assert cfg.initial == [1.0, 0.0]
    assert cfg.horizon == 12
    assert cfg.thresholds == [0.1, 0.2, 0.3, 0.4]
    assert cfg.replicas == 2000
    assert cfg.seed == 11
    assert cfg.mode == "exact"


def test_parse_json_config():
    cfg = parse_config(json.dumps({
        "matrix": [[0.7, 0.3], [0.4, 0.6]],
        "horizon": 5,
        "thresholds": [0.1],
        "statistic": "color:0",
    }))
    assert cfg.matrix == [[0.7, 0.3], [0.4, 0.6]]
    assert cfg.statistic == "color:0"
    assert cfg.seed == 0  # default


def test_parse_rejects_unknown_key():
    with pytest.raises(ConfigError):
        parse_config("0.5, 0.5\n0.5, 0.5\nbogus = 1\n")
    with pytest.raises(ConfigError):
        parse_config('{"matrix": [[0.5,0.5],[0.5,0.5]], "bogus": 1}')


def test_parse_rejects_missing_matrix():
    with pytest.raises(ConfigError):
        parse_config("horizon = 5\n")


def test_parse_rejects_bad_row():
    with pytest.raises(ConfigError):
        parse_config("0.5, x\n0.5, 0.5\n")


# -- commands -------------------------------------------------------------------

def test_spectrum_two_color(tmp_path):
    cfg = write(tmp_path, TWO_COLOR)
    out = tmp_path / "out"
    assert run(["spectrum", "--config", cfg, "--out", str(out)]) == 0
    payload = json.loads((out / "spectrum.json").read_text())
    assert payload["pi"] == pytest.approx([4 / 7, 3 / 7], abs=1e-12)
    assert payload["eigenvalues"][1]["value"] == pytest.approx(0.3, abs=1e-12)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "spectrum"
    assert manifest["seed"] == 11
    assert len(manifest["config_sha256"]) == 64
    assert "timestamp" not in manifest


def test_simulate_writes_trajectory(tmp_path):
    cfg = write(tmp_path, TWO_COLOR)
    out = tmp_path / "out"
    assert run(["simulate", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "time,count_0,count_1,draw"
    assert lines[1] == "0,1,0,"
    assert len(lines) == 14  # header + 13 states


def test_simulate_json_format(tmp_path):
    cfg = write(tmp_path, TWO_COLOR)
    out = tmp_path / "out"
    assert run(["simulate", "--config", cfg, "--out", str(out),
                "--format", "json"]) == 0
    rows = json.loads((out / "trajectory.json").read_text())
    assert rows[0]["draw"] is None
    assert rows[0]["count_0"] == 1
    assert len(rows) == 13


def test_decompose_simple_eigenvalue(tmp_path):
    cfg = write(tmp_path, TWO_COLOR)
    out = tmp_path / "out"
    assert run(["decompose", "--config", cfg, "--out", str(out)]) == 0
    summary = json.loads((out / "decompose.json").read_text())
    assert summary["eigenvalue"] == pytest.approx(0.3, abs=1e-12)
    assert summary["residual"] <= 1e-9
    lines = (out / "expansion.csv").read_text().splitlines()
    assert lines[0] == "j,weight,increment,partial_sum"
    assert len(lines) == 13


def test_decompose_jordan_chain(tmp_path):
    cfg = write(tmp_path, JORDAN_TEXT)
    out = tmp_path / "out"
    assert run(["decompose", "--config", cfg, "--out", str(out)]) == 0
    summary = json.loads((out / "decompose.json").read_text())
    assert summary["eigenvalue"] == pytest.approx(0.25, abs=1e-12)
    assert summary["residual"] <= 1e-9
    assert "zeroth_xi2" in summary
    lines = (out / "expansion.csv").read_text().splitlines()
    assert lines[0].startswith("j,direct_weight,direct_increment")


def test_decompose_requires_eigen_statistic(tmp_path):
    cfg = write(tmp_path, TWO_COLOR.replace("statistic = eigen:0",
                                            "statistic = color:0"))
    assert run(["decompose", "--config", cfg,
                "--out", str(tmp_path / "o")]) == 1


def test_bound_reports(tmp_path):
    cfg = write(tmp_path, TWO_COLOR)
    out = tmp_path / "out"
    assert run(["bound", "--config", cfg, "--out", str(out)]) == 0
    payload = json.loads((out / "bounds.json").read_text())
    assert len(payload["reports"]) == 4
    report = payload["reports"][0]
    assert sorted(report) == ["increment_bounds", "n", "rate_value",
                              "regime", "statistic", "sum_sq", "t", "tail"]
    assert len(payload["zeroth_shifts"]) == 4


def test_verify_exact_two_color(tmp_path):
    cfg = write(tmp_path, TWO_COLOR)
    out = tmp_path / "out"
    assert run(["verify", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "dominance.csv").read_text().splitlines()
    assert lines[0] == "n,t,bound,probability,mode,margin,pass"
    assert len(lines) == 5
    assert all(line.endswith(",true") for line in lines[1:])
    assert all(",exact," in line for line in lines[1:])


def test_verify_mc_mode(tmp_path):
    text = TWO_COLOR.replace("mode = exact", "mode = mc").replace(
        "horizon = 12", "horizon = 50").replace(
        "thresholds = 0.1, 0.2, 0.3, 0.4", "thresholds = 0.2, 0.3, 0.5")
    cfg = write(tmp_path, text)
    out = tmp_path / "out"
    assert run(["verify", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "dominance.csv").read_text().splitlines()
    assert all(",mc," in line for line in lines[1:])


def test_verify_auto_picks_exact_for_small_horizon(tmp_path):
    cfg = write(tmp_path, TWO_COLOR.replace("mode = exact", "mode = auto"))
    out = tmp_path / "out"
    assert run(["verify", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "dominance.csv").read_text().splitlines()
    assert all(",exact," in line for line in lines[1:])


def test_verify_color_statistic(tmp_path):
    text = TWO_COLOR.replace("statistic = eigen:0", "statistic = color:0")
    cfg = write(tmp_path, text)
    out = tmp_path / "out"
    assert run(["verify", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "dominance.csv").read_text().splitlines()
    assert all(line.endswith(",true") for line in lines[1:])


def test_verify_vector_statistic(tmp_path):
    text = TWO_COLOR.replace("statistic = eigen:0",
                             "statistic = vector:0.75,-1")
    cfg = write(tmp_path, text)
    out = tmp_path / "out"
    assert run(["verify", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "dominance.csv").read_text().splitlines()
    assert all(line.endswith(",true") for line in lines[1:])


def test_sweep_over_horizons(tmp_path):
    text = TWO_COLOR.replace("horizon = 12", "horizons = 8, 12")
    cfg = write(tmp_path, text)
    out = tmp_path / "out"
    assert run(["sweep", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "dominance.csv").read_text().splitlines()
    assert len(lines) == 9  # header + 2 horizons x 4 thresholds
    assert {line.split(",")[0] for line in lines[1:]} == {"8", "12"}


def test_exit_code_on_config_error(tmp_path):
    cfg = write(tmp_path, "horizon = 5\n")
    assert run(["simulate", "--config", cfg,
                "--out", str(tmp_path / "o")]) == 1


def test_exit_code_on_empty_thresholds(tmp_path):
    cfg = write(tmp_path, TWO_COLOR.replace(
        "thresholds = 0.1, 0.2, 0.3, 0.4", "thresholds ="))
    assert run(["verify", "--config", cfg,
                "--out", str(tmp_path / "o")]) == 1


def test_exit_code_on_missing_config(tmp_path):
    assert run(["simulate", "--config", str(tmp_path / "nope.cfg"),
                "--out", str(tmp_path / "o")]) == 1


def test_exit_code_on_reducible_matrix(tmp_path):
    cfg = write(tmp_path, "1, 0\n0, 1\nhorizon = 5\n")
    assert run(["spectrum", "--config", cfg,
                "--out", str(tmp_path / "o")]) == 2


def test_exit_code_on_complex_spectrum(tmp_path):
    cfg = write(tmp_path,
                "0.1, 0.9, 0\n0, 0.1, 0.9\n0.9, 0, 0.1\nhorizon = 5\n")
    assert run(["spectrum", "--config", cfg,
                "--out", str(tmp_path / "o")]) == 2


def test_exit_code_on_dominance_failure(tmp_path, monkeypatch):
    # force an impossible truth to exercise the failure path
    cfg = write(tmp_path, TWO_COLOR)

    def fake_truths(cfg_, S, stat, reports, n, c0, threads):
        return [1.0] * len(reports), "exact"

    monkeypatch.setattr(cli, "_truths", fake_truths)
    assert run(["verify", "--config", cfg,
                "--out", str(tmp_path / "o")]) == 3


def test_seed_flag_overrides_config(tmp_path):
    cfg = write(tmp_path, TWO_COLOR)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    run(["simulate", "--config", cfg, "--out", str(out_a), "--seed", "99"])
    run(["simulate", "--config", cfg, "--out", str(out_b)])
    a = (out_a / "trajectory.csv").read_text()
    b = (out_b / "trajectory.csv").read_text()
    assert a != b
    manifest = json.loads((out_a / "manifest.json").read_text())
    assert manifest["seed"] == 99


def test_threads_env_fallback(tmp_path, monkeypatch):
    cfg = write(tmp_path, TWO_COLOR)
    out = tmp_path / "out"
    monkeypatch.setenv("URNBOUND_THREADS", "3")
    run(["spectrum", "--config", cfg, "--out", str(out)])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["threads"] == 3


@pytest.mark.parametrize("command,files", [
    ("simulate", ["trajectory.csv", "manifest.json"]),
    ("decompose", ["expansion.csv", "decompose.json", "manifest.json"]),
    ("verify", ["dominance.csv", "bounds.json", "manifest.json"]),
])
def test_reruns_are_byte_identical(tmp_path, command, files):
    cfg = write(tmp_path, TWO_COLOR)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert run([command, "--config", cfg, "--out", str(out_a)]) == 0
    assert run([command, "--config", cfg, "--out", str(out_b)]) == 0
    for name in files:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_console_script_entry(tmp_path):
    cfg = write(tmp_path, TWO_COLOR)
    out = tmp_path / "out"
    proc = subprocess.run(
        [sys.executable, "-m", "urnbound", "spectrum",
         "--config", cfg, "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert (out / "spectrum.json").exists()
