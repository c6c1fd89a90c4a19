"""Batch CLI: exit codes, tagged errors, report schema, byte determinism,
config-file precedence."""

import csv
import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from exdev.cli import main

SCHEMA_PATH = Path(__file__).resolve().parents[1] / "src" / "exdev" / "schema" / "report-v1.json"


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


# --- validation and exit codes ------------------------------------------------

def test_missing_subcommand(capsys):
    code, _, err = run_cli([], capsys)
    assert code == 2
    assert err.startswith("ERROR ")


def test_unknown_density_is_config_invalid(capsys):
    code, _, err = run_cli(["tilt", "--density", "pareto"], capsys)
    assert code == 2
    assert err.startswith("ERROR CONFIG_INVALID:")


def test_weibull_without_k_is_config_missing(capsys):
    code, _, err = run_cli(["tilt", "--density", "weibull"], capsys)
    assert code == 2
    assert err.startswith("ERROR CONFIG_MISSING:")


def test_bad_seed_rejected(capsys):
    code, _, err = run_cli(["tilt", "--density", "weibull", "--k", "3",
                            "--seed", "-1"], capsys)
    assert code == 2
    assert err.startswith("ERROR CONFIG_INVALID:")


def test_unknown_flag_rejected(capsys):
    code, _, err = run_cli(["tilt", "--no-such-flag", "1"], capsys)
    assert code == 2
    assert err.startswith("ERROR CONFIG_INVALID:")


def test_missing_config_file(capsys):
    code, _, err = run_cli(["tilt", "--config", "/nonexistent/x.cfg"], capsys)
    assert code == 2
    assert err.startswith("ERROR CONFIG_MISSING:")


def test_config_experiment_mismatch(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("experiment = dlp\ndensity = weibull\nk = 2.5\n")
    code, _, err = run_cli(["tilt", "--config", str(cfg)], capsys)
    assert code == 2
    assert err.startswith("ERROR CONFIG_INVALID:")


def test_duplicate_config_key(tmp_path, capsys):
    cfg = tmp_path / "dup.cfg"
    cfg.write_text("density = weibull\ndensity = weibull\nk = 3\n")
    code, _, err = run_cli(["tilt", "--config", str(cfg)], capsys)
    assert code == 2
    assert err.startswith("ERROR CONFIG_INVALID:")


def test_domain_error_exits_two(capsys):
    # k = 1 is outside the admissible tail range
    code, _, err = run_cli(["tilt", "--density", "weibull", "--k", "1.0"], capsys)
    assert code == 2
    assert err.startswith("ERROR ")


# --- version -------------------------------------------------------------------

def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "exdev 0.1.0 (report schema 1)" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "exdev", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "exdev 0.1.0" in proc.stdout


# --- report shape -----------------------------------------------------------------

@pytest.fixture(scope="module")
def tilt_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "tiltrun"
    code = main(["tilt", "--density", "weibull", "--k", "3",
                 "--t-min", "10", "--t-max", "1000", "--t-count", "5",
                 "--out", str(out)])
    assert code == 0
    return out


def test_report_validates_against_schema(tilt_report):
    report = json.loads((tilt_report.parent / "tiltrun.json").read_text())
    schema = json.loads(SCHEMA_PATH.read_text())
    jsonschema.validate(report, schema)
    assert report["schema_version"] == "1"
    assert report["experiment"] == "tilt"
    assert all(isinstance(v, str) for v in report["config"].values())


def test_report_contents_sane(tilt_report):
    report = json.loads((tilt_report.parent / "tiltrun.json").read_text())
    res = report["results"]
    assert res["skew_monotone_decreasing"] is True
    assert abs(res["final_m_dev"]) < 1e-3
    assert res["self_neglect_decreasing"] is True


def test_csv_output_format(tilt_report):
    raw = (tilt_report.parent / "tiltrun.csv").read_bytes()
    assert b"\r\n" not in raw  # unix line endings regardless of platform
    with open(tilt_report.parent / "tiltrun.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "t"
    assert len(rows) == 6
    float(rows[1][0])  # numeric cells round-trip


def test_stdout_json_when_no_out(capsys):
    code, out, _ = run_cli(["equiv", "--density", "weibull", "--k", "2.5",
                            "--n", "16", "--a-n", "2.0", "--count", "5000"],
                           capsys)
    assert code == 0
    report = json.loads(out)
    assert report["experiment"] == "equiv"
    jsonschema.validate(report, json.loads(SCHEMA_PATH.read_text()))


# --- determinism --------------------------------------------------------------------

def test_byte_identical_reruns(tmp_path):
    args = ["dlp", "--density", "weibull", "--k", "2.5", "--n-list", "16,64",
            "--count", "4000", "--seed", "3"]
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    b1 = (tmp_path / "r1.json").read_bytes()
    b2 = (tmp_path / "r2.json").read_bytes()
    # reports differ only in the self-referential out path
    assert b1.replace(b"r1", b"rX") == b2.replace(b"r2", b"rX")
    same = tmp_path / "same"
    assert main(args + ["--out", str(same)]) == 0
    first = (tmp_path / "same.json").read_bytes()
    assert main(args + ["--out", str(same)]) == 0
    assert (tmp_path / "same.json").read_bytes() == first


def test_seed_changes_results(tmp_path):
    base = ["equiv", "--density", "weibull", "--k", "2.5", "--n", "16",
            "--a-n", "2.0", "--count", "5000"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(base + ["--seed", "1", "--out", str(a)]) == 0
    assert main(base + ["--seed", "2", "--out", str(b)]) == 0
    ra = json.loads((tmp_path / "a.json").read_text())
    rb = json.loads((tmp_path / "b.json").read_text())
    assert ra["results"]["p_exceedance"] != rb["results"]["p_exceedance"]
    assert ra["seed"] == 1 and rb["seed"] == 2


# --- config precedence ------------------------------------------------------------------

def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("# tilt sweep\nexperiment = tilt\ndensity = weibull\n"
                   "k = 2\nt-count = 4\n")
    out = tmp_path / "sweep"
    code, _, _ = run_cli(["tilt", "--config", str(cfg), "--k", "3",
                          "--t-min", "10", "--t-max", "100",
                          "--out", str(out)], capsys)
    assert code == 0
    report = json.loads((tmp_path / "sweep.json").read_text())
    assert report["config"]["k"] == "3"       # flag wins
    assert report["config"]["t-count"] == "4"  # config wins over default
    with open(tmp_path / "sweep.csv", newline="") as fh:
        assert len(list(csv.reader(fh))) == 1 + 4


def test_underscore_keys_normalized(tmp_path, capsys):
    cfg = tmp_path / "u.cfg"
    cfg.write_text("density = weibull\nk = 3\nt_count = 3\nt_min = 10\nt_max = 50\n")
    out = tmp_path / "norm"
    code, _, _ = run_cli(["tilt", "--config", str(cfg), "--out", str(out)],
                         capsys)
    assert code == 0
    with open(tmp_path / "norm.csv", newline="") as fh:
        assert len(list(csv.reader(fh))) == 1 + 3
