import json
import subprocess
import sys

import pytest

from sohiggs.cli import ConfigError, RunConfig, load_config, main, run


def _run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_census_report(capsys):
    code, rep = _run_json(capsys, ["census", "--n", "3", "--g", "2"])
    assert code == 0
    assert rep["schema"] == "sohiggs-report/1"
    assert rep["failures"] == 0
    assert rep["rows"][0]["total"] == 101


@pytest.mark.parametrize("argv", [
    ["dims", "--n", "1-3", "--g", "2-3"],
    ["hypercoh", "--n", "2-3", "--g", "2"],
    ["weyl-verify", "--n", "2-4"],
    ["positivity-closure", "--n", "2", "--samples", "5"],
    ["embed-check", "--n", "2", "--samples", "5"],
    ["triple-check", "--n", "2", "--samples", "5"],
    ["stability", "--n", "1-2", "--g", "2"],
    ["gauge-check", "--n", "1-2", "--samples", "5"],
    ["invariants-check", "--n", "1-2", "--samples", "5"],
])
def test_commands_pass(capsys, argv):
    code, rep = _run_json(capsys, argv)
    assert code == 0 and rep["failures"] == 0 and rep["rows"]


def test_reports_are_deterministic(capsys):
    argv = ["positivity-closure", "--n", "2", "--samples", "4", "--seed", "9"]
    _, a = _run_json(capsys, argv)
    _, b = _run_json(capsys, argv)
    assert a == b
    _, c = _run_json(capsys, argv[:-1] + ["10"])
    assert c["config"]["seed"] == 10


def test_csv_format(capsys):
    assert main(["census", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert "total" in lines[0].split(",") and len(lines) == 2


def test_output_env_var(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SOHIGGS_OUTPUT_DIR", str(tmp_path))
    assert main(["census"]) == 0
    assert json.loads((tmp_path / "census.json").read_text())["failures"] == 0
    explicit = tmp_path / "sub" / "x.csv"
    assert main(["census", "--format", "csv", "--output", str(explicit)]) == 0
    assert "total" in explicit.read_text().splitlines()[0]
    assert capsys.readouterr().out == ""


def test_run_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "census", "n": "3-4", "g": [2]}))
    code, rep = _run_json(capsys, ["run", str(cfg)])
    assert code == 0 and len(rep["rows"]) == 2


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "command": "census",\n  "n": ,\n}')
    assert main(["run", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "bad.json:3:" in err
    extra = tmp_path / "extra.json"
    extra.write_text(json.dumps({"command": "census", "colour": 1}))
    with pytest.raises(ConfigError):
        load_config(str(extra))
    with pytest.raises(ConfigError):
        run(RunConfig("nope"))
    with pytest.raises(ConfigError):
        RunConfig("census", fmt="xml")


def test_bad_range_rejected():
    with pytest.raises(SystemExit):
        main(["census", "--n", "x"])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sohiggs", "census", "--n", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["rows"][0]["total"] == 101
