import json
import subprocess
import sys

import pytest

from elliptic_hopf import workbench
from elliptic_hopf.workbench import (
    CHECK_IDS, EXIT_CONFIG, EXIT_FAIL, EXIT_INTERNAL, EXIT_OK, GROUPS, ConfigError, build_config, emit_report,
    main, read_config_file, run,
)


def run_main(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_defaults_echo():
    cfg = build_config({})
    echo = cfg.echo()
    assert echo["algebra"] == "A2" and echo["Kx"] == "3" and echo["Knome"] == "4"
    assert "out" not in echo and "jobs" not in echo


def test_groups_expand_in_order():
    cfg = build_config({"check": "EE,exchange"})
    assert cfg.checks[0] == "EE" and len(cfg.checks) == len(GROUPS["exchange"])
    assert set(cfg.checks) <= set(CHECK_IDS)


@pytest.mark.parametrize("raw", [
    {"check": "bogus"}, {"algebra": "B2"}, {"Kx": "-1"}, {"Knome": "x"}, {"charges": "1"},
    {"charges": "0,1"}, {"samples": "9"}, {"box": "1,0"}, {"box": "0,1/3"}, {"format": "xml"},
    {"antipode_convention": "weird"}, {"calibrate": "maybe"}, {"jobs": "0"}, {"colour": "red"},
])
def test_config_errors(raw):
    with pytest.raises(ConfigError):
        build_config(raw)


def test_config_file(tmp_path):
    good = tmp_path / "run.cfg"
    good.write_text("# comment\nalgebra = A1\ncheck = EE  # trailing\nantipode-convention = numeric\n")
    raw = read_config_file(str(good))
    assert raw == {"algebra": "A1", "check": "EE", "antipode_convention": "numeric"}
    bad = tmp_path / "bad.cfg"
    bad.write_text("algebra = A1\nflavour = strange\n")
    with pytest.raises(ConfigError):
        read_config_file(str(bad))


def test_cli_exit_ok_json(capsys):
    code, out, _ = run_main(capsys, "--algebra", "A1", "--check", "EE")
    assert code == EXIT_OK
    d = json.loads(out)
    assert d["status"] == "pass" and d["schema_version"] == "1.0"
    assert d["checks"][0]["check"] == "EE" and "seconds" not in d["checks"][0]


def test_cli_exit_fail(capsys):
    code, out, _ = run_main(capsys, "--check", "H+E")
    assert code == EXIT_FAIL
    d = json.loads(out)
    assert d["status"] == "fail" and d["checks"][0]["report"]["witness"]


def test_cli_config_errors(capsys, tmp_path):
    assert run_main(capsys, "--check", "nonsense")[0] == EXIT_CONFIG
    assert run_main(capsys, "--algebra", "Z9")[0] == EXIT_CONFIG
    assert run_main(capsys, "--format", "yaml")[0] == EXIT_CONFIG
    cfg = tmp_path / "x.cfg"
    cfg.write_text("unknown_key = 1\n")
    code, out, err = run_main(capsys, "--config", str(cfg))
    assert code == EXIT_CONFIG and out == "" and "unknown key" in err
    assert run_main(capsys, "--config", str(tmp_path / "missing.cfg"))[0] == EXIT_CONFIG


def test_cli_internal_error(capsys, monkeypatch):
    def boom(cid, cfg, conv=None):
        raise RuntimeError("synthetic failure")
    monkeypatch.setattr(workbench, "run_check", boom)
    code, out, _ = run_main(capsys, "--check", "theta")
    assert code == EXIT_INTERNAL
    assert "synthetic failure" in json.loads(out)["checks"][0]["report"]["error"]


def test_flags_override_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("algebra = A3\ncheck = EE\n")
    code, out, _ = run_main(capsys, "--config", str(cfg), "--algebra", "A1")
    assert code == EXIT_OK and json.loads(out)["config"]["algebra"] == "A1"


def test_empty_check_list(capsys):
    code, out, _ = run_main(capsys)
    d = json.loads(out)
    assert code == EXIT_OK and d["checks"] == [] and d["summary"] == {}


def test_text_format_and_out_file(capsys, tmp_path):
    target = tmp_path / "report.txt"
    code, out, _ = run_main(capsys, "--check", "a2", "--antipode-convention", "numeric", "--format", "text",
                            "--out", str(target))
    assert code == EXIT_FAIL and out == ""
    text = target.read_text()
    assert text.splitlines()[2].startswith("overall: FAIL") and "witness:" in text


def test_calibrated_run_marks_entries(capsys):
    code, out, _ = run_main(capsys, "--check", "H+E", "--calibrate", "--box", "0,1/2")
    d = json.loads(out)
    assert code == EXIT_OK
    entry = d["checks"][0]
    assert entry["status"] == "pass-after-calibration" and entry["literal_status"] == "fail"
    cal = d["calibrations"][0]
    assert cal["targets"] == ["EE", "FF", "H"] and cal["applied"]["e_twist"] == "-p*q"
    assert cal["result"]["assignments_scanned"] == 3 ** 4 and not cal["result"]["notes"]


def test_ef_calibration_reports_offset(capsys):
    code, out, _ = run_main(capsys, "--check", "EF", "--calibrate", "--box", "0,1/2")
    d = json.loads(out)
    assert code == EXIT_OK
    first = d["checks"][0]
    assert {o["offset"] for o in first["report"]["literal_pole_offset"]} == {"p^(1/2)"}
    assert d["calibrations"][0]["applied"]["ratio_class"] == "1"


def test_timings_are_opt_in():
    cfg = build_config({"check": "theta", "timings": True})
    d = json.loads(emit_report(run(cfg), "json", True))
    assert "seconds" in d["checks"][0]


def test_parallel_run_matches_serial():
    serial = build_config({"check": "a1,a3,tau", "algebra": "A1"})
    parallel = build_config({"check": "a1,a3,tau", "algebra": "A1", "jobs": "2"})
    assert emit_report(run(serial)) == emit_report(run(parallel))


def test_module_entry_point_is_deterministic(tmp_path):
    outs = []
    for k in range(2):
        target = tmp_path / f"r{k}.json"
        proc = subprocess.run([sys.executable, "-m", "elliptic_hopf", "--algebra", "A1", "--check",
                               "EE,FF,a1,scaling", "--out", str(target)], capture_output=True, text=True)
        assert proc.returncode == EXIT_OK, proc.stderr
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point_config_error():
    proc = subprocess.run([sys.executable, "-m", "elliptic_hopf", "--check", "nope"], capture_output=True, text=True)
    assert proc.returncode == EXIT_CONFIG and proc.stdout == ""
