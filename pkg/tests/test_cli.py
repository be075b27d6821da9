from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from twocolor_hhg import cli
from twocolor_hhg.validation import CheckResult

GOLDEN = Path(__file__).parent / "golden"
AR = ["--ip-ev", "15.76", "--intensity-wcm2", "2e14", "--wavelength-nm", "800"]


def _run(argv, capsys):
    code = cli.run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def _table(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def _header(text, key):
    for ln in text.splitlines():
        if ln.startswith(f"# {key}: "):
            return ln[len(key) + 4:]
    raise KeyError(key)


# -- subcommands -------------------------------------------------------------

def test_trace_table(capsys):
    code, out, _ = _run(["trace", *AR, "--orders", "15:35:4"], capsys)
    assert code == 0
    rows = _table(out)
    assert [float(r["order"]) for r in rows if r["branch"] == "1"] == [15, 19, 23, 27, 31, 35]
    assert {"re_p", "im_p", "re_t", "im_t", "re_t0", "im_t0"} <= set(rows[0])
    assert all(float(r["residual"]) < 1e-12 for r in rows)
    short = [float(r["re_t"]) for r in rows if r["branch"] == "1"]
    long_ = [float(r["re_t"]) for r in rows if r["branch"] == "2"]
    assert all(a < b for a, b in zip(short, long_))


def test_trace_classical_shift(capsys):
    code, out, _ = _run(["trace", *AR, "--orders", "21:31:5", "--classical-shift", "--branch", "1"], capsys)
    assert code == 0
    rows = _table(out)
    assert [round(float(r["order"]), 9) for r in rows] == [21, 26, 31]
    assert all(float(r["im_t"]) == 0 for r in rows)
    shift = float(_header(out, "order_shift"))
    assert shift == pytest.approx(1.3 * 15.76 / 1.5498, rel=1e-3)


def test_trace_matches_golden(capsys):
    code, out, _ = _run(["trace", *AR, "--orders", "13:41:2"], capsys)
    assert code == 0
    got, want = _table(out), _table((GOLDEN / "trace_ar_2e14_800nm.csv").read_text())
    assert len(got) == len(want)
    for g, w in zip(got, want):
        assert g["branch"] == w["branch"] and g["physical"] == w["physical"]
        for key in ("order", "re_p", "im_p", "re_t", "im_t", "re_t0", "im_t0"):
            assert float(g[key]) == pytest.approx(float(w[key]), rel=1e-8, abs=1e-9)


def test_gamma_classical(capsys):
    code, out, _ = _run(["gamma", "--ip-ev", "0", "--intensity-wcm2", "2e14", "--wavelength-nm", "800"], capsys)
    assert code == 0
    rows = {r["branch"]: float(r["gamma"]) for r in _table(out)}
    assert abs(rows["1"] - 1.1) <= 0.05 and abs(rows["2"] - 0.84) <= 0.03


def test_insitu_merge_near_63(capsys):
    code, out, _ = _run(["insitu", "--ip-ev", "15.76", "--intensity-wcm2", "4e14", "--orders", "55:67"], capsys)
    assert code == 0
    rows = _table(out)
    by = {(float(r["order"]), r["branch"]): r for r in rows}
    d_t = abs(float(by[63.0, "1"]["t_r_over_T"]) - float(by[63.0, "2"]["t_r_over_T"]))
    d_t_low = abs(float(by[55.0, "1"]["t_r_over_T"]) - float(by[55.0, "2"]["t_r_over_T"]))
    assert d_t < 0.02 < d_t_low
    assert _header(out, "insitu_merge_at_cutoff") == "true"


def test_insitu_tau0_column(capsys):
    code, out, _ = _run(["insitu", *AR, "--orders", "21,25", "--branch", "2"], capsys)
    assert code == 0
    for r in _table(out):
        assert r["branch"] == "2"
        # tau0 = -phi0 / 2 omega in units of T/2 = pi / omega
        assert float(r["tau0"]) == pytest.approx(-float(r["phi0"]) / (2 * math.pi), rel=1e-10)


def test_spectrogram_wide_layout(capsys):
    code, out, _ = _run(["spectrogram", *AR, "--orders", "20,22", "--phi-steps", "16"], capsys)
    assert code == 0
    lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    assert header[:3] == ["mode", "order", "max_delay"] and len(header) == 3 + 16
    assert float(header[3]) == 0.0 and float(header[4]) == pytest.approx(-1 / 32, rel=1e-11)
    modes = [ln.split(",")[0] for ln in lines[1:]]
    assert modes == ["single-branch-1"] * 2 + ["single-branch-2"] * 2
    assert json.loads(_header(out, "orders")) == [20.0, 22.0]


def test_spectrogram_coherent(capsys):
    code, out, _ = _run(["spectrogram", *AR, "--orders", "20", "--mode", "coherent", "--phi-steps", "8"], capsys)
    assert code == 0
    assert [ln.split(",")[0] for ln in out.splitlines() if ln.startswith("coherent")] == ["coherent-sum"]


def test_sweep_and_universal(capsys):
    args = ["--ip-ev", "15.76", "5.14", "--intensity-wcm2", "1e14", "2e14", "--wavelength-nm", "800"]
    code, out, _ = _run(["sweep", *args], capsys)
    assert code == 0
    rows = _table(out)
    assert len(rows) == 4
    assert [r["status"] for r in rows] == ["ok"] * 4
    code, out, _ = _run(["universal", *args], capsys)
    assert code == 0
    ratios = [float(r["up_over_ip"]) for r in _table(out)]
    assert ratios == sorted(ratios) and len(ratios) == 4


def test_sweep_records_failures(capsys):
    code, out, _ = _run(["universal", "--ip-ev", "15.76", "--intensity-wcm2", "2e14", "2.5e14"], capsys)
    assert code == 0
    assert len(_table(out)) == 1
    failures = json.loads(_header(out, "failures"))
    assert failures[0]["intensity_wcm2"] == 2.5e14 and failures[0]["error"] == "nonlinearity"


def test_validate_passes(capsys):
    code, out, _ = _run(["validate", *AR], capsys)
    assert code == 0
    rows = _table(out)
    assert len(rows) == 5 and all(r["passed"] == "true" for r in rows)


# -- output format -----------------------------------------------------------

def test_byte_identical_output(capsys):
    argv = ["insitu", *AR, "--orders", "15:31:2"]
    _, first, _ = _run(argv, capsys)
    _, second, _ = _run(argv, capsys)
    assert first == second


def test_header_carries_resolved_config(capsys):
    _, out, _ = _run(["gamma", *AR, "--lambda2", "0.002"], capsys)
    config = json.loads(_header(out, "config"))
    assert config["lambda2"] == 0.002 and config["intensity_wcm2"] == [2e14]
    assert config["window"] == "interior" and config["omega_step"] == 0.05


def test_twelve_significant_digits(capsys):
    _, out, _ = _run(["trace", *AR, "--orders", "21", "--branch", "1"], capsys)
    value = _table(out)[0]["re_t"]
    assert len(value.replace("-", "").replace(".", "").lstrip("0").split("e")[0]) <= 12


def test_json_output(capsys):
    code, out, _ = _run(["gamma", *AR, "--format", "json"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["command"] == "gamma"
    names = [c["name"] for c in payload["columns"]]
    assert "gamma" in names and all("unit" in c for c in payload["columns"])
    assert len(payload["rows"]) == 2


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"ip_ev": 0.0, "intensity_wcm2": 3e14, "branch": "2"}))
    _, out, _ = _run(["gamma", "--config", str(cfg)], capsys)
    rows = _table(out)
    assert [r["branch"] for r in rows] == ["2"]
    _, out, _ = _run(["gamma", "--config", str(cfg), "--branch", "1"], capsys)
    assert [r["branch"] for r in _table(out)] == ["1"]


def test_out_path(tmp_path, capsys):
    dest = tmp_path / "g.csv"
    code, out, _ = _run(["gamma", *AR, "--out", str(dest)], capsys)
    assert code == 0 and out == ""
    assert dest.read_text().startswith("# twocolor_hhg")


# -- exit codes --------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["gamma", "--intensity-wcm2=-1e14"],
    ["gamma", "--omega-step", "0"],
    ["gamma", "--intensity-wcm2", "1e14", "2e14"],
    ["trace", "--orders", "a:b"],
    ["spectrogram", "--orders", "400"],
    ["trace", "--orders", "0:10"],
    ["gamma", "--intensity-wcm2", "0"],
    ["bogus"],
])
def test_config_errors_exit_2(argv, capsys):
    code, _, err = _run(argv, capsys)
    assert code == 2
    payload = json.loads(err.strip().splitlines()[-1])
    assert payload["exit_code"] == 2 and payload["message"]


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"intensity": 1e14}))
    code, _, err = _run(["gamma", "--config", str(cfg)], capsys)
    assert code == 2 and "unknown config keys" in err


def test_solver_error_exit_3(capsys):
    # the literal window straddles the cutoff, where the linearity guard trips
    code, _, err = _run(["gamma", *AR, "--window", "literal"], capsys)
    assert code == 3
    assert json.loads(err)["error"] == "nonlinearity"


def test_validation_failure_exit_4(monkeypatch, capsys):
    monkeypatch.setattr(cli, "run_checks", lambda traces, params: [CheckResult("action", 1.0, 1e-8, 20)])
    code, out, err = _run(["validate", *AR], capsys)
    assert code == 4
    assert _table(out)[0]["passed"] == "false"
    assert json.loads(err)["exit_code"] == 4


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "twocolor_hhg", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()
