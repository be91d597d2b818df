import json
import math
from fractions import Fraction

import pytest

from heatchern.cli import main
from heatchern.report import CheckRecord, Report, emit
from heatchern.scenario import ScenarioError, _parse_angle, parse_scenario
from heatchern.suites import run_suite


def write_scn(tmp_path, text, name="case.scn"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# -- scenario grammar ----------------------------------------------------

def test_parse_full_scenario(tmp_path):
    path = write_scn(tmp_path, """
# comment line
suite spectral
n 4
a 2
angles 0.8   # trailing comment
R 1 2 1 2 -5/2
geometry sphere
action rotation pi/2
t-grid 0.1 0.5
cutoff 30
tolerance 1e-9
seed 7
format csv
""")
    cfg = parse_scenario(path)
    assert cfg.suite == "spectral"
    assert cfg.angles == (0.8,)
    assert cfg.curvature[(1, 2, 1, 2)] == Fraction(-5, 2)
    assert cfg.action_kind == "rotation"
    assert cfg.action_params[0] == pytest.approx(math.pi / 2)
    assert cfg.t_grid == (0.1, 0.5)
    assert cfg.seed == 7
    assert cfg.format == "csv"


def test_angle_forms():
    assert _parse_angle("pi") == pytest.approx(math.pi)
    assert _parse_angle("pi/2") == pytest.approx(math.pi / 2)
    assert _parse_angle("3pi/4") == pytest.approx(3 * math.pi / 4)
    assert _parse_angle("0.25") == 0.25
    with pytest.raises(ScenarioError):
        _parse_angle("pix2")


def test_curvature_include(tmp_path):
    write_scn(tmp_path, "R 1 2 1 2 3\nR 3 4 3 4 1/3\n", name="curv.inc")
    path = write_scn(tmp_path, "suite algebra\ncurvature curv.inc\n")
    cfg = parse_scenario(path)
    assert cfg.curvature[(3, 4, 3, 4)] == Fraction(1, 3)


def test_nested_include_rejected(tmp_path):
    write_scn(tmp_path, "curvature other.inc\n", name="curv.inc")
    write_scn(tmp_path, "R 1 2 1 2 1\n", name="other.inc")
    path = write_scn(tmp_path, "curvature curv.inc\n")
    with pytest.raises(ScenarioError):
        parse_scenario(path)


@pytest.mark.parametrize("body", [
    "suite nonsense\n",
    "format yaml\n",
    "t-grid\n",
    "t-grid -1\n",
    "tolerance 0\n",
    "cutoff 0\n",
    "n 2\na 3\n",
    "n 4\na 2\nangles 0.5 0.6\n",
    "R 1 2 1 2\n",
    "R 1 2 1 2 x/y\n",
    "action shear 1\n",
    "action rotation\n",
    "wibble 3\n",
    "curvature missing.inc\n",
])
def test_bad_scenarios(tmp_path, body):
    path = write_scn(tmp_path, body)
    with pytest.raises(ScenarioError):
        parse_scenario(path)


def test_error_carries_line_number(tmp_path):
    path = write_scn(tmp_path, "suite algebra\nwibble 3\n")
    with pytest.raises(ScenarioError, match="line 2"):
        parse_scenario(path)


def test_missing_scenario_file():
    with pytest.raises(ScenarioError):
        parse_scenario("/nonexistent/nowhere.scn")


# -- report serialization ------------------------------------------------

def sample_report():
    rep = Report(suite="demo", seed=3)
    rep.add(CheckRecord("b-check", "n=2", 1.0, 1.0 + 1e-18, 1e-8, True,
                        runtime=0.5))
    rep.add(CheckRecord("a-check", "x, \"quoted\"", Fraction(1, 3), "err",
                        None, False, runtime=0.1))
    return rep


def test_text_report_lines():
    text = emit(sample_report(), "text")
    lines = text.splitlines()
    assert lines[0] == "suite: demo (seed 3)"
    assert lines[1].startswith("[FAIL] a-check:")
    assert lines[2].startswith("[PASS] b-check:")
    assert lines[-1] == "summary: FAIL (1 passed, 1 failed)"


def test_json_report_shape():
    doc = json.loads(emit(sample_report(), "json"))
    assert doc["suite"] == "demo"
    assert doc["passed"] is False
    names = [r["name"] for r in doc["records"]]
    assert names == sorted(names)
    assert doc["records"][0]["expected"] == "1/3"


def test_csv_quoting():
    lines = emit(sample_report(), "csv").splitlines()
    assert lines[0] == "name,inputs,expected,observed,tolerance,passed"
    assert '"x, ""quoted"""' in lines[1]
    assert len(lines) == 3


def test_runtime_excluded_from_bytes():
    a, b = sample_report(), sample_report()
    for rec in b.records:
        rec.runtime = 99.0
    for fmt in ("json", "csv", "text"):
        assert emit(a, fmt) == emit(b, fmt)
    with pytest.raises(ValueError):
        emit(a, "xml")


def test_float_17_digit_round_trip():
    value = 0.1 + 0.2
    rep = Report(suite="s", seed=0,
                 records=[CheckRecord("x", "", value, value, None, True)])
    cell = json.loads(emit(rep, "json"))["records"][0]["observed"]
    assert float(cell) == value


# -- end-to-end CLI ------------------------------------------------------

def test_cli_requires_config(capsys):
    assert main([]) == 2
    assert "config" in capsys.readouterr().err


def test_cli_exit_codes_and_determinism(tmp_path, capsys):
    scn = write_scn(tmp_path, "suite spectral\ncutoff 40\nformat json\n")
    out1, out2 = str(tmp_path / "r1.json"), str(tmp_path / "r2.json")
    assert main(["--config", scn, "--out", out1]) == 0
    assert main(["verify", "--config", scn, "--out", out2]) == 0
    b1 = open(out1, "rb").read()
    assert b1 == open(out2, "rb").read()
    doc = json.loads(b1)
    assert doc["passed"] is True and doc["records"]


def test_cli_bad_config_exit_2(tmp_path, capsys):
    scn = write_scn(tmp_path, "suite nonsense\n")
    assert main(["--config", scn]) == 2
    assert main(["--config", str(tmp_path / "missing.scn")]) == 2
    assert capsys.readouterr().err


def test_cli_overrides(tmp_path, capsys):
    scn = write_scn(tmp_path, "suite spectral\nformat json\nseed 5\n")
    assert main(["--config", scn, "--suite", "torsion", "--seed", "9",
                 "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("suite: torsion (seed 9)")


def test_cli_unwritable_out_exit_2(tmp_path, capsys):
    scn = write_scn(tmp_path, "suite torsion\n")
    assert main(["--config", scn, "--out",
                 str(tmp_path / "no" / "such" / "dir.txt")]) == 2


def test_suite_failures_exit_1(tmp_path, monkeypatch, capsys):
    # starve the spectral cutoff so the tail bound cannot certify the
    # tolerance; checks must fail as records, not crash
    scn = write_scn(tmp_path, "suite spectral\ncutoff 1\ntolerance 1e-12\n"
                              "t-grid 0.05\n")
    assert main(["--config", scn]) == 1
    out = capsys.readouterr().out
    assert "[FAIL]" in out
    assert "summary: FAIL" in out


def test_run_suite_all_sections(tmp_path):
    cfg = parse_scenario(write_scn(tmp_path, "suite all\nn 4\na 2\n"
                                             "angles 0.8\ncutoff 40\n"))
    rep = run_suite(cfg)
    assert rep.passed
    prefixes = {r.name.split("/", 1)[0] for r in rep.records}
    assert {"algebra", "fixed-point", "getzler", "duhamel", "spectral",
            "torsion"} <= prefixes
