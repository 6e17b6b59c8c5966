import json

import numpy as np
import pytest

from twistpoints.errors import ScenarioError
from twistpoints.harness.cli import main, parse_block, parse_path, read_matrix_text
from twistpoints.harness.report import (CSV_SCHEMAS, REPORT_JSON_SCHEMA, VerificationReport,
                                        csv_text, strip_volatile)
from twistpoints.harness.scenario import bundled_scenarios, load_scenario, parse_scenario
from twistpoints.harness.suites import ANCHORS, verify

# theta = 2 pi / 3 makes the iterate 3 inadmissible
INADMISSIBLE = ("schema: 1\nname: t\nn: 1\nQ:\n  blocks:\n"
                "    - {family: vg, t_j: 0, theta: 2.0943951023931953}\n"
                "pairs: [[5, 3]]\nsuites: [lemma-qklit]\n")
BASE = "schema: 1\nname: t\nn: 2\nQ:\n  blocks:\n    - {family: vg, t_j: 1, theta: 1.0}\n"


# ---------------------------------------------------------------- scenarios

@pytest.mark.parametrize("name", bundled_scenarios())
def test_bundled_scenarios_round_trip(name):
    sc = load_scenario(name)
    again = parse_scenario(sc.dumps(), "round-trip")
    assert again.to_dict() == sc.to_dict()


@pytest.mark.parametrize("text, where, what", [
    (BASE.replace("theta: 1.0}", "theta: 1.0, colour: 2}"), "line 6", "unknown key 'colour'"),
    (BASE + "bogus: 3\n", "line 7, column 1", "unknown key 'bogus'"),
    (BASE.replace("schema: 1", "schema: 2"), "line 1", "schema version 2"),
    ("schema: 1\nname: t\nn: [\n", "line 4", ""),
    (BASE.replace("family: vg", "family: zz"), "line 6", "zz"),
])
def test_scenario_errors_carry_positions(text, where, what):
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text, "bad.yaml")
    assert where in str(exc.value) and what in str(exc.value)


def test_unknown_scenario_name():
    with pytest.raises(ScenarioError):
        load_scenario("no-such-scenario")


def test_fraction_strings_stay_exact():
    sc = load_scenario("twist_gap_primes")
    report, _ = verify(sc)
    assert report.passed
    assert [r.passed for r in report.records if r.check == "exact-arithmetic"] == [True]
    means = [r.as_dict()["detail"]["mean"] for r in report.records if r.check == "case2-eventual"]
    assert "-7/3" in means


# ---------------------------------------------------------------- reports

def test_report_schema_and_anchors():
    jsonschema = pytest.importorskip("jsonschema")
    report, plots = verify(load_scenario("case3_theta1_k13_l11"))
    doc = json.loads(report.dumps())
    jsonschema.validate(doc, REPORT_JSON_SCHEMA)
    assert all(r.anchor == ANCHORS[r.check] for r in report.records)
    back = VerificationReport.loads(report.dumps())
    assert strip_volatile(back.dumps()) == strip_volatile(report.dumps())
    for kind, rows in plots.items():
        text = csv_text(kind, rows)
        assert text.splitlines()[0] == ",".join(CSV_SCHEMAS[kind])
        assert "\r" not in text


def test_thread_count_does_not_change_output():
    sc = load_scenario("theorem2_n1")
    one, _ = verify(sc, ["theorem2-cases", "le-q"], threads=1)
    two, _ = verify(sc, ["le-q", "theorem2-cases"], threads=2)
    assert [r.suite for r in one.records][0] == "le-q"
    assert strip_volatile(one.dumps()) == strip_volatile(two.dumps())


def test_suite_errors_become_failed_records():
    sc = parse_scenario(BASE + "pairs: [[13, 11]]\nh:\n  fixed_points: []\n", "x")
    with pytest.raises(ScenarioError):
        verify(sc, ["le-pandh"])
    sc = parse_scenario(INADMISSIBLE, "x")
    report, _ = verify(sc, ["lemma-qklit"])
    assert not report.passed
    assert [r.check for r in report.records] == ["admissible"]


# ---------------------------------------------------------------- CLI

def test_block_and_matrix_parsing():
    assert parse_block("R 0.5").params["theta"] == 0.5
    assert parse_block("Nm -1 1,0").params["b"] == (1.0, 0.0)
    assert parse_block("Q 1.5 0.7 2").params["m"] == 2
    M = read_matrix_text("2 0\n0 0.5\n", "m")
    assert np.array_equal(M, np.diag([2.0, 0.5]))
    assert parse_path("exp S=diag(1,-1)").n == 1


@pytest.mark.parametrize("argv, code, expect", [
    (["normal-form", "--block", "R 0.7853981633974483"], 0, "UnitNonReal(0.785398163397)x1"),
    (["normal-form", "--block", "M 2", "--block", "R 1"], 0, "PositiveReal(2)x1"),
    (["log", "--block", "R 0.5"], 0, "signs [1]"),
    (["index", "exp S=I2"], 0, "cz -1"),
    (["index", "exp S=diag(1,-1)"], 0, "cz 0"),
    (["index", "gen X=[[0,-6.283185307179586],[6.283185307179586,0]]"], 1, "degenerate"),
    (["primes", "--start", "10", "--count", "5"], 0, "primes 11 13 17 19 23"),
    (["primes", "--count", "0"], 2, ""),
    (["normal-form", "--block", "X 1"], 2, ""),
    (["verify", "--scenario", "no-such-scenario"], 2, ""),
    (["verify", "--scenario", "case3_theta1_k13_l11", "--suite", "bogus"], 2, ""),
    (["frobnicate"], 2, ""),
])
def test_cli_exit_codes(argv, code, expect, capsys):
    assert main(argv) == code
    assert expect in capsys.readouterr().out


def test_cli_matrix_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 0\n0 x\n")
    assert main(["normal-form", "--matrix", str(bad)]) == 2
    assert "line 2, column 3" in capsys.readouterr().err
    good = tmp_path / "good.txt"
    good.write_text("2 0\n0 0.5\n")
    assert main(["normal-form", "--matrix", str(good)]) == 0
    assert "PositiveReal(2)x1" in capsys.readouterr().out


def test_cli_verify_writes_outputs(tmp_path, capsys):
    assert main(["verify", "--scenario", "case3_theta1_k13_l11", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "verdict: pass" in out
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["verdict"] == "pass" and "volatile" in doc
    csv = (tmp_path / "eigenvalue_distance.csv").read_bytes()
    assert csv.startswith(b"suite,pair,t,eig_dist_to_one\n") and b"\r" not in csv


def test_cli_index_csv(tmp_path):
    assert main(["index", "exp S=I2", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "index_path.csv").read_text().splitlines()
    assert lines[0] == "t,winding,eig_dist_to_one" and len(lines) == 66


def test_cli_failing_scenario_exits_one(tmp_path):
    p = tmp_path / "inadmissible.yaml"
    p.write_text(INADMISSIBLE)
    assert main(["verify", "--scenario", str(p)]) == 1
