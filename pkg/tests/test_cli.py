import json
import subprocess
import sys

import pytest

from knotint import cli
from knotint import knots as kn


def run_cli(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dims_csv_deterministic(capsys):
    code, out1, _ = run_cli(["dims", "3", "--format", "csv"], capsys)
    assert code == 0
    code, out2, _ = run_cli(["dims", "3", "--format", "csv"], capsys)
    assert out1 == out2
    lines = out1.strip().splitlines()
    assert lines[0] == "n,dim_CD_mod_4T,dim_TD_mod_STU,equal"
    assert all(line.endswith("True") for line in lines[1:])


def test_dims_guard_exit_code(capsys):
    code, _, err = run_cli(["dims", "9"], capsys)
    assert code == cli.EXIT_GUARD
    assert "guard" in err


def test_unknown_knot_exit_code(capsys):
    code, _, err = run_cli(["v2", "nosuchknot", "--budget", "10"], capsys)
    assert code == cli.EXIT_PARSE


def test_link_command(capsys, tmp_path):
    code, out, _ = run_cli(
        ["link", "unknot", "unknot", "--budget", "1000", "--seed", "1"],
        capsys)
    # Two copies of the same circle intersect: precondition failure.
    assert code == cli.EXIT_PRECONDITION

    # A proper link via knot JSON files.
    k1, k2 = kn.hopf_link()
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    p1.write_text(json.dumps(k1.to_json_obj()))
    p2.write_text(json.dumps(k2.to_json_obj()))
    code, out, _ = run_cli(
        ["link", str(p1), str(p2), "--budget", "50000", "--seed", "7"],
        capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["oracle_crossing_count"] == 1
    assert payload["config"]["seed"] == 7
    assert abs(payload["estimate"]["value"] - 1.0) < 0.2


def test_v2_command_with_oracle(capsys):
    code, out, _ = run_cli(
        ["v2", "trefoil", "--budget", "20000", "--seed", "2"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["oracle_pv"] == 1
    assert payload["config"]["command"] == "v2"
    assert payload["result"]["seed"] == 2


def test_worker_count_does_not_change_bytes(capsys):
    args = ["v2", "trefoil", "--budget", "120000", "--seed", "5"]
    code, out1, _ = run_cli(args + ["--workers", "1"], capsys)
    assert code == 0
    code, out8, _ = run_cli(args + ["--workers", "8"], capsys)
    payload1 = json.loads(out1)
    payload8 = json.loads(out8)
    payload1["config"].pop("workers")
    payload8["config"].pop("workers")
    assert payload1 == payload8


def test_strata_command(capsys, tmp_path):
    dot = tmp_path / "poset.dot"
    code, out, _ = run_cli(
        ["strata", "4", "--mode", "interval", "--max-codim", "1",
         "--dot", str(dot)], capsys)
    assert code == 0
    payload = json.loads(out)
    assert len(payload["strata"]) == 6  # 4*3/2 consecutive runs
    assert dot.read_text().startswith("digraph")


def test_tw_command(capsys):
    code, out, _ = run_cli(
        ["tw", "v2", "2", "unknot", "--budget", "20000", "--seed", "3"],
        capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["result"]["anomaly_policy"] == "cited-zero"
    assert not payload["result"]["anomaly_warning"]


def test_universality_command(capsys):
    code, out, _ = run_cli(
        ["universality", "2; I=[1,2,3,4]; F=[]; E=[(1,3),(2,4)]"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["report"]["combinatorial_sum"] == 1


def test_universality_parse_error(capsys):
    code, _, err = run_cli(["universality", "not-a-diagram"], capsys)
    assert code == cli.EXIT_PARSE


def test_gauss_command(capsys):
    code, out, _ = run_cli(["gauss", "figure8"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["crossings"] == 4
    assert payload["pv_v2"] == -1


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "knotint.cli", "dims", "2", "--format", "csv"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].startswith("n,dim_CD")


def test_output_file(capsys, tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = run_cli(["dims", "2", "--output", str(target)], capsys)
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text())["rows"]


def test_tw_with_weight_file_and_policy_file(capsys, tmp_path):
    wfile = tmp_path / "w.json"
    wfile.write_text(json.dumps(
        {"2; I=[1,2,3,4]; F=[]; E=[(1,3),(2,4)]": 1}))
    pfile = tmp_path / "policy.json"
    pfile.write_text(json.dumps({}))
    code, out, _ = run_cli(
        ["tw", str(wfile), "2", "unknot", "--budget", "20000", "--seed", "4",
         "--anomaly-policy", f"file:{pfile}"], capsys)
    assert code == 0
    payload = json.loads(out)
    assert payload["result"]["anomaly_policy"] == "file"


def test_tw_rejects_non_primitive_weights(capsys, tmp_path):
    wfile = tmp_path / "w.json"
    wfile.write_text(json.dumps({
        "2; I=[1,2,3,4]; F=[]; E=[(1,2),(3,4)]": 2,
        "2; I=[1,2,3,4]; F=[]; E=[(1,4),(2,3)]": 2,
        "2; I=[1,2,3,4]; F=[]; E=[(1,3),(2,4)]": 2,
    }))
    code, _, err = run_cli(
        ["tw", str(wfile), "2", "unknot", "--budget", "1000"], capsys)
    assert code == cli.EXIT_PRECONDITION
    assert "primitive" in err
