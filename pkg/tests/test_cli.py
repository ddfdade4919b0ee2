import json

import pytest

from abtedit.cli import main
from abtedit.langspec import LETLANG_DOCUMENT


@pytest.fixture()
def spec_file(tmp_path):
    path = tmp_path / "letlang.edspec"
    path.write_text(LETLANG_DOCUMENT)
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_run_insert_plus(spec_file, capsys):
    code, out, _ = run_cli(
        capsys, "run", "--spec", spec_file, "--init-sort", "e", "-e", "{plus}.nil"
    )
    assert code == 0
    assert out.strip() == "(cursor (op plus (hole e) (hole e)))"


def test_run_parent_at_root_exit_2(spec_file, capsys):
    code, out, err = run_cli(
        capsys, "run", "--spec", spec_file, "--init-sort", "e", "-e", "parent.nil"
    )
    assert code == 2
    assert "at-root" in err


def test_run_fuel_exit_3(spec_file, capsys):
    code, _, _ = run_cli(
        capsys, "run", "--spec", spec_file, "--init-sort", "e",
        "-e", "rec X. X", "--fuel", "5",
    )
    assert code == 3


def test_run_parse_error_exit_1(spec_file, capsys):
    code, _, err = run_cli(
        capsys, "run", "--spec", spec_file, "--init-sort", "e", "-e", "child . nil"
    )
    assert code == 1
    assert "parse error" in err


def test_run_trace_output(spec_file, capsys):
    code, out, _ = run_cli(
        capsys, "run", "--spec", spec_file, "--init-sort", "e",
        "-e", "@hole_e => {plus}.nil | nil", "--output", "trace",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("ε\t")
    assert lines[1].startswith("{plus}\t")
    assert lines[2] == "-- terminal in 3 steps"


def test_run_json_output(spec_file, capsys):
    code, out, _ = run_cli(
        capsys, "run", "--spec", spec_file, "--init-sort", "e",
        "-e", "{num:5}.nil", "--output", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["status"] == "terminal"
    assert payload["finalSexpr"] == "(cursor (op num 5))"
    assert payload["finalTree"]["cursor"] is True
    assert payload["finalTree"]["node"] == "num"
    assert payload["finalTree"]["literal"] == 5


def test_run_from_tree_file(spec_file, tmp_path, capsys):
    tree = tmp_path / "prog.abt"
    tree.write_text("(let (cursor (hole e)) (bind (x) (exp (var x))))")
    code, out, _ = run_cli(
        capsys, "run", "--spec", spec_file, "--tree", str(tree), "-e", "{num:3}.nil"
    )
    assert code == 0
    assert out.strip() == "(op let (cursor (op num 3)) (bind (x) (op exp (var x))))"


def test_query(spec_file, capsys):
    code, out, _ = run_cli(
        capsys, "query", "--spec", spec_file, "--init-sort", "e", "@hole_e"
    )
    assert code == 0 and out.strip() == "true"
    code, out, _ = run_cli(
        capsys, "query", "--spec", spec_file, "--init-sort", "e", "!@hole_e"
    )
    assert code == 0 and out.strip() == "false"


def test_query_possibly_on_example_tree(spec_file, tmp_path, capsys):
    tree = tmp_path / "prog.abt"
    tree.write_text(
        "(cursor (let (num 5) (bind (x) (exp (plus (var x) (num 1))))))"
    )
    code, out, _ = run_cli(
        capsys, "query", "--spec", spec_file, "--tree", str(tree), "<>plus"
    )
    assert code == 0 and out.strip() == "true"


def test_check_soundness_exit_codes(spec_file, capsys, tmp_path):
    report = tmp_path / "report.txt"
    code, out, _ = run_cli(
        capsys, "check-soundness", "--spec", spec_file, "--root-sort", "s",
        "--cases", "25", "--seed", "11", "--report", str(report),
    )
    assert code == 0
    assert "0 mismatch" in out
    lines = report.read_text().strip().splitlines()
    assert len(lines) == 27  # one per case + text summary + json summary
    assert all(l.startswith("case ") for l in lines[:-2])
    machine = json.loads(lines[-1])
    assert machine["cases"] == 25 and machine["mismatch"] == 0


def test_check_soundness_zero_cases(spec_file, capsys):
    code, out, _ = run_cli(
        capsys, "check-soundness", "--spec", spec_file, "--root-sort", "s",
        "--cases", "0",
    )
    assert code == 0
    assert "0 cases" in out


def test_check_soundness_mutation_canary(spec_file, capsys):
    code, out, _ = run_cli(
        capsys, "check-soundness", "--spec", spec_file, "--root-sort", "s",
        "--cases", "40", "--seed", "11", "--mutate-encoding", "--quiet",
    )
    assert code == 2
    assert "mismatch" in out


def test_reproducibility_byte_identical(spec_file, capsys):
    args = (
        "check-soundness", "--spec", spec_file, "--root-sort", "s",
        "--cases", "30", "--seed", "123",
    )
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert (code1, out1) == (code2, out2)

    run_args = (
        "run", "--spec", spec_file, "--init-sort", "s",
        "-e", "{exp}.child 1. {plus}.nil", "--output", "json",
    )
    _, j1, _ = run_cli(capsys, *run_args)
    _, j2, _ = run_cli(capsys, *run_args)
    assert j1 == j2


def test_usage_errors(spec_file, capsys):
    assert run_cli(capsys, "run", "--spec", spec_file, "-e", "nil")[0] == 1
    assert run_cli(capsys, "bogus")[0] == 1
    assert (
        run_cli(
            capsys, "run", "--spec", "/no/such/file", "--init-sort", "e", "-e", "nil"
        )[0]
        == 1
    )
    assert (
        run_cli(
            capsys, "run", "--spec", spec_file, "--init-sort", "q", "-e", "nil"
        )[0]
        == 1
    )
