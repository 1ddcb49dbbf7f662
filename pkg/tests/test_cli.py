import json
import os
import subprocess
import sys

import pytest

from ramseyfn.budget import ENV_VAR

from cli_cases import CASES, absolute, run_cli, run_to_files, write_inputs


@pytest.fixture(scope="module")
def inputs(tmp_path_factory):
    return write_inputs(tmp_path_factory.mktemp("cli"))


def case_id(case):
    return " ".join(case[0][:2]) + ("" if case[0][1] not in ("encode", "sweep") else " " + case[0][3])


@pytest.mark.parametrize("argv,status", CASES, ids=[case_id(c) for c in CASES])
def test_exit_status(argv, status, inputs):
    code, out, err = run_cli(absolute(argv, inputs))
    assert code == status, err
    assert out


@pytest.mark.parametrize("argv,status", CASES, ids=[case_id(c) for c in CASES])
def test_byte_identical_reruns(argv, status, inputs, tmp_path):
    first = run_to_files(argv, inputs, tmp_path, "a")
    second = run_to_files(argv, inputs, tmp_path, "b")
    wide = run_to_files(argv, inputs, tmp_path, "c", ["--jobs", "0"])
    assert first == second == wide
    assert first[0] == status


def test_fig2_is_irreducible(inputs):
    code, out, _ = run_cli(["core", "irreducible", str(inputs / "fig2.struct")])
    assert code == 0
    assert out == "irreducible: true\n"


def test_reducible_structure_prints_its_split(inputs):
    code, out, _ = run_cli(["core", "irreducible", str(inputs / "cherry.struct")])
    assert code == 0
    assert out.splitlines() == ["irreducible: false", "separator: b", "piece: a", "piece: c"]


def test_empty_input_is_a_parse_error(inputs):
    code, out, err = run_cli(["core", "irreducible", str(inputs / "empty.struct")])
    assert code == 2
    assert out == ""
    assert err.startswith("parse error: line 0:")


def test_missing_file(inputs):
    code, _, err = run_cli(["core", "aut", str(inputs / "nothing.struct")])
    assert code == 2 and "cannot read" in err


def test_arrow_counterexample_lands_in_certificate(inputs, tmp_path):
    code, out, cert = run_to_files(["partite", "verify-arrow", "path.struct", "path.struct", "edge.struct"],
                                   inputs, tmp_path, "arrow")
    assert code == 1
    assert out.decode().startswith("arrow: false\n")
    lines = cert.decode().splitlines()
    # the bad coloring gives the two edges of the path different colors
    assert [x for x in lines if x.startswith("counterexample:")] == [
        "counterexample: color 0 on a b", "counterexample: color 1 on b c"]
    assert "property: arrow [all 2-colorings of 2 copies] fail" in lines
    assert lines[-1] == "status: violation"


def test_certificate_layout(inputs, tmp_path):
    code, out, cert = run_to_files(["core", "closure", "fig2.struct", "--of", "a"], inputs, tmp_path, "cl")
    lines = cert.decode().splitlines()
    assert lines[0] == "ramseyfn certificate"
    assert lines[1] == f"command: core closure {inputs / 'fig2.struct'} --of a"
    assert lines[2].startswith(f"input: {inputs / 'fig2.struct'} sha256=")
    assert lines[3].startswith("budget: ")
    assert lines[-1] == "status: ok"


def test_induce_refuses_an_open_set(inputs):
    code, _, err = run_cli(["core", "induce", str(inputs / "fig2.struct"), "--of", "a"])
    assert code == 2
    assert "not closed" in err


def test_usage_errors_exit_2(inputs):
    assert run_cli(["core"])[0] == 2
    assert run_cli(["core", "closure", str(inputs / "fig2.struct"), "--of", "zz"])[0] == 2
    assert run_cli(["--help"])[0] == 0


def test_budget_env_var_and_flag(inputs, tmp_path, monkeypatch):
    tight = tmp_path / "tight.json"
    tight.write_text(json.dumps({"max_subsets": 3}))
    loose = tmp_path / "loose.json"
    loose.write_text(json.dumps({"max_subsets": 10 ** 6}))
    argv = ["classes", "sweep", "--kind", "korientation", "--max-n", "3"]
    monkeypatch.setenv(ENV_VAR, str(tight))
    code, _, err = run_cli(argv)
    assert code == 2 and "budget exceeded" in err
    assert run_cli(argv + ["--budget", str(loose)])[0] == 0


def test_bad_budget_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    code, _, err = run_cli(["classes", "chimney", "2", "--budget", str(bad)])
    assert code == 2 and "bad budget file" in err


def test_module_entry_point(inputs):
    env = dict(os.environ)
    env.pop(ENV_VAR, None)
    proc = subprocess.run([sys.executable, "-m", "ramseyfn", "partite", "verify-arrow",
                           *absolute(["path.struct", "path.struct", "edge.struct"], inputs)],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 1
    assert proc.stdout.startswith("arrow: false")
