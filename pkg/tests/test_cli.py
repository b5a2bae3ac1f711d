import json
import subprocess
import sys

import pytest

from lingokit.cli import main

SCENARIO = {
    "seed": "00112233445566778899aabbccddeeff",
    "lingo": "hor(dnc,rdnc;bias=1,1)",
    "actors": [{"id": "b", "role": "broker"}, {"id": "c", "role": "client", "script": ["connect"]}],
    "attacker": {"kind": "structural_zero", "slot": "second"},
    "trials": 20,
}


def out_of(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_eval_examples(capsys):
    assert out_of(capsys, "eval", "--spec", "dnc", "--op", "f", "--d1", "13", "--a", "3")[1].out == "[3,3]\n"
    assert out_of(capsys, "eval", "--spec", "xor:8", "--op", "f", "--d1", "3", "--a", "5")[1].out == "6\n"
    assert out_of(capsys, "eval", "--spec", "dnc", "--op", "g", "--d2", "[3,3]", "--a", "3")[1].out == "13\n"
    assert out_of(capsys, "eval", "--spec", "dnc", "--op", "check", "--d2", "[5,7]", "--a", "3")[1].out == "false\n"
    assert out_of(capsys, "check", "--spec", "dnc", "--d2", "[3,3]", "--a", "3")[1].out == "true\n"


def test_eval_json_and_derived_parameter(capsys):
    code, res = out_of(capsys, "eval", "--spec", "xorbseq", "--op", "f", "--d1", "0", "--n", "0", "--seed", "00" * 16, "--json")
    import hashlib

    expected = int.from_bytes(hashlib.sha256(bytes(24)).digest()[:8], "big")
    assert code == 0 and json.loads(res.out) == {"t": "nat", "v": str(expected) if expected >= 2**53 else expected}
    code, res = out_of(
        capsys, "eval", "--spec", "auth(xorbseq,j=8,k=16)", "--op", "f", "--d1", "1", "--n", "2", "--seed", "11" * 16
    )
    assert code == 0 and res.out.strip()


def test_exit_codes(capsys):
    assert out_of(capsys, "eval", "--spec", "dnc")[0] == 2
    assert out_of(capsys, "bogus")[0] == 2
    assert out_of(capsys, "eval", "--spec", "xyz", "--op", "f", "--d1", "1", "--a", "1")[0] == 3
    assert out_of(capsys, "eval", "--spec", "dnc", "--op", "f", "--d1", "1")[0] == 3
    assert out_of(capsys, "eval", "--spec", "dnc", "--op", "g", "--d2", "[0,0]", "--a", "1")[0] == 3
    assert out_of(capsys, "run", "--scenario", "/nonexistent.json")[0] == 3
    assert out_of(capsys, "--help")[0] == 0


def test_malleability(capsys):
    code, res = out_of(capsys, "malleability", "--spec", "sharp(xor:8)", "--recipe", "xorsharp", "--samples", "500")
    assert code == 0
    assert json.loads(res.out) == {"samples": 500, "cond1Violations": 0, "cond2Violations": 0, "verdict": True}
    assert out_of(capsys, "malleability", "--spec", "dnc", "--recipe", "theorem2")[0] == 3
    assert out_of(capsys, "malleability", "--spec", "dnc", "--recipe", "xor")[0] == 3


def test_run_is_deterministic(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(SCENARIO))
    outs = []
    for name in ("r1.json", "r2.json"):
        assert main(["run", "--scenario", str(path), "--out", str(tmp_path / name), "--trace", str(tmp_path / name[:2])]) == 0
        outs.append((tmp_path / name).read_text())
    first, second = (json.loads(o) for o in outs)
    assert {**first, "traces": None} == {**second, "traces": None}
    assert first["attackerSent"] == 40
    assert (tmp_path / "r1" / "trial-00019.jsonl").read_bytes() == (tmp_path / "r2" / "trial-00019.jsonl").read_bytes()
    assert main(["run", "--scenario", str(path), "--trials", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["trials"] == 3


def test_table(tmp_path, capsys):
    for i, lingo in enumerate(["dnc", "hor(dnc,rdnc;bias=1,1)"]):
        (tmp_path / f"s{i}.json").write_text(json.dumps({**SCENARIO, "lingo": lingo}))
    rows_path = tmp_path / "rows.json"
    code, res = out_of(capsys, "table", "--scenario", str(tmp_path), "--out", str(rows_path), "--trials", "10")
    assert code == 0
    rows = json.loads(rows_path.read_text())
    # the human table is a view of the JSON rows
    for row, line in zip(rows, res.out.splitlines()[1:]):
        assert line.split()[0] == row["lingoSpec"] and f"{row['acceptRate']:.4f}" in line
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["table", "--scenario", str(empty)]) == 3


def test_selftest(capsys):
    code, res = out_of(capsys, "selftest", "--samples", "20")
    assert code == 0
    assert "FAIL" not in res.out and res.out.count("ok") >= 20


def test_selftest_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setattr("lingokit.cli.selftest", lambda samples: False)
    assert main(["selftest"]) == 4


def test_module_entry_point():
    done = subprocess.run(
        [sys.executable, "-m", "lingokit", "eval", "--spec", "dnc", "--op", "f", "--d1", "13", "--a", "3"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert done.returncode == 0 and done.stdout == "[3,3]\n"
