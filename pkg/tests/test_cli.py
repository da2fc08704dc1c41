import json
from fractions import Fraction

import pytest

from heisendyn.cli import run, to_json


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_expansive_verdict(capsys):
    code, out, _ = _run(capsys, "expansive", "3+x+y+z", "--threads", "1")
    data = json.loads(out)
    assert code == 0 and data["schema"] == 1 and data["status"] == "expansive"


def test_expansive_many_in_parallel(capsys, tmp_path):
    csv_path = tmp_path / "v.csv"
    code, out, _ = _run(capsys, "expansive", "3+x+y-z", "2+x+y+z", "--first", "--threads", "2", "--csv", str(csv_path))
    data = json.loads(out)
    assert code == 0 and [v["status"] for v in data["verdicts"]] == ["nonexpansive", "nonexpansive"]
    assert csv_path.read_text().splitlines()[0] == "polynomial,status"


def test_output_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["expansive", "3+x+y-z", "--threads", "1", "--out", str(a)]) == 0
    assert run(["expansive", "3+x+y-z", "--threads", "1", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"\r" not in a.read_bytes()


def test_entropy(capsys):
    code, out, _ = _run(capsys, "entropy", "2-x^-1-y^-1")
    assert code == 0 and abs(json.loads(out)["value"] - 0.693147) < 1e-6


def test_qbin_table(capsys, tmp_path):
    path = tmp_path / "q.csv"
    code, out, _ = _run(capsys, "qbin", "--table", "8", "--csv", str(path), "--n", "4", "--k", "2")
    data = json.loads(out)
    assert code == 0 and data["table"][2]["T"] == "3/2" and data["qbinomial"]["coefficients"] == [1, 1, 2, 1, 1]
    assert path.read_text().splitlines()[3] == "2,6,3/2,1.5"


def test_homoclinic_small(capsys, tmp_path):
    dump = tmp_path / "k.txt"
    code, out, _ = _run(capsys, "homoclinic", "--N", "8", "--window", "3", "--dump", str(dump))
    data = json.loads(out)
    assert code == 0 and data["within_bound"] and data["defect"] == 0
    assert "(0,0,0) 1/2" in dump.read_text().splitlines()


def test_cover_small(capsys):
    code, out, _ = _run(capsys, "cover", "--M", "1,2", "--threads", "1")
    data = json.loads(out)
    assert code == 0 and data["all_within_bound"]
    assert [p["M"] for p in data["trials"][0]["points"]] == [1, 2]


def test_inverse_and_conjecture(capsys):
    code, out, _ = _run(capsys, "inverse", "4+x+y+z", "--N", "4")
    data = json.loads(out)
    assert code == 0 and data["certifies"] and Fraction(data["residual"]) < 1
    code, out, _ = _run(capsys, "conjecture", "--n-max", "7", "--threads", "1")
    assert code == 0 and json.loads(out)["found"] == 0


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["expansive"],
        ["expansive", "3+x+*y"],
        ["qbin", "--table", "0"],
        ["cover", "--M", "4,2"],
        ["entropy", "1+x^2+y^2"],
        ["inverse", "x+y"],
    ],
)
def test_usage_errors_exit_1(capsys, argv):
    assert run(argv) == 1


def test_parse_error_reports_offset(capsys):
    code, _, err = _run(capsys, "expansive", "3+x+*y")
    assert code == 1 and "byte 4" in err


def test_thread_env(monkeypatch, capsys):
    monkeypatch.setenv("HEISENDYN_THREADS", "zero")
    assert run(["conjecture", "--n-max", "4"]) == 1
    monkeypatch.setenv("HEISENDYN_THREADS", "1")
    assert run(["conjecture", "--n-max", "4"]) == 0


def test_contradiction_exit_2(monkeypatch, capsys):
    import heisendyn.witnesses as w

    monkeypatch.setattr(w, "character_witness", lambda f: w.CharacterWitness(1, 1, (0, 0), 0.0, True))
    code, out, _ = _run(capsys, "expansive", "4+x+y+z", "--threads", "1")
    assert code == 2 and json.loads(out)["status"] == "contradiction"


def test_json_number_formatting():
    assert to_json(0.1) == "0.10000000000000001"
    assert to_json(Fraction(3, 4)) == '"3/4"'
    assert to_json(2.0) == "2.0"
    assert to_json(float("inf")) == '"inf"'
    assert json.loads(to_json({"a": [1, Fraction(2), 1j]})) == {"a": [1, "2", [0.0, 1.0]]}
