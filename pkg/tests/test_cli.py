import json

import pytest

from msls.cli import EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr().out
    return code, [json.loads(x) for x in out.splitlines() if x.strip()]


def test_field_info(capsys):
    code, lines = run(capsys, "field-info", "--q", "4")
    assert code == EXIT_OK
    assert lines[0]["schema"] == 1 and lines[0]["field"]["q"] == 4
    assert lines[1]["size"] == 1024 and lines[1]["theta"] == 341


def test_scattered_check(capsys):
    code, lines = run(capsys, "scattered-check", "--q", "2", "--poly", "x^q")
    assert code == EXIT_OK and lines[1]["scattered"] and lines[1]["size"] == 31
    code, lines = run(capsys, "scattered-check", "--q", "3", "--poly", "x^(q^2)+x^(q^4)")
    assert not lines[1]["scattered"] and len(lines[1]["witness"]) == 2


def test_classify_plane(capsys):
    code, lines = run(capsys, "classify-plane", "--q", "3", "--a", "0,0,0")
    assert code == EXIT_OK and lines[1]["class"] == "Pseudoregulus"
    code, lines = run(capsys, "classify-plane", "--q", "3", "--poly", "x^q", "--model", "rational")
    assert code == EXIT_OK and lines[1]["class"] == "Pseudoregulus"


def test_census_and_summary(capsys, tmp_path):
    out = tmp_path / "c.jsonl"
    code, _ = run(capsys, "census", "--q", "2", "--jobs", "4", "--out", str(out))
    assert code == EXIT_OK
    lines = [json.loads(x) for x in out.read_text().splitlines()]
    assert lines[-1]["summary"]["Pseudoregulus"] == 1


def test_resume_flag(capsys, tmp_path):
    ck = str(tmp_path / "ck.json")
    a = run(capsys, "tconj", "--q", "4", "--resume", ck)
    b = run(capsys, "tconj", "--q", "4", "--resume", ck)
    assert a == b and a[0] == EXIT_OK


def test_c3c4_families(capsys):
    code, lines = run(capsys, "c3c4", "--q", "3", "--families", "C4")
    assert code == EXIT_OK
    assert set(lines[-1]["summary"]) == {"C4.tested", "C4.scattered"}


def test_curve_verify(capsys):
    code, lines = run(capsys, "curve-verify", "--q", "5", "--delta", "2", "--eps", "3", "--points", "3")
    assert code == EXIT_OK and lines[1]["ok"] and lines[1]["degree"] == 3


def test_prop_suite(capsys):
    code, _ = run(capsys, "prop-suite", "--q", "3", "--n", "3")
    assert code == EXIT_OK


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["field-info", "--q", "6"],
        ["field-info", "--q", "1024"],
        ["c3c4", "--q", "3", "--families", "C5"],
        ["census", "--q", "3", "--s", "5"],
        ["curve-verify", "--q", "3", "--delta", "zz"],
        ["curve-verify", "--q", "3", "--delta", "zz", "--eps", "1"],
        ["classify-plane", "--q", "3"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _ = run(capsys, *argv)
    assert code == EXIT_USAGE
