import hashlib
import json
from importlib import resources

import jsonschema
import pytest

from lqicm.cli import main
from lqicm.lang import parse

from conftest import PROGRAMS

EX2, EX3 = str(PROGRAMS / "example2.wh"), str(PROGRAMS / "example3.wh")


@pytest.fixture(scope="module")
def schema():
    text = resources.files("lqicm").joinpath("schemas/analysis_report.schema.json").read_text()
    return json.loads(text)


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_table(capsys):
    code, out, _ = call(capsys, "analyze", EX2)
    assert code == 0
    rows = [l.split() for l in out.splitlines()[2:]]
    assert [r[1] for r in rows] == ["∞", "2", "1", "∞"]
    assert [r[2] for r in rows] == ["∞", "2", "2", "∞"]
    assert out.splitlines()[0].startswith("loop 0 (lines 3-8): peel 2")


def test_analyze_example3_inner_chunk(capsys):
    _, out, _ = call(capsys, "analyze", EX3)
    line = next(l for l in out.splitlines() if "while (j <= m)" in l)
    assert line.split()[2] == "1"


def test_analyze_json(capsys, schema, tmp_path):
    code, out, _ = call(capsys, "analyze", EX2, "--json", "--dot", str(tmp_path))
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, schema)
    (loop,) = report["loops"]
    assert [c["raw_degree"] for c in loop["chunks"]] == [-1, 2, 1, -1]
    assert loop["peel_count"] == 2
    assert loop["lemma1"]["fixpoint_index"] <= loop["lemma1"]["bound"]
    dot = (tmp_path / "loop0.dot").read_text()
    assert dot.startswith('digraph "loop0"')


def test_analyze_example3_json(capsys, schema):
    _, out, _ = call(capsys, "analyze", EX3, "--json")
    report = json.loads(out)
    jsonschema.validate(report, schema)
    assert [l["loop_id"] for l in report["loops"]] == [0, 1]


def test_analyze_empty(capsys, tmp_path, schema):
    f = tmp_path / "empty.wh"
    f.write_text("")
    assert call(capsys, "analyze", str(f)) == (0, "", "")
    code, out, _ = call(capsys, "analyze", str(f), "--json")
    assert json.loads(out)["loops"] == []
    jsonschema.validate(json.loads(out), schema)


def test_parse_error_exit(capsys, tmp_path):
    f = tmp_path / "bad.wh"
    f.write_text("x = ;\n")
    code, _, err = call(capsys, "analyze", str(f))
    assert code == 1 and "1:5" in err


def test_optimize(capsys, tmp_path):
    code, out, err = call(capsys, "optimize", EX2)
    assert code == 0 and "peeled 2 times" in err
    out_file = tmp_path / "o.wh"
    assert call(capsys, "optimize", EX2, "-o", str(out_file))[0] == 0
    assert out_file.read_text() == out
    code, out2, _ = call(capsys, "analyze", str(out_file))
    assert all("peel 0" in l for l in out2.splitlines() if l.startswith("loop"))
    parse(out)


def test_optimize_invariant_free(capsys, tmp_path):
    src = "i = 0;\nwhile (i < n) {\n    s = s + i;\n    i = i + 1;\n}\n"
    f = tmp_path / "free.wh"
    f.write_text(src)
    assert call(capsys, "optimize", str(f))[1] == src


def test_run(capsys):
    code, out, _ = call(capsys, "run", EX2, "--input", "b=5", "y=3", "n=4", "--count-steps")
    assert code == 0
    assert out.splitlines()[:4] == ["use@0: 5", "use@0: 6", "use@0: 6", "use@0: 6"]
    assert "steps: 22" in out


def test_run_exit_codes(capsys, tmp_path):
    assert call(capsys, "run", EX2, "--input", "n=5", "--fuel", "1")[0] == 3
    f = tmp_path / "div.wh"
    f.write_text("x = 1 / 0;")
    code, _, err = call(capsys, "run", str(f))
    assert code == 2 and "div_by_zero" in err


def test_bench(capsys):
    code, out, _ = call(capsys, "bench", EX3, "--values", "10,20,40", "--param", "n", "--param", "m")
    assert code == 0
    lines = out.splitlines()
    steps = [int(l.split()[1]) for l in lines[1:4]]
    assert steps == sorted(steps)
    assert all(l.endswith("same") for l in lines[1:4])
    assert "log-log slope" in lines[-1]


def test_difftest(capsys):
    assert call(capsys, "difftest", "--count", "0")[:2] == (0, "")
    _, a, _ = call(capsys, "difftest", "--seed", "42", "--count", "150")
    _, b, _ = call(capsys, "difftest", "--seed", "42", "--count", "150")
    assert hashlib.sha256(a.encode()).hexdigest() == hashlib.sha256(b.encode()).hexdigest()
    records = [json.loads(l) for l in a.splitlines()]
    assert len(records) == 150 and all(r["status"] == "ok" for r in records)


def test_difftest_literal_rule(capsys):
    _, out, err = call(capsys, "difftest", "--seed", "1", "--count", "100", "--literal-copy-rule")
    assert any(json.loads(l)["status"] == "fail" for l in out.splitlines())
