import csv
import json
import math

import numpy as np
import pytest

from kleinmaskit.cli import main
from kleinmaskit.clifford import ContractError
from kleinmaskit.config import ConfigError, dump_config, load_config, parse_config, spec_to_dict
from kleinmaskit.examples import EXAMPLE_IDS, builtin, example1, example3

# golden data: the published matrices, typed in as blade maps


def _entries(spec, which):
    g = (spec.g1 if which == 1 else spec.g2)[0].matrix
    return [g.entry(i, j).to_text() for i in range(2) for j in range(2)]


def test_golden_example1():
    for n in (4, 6):
        s = example1(n)
        en = f"e{n - 1}"
        assert _entries(s, 1) == [{}, {en: 1.0}, {en: 1.0}, {}]
        assert _entries(s, 2) == [{}, {en: 2.0}, {en: 0.5}, {}]
        j = s.j.generators[0].matrix
        assert [j.entry(i, k).to_text() for i in range(2) for k in range(2)] == [{"e1e2": 1.0}, {}, {}, {"e1e2": 1.0}]
        assert s.balls.sphere.radius == pytest.approx(math.sqrt(2)) and s.balls.b1_side == "outside"


def test_golden_example2_and_3():
    s = builtin("example2")
    assert _entries(s, 1) == [{"1": 1.0}, {}, {"1": 2.0}, {"1": 1.0}]
    assert _entries(s, 2) == [{"1": 1.0}, {"1": 5.0}, {}, {"1": 1.0}]
    assert s.balls.sphere.radius == 2.0
    s = example3(5)
    assert _entries(s, 1) == [{"1": 1.0}, {}, {"e3": 2.0}, {"1": 1.0}]
    assert _entries(s, 2) == [{"1": 1.0}, {"e4": 5.0}, {}, {"1": 1.0}]


def test_golden_counterexample():
    s = builtin("counterexample")
    assert _entries(s, 1) == [{"e1": 1.0}, {}, {}, {"e1": -1.0}]
    assert _entries(s, 2) == [{}, {"e1": 1.0}, {"e1": 1.0}, {}]
    assert s.j.kind == "integer"


def test_builtin_errors():
    with pytest.raises(ContractError):
        builtin("example4")
    with pytest.raises(ContractError):
        builtin("example3", 4)
    with pytest.raises(ContractError):
        builtin("counterexample", 3)


# configs

@pytest.mark.parametrize("name", EXAMPLE_IDS)
def test_config_round_trip(name, tmp_path):
    s = builtin(name)
    p = tmp_path / "c.json"
    dump_config(s, p)
    s2, cfg = load_config(p)
    assert spec_to_dict(s2) == spec_to_dict(s)
    for a, b in zip(s.g1 + s.g2, s2.g1 + s2.g2):
        assert a.matrix.projectively_equal(b.matrix)


def test_config_errors(tmp_path):
    good = spec_to_dict(builtin("example2"))
    bad = dict(good, schema="spec_v0")
    with pytest.raises(ConfigError, match="field schema"):
        parse_config(bad)
    bad = json.loads(json.dumps(good))
    del bad["g1"][0]["c"]
    with pytest.raises(ConfigError, match=r"field g1\[0\]: missing c"):
        parse_config(bad)
    bad = json.loads(json.dumps(good))
    bad["g2"][0]["a"] = {"e1e2e3": 1}
    with pytest.raises(ConfigError, match=r"field g2\[0\]\.a"):
        parse_config(bad)
    bad = dict(good, checks={"bogus": 1})
    with pytest.raises(ConfigError, match="field checks"):
        parse_config(bad)
    p = tmp_path / "broken.json"
    p.write_text('{\n  "schema": "spec_v1",\n  "n": 3,,\n}')
    with pytest.raises(ConfigError, match="line 3 column"):
        load_config(p)


# CLI

def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_example1(tmp_path, capsys):
    code, out, _ = run(["check", "--example", "example1", "--out", str(tmp_path)], capsys)
    assert code == 0
    rep = json.loads((tmp_path / "report_example1.json").read_text())
    verdicts = {c["check"]: c["verdict"] for c in rep["checks"]}
    for k in ("precisely_invariant", "block", "interactive_pair", "proper"):
        assert verdicts[k] == "pass"
    assert "conclusion: proper" in out


def test_check_counterexample(tmp_path, capsys):
    code, _, _ = run(["check", "--example", "counterexample", "--out", str(tmp_path)], capsys)
    assert code == 1
    rep = json.loads((tmp_path / "report_counterexample.json").read_text())
    checks = {c["check"]: c for c in rep["checks"]}
    assert checks["discreteness"]["verdict"] == "fail"
    assert [x["word"] for x in checks["freeness"]["witness"]["form"]] == [["g1"], ["g2"], ["g1"], ["g2"]]


def test_check_is_byte_identical(tmp_path, capsys):
    for d in ("a", "b"):
        run(["check", "--example", "example1", "-L", "4", "--out", str(tmp_path / d)], capsys)
    assert (tmp_path / "a" / "report_example1.json").read_bytes() == (tmp_path / "b" / "report_example1.json").read_bytes()


def test_check_from_config(tmp_path, capsys):
    p = tmp_path / "c.json"
    dump_config(builtin("example1"), p)
    code, _, _ = run(["check", "--config", str(p), "-L", "3", "--out", str(tmp_path)], capsys)
    assert code == 0 and (tmp_path / "report_example1.json").exists()


def test_bad_input_exit_code(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text("{")
    code, _, err = run(["check", "--config", str(p)], capsys)
    assert code == 2 and "line 1" in err
    code, _, err = run(["check", "--config", str(tmp_path / "missing.json")], capsys)
    assert code == 2
    code, _, _ = run(["freeness", "--example", "example2", "-L", "-1"], capsys)
    assert code == 2
    with pytest.raises(SystemExit):
        main(["check", "--example", "nope"])


def test_freeness_exit_codes(tmp_path, capsys):
    code, out, _ = run(["freeness", "--example", "counterexample", "-L", "4", "--out", str(tmp_path)], capsys)
    assert code == 1 and "[g1, g2, g1, g2]" in out
    code, _, _ = run(["freeness", "--example", "example2", "-L", "1", "--out", str(tmp_path)], capsys)
    assert code == 0
    d = spec_to_dict(builtin("example2"))
    d["checks"] = {"node_budget": 20}
    p = tmp_path / "small.json"
    p.write_text(json.dumps(d))
    code, _, _ = run(["freeness", "--config", str(p), "-L", "4", "--out", str(tmp_path)], capsys)
    assert code == 3
    res = json.loads((tmp_path / "freeness_example2.json").read_text())
    assert res["truncated"] is True and res["witness"] is None


def test_limitset_seeds_only(tmp_path, capsys):
    code, _, _ = run(["limitset", "--example", "example1", "-L", "0", "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "limitset_example1.csv")))
    assert rows == [["x1", "x2", "x3", "x4", "word_length"], ["0", "0", "0", "0", "0"]]


def test_limitset_counterexample_near_line(tmp_path, capsys):
    code, _, _ = run(["limitset", "--example", "counterexample", "-L", "6", "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "limitset_counterexample.csv")))[1:]
    assert rows and all(abs(float(r[1])) < 1e-12 for r in rows)


def test_limitset_formats(tmp_path, capsys):
    for fmt in ("ply", "json"):
        code, _, _ = run(["limitset", "--example", "example2", "-L", "2", "--format", fmt, "--seed", "inf",
                          "--seed", "0,0,0", "--out", str(tmp_path)], capsys)
        assert code == 0
    d = json.loads((tmp_path / "limitset_example2.json").read_text())
    assert d["points"][0]["point"] == "inf"
    code, _, _ = run(["limitset", "--example", "example2", "--seed", "1,2", "--out", str(tmp_path)], capsys)
    assert code == 2


def test_spheres_command(tmp_path, capsys):
    code, out, _ = run(["spheres", "--example", "example2", "-L", "4", "--out", str(tmp_path)], capsys)
    assert code == 0 and "non-crossing: True" in out
    d = json.loads((tmp_path / "spheres_example2.json").read_text())
    assert d["non_crossing"] and len(d["spheres"]) == 681
    first = (tmp_path / "spheres_example2.json").read_bytes()
    run(["spheres", "--example", "example2", "-L", "4", "--out", str(tmp_path)], capsys)
    assert (tmp_path / "spheres_example2.json").read_bytes() == first


def test_module_entry_point():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "kleinmaskit", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "check" in r.stdout
