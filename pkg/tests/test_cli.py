import json
import math
import subprocess
import sys

from nfclass import cli
from nfclass.units import Undecided

from corpus import DEG13, DEG13_MINKOWSKI


def _run(*argv):
    return cli.run(list(argv))


def _cli(*argv):
    p = subprocess.run([sys.executable, "-m", "nfclass.cli", *argv], capture_output=True, text=True)
    return p.returncode, p.stdout


def _reals(node):
    """Every dict that looks like a real value."""
    if isinstance(node, dict):
        if "value" in node:
            yield node
        for v in node.values():
            yield from _reals(v)
    elif isinstance(node, list):
        for v in node:
            yield from _reals(v)


def test_classgroup_minus5():
    doc, status = _run("classgroup", "--poly", "1,0,5", "--proof", "full")
    assert status == 0
    assert doc["schema_version"] == cli.SCHEMA_VERSION
    assert doc["h"] == "2" and doc["invariants"] == ["2"]
    assert doc["proof"] == "SaturationVerified"


def test_unitgroup_sqrt2():
    doc, status = _run("unitgroup", "--poly", "1,0,-2", "--proof", "full")
    assert status == 0
    reg = doc["units"]["regulator"] if "units" in doc else doc["regulator"]
    assert abs(reg["value"] - 0.8813735870195430) < 1e-12
    assert reg["error_radius"] < 1e-20


def test_residue_gaussian():
    doc, status = _run("residue", "--poly", "1,0,1", "--method", "euler", "--X", "100000")
    assert status == 0
    v = doc["log_residue"]
    assert abs(v["value"] - math.log(math.pi / 4)) < doc["trunc_error"]
    assert {"value", "error_radius"} <= set(v)


def test_bounds_degree13():
    doc, status = _run("bounds", "--poly", ",".join(map(str, DEG13)))
    assert status == 0
    assert doc["minkowski"] == str(DEG13_MINKOWSKI)


def test_reals_have_error_radius():
    for argv in (("classgroup", "--poly", "1,0,-10", "--proof", "grh"),
                 ("residue", "--poly", "1,0,-5", "--method", "weighted", "--X", "5000")):
        doc, _ = _run(*argv)
        found = list(_reals(doc))
        assert found
        for r in found:
            assert set(r) >= {"value", "error_radius"}


def test_input_errors():
    assert _run("classgroup", "--poly", "1,0,-1")[1] == 3
    assert _run("classgroup", "--poly", "2,0,1")[1] == 3
    assert _run("classgroup", "--poly", "1,x,1")[1] == 3
    doc, status = _run("residue", "--poly", "1,0,1", "--method", "weighted", "--X", "50")
    assert status == 3 and doc["error"]["code"]


def test_budget_exhausted():
    doc, status = _run("classgroup", "--poly", "1,0,-79", "--budget", "3")
    assert status == 4 and doc["error"]["code"] == "budget_exhausted"


def test_strict_downgrade(monkeypatch):
    import nfclass.class_sat as cs
    monkeypatch.setattr(cs, "saturate_class_group", lambda *a, **k: Undecided(2, 1))
    doc, status = _run("classgroup", "--poly", "1,0,5", "--proof", "full", "--strict")
    assert status == 2 and doc["downgraded"] is True
    doc, status = _run("classgroup", "--poly", "1,0,5", "--proof", "full")
    assert status == 0 and doc["downgraded"] is True


def test_batch_file(tmp_path):
    f = tmp_path / "polys.txt"
    f.write_text("1,0,1\n1,0,5\n\n1,0,23\n")
    doc, status = _run("classgroup", "--file", str(f), "--proof", "full")
    assert status == 0
    assert [r["h"] for r in doc["results"]] == ["1", "2", "3"]


def test_verify_command():
    doc, status = _run("verify", "--poly", "1,0,-2")
    assert status == 0 and doc["ok"] is True


def test_stats_small():
    doc, status = _run("stats", "--count", "5", "--max-disc", "2000", "--seed", "1")
    assert status == 0 and doc["count"] == 5
    assert 0.9 < doc["mean"] < 1.1


def test_seed_byte_identical():
    args = ("classgroup", "--poly", "1,0,0,-11", "--proof", "full", "--seed", "3", "--threads", "1")
    a = _cli(*args)
    b = _cli(*args)
    assert a == b and a[0] == 0
    json.loads(a[1])
