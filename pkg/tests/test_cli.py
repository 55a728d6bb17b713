import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from adjfol.cli import parse_eps_affine, run, InputError
from adjfol.enumeration import Bounds, generate
from adjfol.exactnum import EpsAffine


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_resolve_example_at_quarter():
    code, out, _ = call("resolve", "--form", "omega: x dx + y^2 dy", "--epsilon", "1/4", "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert list(d["raw"].values()) == ["1/4", "1/2", "0"]
    assert d["grades"]["canonical"] is True and d["grades"]["terminal"] is False


def test_resolve_positional_form():
    assert call("resolve", "omega: x dx + y^2 dy")[1] == call("resolve", "--form", "omega: x dx + y^2 dy")[1]


def test_classify_fchain(fixtures_dir):
    code, out, _ = call("classify", "--graph", str(fixtures_dir / "fchain.json"), "--theorem", "fol-lc")
    assert code == 0
    d = json.loads(out)
    assert d["family"] == "FOL_LC/1" and d["annotations"] == ["terminal"]
    assert out == (fixtures_dir / "fchain.classify.json").read_text()


def test_classify_no_match_reason(fixtures_dir):
    code, out, _ = call("classify", "--graph", str(fixtures_dir / "tangency_x_y2.graph.json"), "--theorem", "main-lc")
    d = json.loads(out)
    assert code == 0 and d["family"] is None and "MIN" in d["reason"]


def test_missing_file():
    code, out, err = call("discrepancy", "--graph", "missing.json")
    assert code == 2 and out == ""
    assert "no such file" in err


@pytest.mark.parametrize("argv", [
    ["discrepancy", "--graph", "x.json", "--form", "v: x d/dx + y d/dy"],
    ["discrepancy"],
    ["nonsense"],
    ["resolve", "--form", "omega: x dx + y^2 dq"],
    ["resolve", "--form", "v: x*y d/dx + (x^2 + 2*y^2) d/dy"],
    ["resolve", "--form", "omega: x dx + y^2 dy", "--epsilon", "0.25"],
    ["resolve", "--form", "omega: x dx + y^2 dy", "--max-depth", "1"],
    ["verify-theorem", "--theorem", "main-lc", "--epsilon-interval", "1/5", "1/5", "--max-curves", "1"],
])
def test_input_errors_exit_2(argv):
    assert call(*argv)[0] == 2


def test_bad_json(tmp_path):
    p = tmp_path / "g.json"
    p.write_text("{not json")
    code, _, err = call("discrepancy", "--graph", str(p))
    assert code == 2 and "invalid JSON" in err


@pytest.mark.parametrize("name,argv", [
    ("tangency_x_y2.resolve.json", ["resolve", "--form", "omega: x dx + y^2 dy", "--emit", "graph,ledger"]),
    ("radial_2y_x.resolve.json", ["resolve", "--form", "omega: 2*y dx - x dy", "--emit", "graph,ledger"]),
    ("tangency_x_y2.eps_1_4.json", ["resolve", "--form", "omega: x dx + y^2 dy", "--epsilon", "1/4", "--emit", "ledger"]),
])
def test_golden_outputs(fixtures_dir, name, argv):
    code, out, _ = call(*argv)
    assert code == 0
    assert out == (fixtures_dir / name).read_text()


@pytest.mark.parametrize("form,name", [
    ("omega: x dx + y^2 dy", "tangency_x_y2.graph.json"),
    ("omega: 2*y dx - x dy", "radial_2y_x.graph.json"),
])
def test_graph_file_round_trip(fixtures_dir, tmp_path, form, name):
    p = tmp_path / "g.json"
    assert call("resolve", "--form", form, "--graph-out", str(p))[0] == 0
    assert p.read_text() == (fixtures_dir / name).read_text()


@pytest.mark.parametrize("form", ["omega: x dx + y^2 dy", "omega: 4*y dx - x dy", "v: y^2 d/dx + x^3 d/dy"])
def test_pipeline_smoke(tmp_path, form):
    # the extracted graph fed back through the discrepancy command reproduces the ledger
    p = tmp_path / "g.json"
    _, out, _ = call("resolve", "--form", form, "--graph-out", str(p))
    ledger = json.loads(out)["raw"]
    _, out, _ = call("discrepancy", "--graph", str(p), "--convention", "adjoint")
    assert json.loads(out)["raw"] == ledger


def test_discrepancy_conventions(fixtures_dir):
    g = str(fixtures_dir / "tangency_x_y2.graph.json")
    _, out, _ = call("discrepancy", "--graph", g, "--epsilon", "1/5")
    d = json.loads(out)
    assert d["raw"] == {"E1": "1/5", "E2": "2/5", "E3": "-1/5"}
    assert d["grades"]["lc"] and not d["grades"]["klt"]
    _, out, _ = call("discrepancy", "--graph", g, "--convention", "foliated")
    assert json.loads(out)["grades"]["lc"] is False
    _, out, _ = call("discrepancy", "--graph", g, "--epsilon-interval", "0", "1/5", "--format", "text")
    assert out.splitlines()[0] == "E1: log 2*e, raw e"


def test_chain_info(fixtures_dir):
    g = str(fixtures_dir / "fchain.json")
    code, out, _ = call("chain-info", "--graph", g, "--d-dot=-1+2e,e")
    d = json.loads(out)
    assert code == 0 and d["n"] == 5 and d["identity_failures"] == []
    assert d["gamma"] == list(d["gamma_solver"].values())


def test_parse_eps_affine():
    assert parse_eps_affine("-1+4e") == EpsAffine(-1, 4)
    assert parse_eps_affine("2*e") == EpsAffine(0, 2)
    assert parse_eps_affine("-e") == EpsAffine(0, -1)
    assert parse_eps_affine("1/3-1/5e") == EpsAffine(Fraction(1, 3), Fraction(-1, 5))
    with pytest.raises(InputError):
        parse_eps_affine("x")


def test_enumerate(tmp_path):
    p = tmp_path / "graphs.jsonl"
    code, _, _ = call("enumerate", "--max-curves", "2", "--out", str(p))
    lines = p.read_text().splitlines()
    assert code == 0
    assert len(lines) == len(list(generate(Bounds(max_curves=2))))
    assert all("key" in json.loads(line) for line in lines[:5])


def test_verify_exit_codes():
    code, out, _ = call("verify-theorem", "--theorem", "main-lc", "--max-curves", "3")
    assert code == 0 and json.loads(out)["ok"] is True
    code, out, _ = call("verify-theorem", "--theorem", "main-can", "--max-curves", "3")
    assert code == 1 and json.loads(out)["family_instances_failing_lc"]


def test_verify_output_independent_of_jobs():
    a = call("verify-theorem", "--theorem", "fol-lc", "--max-curves", "3", "--jobs", "1")
    b = call("verify-theorem", "--theorem", "fol-lc", "--max-curves", "3", "--jobs", "2")
    assert a == b


def test_cross_check_cli():
    code, out, _ = call("cross-check", "--max-curves", "2")
    assert code == 0 and json.loads(out)["counterexamples"] == []


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "adjfol", "resolve", "--form", "v: x d/dx + y d/dy", "--format", "text"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.splitlines()[0] == "1 blowups"
