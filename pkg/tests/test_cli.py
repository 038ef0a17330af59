import json

import pytest

from miquel.cli import main
from miquel.fileio import load_map, load_values, map_to_dict


@pytest.fixture
def pattern(tmp_path):
    path = tmp_path / "m.json"
    assert main(["generate", "--kind", "generic", "--rows", "12", "--cols", "12", "--seed", "1",
                 "-o", str(path)]) == 0
    return path


def test_pipeline_exit_zero(tmp_path, pattern):
    ev = tmp_path / "ev.json"
    rep = tmp_path / "rep.json"
    assert main(["evolve", "-i", str(pattern), "--steps", "2", "-o", str(ev)]) == 0
    assert main(["evolve", "-i", str(ev), "--steps", "2", "--direction", "bwd", "-o", str(ev)]) == 0
    assert main(["verify", "-i", str(ev), "-o", str(rep)]) == 0
    doc = json.loads(rep.read_text())
    assert doc["verdict"] == "pass"


def test_corrupted_file_names_failing_check(tmp_path, pattern, capsys):
    doc = json.loads(pattern.read_text())
    x = float.fromhex(doc["points"][20]["pos"][0])
    doc["points"][20]["pos"][0] = (x + 1e-3).hex()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code = main(["verify", "-i", str(bad), "--suite", "incidence", "-o", str(tmp_path / "r.json")])
    assert code == 1
    assert "FAIL incidence" in capsys.readouterr().err


def test_usage_errors(tmp_path, pattern):
    assert main([]) == 2
    assert main(["generate", "--rows", "2", "-o", str(tmp_path / "x.json")]) == 2
    assert main(["generate", "--moebius", "1,2", "-o", str(tmp_path / "x.json")]) == 2
    assert main(["generate", "--param", "perturbation", "-o", str(tmp_path / "x.json")]) == 2
    assert main(["verify", "-i", str(pattern), "--suite", "bogus"]) == 2
    assert main(["verify", "-i", str(pattern), "--tol-scale", "-1"]) == 2
    assert main(["evolve", "-i", str(pattern), "--steps", "-1", "-o", str(tmp_path / "y.json")]) == 2


def test_io_errors(tmp_path, pattern):
    assert main(["verify", "-i", str(tmp_path / "missing.json")]) == 3
    junk = tmp_path / "junk.json"
    junk.write_text("{")
    assert main(["evolve", "-i", str(junk), "-o", str(tmp_path / "o.json")]) == 3
    doc = map_to_dict(load_map(pattern))
    doc["version"] = 7
    junk.write_text(json.dumps(doc))
    assert main(["render", "-i", str(junk), "-o", str(tmp_path / "o.svg")]) == 3


def test_geometric_failure_exits_one(tmp_path, pattern):
    assert main(["evolve", "-i", str(pattern), "--steps", "9", "-o", str(tmp_path / "o.json")]) == 1


def test_env_tol_scale(tmp_path, pattern, monkeypatch):
    doc = json.loads(pattern.read_text())
    x = float.fromhex(doc["points"][20]["pos"][0])
    doc["points"][20]["pos"][0] = (x + 1e-7).hex()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    args = ["verify", "-i", str(bad), "--suite", "incidence", "-o", str(tmp_path / "r.json")]
    assert main(args) == 1
    monkeypatch.setenv("MIQUEL_TOL_SCALE", "1000")
    assert main(args) == 0
    assert json.loads((tmp_path / "r.json").read_text())["tol_scale"] == 1000.0
    assert main(args + ["--tol-scale", "1"]) == 1


def test_vars_and_reconstruct(tmp_path, pattern):
    ev = tmp_path / "ev.json"
    main(["evolve", "-i", str(pattern), "--steps", "2", "-o", str(ev)])
    y = tmp_path / "y.csv"
    assert main(["vars", "-i", str(ev), "--kind", "y", "--layer", "1", "-o", str(y)]) == 0
    out = tmp_path / "t.csv"
    assert main(["reconstruct", "-i", str(y), "--boundary", str(ev), "--from", "y", "--layer", "1",
                 "-o", str(out)]) == 0
    assert len(load_values(out)) > 50
    xb = tmp_path / "xb.csv"
    assert main(["vars", "-i", str(ev), "--kind", "xb", "--layer", "0", "-o", str(xb)]) == 0
    rebuilt = tmp_path / "rebuilt.json"
    assert main(["reconstruct", "-i", str(xb), "--boundary", str(ev), "--from", "xb", "-o", str(rebuilt)]) == 0
    assert main(["verify", "-i", str(rebuilt), "--suite", "incidence", "-o", str(tmp_path / "r.json")]) == 0
    g = tmp_path / "g.csv"
    assert main(["vars", "-i", str(ev), "--kind", "gamma", "-o", str(g)]) == 0
    assert g.read_text().startswith("z1,z2,z3,edge,re,im")


def test_render(tmp_path):
    grid = tmp_path / "g.json"
    assert main(["generate", "--kind", "packing", "--param", "perturbation=0", "--rows", "5", "--cols", "6",
                 "-o", str(grid), "--format", "decimal"]) == 0
    svg = tmp_path / "g.svg"
    assert main(["render", "-i", str(grid), "--show-points", "--label-vars", "y", "-o", str(svg)]) == 0
    assert svg.read_text().count("<circle ") == 30


def test_generate_with_moebius(tmp_path):
    out = tmp_path / "p.json"
    assert main(["generate", "--kind", "packing", "--moebius", "1,0,0.02,1", "--rows", "8", "--cols", "8",
                 "--steps", "1", "-o", str(out)]) == 0
    prov = load_map(out).provenance["generator"]
    assert prov["moebius"][2] == [0.02, 0.0] and prov["steps"] == 1
