import io as _io
import json
import math

import pytest

from wstab import families, io
from wstab.cli import main
from wstab.gh import PointMap
from wstab.metric import MetricPair, enumerate_isometries


@pytest.fixture
def files(tmp_path):
    def write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return str(path)

    return write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate(files, capsys):
    ok = files("x.json", {"d": [[0, 1], [1, 0]]})
    code, out, _ = run(capsys, "validate", "--space", ok)
    assert code == 0 and json.loads(out)["diameter"] == 1
    bad = files("bad.json", {"d": [[0, 1, 3], [1, 0, 1], [3, 1, 0]]})
    code, _, err = run(capsys, "validate", "--space", bad)
    assert code == 2 and "TriangleViolation(0, 1, 2)" in err


def test_validate_from_stdin(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", _io.StringIO(json.dumps({"d": [[0, 2], [2, 0]]})))
    code, out, _ = run(capsys, "validate", "--space", "-")
    assert code == 0 and json.loads(out)["n"] == 2


def test_isometries(files, capsys, tmp_path):
    c4 = files("c4.json", io.space_to_dict(families.ngon(4, 4.0)))
    out_path = tmp_path / "g.json"
    code, _, _ = run(capsys, "isometries", "--space", c4, "--out", str(out_path))
    assert code == 0
    assert len(json.loads(out_path.read_text())["elements"]) == 8
    big = files("c11.json", io.space_to_dict(families.ngon(11)))
    assert run(capsys, "isometries", "--space", big)[0] == 2


def test_w2_with_plan(files, capsys, tmp_path):
    x = files("x.json", {"d": [[0, 1], [1, 0]]})
    mu = files("mu.json", {"w": [1, 0]})
    nu = files("nu.json", {"w": [0.5, 0.5]})
    plan = tmp_path / "plan.csv"
    code, out, _ = run(capsys, "w2", "--space", x, "--mu", mu, "--nu", nu, "--plan", str(plan))
    assert code == 0
    assert float(out) == pytest.approx(math.sqrt(0.5))
    rows = [list(map(float, line.split(","))) for line in plan.read_text().splitlines()]
    assert rows == [[0.5, 0.5], [0.0, 0.0]]


def test_gh_modes(files, capsys):
    a = files("a.json", io.space_to_dict(families.two_point(1.0)))
    b = files("b.json", io.space_to_dict(families.two_point(1.4)))
    code, out, _ = run(capsys, "gh", "--x", a, "--y", b)
    assert code == 0 and json.loads(out)["gh_distance"] == pytest.approx(0.2)
    code, out, _ = run(capsys, "gh", "--x", a, "--y", b, "--heuristic")
    payload = json.loads(out)
    assert payload["mode"] == "bound" and payload["gh_upper"] == pytest.approx(0.2)


def test_certify_exit_codes(files, capsys):
    c4, c3 = families.ngon(4, 4.0), families.ngon(3, 3.0)
    f = files("f.json", io.map_to_dict(PointMap(c4, c3, (0, 1, 2, 0))))
    assert run(capsys, "certify", "--map", f, "--eps", "1.0")[0] == 0
    code, out, _ = run(capsys, "certify", "--map", f, "--eps", "0.5")
    assert code == 1 and json.loads(out)["distortion"] == 1


def test_pair_derive_then_glue(files, capsys, tmp_path):
    c4 = families.ngon(4, 4.0)
    p = MetricPair(c4, (0, 2))
    f = files("f.json", io.map_to_dict(PointMap.identity(c4)))
    px = files("px.json", io.pair_to_dict(p))
    g_path = tmp_path / "g.json"
    code, _, _ = run(capsys, "pair-derive", "--f", f, "--pairx", px, "--pairy", px, "--eps", "0", "--out", str(g_path))
    assert code == 0
    assert json.loads(g_path.read_text())["g"]["image"] == [0, 2]
    code, out, _ = run(capsys, "pair-glue", "--f", f, "--g", str(g_path), "--eps", "0")
    payload = json.loads(out)
    assert code == 0 and payload["xi"] == [0, 1, 2, 3] and payload["subset_hausdorff"] == 0


def test_pair_derive_precondition(files, capsys):
    c4 = families.ngon(4, 4.0)
    f = files("f.json", io.map_to_dict(PointMap.identity(c4)))
    a = files("a.json", io.pair_to_dict(MetricPair(c4, (0,))))
    b = files("b.json", io.pair_to_dict(MetricPair(c4, (2,))))
    code, _, err = run(capsys, "pair-derive", "--f", f, "--pairx", a, "--pairy", b, "--eps", "1")
    assert code == 2 and "HausdorffTooLarge" in err


def test_p2net_and_lift(files, capsys, tmp_path):
    x = files("x.json", io.space_to_dict(families.two_point(1.0)))
    code, out, _ = run(capsys, "p2net", "--space", x, "--m", "2")
    payload = json.loads(out)
    assert code == 0 and len(payload["atoms"]) == 3 and payload["dirac_embedding_error"] == 0
    f = files("f.json", io.map_to_dict(PointMap(families.two_point(1.0), families.two_point(1.2), (0, 1))))
    code, out, _ = run(capsys, "lift", "--f", f, "--eps", "0.2", "--m", "2")
    payload = json.loads(out)
    assert code == 0 and payload["F"] == [0, 1, 2]
    assert payload["certificate"]["distortion"] == pytest.approx(0.2)


def test_pushforward_group(files, capsys):
    g = files("g.json", io.group_to_dict(enumerate_isometries(families.two_point(1.0))))
    code, out, _ = run(capsys, "pushforward-group", "--group", g, "--m", "2")
    assert code == 0 and json.loads(out)["elements"] == [[0, 1, 2], [1, 0, 2]]


def test_equivariant_commands(files, capsys, tmp_path):
    x = io.space_to_dict(families.two_point(1.0))
    quad = {"x": x, "y": x, "f": [0, 1], "theta": [0, 1], "psi": [0, 1], "eps": 0.0}
    q = files("q.json", quad)
    code, out, _ = run(capsys, "equiv-certify", "--quad", q)
    assert code == 0 and json.loads(out)["valid"]
    wrong = files("w.json", dict(quad, theta={"0": 0, "1": 0}, eps=0.5))
    code, out, _ = run(capsys, "equiv-certify", "--quad", wrong)
    assert code == 1 and json.loads(out)["dev_theta"] == 1
    code, out, _ = run(capsys, "equiv-lift", "--quad", q, "--m", "2")
    payload = json.loads(out)
    assert code == 0 and payload["deviation_theta"] == 0 and payload["theta"] == [0, 1]


def test_relative_equivariant_command(files, capsys):
    c4 = io.space_to_dict(families.ngon(4, 4.0))
    half = {"space": c4, "elements": [[0, 1, 2, 3], [2, 3, 0, 1]]}
    quad = {"x": c4, "y": c4, "gx": half, "gy": half, "f": [0, 1, 2, 3], "theta": [0, 1], "psi": [0, 1],
            "eps": 0.0, "ax": [0, 2], "ay": [0, 2], "fprime": [0, 2]}
    code, out, _ = run(capsys, "equiv-certify", "--quad", files("q.json", quad))
    assert code == 0 and json.loads(out)["closeness"] == 0
    code, _, err = run(capsys, "equiv-certify", "--quad", files("bad.json", dict(quad, ax=[0, 1], fprime=[0, 2])))
    assert code == 2 and "not invariant" in err


def test_experiment(files, capsys, tmp_path):
    spec = files("spec.json", {"family": "two_point", "indices": [1, 2, 3], "m": 2})
    csv_path, json_path = tmp_path / "r.csv", tmp_path / "r.json"
    code, _, _ = run(capsys, "experiment", "--spec", spec, "--out", str(csv_path), "--json", str(json_path))
    assert code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("index,n,base_gh_lower") and len(lines) == 4
    assert json.loads(json_path.read_text())["co_decay"] is True
    bad = files("bad.json", {"family": "ngon", "indices": [4, 6], "reference": 12, "group": 4})
    assert run(capsys, "experiment", "--spec", bad)[0] == 2


def test_string_references(tmp_path, capsys):
    (tmp_path / "space.json").write_text(json.dumps(io.space_to_dict(families.two_point(1.0))))
    (tmp_path / "f.json").write_text(json.dumps({"source": "space.json", "target": "space.json", "image": [1, 0]}))
    code, out, _ = run(capsys, "certify", "--map", str(tmp_path / "f.json"), "--eps", "0")
    assert code == 0 and json.loads(out)["valid"]
