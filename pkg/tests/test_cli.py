import json

import pytest

from auctionclear import cli, io

MODES = ["welfare", "a-exact", "a-heuristic", "b-heuristic", "b-oracle"]


def solve(tmp_path, name, model, *extra):
    out = tmp_path / f"{name}_{model}.json"
    code = cli.main(["solve", str(io.fixture_path(name)), "--model", model, "-o", str(out), *extra])
    return code, json.loads(out.read_text()), out


def test_a_exact_42(tmp_path):
    code, doc, _ = solve(tmp_path, "example_4_2", "a-exact")
    assert code == 0
    assert doc["welfare"] == "0" and doc["prices"] == {"good": "6"}
    assert all(v == "0" for d in doc["allocation"].values() for v in d)
    assert doc["schema"] == 1


def test_b_oracle_43(tmp_path):
    code, doc, _ = solve(tmp_path, "example_4_3", "b-oracle")
    assert code == 0 and doc["welfare"] == "370"
    assert doc["price_window"] == {"energy": ["43/4", "20"]}


@pytest.mark.parametrize("name", io.FIXTURES)
@pytest.mark.parametrize("model", MODES)
def test_round_trip_verify(tmp_path, name, model, capsys):
    code, _, path = solve(tmp_path, name, model)
    assert code == 0
    rep = tmp_path / "rep.json"
    assert cli.main(["verify", str(io.fixture_path(name)), str(path), "-o", str(rep)]) == 0
    assert json.loads(rep.read_text())["passed"]


def test_determinism(tmp_path):
    _, _, p1 = solve(tmp_path, "example_4_2", "a-exact")
    a = p1.read_bytes()
    _, _, p2 = solve(tmp_path, "example_4_2", "a-exact")
    assert a == p2.read_bytes()


def test_log_and_csv(tmp_path):
    log = tmp_path / "it.jsonl"
    csvp = tmp_path / "r.csv"
    solve(tmp_path, "example_4_2", "a-exact", "--log", str(log), "--report-csv", str(csvp))
    lines = [json.loads(x) for x in log.read_text().splitlines()]
    assert [x["iter"] for x in lines] == [1, 2]
    assert lines[0]["cut_added"]["type"] == "no-good"
    rows = csvp.read_text().splitlines()
    assert rows[0] == "id,kind,delta,quantities,transfer,surplus" and len(rows) == 4


def test_report_command(tmp_path, capsys):
    _, _, path = solve(tmp_path, "example_4_3", "b-oracle")
    assert cli.main(["report", str(io.fixture_path("example_4_3")), str(path)]) == 0
    out = capsys.readouterr().out
    assert "producer,mixed_integer,1 40,-40" in out


def test_float_mode(tmp_path):
    code, doc, _ = solve(tmp_path, "example_4_3", "b-heuristic", "--arithmetic", "float",
                         "--feasibility-eps", "1e-8")
    assert code == 0 and doc["welfare"] == 370.0 and doc["arithmetic"] == "float"


def test_validate_unbounded(tmp_path, capsys):
    p = tmp_path / "u.json"
    p.write_text(json.dumps({"commodities": ["x"], "convex_bids": [
        {"id": "open", "c": [1], "Q": [[1]], "G": [[-1]], "h": [0]}]}))
    assert cli.main(["validate", str(p)]) == 3
    assert "'open'" in capsys.readouterr().err


def test_parse_error_position(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"commodities": ["x"],\n "convex_bids": [}')
    assert cli.main(["validate", str(p)]) == 3
    assert "line 2, column" in capsys.readouterr().err


def test_schema_error_names_field(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"commodities": ["x"], "convex_bids": [{"id": "a", "c": [1]}]}))
    assert cli.main(["validate", str(p)]) == 3
    assert "convex_bids/0" in capsys.readouterr().err


def test_infeasible_exit(tmp_path):
    p = tmp_path / "inf.json"
    bid = {"c": [4], "Q": [[1]], "G": [[1], [-1]], "h": [2, -1]}
    p.write_text(json.dumps({"commodities": ["x"], "convex_bids": [
        dict(bid, id="b1"), dict(bid, id="b2")]}))
    assert cli.main(["solve", str(p), "--model", "convex-eq", "-o", str(tmp_path / "o.json")]) == 2


def test_verify_detects_tampering(tmp_path):
    _, doc, path = solve(tmp_path, "example_4_1", "a-exact")
    doc["prices"]["good"] = "7/2"
    path.write_text(json.dumps(doc))
    assert cli.main(["verify", str(io.fixture_path("example_4_1")), str(path),
                     "-o", str(tmp_path / "r.json")]) == 1


def test_validate_ok(tmp_path):
    out = tmp_path / "v.json"
    assert cli.main(["validate", str(io.fixture_path("example_4_3")), "-o", str(out)]) == 0
    assert json.loads(out.read_text())["hulls"] == {"producer": "pass"}
