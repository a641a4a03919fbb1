import copy
import json

import pytest
from importlib import resources

from hhengine import cli
from hhengine.errors import SchemaError


from conftest import load_workspace_doc as load_ws


def ws_path(name):
    return str(resources.files("hhengine.workspaces").joinpath(f"{name}.json"))


def payloads(report):
    return {t["id"]: (t["status"], t["payload"]) for t in report["tasks"]}


def test_pt_workspace(golden_reports):
    report, ok = golden_reports["pt"]
    assert ok
    p = payloads(report)
    assert p["hh-pt"][1] == {"hh": {"0": 1}}
    assert p["mukai-one"][1] == {"value": "1/1"}


def test_bz2_workspace_values(golden_reports):
    report, ok = golden_reports["bz2"]
    assert ok
    p = payloads(report)
    assert p["hh-bz2"][1] == {"hh": {"0": 2}}
    assert p["chern-sgn"][1]["class_function"] == ["1/1", "-1/1"]
    assert p["semi-hrr-bz2"][1]["pairing_matrix"] == [["1/1", "0/1"], ["0/1", "1/1"]]
    assert p["euler-ts"][1] == {"euler": "0/1"}
    # the diagram pushforward lands on the same class as chern-of sgn
    assert p["push-diagram"][1]["coords"] == p["cardy-diagram"][1]["coords"]


def test_a2_workspace_values(golden_reports):
    report, ok = golden_reports["a2"]
    assert ok
    p = payloads(report)
    assert p["euler-s1-s2"][1] == {"euler": "-1/1"}
    assert p["hh-a2"][1] == {"hh": {"0": 2}}
    assert p["hcoh-a2"][1] == {"hcoh": {"0": 1}}
    assert p["pairing-a2"][1]["rank"] == 2
    assert p["mukai-diagram-a2"][1] == {"value": "-1/1"}


def test_a3_m2_workspaces(golden_reports):
    report, ok = golden_reports["a3"]
    assert ok
    p = payloads(report)
    assert p["hh-a3"][1] == {"hh": {"0": 3}}
    assert p["pairing-a3"][1]["rank"] == 3
    report, ok = golden_reports["m2"]
    assert ok
    p = payloads(report)
    assert p["isometry-col"][1]["pairing_matrix"] == [["1/1"]]


def test_bs3_workspace_values(golden_reports):
    report, ok = golden_reports["bs3"]
    assert ok
    p = payloads(report)
    assert p["semi-hrr-bs3"][1]["pairing_matrix"] == [
        ["1/1", "0/1", "0/1"], ["0/1", "1/1", "0/1"], ["0/1", "0/1", "1/1"]]
    assert p["char-std"][1]["class_function"] == ["2/1", "0/1", "-1/1"]
    assert p["char-sgn"][1]["class_function"] == ["1/1", "-1/1", "1/1"]
    assert p["adjointness"][1]["matrix"] == p["push-ind"][1]["matrix"]
    assert p["push-ind"][1]["matrix"] == p["pull-res"][1]["matrix"]


def test_report_determinism():
    r1, _ = cli.run_workspace(load_ws("a2"), "a2.json", seed=5)
    r2, _ = cli.run_workspace(load_ws("a2"), "a2.json", seed=5)
    strip = lambda r: json.dumps(
        [{k: v for k, v in t.items() if k != "seconds"} for t in r["tasks"]],
        sort_keys=True)
    assert strip(r1) == strip(r2)
    assert r1["seed"] == 5


def test_task_filter_and_unknown_task():
    report, ok = cli.run_workspace(load_ws("pt"), "pt.json", only_task="hh-pt")
    assert ok and len(report["tasks"]) == 1
    with pytest.raises(SchemaError):
        cli.run_workspace(load_ws("pt"), "pt.json", only_task="nope")


def test_schema_error_on_bad_document():
    with pytest.raises(SchemaError):
        cli.Workspace({"schema": "wrong"}, "x")
    bad = load_ws("pt")
    bad["spaces"]["pt"] = {"type": "mystery"}
    with pytest.raises(SchemaError):
        cli.Workspace(bad, "x")


def test_failing_task_sets_exit_status():
    doc = load_ws("pt")
    doc["tasks"] = [{"id": "boom", "op": "eval-diagram",
                     "term": "eps(ker(missing))"}]
    report, ok = cli.run_workspace(doc, "pt.json")
    assert not ok
    assert report["tasks"][0]["status"] == "error"


def test_main_entry_and_exit_codes(tmp_path, capsys):
    assert cli.main(["run", ws_path("pt")]) == 0
    out = capsys.readouterr().out
    assert json.loads(out)["schema"] == cli.REPORT_SCHEMA
    # schema error path: exit 2
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert cli.main(["run", str(bad)]) == 2
    notjson = tmp_path / "b.json"
    notjson.write_text("{")
    assert cli.main(["run", str(notjson)]) == 2
    # text mode
    assert cli.main(["run", ws_path("pt"), "--text", "--task", "hh-pt"]) == 0
    out = capsys.readouterr().out
    assert "hh-pt" in out


def test_explain(capsys):
    assert cli.main(["explain", ws_path("pt"), "mukai-one"]) == 0
    out = capsys.readouterr().out
    assert "tr(" in out and "1/1" in out
    assert cli.main(["explain", ws_path("pt"), "missing"]) == 1


def test_explain_cardy_and_oracle(capsys):
    assert cli.main(["explain", ws_path("a2"), "cardy-a2"]) == 0
    out = capsys.readouterr().out
    assert "iota" in out
    assert cli.main(["explain", ws_path("a2"), "oracle-a2"]) == 0
    out = capsys.readouterr().out
    assert "tor" in out


def test_product_space_constructor():
    doc = {
        "schema": cli.SCHEMA,
        "spaces": {
            "pt": {"type": "point"},
            "Z2": {"type": "group_cayley", "table": [[0, 1], [1, 0]]},
            "Z2xZ2": {"type": "product", "factors": ["Z2", "Z2"]},
        },
        "tasks": [{"id": "h", "op": "hh", "space": "Z2xZ2"}],
    }
    report, ok = cli.run_workspace(doc, "prod")
    assert ok
    assert payloads(report)["h"][1] == {"hh": {"0": 4}}


def test_explain_pushforward_with_class(tmp_path, capsys):
    doc = load_ws("bz2")
    doc["tasks"].append({"id": "push-one", "op": "pushforward",
                         "kernel": "sgn", "class": "one"})
    p = tmp_path / "ws.json"
    p.write_text(json.dumps(doc))
    assert cli.main(["explain", str(p), "push-one"]) == 0
    out = capsys.readouterr().out
    assert "gamma'" in out and "eps(" in out and "value" in out
