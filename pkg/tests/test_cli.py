"""End-to-end runs of the command-line entry point via main(argv)."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from agentbom.cli import main
from agentbom.matchers import default_matcher
from agentbom.rules import builtin_rules, dump_rules


@pytest.fixture()
def workdir(tmp_path):
    """A scenario's inputs plus a built graph, on disk."""
    rc = main(["scenario", "--id", "memory_poisoning_tool_misuse",
               "--out", str(tmp_path / "fx")])
    assert rc == 0
    graph_path = tmp_path / "graph.json"
    rc = main(["build",
               "--manifest", str(tmp_path / "fx" / "manifest.json"),
               "--trace", str(tmp_path / "fx" / "trace.jsonl"),
               "--out", str(graph_path)])
    assert rc == 0
    return tmp_path


def test_scenario_prints_the_three_paths(tmp_path, capsys):
    assert main(["scenario", "--id", "benign_baseline",
                 "--out", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [line.rsplit("/", 1)[-1] for line in lines] == [
        "manifest.json", "trace.jsonl", "expected_report.json",
    ]


def test_build_writes_a_loadable_graph(workdir):
    doc = json.loads((workdir / "graph.json").read_text())
    assert {"agents", "nodes", "edges"} <= set(doc)
    assert any(n["node_id"] == "tool.exec" for n in doc["nodes"])


def test_build_to_stdout_matches_the_file(workdir, capsys):
    assert main(["build",
                 "--manifest", str(workdir / "fx" / "manifest.json"),
                 "--trace", str(workdir / "fx" / "trace.jsonl")]) == 0
    assert capsys.readouterr().out == (workdir / "graph.json").read_text()


def test_audit_report_and_summary(workdir, capsys):
    report_path = workdir / "report.json"
    assert main(["audit", "--graph", str(workdir / "graph.json"),
                 "--out", str(report_path)]) == 0
    out = capsys.readouterr().out
    assert "ASI02 tool_misuse: entry tool.exec" in out
    assert "ASI06 memory_poisoning: entry act.assistant.06" in out
    assert "2 finding(s)" in out
    report = json.loads(report_path.read_text())
    assert sorted({f["risk_id"] for f in report["findings"]}) == [
        "ASI02", "ASI06",
    ]


def test_audit_without_out_prints_only_json(workdir, capsys):
    assert main(["audit", "--graph", str(workdir / "graph.json")]) == 0
    out = capsys.readouterr().out
    json.loads(out)  # pure report, no summary chatter mixed in


def test_fail_on_findings_flag(workdir, tmp_path):
    assert main(["audit", "--graph", str(workdir / "graph.json"),
                 "--fail-on-findings"]) == 1
    # the benign run exits clean under the same flag
    assert main(["scenario", "--id", "benign_baseline",
                 "--out", str(tmp_path / "ok")]) == 0
    assert main(["build",
                 "--manifest", str(tmp_path / "ok" / "manifest.json"),
                 "--trace", str(tmp_path / "ok" / "trace.jsonl"),
                 "--out", str(tmp_path / "ok.json")]) == 0
    assert main(["audit", "--graph", str(tmp_path / "ok.json"),
                 "--fail-on-findings", "--out", str(tmp_path / "r.json")]) == 0


def test_audit_accepts_a_custom_rule_pack(workdir, capsys):
    pack_path = workdir / "pack.json"
    pack_path.write_text(dump_rules(builtin_rules()[:2]))
    assert main(["audit", "--graph", str(workdir / "graph.json"),
                 "--rules", str(pack_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report["stats"]) == {"ASI01", "ASI02"}


def test_custom_matcher_pack_via_flag_and_env(workdir, capsys, monkeypatch):
    quiet = workdir / "quiet.json"
    doc = default_matcher().to_dict()
    doc["patterns"] = [p for p in doc["patterns"]
                       if p["flag"] != "destructive_command"]
    quiet.write_text(json.dumps(doc))
    out_path = workdir / "quiet_graph.json"

    assert main(["build",
                 "--manifest", str(workdir / "fx" / "manifest.json"),
                 "--trace", str(workdir / "fx" / "trace.jsonl"),
                 "--matchers", str(quiet),
                 "--out", str(out_path)]) == 0
    text = out_path.read_text()
    assert "destructive_command" not in text

    monkeypatch.setenv("AGENTBOM_MATCHERS", str(quiet))
    assert main(["build",
                 "--manifest", str(workdir / "fx" / "manifest.json"),
                 "--trace", str(workdir / "fx" / "trace.jsonl")]) == 0
    assert capsys.readouterr().out == text


def test_export_whole_graph_and_single_finding(workdir, capsys):
    assert main(["export", "--graph", str(workdir / "graph.json")]) == 0
    whole = capsys.readouterr().out
    assert whole.startswith("digraph agentbom {")
    assert main(["export", "--graph", str(workdir / "graph.json"),
                 "--finding", "0"]) == 0
    single = capsys.readouterr().out
    assert single.startswith("digraph finding_ASI02 {")
    assert len(single) < len(whole)


def test_export_finding_index_out_of_range(workdir, capsys):
    assert main(["export", "--graph", str(workdir / "graph.json"),
                 "--finding", "99"]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error: ")
    assert "out of range" in err


def test_validate_reports_a_healthy_graph(workdir, capsys):
    assert main(["validate", "--graph", str(workdir / "graph.json")]) == 0
    out = capsys.readouterr().out
    assert out.startswith("graph valid: ")
    assert "static=" in out and "runtime=" in out


def test_validate_lists_violations_and_exits_2(workdir, capsys):
    doc = json.loads((workdir / "graph.json").read_text())
    doc["edges"][0]["target"] = "no.such.node"
    broken = workdir / "broken.json"
    broken.write_text(json.dumps(doc))
    assert main(["validate", "--graph", str(broken)]) == 2
    captured = capsys.readouterr()
    assert "dangling_endpoint" in captured.out
    assert "error: graph failed validation" in captured.err


def test_missing_input_is_a_single_line_error(tmp_path, capsys):
    assert main(["build", "--manifest", str(tmp_path / "nope.json"),
                 "--trace", str(tmp_path / "nope.jsonl")]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error: ")
    assert err.count("\n") == 1


def test_unparsable_manifest_is_a_single_line_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    trace = tmp_path / "t.jsonl"
    trace.write_text("")
    assert main(["build", "--manifest", str(bad),
                 "--trace", str(trace)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error: ")
    assert err.count("\n") == 1


def test_outputs_are_byte_deterministic(workdir, tmp_path):
    for args, name in [
        (["scenario", "--id", "ecosystem_hijacking", "--seed", "4"],
         "fx2"),
    ]:
        first, second = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(first)]) == 0
        assert main(args + ["--out", str(second)]) == 0
        for child in sorted(first.iterdir()):
            assert child.read_bytes() == (second / child.name).read_bytes()

    g1, g2 = tmp_path / "g1.json", tmp_path / "g2.json"
    for target in (g1, g2):
        assert main(["build",
                     "--manifest", str(tmp_path / "a" / "manifest.json"),
                     "--trace", str(tmp_path / "a" / "trace.jsonl"),
                     "--out", str(target)]) == 0
    assert g1.read_bytes() == g2.read_bytes()

    r1, r2 = tmp_path / "r1.json", tmp_path / "r2.json"
    for target in (r1, r2):
        assert main(["audit", "--graph", str(g1),
                     "--out", str(target)]) == 0
    assert r1.read_bytes() == r2.read_bytes()


def test_module_is_runnable_as_a_script(workdir):
    proc = subprocess.run(
        [sys.executable, "-m", "agentbom.cli", "validate",
         "--graph", str(workdir / "graph.json")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("graph valid: ")
