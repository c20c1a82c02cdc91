"""The command-line surface, driven end to end through subprocesses.

Exit codes are the contract under test: 0 success, 1 domain findings,
2 input problems, 3 unreachable control endpoint.  The run-command test
exercises the whole local lifecycle: serve, start, stream, stop, drain.
"""

import json
import signal
import subprocess
import sys
import threading
import time
import zipfile
from pathlib import Path

from flowmesh.blueprint import dump_blueprint

from solutions import pipeline_blueprint, sudoku_blueprint

CLI = [sys.executable, "-m", "flowmesh.cli"]


def write_blueprint(tmp_path, blueprint, mutate=None) -> Path:
    doc = dump_blueprint(blueprint, inline_protos=True)
    if mutate is not None:
        mutate(doc)
    path = tmp_path / f"{blueprint.name}.json"
    path.write_text(json.dumps(doc))
    return path


def run_cli(*args, timeout=60):
    return subprocess.run(
        CLI + [str(a) for a in args], capture_output=True, text=True, timeout=timeout
    )


def json_lines(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]


# -- validate ---------------------------------------------------------------


def test_validate_clean_blueprint_exits_zero(tmp_path):
    result = run_cli("validate", write_blueprint(tmp_path, pipeline_blueprint()))
    assert result.returncode == 0
    findings = json_lines(result.stdout)
    assert all(f["severity"] == "warning" for f in findings)


def test_validate_broken_blueprint_prints_findings(tmp_path):
    def break_target(doc):
        doc["links"][0]["to"]["rpc"] = "ghost"

    path = write_blueprint(tmp_path, sudoku_blueprint(), mutate=break_target)
    result = run_cli("validate", path)
    assert result.returncode == 1
    errors = [f for f in json_lines(result.stdout) if f["severity"] == "error"]
    assert errors
    assert errors[0]["code"] == "DANGLING_ENDPOINT"
    assert errors[0]["location"] == "links[0].to.rpc"


def test_unreadable_blueprints_exit_two(tmp_path):
    missing = run_cli("validate", tmp_path / "nope.json")
    assert missing.returncode == 2
    assert "cannot read blueprint" in missing.stderr

    garbled = tmp_path / "garbled.json"
    garbled.write_text("{not json")
    assert run_cli("validate", garbled).returncode == 2

    incomplete = tmp_path / "incomplete.json"
    incomplete.write_text(json.dumps({"name": "x", "version": "1"}))
    result = run_cli("validate", incomplete)
    assert result.returncode == 2
    assert "error" in result.stderr


# -- graph ------------------------------------------------------------------


def test_graph_prints_topology_roles_and_cycles(tmp_path):
    result = run_cli("graph", write_blueprint(tmp_path, pipeline_blueprint()))
    assert result.returncode == 0
    out = result.stdout
    assert "solution: pipeline v1" in out
    assert "counter.Get->doubler.apply  [fifo/64]" in out
    assert "cycles: none" in out
    sources = out.split("sources:")[1].split("interior:")[0]
    assert "counter.Get" in sources

    looped = run_cli("graph", write_blueprint(tmp_path, sudoku_blueprint()))
    assert looped.returncode == 0
    assert "cycles: 2" in looped.stdout


# -- package ----------------------------------------------------------------


def test_package_writes_a_bundle_zip(tmp_path):
    out = tmp_path / "pipeline-bundle.zip"
    result = run_cli(
        "package",
        write_blueprint(tmp_path, pipeline_blueprint()),
        "--out",
        out,
        "--orchestrator-image",
        "example/orchestrator:1",
    )
    assert result.returncode == 0
    summary = json.loads(result.stdout)
    assert summary["written"] == str(out)
    with zipfile.ZipFile(out) as archive:
        names = archive.namelist()
        assert summary["files"] == len(names)
        assert "blueprint.json" in names
        assert "manifests/orchestrator.yaml" in names
        assert "kubernetes-client-script" in names


def test_package_refuses_an_invalid_blueprint(tmp_path):
    def break_target(doc):
        doc["links"][0]["to"]["rpc"] = "ghost"

    path = write_blueprint(tmp_path, sudoku_blueprint(), mutate=break_target)
    result = run_cli("package", path, "--out", tmp_path / "never.zip")
    assert result.returncode == 1
    assert any(f["severity"] == "error" for f in json_lines(result.stdout))
    assert not (tmp_path / "never.zip").exists()


# -- control client errors --------------------------------------------------


def test_unreachable_control_endpoint_exits_three():
    result = run_cli("status", "--address", "127.0.0.1:1", "--timeout", "0.5")
    assert result.returncode == 3
    assert "unreachable" in result.stderr


# -- run: input errors ------------------------------------------------------


def test_run_requires_an_endpoint_source(tmp_path):
    result = run_cli("run", write_blueprint(tmp_path, pipeline_blueprint()))
    assert result.returncode == 2
    assert "--endpoints" in result.stderr


def test_run_rejects_a_missing_endpoints_file(tmp_path):
    path = write_blueprint(tmp_path, pipeline_blueprint())
    result = run_cli("run", path, "--endpoints", tmp_path / "nowhere.json")
    assert result.returncode == 2
    assert "bad endpoints file" in result.stderr


def test_run_reports_the_first_unmapped_node(tmp_path):
    path = write_blueprint(tmp_path, pipeline_blueprint())
    endpoints = tmp_path / "endpoints.json"
    endpoints.write_text(json.dumps({"counter": "127.0.0.1:1"}))
    result = run_cli("run", path, "--endpoints", endpoints)
    assert result.returncode == 2
    assert "no endpoint for node 'doubler'" in result.stderr


def test_run_local_refuses_unknown_images(tmp_path):
    def foreign_image(doc):
        doc["nodes"][0]["image"] = "registry.example.org/counter:9"

    path = write_blueprint(tmp_path, pipeline_blueprint(), mutate=foreign_image)
    result = run_cli("run", path, "--local", "--control-port", "0")
    assert result.returncode == 2
    assert "cannot provide image" in result.stderr


# -- run: lifecycle ---------------------------------------------------------


def _pump(stream, sink):
    for line in stream:
        sink.append(line)


def _await(lines, needle, deadline=20.0):
    end = time.monotonic() + deadline
    while time.monotonic() < end:
        for line in list(lines):
            if needle in line:
                return line
        time.sleep(0.05)
    raise AssertionError(f"{needle!r} never appeared in {lines!r}")


def test_run_local_full_lifecycle(tmp_path):
    path = write_blueprint(tmp_path, pipeline_blueprint())
    proc = subprocess.Popen(
        CLI
        + [
            "run",
            str(path),
            "--local",
            "--control-port",
            "0",
            "--no-autostart",
            "--source-interval",
            "0.02",
        ],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
    )
    out_lines: list[str] = []
    err_lines: list[str] = []
    pumps = [
        threading.Thread(target=_pump, args=(proc.stdout, out_lines), daemon=True),
        threading.Thread(target=_pump, args=(proc.stderr, err_lines), daemon=True),
    ]
    for pump in pumps:
        pump.start()
    try:
        address = _await(err_lines, "control listening on").split()[-1]

        status = json.loads(run_cli("status", "--address", address).stdout)
        assert (status["state"], status["run_id"]) == ("stopped", 0)

        started = json.loads(run_cli("start", "--address", address).stdout)
        assert (started["state"], started["run_id"]) == ("running", 1)

        events = json_lines(
            run_cli("events", "--address", address, "--limit", "6").stdout
        )
        assert len(events) == 6
        assert events[0]["kind"] == "run-started"
        seqs = [e["seq"] for e in events]
        assert seqs == sorted(seqs) and len(set(seqs)) == 6

        stopped = json.loads(run_cli("stop", "--address", address).stdout)
        assert stopped["state"] == "stopped"

        proc.send_signal(signal.SIGINT)
        assert proc.wait(timeout=20) == 0
    finally:
        if proc.poll() is None:
            proc.kill()
            proc.wait(timeout=10)
    for pump in pumps:
        pump.join(timeout=5)

    printed = json_lines("".join(out_lines))
    assert any(e.get("kind") == "run-started" for e in printed)
    summary = printed[-1]["drain-summary"]
    assert set(summary["links"]) == {
        "counter.Get->doubler.apply",
        "doubler.apply->recorder.Visualize",
    }


def test_run_exits_one_when_the_solution_halts(tmp_path):
    # every endpoint points at a dead port, so the first relay fails and the
    # halt policy takes the whole run down
    path = write_blueprint(tmp_path, pipeline_blueprint())
    endpoints = tmp_path / "endpoints.json"
    endpoints.write_text(
        json.dumps(
            {node: "127.0.0.1:1" for node in ("counter", "doubler", "recorder")}
        )
    )
    result = run_cli(
        "run",
        path,
        "--endpoints",
        endpoints,
        "--control-port",
        "0",
        "--on-rpc-error",
        "halt-solution",
    )
    assert result.returncode == 1
    printed = json_lines(result.stdout)
    assert any(e.get("kind") == "rpc-error" for e in printed)
    assert "drain-summary" in printed[-1]
