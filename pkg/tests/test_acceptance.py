"""The eight checks that gate a release.

Each test exercises one full subsystem at desk scale and pins the tolerance
it promises: exact counts, byte equality, or an explicit wall-clock budget.
Conservation claims are recounted from the exported event log rather than
trusted from the drain summary, and search results are checked against
oracles that share no code with the implementation.
"""

import json
import random
import subprocess
import time
import warnings
from collections import Counter

import pytest
import yaml

from flowmesh.blueprint import find_cycles, validate
from flowmesh.packager import CLIENT_SCRIPT_NAME, generate_bundle
from flowmesh.refkit import (
    CounterComponent,
    MazeGuiSurrogate,
    MazeSimulator,
    RecorderComponent,
    SudokuGuiSurrogate,
    make_state,
    scripted_job,
)
from flowmesh.refkit.codecs import Goal, decode_number
from flowmesh.runtime import EventLog, RuntimeConfig
from flowmesh.wire import WireField, collate

import oracle_protobuf
from blueprint_corpus import MUTATIONS, link_index_of, make_blueprint
from maze_oracle import flood_distances, replay
from solutions import (
    WEIGHTS_URI,
    live_solution,
    maze_blueprint,
    pipeline_blueprint,
    sudoku_blueprint,
    sudoku_deployment_blueprint,
)

PIPELINE_LINKS = ("counter.Get->doubler.apply", "doubler.apply->recorder.Visualize")


def tally_link_events(exported: str):
    """Per-link dispatched/consumed counts recounted from exported JSON lines."""
    dispatched, consumed = Counter(), Counter()
    for line in exported.splitlines():
        event = json.loads(line)
        if event["kind"] == "msg-dispatched":
            dispatched[event["link"]] += 1
        elif event["kind"] == "msg-consumed":
            consumed[event["link"]] += 1
    return dispatched, consumed


def assert_log_matches_summary(exported: str, summary: dict):
    """Drops never reach the event log, so beyond matching the summary's own
    produced/consumed figures, its dropped figure must close the conservation
    identity against the independently recounted log tallies."""
    dispatched, consumed = tally_link_events(exported)
    assert set(dispatched) | set(consumed) <= set(summary["links"])
    for link_id, stats in summary["links"].items():
        assert dispatched[link_id] == stats["produced"], link_id
        assert consumed[link_id] == stats["consumed"], link_id
        assert dispatched[link_id] == consumed[link_id] + stats["dropped"], link_id


def test_validator_flags_exactly_the_mutated_links():
    started = time.monotonic()
    exercised = Counter()
    for seed in range(200):
        corpus = make_blueprint(random.Random(seed))
        report = validate(corpus.blueprint, strict=True)
        assert not report.errors, f"false positive on clean blueprint {seed}"
        for name, mutate in MUTATIONS:
            hit = mutate(corpus, random.Random(seed ^ 0xBEEF))
            if hit is None:
                continue
            mutated, index, _expected_code = hit
            flagged = {
                link_index_of(f.location)
                for f in validate(mutated, strict=True).errors
            }
            assert flagged == {index}, (seed, name, flagged, index)
            exercised[name] += 1
    elapsed = time.monotonic() - started
    assert set(exercised) == {"type-rename", "direction-flip", "dangling-endpoint"}
    assert elapsed < 5.0, f"corpus validation took {elapsed:.2f}s"


def test_pipeline_delivers_ten_thousand_doubled_messages_in_order():
    total = 10_000
    recorder = RecorderComponent(keep_payloads=True)
    log = EventLog(400_000)
    config = RuntimeConfig(source_interval=0.0, drain_timeout=5.0)
    started = time.monotonic()
    with live_solution(
        pipeline_blueprint(),
        overrides={"recorder": recorder},
        config=config,
        event_log=log,
    ) as (runtime, _):
        assert recorder.wait_count(total, timeout=28.0)
        elapsed = time.monotonic() - started
        summary = runtime.stop().to_dict()
        exported = log.export()
    assert elapsed < 30.0, f"{total} messages took {elapsed:.2f}s"

    values = [decode_number(payload).value for payload in recorder.payloads()]
    assert len(values) >= total
    # in order, every value doubled, nothing skipped or repeated — including
    # whatever was still in flight when the stop began
    assert values == [2 * i for i in range(1, len(values) + 1)]

    assert set(summary["links"]) == set(PIPELINE_LINKS)
    assert_log_matches_summary(exported, summary)


def test_sudoku_cycles_route_fifty_jobs_to_fifty_results():
    blueprint = sudoku_blueprint()
    cycles = find_cycles(blueprint)
    assert len(cycles) == 2
    paired_nodes = sorted(
        tuple(sorted({link.source.node for link in cycle})) for cycle in cycles
    )
    assert paired_nodes == [("evaluator", "gui"), ("evaluator", "solver")]

    gui = SudokuGuiSurrogate(count=50)
    config = RuntimeConfig(source_interval=0.0, drain_timeout=2.0, unary_deadline=10.0)
    started = time.monotonic()
    with live_solution(blueprint, overrides={"gui": gui}, config=config):
        assert gui.wait_results(50, timeout=10.0)
        elapsed = time.monotonic() - started
        time.sleep(0.3)  # quiescence: the script is spent, nothing more may arrive
        results = gui.results()
    assert elapsed < 10.0
    assert len(results) == 50
    assert all(r.status == 0 for r in results)
    assert all(r.description == "2 answer sets" for r in results)
    # FIFO correlation end to end: result i answers job i
    assert [r.solution for r in results] == [
        scripted_job(i).cells for i in range(50)
    ]


def test_maze_replans_after_a_wall_appears_and_reaches_the_goal():
    goal = Goal(row=0, col=7)
    gui = MazeGuiSurrogate(goals=[goal])
    sim = MazeSimulator(make_state(8, 8))
    config = RuntimeConfig(source_interval=0.15, drain_timeout=2.0, unary_deadline=10.0)
    started = time.monotonic()
    with live_solution(maze_blueprint(), overrides={"gui": gui, "sim": sim}, config=config):
        deadline = started + 10.0
        while sim.action_count() < 1:
            assert time.monotonic() < deadline, "no action within the budget"
            time.sleep(0.01)
        sim.inject_wall(0, 4)

        assert gui.wait_results(1, timeout=10.0)
        assert not gui.results()[0].success
        time.sleep(0.5)  # let the state broadcast catch up before re-requesting
        gui.add_goal(goal)
        assert gui.wait_results(2, timeout=10.0)
        elapsed = time.monotonic() - started
        log = sim.action_log()
        final = sim.state()

    assert elapsed < 10.0
    results = gui.results()
    assert [r.success for r in results] == [False, True]
    assert results[1].detail == "goal reached"
    assert (final.agent_row, final.agent_col) == (0, 7)

    failures = [i for i, (_, ok) in enumerate(log) if not ok]
    assert len(failures) == 1  # one refusal, then the queue was discarded
    walked = failures[0]
    walled = make_state(8, 8, walls=[(0, 4)])
    stranded = replay(8, 8, (), (0, 0), [d for d, _ in log[:walked]])
    detour = flood_distances(8, 8, walled.walls, stranded)[(0, 7)]
    # every doAction call is accounted for by the two plans: the walk until
    # the refusal, the refusal itself, and an oracle-length detour
    assert len(log) == walked + 1 + detour
    assert replay(8, 8, walled.walls, (0, 0), [d for d, ok in log if ok]) == (0, 7)


def test_collate_round_trips_through_a_conformant_decoder():
    rng = random.Random(0xC011A7E)
    for _ in range(500):
        image = rng.randbytes(rng.randrange(0, 2049))
        detections = rng.randbytes(rng.randrange(0, 513))
        merged = collate([WireField(1, image), WireField(2, detections)])
        decoded = oracle_protobuf.parse("Pair", merged)
        assert decoded.first == image
        assert decoded.second == detections


def test_sudoku_bundle_is_deterministic_and_deployable(tmp_path):
    blueprint = sudoku_deployment_blueprint()
    bundle = generate_bundle(blueprint, orchestrator_image="example/flowmesh:1")
    again = generate_bundle(blueprint, orchestrator_image="example/flowmesh:1")
    assert list(bundle.files) == list(again.files)
    assert bundle.files == again.files
    assert bundle.to_bytes() == again.to_bytes()

    manifests = {
        name: list(yaml.safe_load_all(bundle.text(name)))
        for name in bundle.files
        if name.startswith("manifests/")
    }

    def deployment_of(node_id):
        return {d["kind"]: d for d in manifests[f"manifests/{node_id}.yaml"]}["Deployment"]

    assert blueprint.node("gui").web_ui  # the fixture really exercises the web port
    for node in blueprint.container_nodes():
        container = deployment_of(node.id)["spec"]["template"]["spec"]["containers"][0]
        ports = {p["containerPort"] for p in container["ports"]}
        assert 8061 in ports, node.id
        assert (8062 in ports) == node.web_ui, node.id

    for linked in ("gui", "evaluator"):
        spec = deployment_of(linked)["spec"]["template"]["spec"]
        mounts = spec["containers"][0]["volumeMounts"]
        assert any(m["mountPath"] == "/boards" for m in mounts), linked

    solver_spec = deployment_of("solver")["spec"]["template"]["spec"]
    inits = solver_spec["initContainers"]
    assert len(inits) == 1
    assert WEIGHTS_URI in " ".join(inits[0]["command"])

    root = bundle.write_dir(tmp_path)
    check = subprocess.run(
        ["sh", "-n", str(root / CLIENT_SCRIPT_NAME)], capture_output=True, text=True
    )
    assert check.returncode == 0, check.stderr


def test_randomized_stops_conserve_messages_on_every_link():
    rng = random.Random(0x57A57)
    log = EventLog(400_000)
    config = RuntimeConfig(source_interval=0.0, drain_timeout=5.0)
    with live_solution(
        pipeline_blueprint(), config=config, event_log=log, autostart=False
    ) as (runtime, _):
        for trial in range(20):
            runtime.start()
            time.sleep(rng.uniform(0.02, 0.25))
            summary = runtime.stop().to_dict()
            assert set(summary["links"]) == set(PIPELINE_LINKS), trial
            assert_log_matches_summary(log.export(), summary)


def test_pipeline_sustains_desk_scale_throughput():
    counter = CounterComponent(padding_size=1013)  # ~1 KiB messages on the wire
    recorder = RecorderComponent()
    config = RuntimeConfig(source_interval=0.0, drain_timeout=5.0)
    with live_solution(
        pipeline_blueprint(),
        overrides={"counter": counter, "recorder": recorder},
        config=config,
    ):
        assert recorder.wait_count(200, timeout=20.0)  # warmed up and flowing
        window = 4.0
        before = len(recorder.hashes())
        time.sleep(window)
        rate = (len(recorder.hashes()) - before) / window
    print(f"\nthroughput: {rate:.0f} relayed messages/s at 1 KiB")
    if rate < 500:
        pytest.fail(f"throughput collapsed: {rate:.0f} messages/s")
    if rate < 2000:
        warnings.warn(
            f"below the 2000/s soft target: {rate:.0f} messages/s "
            "(single-process deployment shares the interpreter lock)"
        )
