"""Reference solution topologies shared across the test suite.

Each builder returns a Blueprint over refkit-imaged nodes; tests pair them
with LocalDeployment (loopback servers) and build_runtime.
"""

from __future__ import annotations

import contextlib
import dataclasses

from flowmesh.blueprint import (
    Blueprint,
    Endpoint,
    Link,
    ModelInitializerNode,
    SharedFolderNode,
    classify,
)
from flowmesh.refkit import LocalDeployment, refkit_container
from flowmesh.runtime import EventLog, RuntimeConfig, build_runtime

WEIGHTS_URI = "https://models.example.org/sudoku/weights.bin"


def _link(src_node, src_rpc, dst_node, dst_rpc, **kwargs) -> Link:
    return Link(Endpoint(src_node, src_rpc), Endpoint(dst_node, dst_rpc), **kwargs)


def pipeline_blueprint() -> Blueprint:
    """counter -> doubler -> recorder, the minimal linear chain."""
    return Blueprint(
        name="pipeline",
        version="1",
        nodes=(
            refkit_container("counter", "counter", "Counter"),
            refkit_container("doubler", "doubler", "Doubler"),
            refkit_container("recorder", "recorder", "Recorder"),
        ),
        links=(
            _link("counter", "Get", "doubler", "apply"),
            _link("doubler", "apply", "recorder", "Visualize"),
        ),
    )


def sudoku_blueprint() -> Blueprint:
    """GUI <-> evaluator <-> solver; two request/response cycles."""
    return Blueprint(
        name="sudoku",
        version="1",
        nodes=(
            refkit_container("gui", "sudoku-gui", "SudokuGUI"),
            refkit_container("evaluator", "sudoku-evaluator", "SudokuDesignEvaluator"),
            refkit_container("solver", "sudoku-solver", "OneShotAnswerSetSolver"),
        ),
        links=(
            _link("gui", "requestSudokuEvaluation", "evaluator", "evaluateSudokuDesign"),
            _link("evaluator", "evaluateSudokuDesign", "gui", "processEvaluationResult"),
            _link("evaluator", "callAnswersetSolver", "solver", "solve"),
            _link("solver", "solve", "evaluator", "receiveAnswersetSolverResult"),
        ),
    )


def sudoku_deployment_blueprint() -> Blueprint:
    """The sudoku solution grown sideways for packaging: a web UI on the GUI,
    a model initializer feeding the solver, a folder shared by GUI and
    evaluator.  Touches every manifest shape the packager emits."""
    base = sudoku_blueprint()
    nodes = tuple(
        dataclasses.replace(n, web_ui=True) if n.id == "gui" else n
        for n in base.nodes
    )
    return dataclasses.replace(
        base,
        nodes=nodes
        + (
            ModelInitializerNode("weights", WEIGHTS_URI),
            SharedFolderNode("boards", "2Gi", "/boards"),
        ),
        links=base.links
        + (
            Link(Endpoint("weights"), Endpoint("solver")),
            Link(Endpoint("boards"), Endpoint("gui")),
            Link(Endpoint("boards"), Endpoint("evaluator")),
        ),
    )


def maze_blueprint() -> Blueprint:
    """GUI, simulator, planner, executor; state fan-out uses latest-mode links."""
    return Blueprint(
        name="maze",
        version="1",
        nodes=(
            refkit_container("gui", "maze-gui", "MazeGUI"),
            refkit_container("sim", "maze-simulator", "Simulator"),
            refkit_container("planner", "maze-planner", "Planner"),
            refkit_container("executor", "maze-executor", "Executor"),
        ),
        links=(
            _link("gui", "requestTask", "executor", "assembleProblem"),
            _link("executor", "assembleProblem", "planner", "plan"),
            _link("planner", "plan", "executor", "processPlanningResult"),
            _link("executor", "processPlanningResult", "gui", "processTaskResult"),
            _link("executor", "doNextAction", "sim", "doAction"),
            _link("sim", "doAction", "executor", "processActionResult"),
            _link("sim", "getState", "executor", "processState", mode="latest", capacity=1),
            _link("sim", "getState", "gui", "visualizeState", mode="latest", capacity=1),
        ),
    )


def imaging_blueprint() -> Blueprint:
    """Camera fan-out to detector and collator, joined back for the visualizer."""
    return Blueprint(
        name="imaging",
        version="1",
        nodes=(
            refkit_container("camera", "camera", "Camera"),
            refkit_container("detector", "detector", "Detector"),
            refkit_container("collator", "collator", "ImageCollator"),
            refkit_container("visualizer", "visualizer", "Visualizer"),
        ),
        links=(
            _link("camera", "Get", "detector", "detect"),
            _link("camera", "Get", "collator", "pushImage"),
            _link("detector", "detect", "collator", "pushObjects"),
            _link("collator", "nextPair", "visualizer", "Visualize"),
        ),
    )


@contextlib.contextmanager
def live_solution(
    blueprint: Blueprint,
    *,
    overrides=None,
    config: RuntimeConfig | None = None,
    event_log: EventLog | None = None,
    autostart: bool = True,
):
    """Deploy loopback servers, build a runtime, optionally start it.

    Yields (runtime, deployment). The runtime is stopped and the servers shut
    down on exit regardless of how the body ends.
    """
    plan = classify(blueprint)
    deployment = LocalDeployment(blueprint, overrides=overrides)
    with deployment:
        runtime = build_runtime(
            plan,
            deployment.endpoints,
            config=config or RuntimeConfig(),
            event_log=event_log,
        )
        if autostart:
            runtime.start()
        try:
            yield runtime, deployment
        finally:
            runtime.stop()
