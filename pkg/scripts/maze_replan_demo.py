#!/usr/bin/env python3
"""Watch the maze control loop recover from a wall that appears mid-walk."""

import time

from flowmesh.blueprint import Blueprint, Endpoint, Link, classify
from flowmesh.refkit import LocalDeployment, refkit_container
from flowmesh.refkit.codecs import Goal
from flowmesh.refkit.maze import MazeGuiSurrogate, MazeSimulator, make_state
from flowmesh.runtime import RuntimeConfig, build_runtime


def maze_blueprint() -> Blueprint:
    link = lambda a, ar, b, br, **kw: Link(Endpoint(a, ar), Endpoint(b, br), **kw)
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
            link("gui", "requestTask", "executor", "assembleProblem"),
            link("executor", "assembleProblem", "planner", "plan"),
            link("planner", "plan", "executor", "processPlanningResult"),
            link("executor", "processPlanningResult", "gui", "processTaskResult"),
            link("executor", "doNextAction", "sim", "doAction"),
            link("sim", "doAction", "executor", "processActionResult"),
            link("sim", "getState", "executor", "processState", mode="latest", capacity=1),
            link("sim", "getState", "gui", "visualizeState", mode="latest", capacity=1),
        ),
    )


def main() -> None:
    goal = Goal(row=0, col=7)
    gui = MazeGuiSurrogate(goals=[goal])
    sim = MazeSimulator(make_state(8, 8))
    blueprint = maze_blueprint()
    config = RuntimeConfig(source_interval=0.15, unary_deadline=10.0, drain_timeout=2.0)

    with LocalDeployment(blueprint, overrides={"gui": gui, "sim": sim}) as deployment:
        runtime = build_runtime(classify(blueprint), deployment.endpoints, config=config)
        runtime.start()
        try:
            print(f"goal: ({goal.row}, {goal.col}) on an open 8x8 grid")
            while sim.action_count() < 1:
                time.sleep(0.01)
            sim.inject_wall(0, 4)
            print("wall injected at (0, 4) after the first step")

            gui.wait_results(1, timeout=10.0)
            first = gui.results()[0]
            print(f"first attempt: success={first.success} ({first.detail})")

            time.sleep(0.5)  # let the fresh world state reach the executor
            gui.add_goal(goal)
            gui.wait_results(2, timeout=10.0)
            second = gui.results()[1]
            print(f"second attempt: success={second.success} ({second.detail})")
        finally:
            runtime.stop()

        state = sim.state()
        print(f"\nagent finished at ({state.agent_row}, {state.agent_col})")
        print("action log (direction, accepted):")
        for direction, ok in sim.action_log():
            print(f"  {direction:<6} {'ok' if ok else 'REFUSED'}")


if __name__ == "__main__":
    main()
