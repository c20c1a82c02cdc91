"""Catalog of the bundled components and a local in-process deployment.

A blueprint that names its images ``refkit:<name>`` can be run without any
cluster: LocalDeployment starts one loopback gRPC server per node and hands
back the endpoint map the orchestrator needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Callable, Mapping

from ..blueprint import Blueprint, ContainerNode
from ..proto3 import InterfaceDef, parse_proto
from .imaging import CameraComponent, CollatorComponent, DetectorStub, VisualizerStub
from .maze import MazeExecutor, MazeGuiSurrogate, MazePlanner, MazeSimulator, make_state
from .pipeline import CounterComponent, DoublerComponent, RecorderComponent
from .serving import ComponentServer
from .sudoku import (
    OneShotSolverStub,
    StreamingSolverStub,
    SudokuEvaluatorStub,
    SudokuGuiSurrogate,
)

IMAGE_PREFIX = "refkit:"


@dataclass(frozen=True)
class ComponentSpec:
    name: str
    proto: str
    factory: Callable[[], object]


REGISTRY: dict[str, ComponentSpec] = {
    spec.name: spec
    for spec in (
        ComponentSpec("counter", "counter.proto", CounterComponent),
        ComponentSpec("doubler", "doubler.proto", DoublerComponent),
        ComponentSpec("recorder", "recorder.proto", RecorderComponent),
        ComponentSpec("sudoku-gui", "sudoku_gui.proto", SudokuGuiSurrogate),
        ComponentSpec("sudoku-evaluator", "sudoku_evaluator.proto", SudokuEvaluatorStub),
        ComponentSpec("sudoku-solver", "sudoku_solver.proto", OneShotSolverStub),
        ComponentSpec(
            "sudoku-solver-streaming", "sudoku_solver.proto", StreamingSolverStub
        ),
        ComponentSpec("maze-gui", "maze_gui.proto", MazeGuiSurrogate),
        ComponentSpec("maze-simulator", "maze_simulator.proto",
                      lambda: MazeSimulator(make_state(8, 8))),
        ComponentSpec("maze-planner", "maze_planner.proto", MazePlanner),
        ComponentSpec("maze-executor", "maze_executor.proto", MazeExecutor),
        ComponentSpec("camera", "camera.proto", CameraComponent),
        ComponentSpec("detector", "detector.proto", DetectorStub),
        ComponentSpec("collator", "collator.proto", CollatorComponent),
        ComponentSpec("visualizer", "visualizer.proto", VisualizerStub),
    )
}


class UnknownLocalImage(KeyError):
    """The image is not a refkit:<name> the local runner can instantiate."""


def component_name(image: str) -> str:
    if not image.startswith(IMAGE_PREFIX):
        raise UnknownLocalImage(image)
    name = image[len(IMAGE_PREFIX):]
    if name not in REGISTRY:
        raise UnknownLocalImage(image)
    return name


def proto_text(name: str) -> str:
    spec = REGISTRY[name]
    return (resources.files("flowmesh.refkit") / "protos" / spec.proto).read_text()


_INTERFACE_CACHE: dict[str, InterfaceDef] = {}


def load_interface(name: str) -> InterfaceDef:
    if name not in _INTERFACE_CACHE:
        _INTERFACE_CACHE[name] = parse_proto(proto_text(name))
    return _INTERFACE_CACHE[name]


def refkit_container(node_id: str, name: str, service: str, **kwargs) -> ContainerNode:
    """Blueprint node backed by a bundled component."""
    spec = REGISTRY[name]
    return ContainerNode(
        id=node_id,
        image=f"{IMAGE_PREFIX}{name}",
        interface=load_interface(name),
        service=service,
        proto_ref=spec.proto,
        **kwargs,
    )


class LocalDeployment:
    """One loopback server per refkit-imaged container node of a blueprint.

    ``overrides`` supplies pre-configured component instances by node id
    (e.g. a simulator with a specific maze); everything else is built from
    the registry defaults.
    """

    def __init__(self, blueprint: Blueprint, overrides: Mapping[str, object] | None = None):
        self.blueprint = blueprint
        self.components: dict[str, object] = {}
        self.servers: dict[str, ComponentServer] = {}
        self.endpoints: dict[str, str] = {}
        overrides = dict(overrides or {})
        for node in blueprint.container_nodes():
            component = overrides.pop(node.id, None)
            if component is None:
                component = REGISTRY[component_name(node.image)].factory()
            self.components[node.id] = component
        if overrides:
            unknown = ", ".join(sorted(overrides))
            raise KeyError(f"overrides for unknown nodes: {unknown}")

    def start(self) -> "LocalDeployment":
        try:
            for node_id, component in self.components.items():
                server = ComponentServer(component).start()
                self.servers[node_id] = server
                self.endpoints[node_id] = server.address
        except Exception:
            self.stop()
            raise
        return self

    def stop(self) -> None:
        for server in self.servers.values():
            server.stop()
        self.servers.clear()
        self.endpoints.clear()

    def __enter__(self) -> "LocalDeployment":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def __getitem__(self, node_id: str):
        return self.components[node_id]
