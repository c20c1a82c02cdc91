"""Reference components: wire codecs, gRPC stubs, and a local runner."""

from .imaging import (
    CameraComponent,
    CollatorComponent,
    DetectorStub,
    VisualizerStub,
    stub_detections,
    synthetic_frame,
)
from .maze import (
    MazeExecutor,
    MazeGuiSurrogate,
    MazePlanner,
    MazeSimulator,
    bfs_plan,
    make_state,
)
from .pipeline import CounterComponent, DoublerComponent, RecorderComponent
from .registry import (
    IMAGE_PREFIX,
    REGISTRY,
    ComponentSpec,
    LocalDeployment,
    UnknownLocalImage,
    component_name,
    load_interface,
    proto_text,
    refkit_container,
)
from .serving import AddressInUse, ComponentServer
from .sudoku import (
    OneShotSolverStub,
    StreamingSolverStub,
    SudokuEvaluatorStub,
    SudokuGuiSurrogate,
    scripted_job,
)

__all__ = [
    "AddressInUse",
    "CameraComponent",
    "CollatorComponent",
    "ComponentServer",
    "ComponentSpec",
    "CounterComponent",
    "DetectorStub",
    "DoublerComponent",
    "IMAGE_PREFIX",
    "LocalDeployment",
    "MazeExecutor",
    "MazeGuiSurrogate",
    "MazePlanner",
    "MazeSimulator",
    "OneShotSolverStub",
    "RecorderComponent",
    "REGISTRY",
    "StreamingSolverStub",
    "SudokuEvaluatorStub",
    "SudokuGuiSurrogate",
    "UnknownLocalImage",
    "VisualizerStub",
    "bfs_plan",
    "component_name",
    "load_interface",
    "make_state",
    "proto_text",
    "refkit_container",
    "scripted_job",
    "stub_detections",
    "synthetic_frame",
]
