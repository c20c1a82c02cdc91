"""Blueprint graphs: load, validate, and plan solution topologies."""

from .loader import SchemaError, dump_blueprint, load_blueprint
from .model import (
    DEFAULT_LINK_CAPACITY,
    Blueprint,
    ContainerNode,
    Endpoint,
    Link,
    ModelInitializerNode,
    Node,
    SharedFolderNode,
)
from .plan import (
    NotValidated,
    OrchestrationPlan,
    PlannedRpc,
    PortId,
    RpcRole,
    classify,
    find_cycles,
    method_path,
)
from .validation import (
    DANGLING_ENDPOINT,
    DIRECTION_VIOLATION,
    MERGED_INPUT,
    PSEUDO_NODE_MISUSE,
    TYPE_MISMATCH,
    UNCONNECTED_OUTPUT,
    UNORCHESTRATED_RPC,
    Finding,
    ValidationReport,
    validate,
)

__all__ = [
    "Blueprint",
    "ContainerNode",
    "ModelInitializerNode",
    "SharedFolderNode",
    "Node",
    "Endpoint",
    "Link",
    "DEFAULT_LINK_CAPACITY",
    "SchemaError",
    "load_blueprint",
    "dump_blueprint",
    "Finding",
    "ValidationReport",
    "validate",
    "DIRECTION_VIOLATION",
    "TYPE_MISMATCH",
    "DANGLING_ENDPOINT",
    "PSEUDO_NODE_MISUSE",
    "UNORCHESTRATED_RPC",
    "UNCONNECTED_OUTPUT",
    "MERGED_INPUT",
    "NotValidated",
    "OrchestrationPlan",
    "PlannedRpc",
    "PortId",
    "RpcRole",
    "classify",
    "find_cycles",
    "method_path",
]
