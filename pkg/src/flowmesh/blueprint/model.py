"""Solution graph model: nodes, typed links, and the blueprint itself.

A blueprint is immutable after construction. Construction enforces local
well-formedness (unique node ids, container service names); cross-cutting
rules (port direction, type compatibility, dangling RPC names) are the
validator's job so that defective graphs can still be loaded and reported on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Union

from ..proto3 import InterfaceDef, RpcSignature

DEFAULT_LINK_CAPACITY = 64

PortSide = Literal["in", "out"]
LinkMode = Literal["fifo", "latest"]


@dataclass(frozen=True)
class Endpoint:
    """One end of a link: an RPC port, or a bare node for pseudo-node links.

    ``side`` is normally implied by position (a link goes out -> in) and left
    ``None``; an explicit side only appears in defective graphs, where the
    validator reports it as a direction violation.
    """

    node: str
    rpc: str | None = None
    side: PortSide | None = None

    def label(self) -> str:
        return f"{self.node}.{self.rpc}" if self.rpc else self.node


@dataclass(frozen=True)
class Link:
    source: Endpoint
    target: Endpoint
    mode: LinkMode = "fifo"
    capacity: int = DEFAULT_LINK_CAPACITY

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError(f"link capacity must be positive, got {self.capacity}")
        if self.mode not in ("fifo", "latest"):
            raise ValueError(f"unknown link mode {self.mode!r}")

    @property
    def is_rpc_link(self) -> bool:
        return self.source.rpc is not None and self.target.rpc is not None

    @property
    def id(self) -> str:
        return f"{self.source.label()}->{self.target.label()}"


@dataclass(frozen=True)
class ContainerNode:
    id: str
    image: str
    interface: InterfaceDef
    service: str
    web_ui: bool = False
    env: tuple[tuple[str, str], ...] = ()
    proto_ref: str = ""  # original source reference, informational

    kind = "container"

    def __post_init__(self) -> None:
        if self.service not in self.interface.service_names():
            raise ValueError(
                f"node {self.id!r}: service {self.service!r} not defined in its interface"
            )

    def rpcs(self) -> tuple[RpcSignature, ...]:
        return self.interface.rpcs_of(self.service)

    def find_rpc(self, name: str) -> RpcSignature | None:
        for rpc in self.rpcs():
            if rpc.name == name:
                return rpc
        return None


@dataclass(frozen=True)
class ModelInitializerNode:
    id: str
    source_uri: str

    kind = "model-initializer"


@dataclass(frozen=True)
class SharedFolderNode:
    id: str
    size: str
    mount_path: str

    kind = "shared-folder"


Node = Union[ContainerNode, ModelInitializerNode, SharedFolderNode]

PSEUDO_KINDS = ("model-initializer", "shared-folder")


@dataclass(frozen=True)
class Blueprint:
    name: str
    version: str
    nodes: tuple[Node, ...] = ()
    links: tuple[Link, ...] = field(default=())

    def __post_init__(self) -> None:
        ids = [node.id for node in self.nodes]
        if len(set(ids)) != len(ids):
            duplicates = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate node ids: {', '.join(duplicates)}")

    def node(self, node_id: str) -> Node | None:
        for node in self.nodes:
            if node.id == node_id:
                return node
        return None

    def container_nodes(self) -> tuple[ContainerNode, ...]:
        return tuple(n for n in self.nodes if isinstance(n, ContainerNode))

    def rpc_links(self) -> tuple[Link, ...]:
        return tuple(l for l in self.links if l.is_rpc_link)

    def pseudo_links(self) -> tuple[Link, ...]:
        return tuple(l for l in self.links if not l.is_rpc_link)
