"""From a validated blueprint to an executable orchestration plan.

Classification follows one rule: an RPC whose input port has incoming links
is *interior* (driven by arriving messages); an unconnected input of type
``Empty`` makes a *source* (driven by a polling loop); an unconnected input
of any other type is *unorchestrated* and is left alone.

``find_cycles`` enumerates the elementary cycles of the link multigraph --
cycles visit each node at most once, parallel links count separately, and
the result order depends only on the blueprint (each cycle starts at its
smallest node id, cycles sorted by that start).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping

from ..proto3 import RpcSignature
from .model import Blueprint, ContainerNode, Link
from .validation import ValidationReport, validate

PortId = tuple[str, str]  # (node id, rpc name)


class NotValidated(RuntimeError):
    """Raised when a plan is requested for a blueprint with validation errors."""

    def __init__(self, report: ValidationReport):
        first = "; ".join(f.message for f in report.errors[:3])
        more = len(report.errors) - 3
        if more > 0:
            first += f" (+{more} more)"
        super().__init__(f"blueprint has {len(report.errors)} validation error(s): {first}")
        self.report = report


class RpcRole(enum.Enum):
    SOURCE = "source"
    INTERIOR = "interior"
    UNORCHESTRATED = "unorchestrated"


@dataclass(frozen=True)
class PlannedRpc:
    node: str
    service: str
    rpc: RpcSignature
    role: RpcRole
    method: str  # full gRPC method path, e.g. "/maze.Planner/planHighLevelPath"

    @property
    def port(self) -> PortId:
        return (self.node, self.rpc.name)


@dataclass(frozen=True)
class OrchestrationPlan:
    blueprint: Blueprint
    rpcs: tuple[PlannedRpc, ...]
    routing: Mapping[PortId, tuple[Link, ...]]  # output port -> outgoing links
    merges: Mapping[PortId, tuple[Link, ...]]  # input port -> incoming links
    report: ValidationReport

    def sources(self) -> tuple[PlannedRpc, ...]:
        return tuple(r for r in self.rpcs if r.role is RpcRole.SOURCE)

    def interiors(self) -> tuple[PlannedRpc, ...]:
        return tuple(r for r in self.rpcs if r.role is RpcRole.INTERIOR)

    def orchestrated(self) -> tuple[PlannedRpc, ...]:
        return tuple(r for r in self.rpcs if r.role is not RpcRole.UNORCHESTRATED)

    def rpc_at(self, node: str, name: str) -> PlannedRpc | None:
        for planned in self.rpcs:
            if planned.node == node and planned.rpc.name == name:
                return planned
        return None


def method_path(node: ContainerNode, rpc_name: str) -> str:
    package = node.interface.package
    service = f"{package}.{node.service}" if package else node.service
    return f"/{service}/{rpc_name}"


def classify(
    blueprint: Blueprint,
    *,
    strict: bool = True,
    report: ValidationReport | None = None,
) -> OrchestrationPlan:
    """Build the orchestration plan; refuses blueprints with validation errors."""
    if report is None:
        report = validate(blueprint, strict=strict)
    if not report.ok:
        raise NotValidated(report)

    routing: dict[PortId, list[Link]] = {}
    merges: dict[PortId, list[Link]] = {}
    for link in blueprint.rpc_links():
        routing.setdefault((link.source.node, link.source.rpc), []).append(link)
        merges.setdefault((link.target.node, link.target.rpc), []).append(link)

    rpcs: list[PlannedRpc] = []
    for node in blueprint.container_nodes():
        for rpc in node.rpcs():
            if (node.id, rpc.name) in merges:
                role = RpcRole.INTERIOR
            elif node.interface.is_empty_type(rpc.input_type):
                role = RpcRole.SOURCE
            else:
                role = RpcRole.UNORCHESTRATED
            rpcs.append(
                PlannedRpc(
                    node=node.id,
                    service=node.service,
                    rpc=rpc,
                    role=role,
                    method=method_path(node, rpc.name),
                )
            )

    return OrchestrationPlan(
        blueprint=blueprint,
        rpcs=tuple(rpcs),
        routing={port: tuple(links) for port, links in routing.items()},
        merges={port: tuple(links) for port, links in merges.items()},
        report=report,
    )


def find_cycles(blueprint: Blueprint) -> tuple[tuple[Link, ...], ...]:
    """Elementary cycles of the node multigraph, as ordered link sequences."""
    adjacency: dict[str, list[Link]] = {}
    ordered = sorted(
        blueprint.rpc_links(),
        key=lambda l: (l.source.node, l.source.rpc, l.target.node, l.target.rpc),
    )
    for link in ordered:
        adjacency.setdefault(link.source.node, []).append(link)

    cycles: list[tuple[Link, ...]] = []
    for start in sorted(adjacency):
        _extend_cycles(start, start, [], {start}, adjacency, cycles)
    return tuple(cycles)


def _extend_cycles(
    start: str,
    current: str,
    path: list[Link],
    visited: set[str],
    adjacency: dict[str, list[Link]],
    cycles: list[tuple[Link, ...]],
) -> None:
    # Only nodes ordered after the start may join the path, so every cycle is
    # produced exactly once: from its smallest node, in link order.
    for link in adjacency.get(current, ()):
        nxt = link.target.node
        if nxt == start:
            cycles.append(tuple(path) + (link,))
        elif nxt > start and nxt not in visited:
            visited.add(nxt)
            path.append(link)
            _extend_cycles(start, nxt, path, visited, adjacency, cycles)
            path.pop()
            visited.discard(nxt)
