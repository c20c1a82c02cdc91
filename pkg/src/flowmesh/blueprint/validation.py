"""Blueprint validation: structural errors and orchestration warnings.

Errors make a blueprint unrunnable (wrong link direction, incompatible
message types, endpoints that name no real port, pseudo-nodes used as RPC
peers).  Warnings flag suspicious-but-legal shapes: an RPC nobody feeds, an
output nobody consumes, several producers merged into one input.

Strict mode requires linked types to agree on fully qualified names as well
as structure; lenient mode accepts structurally identical types under
different names.  Findings come out in deterministic order: link errors by
link index, then port warnings in node/declaration order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..proto3 import TypeCompatibility, UnresolvedType, types_compatible
from .model import Blueprint, ContainerNode, Endpoint, Link

# Error codes
DIRECTION_VIOLATION = "DIRECTION_VIOLATION"
TYPE_MISMATCH = "TYPE_MISMATCH"
DANGLING_ENDPOINT = "DANGLING_ENDPOINT"
PSEUDO_NODE_MISUSE = "PSEUDO_NODE_MISUSE"

# Warning codes
UNORCHESTRATED_RPC = "UNORCHESTRATED_RPC"
UNCONNECTED_OUTPUT = "UNCONNECTED_OUTPUT"
MERGED_INPUT = "MERGED_INPUT"


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    code: str
    location: str
    message: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "severity": self.severity,
                "code": self.code,
                "location": self.location,
                "message": self.message,
            }
        )


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...]
    strict: bool = True

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "error")

    @property
    def warnings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "warning")

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_json_lines(self) -> str:
        return "\n".join(f.to_json() for f in self.findings)


def validate(blueprint: Blueprint, *, strict: bool = True) -> ValidationReport:
    findings: list[Finding] = []
    for index, link in enumerate(blueprint.links):
        findings.extend(_check_link(blueprint, link, index, strict))
    findings.extend(_port_warnings(blueprint))
    return ValidationReport(findings=tuple(findings), strict=strict)


def _error(code: str, location: str, message: str) -> Finding:
    return Finding("error", code, location, message)


def _warning(code: str, location: str, message: str) -> Finding:
    return Finding("warning", code, location, message)


def _check_link(blueprint: Blueprint, link: Link, index: int, strict: bool) -> list[Finding]:
    loc = f"links[{index}]"
    findings: list[Finding] = []

    ends: list[tuple[str, Endpoint]] = [(f"{loc}.from", link.source), (f"{loc}.to", link.target)]
    nodes = []
    for end_loc, end in ends:
        node = blueprint.node(end.node)
        if node is None:
            findings.append(
                _error(DANGLING_ENDPOINT, f"{end_loc}.node", f"unknown node {end.node!r}")
            )
        nodes.append(node)
    if findings:
        return findings
    src_node, tgt_node = nodes

    if link.source.rpc is None and link.target.rpc is None:
        return _check_pseudo_link(src_node, tgt_node, loc)

    # At least one RPC endpoint: pseudo-nodes cannot appear at all here.
    for end_loc, end, node in ((ends[0][0], link.source, src_node), (ends[1][0], link.target, tgt_node)):
        if not isinstance(node, ContainerNode):
            findings.append(
                _error(
                    PSEUDO_NODE_MISUSE,
                    end_loc,
                    f"{node.kind} node {node.id!r} has no rpc ports",
                )
            )
        elif end.rpc is None:
            findings.append(
                _error(DANGLING_ENDPOINT, end_loc, f"container endpoint {node.id!r} needs an rpc")
            )
        elif node.find_rpc(end.rpc) is None:
            findings.append(
                _error(
                    DANGLING_ENDPOINT,
                    f"{end_loc}.rpc",
                    f"service {node.service!r} of node {node.id!r} has no rpc {end.rpc!r}",
                )
            )
    if findings:
        return findings

    if link.source.side == "in":
        findings.append(
            _error(DIRECTION_VIOLATION, f"{loc}.from", "link starts at an input port")
        )
    if link.target.side == "out":
        findings.append(
            _error(DIRECTION_VIOLATION, f"{loc}.to", "link ends at an output port")
        )
    if findings:
        return findings

    src_rpc = src_node.find_rpc(link.source.rpc)
    tgt_rpc = tgt_node.find_rpc(link.target.rpc)
    try:
        verdict = types_compatible(
            src_rpc.output_type,
            src_node.interface,
            tgt_rpc.input_type,
            tgt_node.interface,
            require_same_name=strict,
        )
    except UnresolvedType as exc:
        findings.append(
            _error(TYPE_MISMATCH, loc, f"cannot compare endpoint types: {exc}")
        )
        return findings
    if verdict is TypeCompatibility.STRUCTURAL_MISMATCH:
        findings.append(
            _error(
                TYPE_MISMATCH,
                loc,
                f"output {src_rpc.output_type!r} of {link.source.label()} and input "
                f"{tgt_rpc.input_type!r} of {link.target.label()} differ structurally",
            )
        )
    elif verdict is TypeCompatibility.NAME_MISMATCH:
        findings.append(
            _error(
                TYPE_MISMATCH,
                loc,
                f"types {src_node.interface.qualify(src_rpc.output_type)!r} and "
                f"{tgt_node.interface.qualify(tgt_rpc.input_type)!r} are structurally equal "
                "but named differently (strict mode requires matching names)",
            )
        )
    return findings


def _check_pseudo_link(src_node, tgt_node, loc: str) -> list[Finding]:
    src_pseudo = not isinstance(src_node, ContainerNode)
    tgt_pseudo = not isinstance(tgt_node, ContainerNode)
    if src_pseudo and tgt_pseudo:
        return [
            _error(
                PSEUDO_NODE_MISUSE,
                loc,
                f"link joins two pseudo-nodes ({src_node.id!r}, {tgt_node.id!r}); "
                "one end must be a container",
            )
        ]
    if not src_pseudo and not tgt_pseudo:
        return [
            _error(
                DANGLING_ENDPOINT,
                f"{loc}.from",
                f"container endpoint {src_node.id!r} needs an rpc",
            )
        ]
    if tgt_pseudo and tgt_node.kind == "model-initializer":
        return [
            _error(
                PSEUDO_NODE_MISUSE,
                f"{loc}.to",
                f"model initializer {tgt_node.id!r} only provides files; it cannot receive",
            )
        ]
    return []


def _port_warnings(blueprint: Blueprint) -> list[Finding]:
    incoming: dict[tuple[str, str], int] = {}
    outgoing: dict[tuple[str, str], int] = {}
    for link in blueprint.rpc_links():
        outgoing[(link.source.node, link.source.rpc)] = (
            outgoing.get((link.source.node, link.source.rpc), 0) + 1
        )
        incoming[(link.target.node, link.target.rpc)] = (
            incoming.get((link.target.node, link.target.rpc), 0) + 1
        )

    findings: list[Finding] = []
    for node in blueprint.container_nodes():
        for rpc in node.rpcs():
            port = (node.id, rpc.name)
            label = f"{node.id}.{rpc.name}"
            fed = incoming.get(port, 0)
            if fed == 0 and not node.interface.is_empty_type(rpc.input_type):
                findings.append(
                    _warning(
                        UNORCHESTRATED_RPC,
                        label,
                        f"input {rpc.input_type!r} is never fed; rpc will not be driven",
                    )
                )
            elif fed > 1:
                findings.append(
                    _warning(
                        MERGED_INPUT,
                        label,
                        f"{fed} links merge into this input",
                    )
                )
            if outgoing.get(port, 0) == 0:
                findings.append(
                    _warning(
                        UNCONNECTED_OUTPUT,
                        label,
                        f"output {rpc.output_type!r} is not routed anywhere",
                    )
                )
    return findings
