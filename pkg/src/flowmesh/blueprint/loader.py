"""Blueprint JSON reader/writer.

The on-disk document references interface definitions by file path (``proto``)
relative to the blueprint file; a bundled document may instead carry the text
inline (``proto_text``), which is how deployment bundles stay self-contained.

``SchemaError`` carries the JSON path of the offending element, e.g.
``links[0].from.node: unknown node 'gu'``.  Interface parse errors propagate
unchanged from the proto parser.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

from ..proto3 import parse_proto, render
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


class SchemaError(ValueError):
    """A blueprint document that does not match the expected shape."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message


def _require(doc: Mapping[str, Any], key: str, typ: type, path: str) -> Any:
    if key not in doc:
        raise SchemaError(f"{path}.{key}", "missing required key")
    value = doc[key]
    if not isinstance(value, typ) or (typ is not bool and isinstance(value, bool)):
        raise SchemaError(f"{path}.{key}", f"expected {typ.__name__}, got {type(value).__name__}")
    return value


def _reject_unknown(doc: Mapping[str, Any], allowed: set[str], path: str) -> None:
    extra = sorted(set(doc) - allowed)
    if extra:
        raise SchemaError(f"{path}.{extra[0]}", "unknown key")


def _load_container(doc: Mapping[str, Any], path: str, base_dir: Path | None) -> ContainerNode:
    _reject_unknown(doc, {"id", "kind", "image", "proto", "proto_text", "service", "web_ui", "env"}, path)
    node_id = _require(doc, "id", str, path)
    image = _require(doc, "image", str, path)
    service = _require(doc, "service", str, path)

    if "proto_text" in doc:
        proto_text = _require(doc, "proto_text", str, path)
        proto_ref = doc.get("proto", "")
    elif "proto" in doc:
        proto_ref = _require(doc, "proto", str, path)
        proto_path = Path(proto_ref)
        if not proto_path.is_absolute() and base_dir is not None:
            proto_path = base_dir / proto_path
        try:
            proto_text = proto_path.read_text()
        except OSError as exc:
            raise SchemaError(f"{path}.proto", f"cannot read {proto_path}: {exc}") from exc
    else:
        raise SchemaError(f"{path}.proto", "container node needs 'proto' or 'proto_text'")

    interface = parse_proto(proto_text)

    web_ui = doc.get("web_ui", False)
    if not isinstance(web_ui, bool):
        raise SchemaError(f"{path}.web_ui", f"expected bool, got {type(web_ui).__name__}")
    env_doc = doc.get("env", {})
    if not isinstance(env_doc, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in env_doc.items()
    ):
        raise SchemaError(f"{path}.env", "expected a string-to-string mapping")

    try:
        return ContainerNode(
            id=node_id,
            image=image,
            interface=interface,
            service=service,
            web_ui=web_ui,
            env=tuple(env_doc.items()),
            proto_ref=str(proto_ref),
        )
    except ValueError as exc:
        raise SchemaError(f"{path}.service", str(exc)) from exc


def _load_node(doc: Any, path: str, base_dir: Path | None) -> Node:
    if not isinstance(doc, dict):
        raise SchemaError(path, f"expected object, got {type(doc).__name__}")
    kind = _require(doc, "kind", str, path)
    if kind == "container":
        return _load_container(doc, path, base_dir)
    if kind == "model-initializer":
        _reject_unknown(doc, {"id", "kind", "source_uri"}, path)
        return ModelInitializerNode(
            id=_require(doc, "id", str, path),
            source_uri=_require(doc, "source_uri", str, path),
        )
    if kind == "shared-folder":
        _reject_unknown(doc, {"id", "kind", "size", "mount_path"}, path)
        return SharedFolderNode(
            id=_require(doc, "id", str, path),
            size=_require(doc, "size", str, path),
            mount_path=_require(doc, "mount_path", str, path),
        )
    raise SchemaError(f"{path}.kind", f"unknown node kind {kind!r}")


def _load_endpoint(doc: Any, path: str, node_ids: set[str]) -> Endpoint:
    if not isinstance(doc, dict):
        raise SchemaError(path, f"expected object, got {type(doc).__name__}")
    _reject_unknown(doc, {"node", "rpc", "port"}, path)
    node = _require(doc, "node", str, path)
    if node not in node_ids:
        raise SchemaError(f"{path}.node", f"unknown node {node!r}")
    rpc = doc.get("rpc")
    if rpc is not None and not isinstance(rpc, str):
        raise SchemaError(f"{path}.rpc", f"expected str, got {type(rpc).__name__}")
    side = doc.get("port")
    if side is not None and side not in ("in", "out"):
        raise SchemaError(f"{path}.port", f"expected 'in' or 'out', got {side!r}")
    return Endpoint(node=node, rpc=rpc, side=side)


def _load_link(doc: Any, path: str, node_ids: set[str]) -> Link:
    if not isinstance(doc, dict):
        raise SchemaError(path, f"expected object, got {type(doc).__name__}")
    _reject_unknown(doc, {"from", "to", "mode", "capacity"}, path)
    if "from" not in doc:
        raise SchemaError(f"{path}.from", "missing required key")
    if "to" not in doc:
        raise SchemaError(f"{path}.to", "missing required key")
    source = _load_endpoint(doc["from"], f"{path}.from", node_ids)
    target = _load_endpoint(doc["to"], f"{path}.to", node_ids)
    mode = doc.get("mode", "fifo")
    if mode not in ("fifo", "latest"):
        raise SchemaError(f"{path}.mode", f"expected 'fifo' or 'latest', got {mode!r}")
    capacity = doc.get("capacity", DEFAULT_LINK_CAPACITY)
    if not isinstance(capacity, int) or isinstance(capacity, bool) or capacity < 1:
        raise SchemaError(f"{path}.capacity", f"expected positive int, got {capacity!r}")
    return Link(source=source, target=target, mode=mode, capacity=capacity)


def load_blueprint(source: str | Path | Mapping[str, Any], base_dir: str | Path | None = None) -> Blueprint:
    """Load a blueprint from a JSON file path or an already-parsed document.

    Relative ``proto`` references resolve against the blueprint file's
    directory, or against ``base_dir`` when a document is passed directly.
    """
    if isinstance(source, (str, Path)):
        source_path = Path(source)
        try:
            text = source_path.read_text()
        except OSError as exc:
            raise SchemaError(str(source_path), f"cannot read blueprint: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(str(source_path), f"invalid JSON: {exc}") from exc
        if base_dir is None:
            base_dir = source_path.parent
    else:
        doc = source

    if not isinstance(doc, dict):
        raise SchemaError("$", f"expected object, got {type(doc).__name__}")
    _reject_unknown(doc, {"name", "version", "nodes", "links"}, "$")
    name = _require(doc, "name", str, "$")
    version = _require(doc, "version", str, "$")
    nodes_doc = _require(doc, "nodes", list, "$")
    links_doc = doc.get("links", [])
    if not isinstance(links_doc, list):
        raise SchemaError("$.links", f"expected list, got {type(links_doc).__name__}")

    resolved_base = Path(base_dir) if base_dir is not None else None
    nodes = tuple(
        _load_node(node_doc, f"nodes[{i}]", resolved_base) for i, node_doc in enumerate(nodes_doc)
    )
    seen: dict[str, int] = {}
    for i, node in enumerate(nodes):
        if node.id in seen:
            raise SchemaError(f"nodes[{i}].id", f"duplicate node id {node.id!r}")
        seen[node.id] = i

    node_ids = set(seen)
    links = tuple(
        _load_link(link_doc, f"links[{i}]", node_ids) for i, link_doc in enumerate(links_doc)
    )
    return Blueprint(name=name, version=version, nodes=nodes, links=links)


def dump_blueprint(blueprint: Blueprint, *, inline_protos: bool = False) -> dict[str, Any]:
    """Render a blueprint back to its document form.

    With ``inline_protos`` the interface text is embedded (``proto_text``),
    producing a self-contained document suitable for bundling.  Output key
    order is fixed, so serialising the result is deterministic.
    """
    nodes: list[dict[str, Any]] = []
    for node in blueprint.nodes:
        if isinstance(node, ContainerNode):
            doc: dict[str, Any] = {"id": node.id, "kind": node.kind, "image": node.image}
            if inline_protos or not node.proto_ref:
                doc["proto_text"] = render(node.interface)
            else:
                doc["proto"] = node.proto_ref
            doc["service"] = node.service
            if node.web_ui:
                doc["web_ui"] = True
            if node.env:
                doc["env"] = dict(node.env)
        elif isinstance(node, ModelInitializerNode):
            doc = {"id": node.id, "kind": node.kind, "source_uri": node.source_uri}
        else:
            doc = {"id": node.id, "kind": node.kind, "size": node.size, "mount_path": node.mount_path}
        nodes.append(doc)

    links: list[dict[str, Any]] = []
    for link in blueprint.links:
        link_doc: dict[str, Any] = {
            "from": _dump_endpoint(link.source),
            "to": _dump_endpoint(link.target),
        }
        if link.mode != "fifo":
            link_doc["mode"] = link.mode
        if link.capacity != DEFAULT_LINK_CAPACITY:
            link_doc["capacity"] = link.capacity
        links.append(link_doc)

    return {"name": blueprint.name, "version": blueprint.version, "nodes": nodes, "links": links}


def _dump_endpoint(endpoint: Endpoint) -> dict[str, Any]:
    doc: dict[str, Any] = {"node": endpoint.node}
    if endpoint.rpc is not None:
        doc["rpc"] = endpoint.rpc
    if endpoint.side is not None:
        doc["port"] = endpoint.side
    return doc
