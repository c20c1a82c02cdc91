"""Deployment bundle generation: manifests, client script, runbook, ZIP.

Everything here is text generation — no cluster is contacted.  The bundle
is byte-deterministic for a given blueprint: stable file order, stable YAML
key order, zeroed ZIP timestamps.  Namespaces are never hard-coded; every
manifest says ``{{NAMESPACE}}`` and the client script substitutes it.

Conventions baked into the manifests:

* every container node becomes one Deployment+Service exposing 8061
  (plus 8062 when the node declares a web UI);
* a model-initializer linked to a node becomes an init container in that
  node's Deployment, fetching the source URI into an emptyDir mounted at
  /models (the initializer's own ConfigMap manifest records the URI);
* a shared folder becomes one PersistentVolumeClaim, mounted at its
  mount_path by every linked node;
* the orchestrator Deployment carries the blueprint and the endpoint map
  in a ConfigMap and runs the bundled CLI against them.
"""

from __future__ import annotations

import io
import json
import re
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .blueprint import (
    Blueprint,
    ContainerNode,
    ModelInitializerNode,
    SharedFolderNode,
    validate,
)
from .blueprint.loader import dump_blueprint

NAMESPACE_PARAM = "{{NAMESPACE}}"
GRPC_PORT = 8061
WEB_UI_PORT = 8062
ORCHESTRATOR_ID = "orchestrator"
MODEL_MOUNT_PATH = "/models"
CLIENT_SCRIPT_NAME = "kubernetes-client-script"
INIT_FETCH_IMAGE = "busybox:1.36"

_DNS_LABEL = re.compile(r"^[a-z0-9]([a-z0-9-]{0,61}[a-z0-9])?$")


class ValidationRequired(ValueError):
    """The blueprint has validation errors; refuse to package it."""

    def __init__(self, report) -> None:
        first = report.errors[0]
        super().__init__(
            f"blueprint fails validation ({len(report.errors)} errors; "
            f"first: {first.location}: {first.message})"
        )
        self.report = report


class UnmappedImage(ValueError):
    """A container node has no image reference to deploy."""

    def __init__(self, node_id: str) -> None:
        super().__init__(f"node '{node_id}' has no image")
        self.node_id = node_id


@dataclass(frozen=True)
class DeploymentBundle:
    """Ordered file set; identical blueprints yield identical bytes."""

    solution: str
    files: dict[str, bytes] = field(default_factory=dict)

    def file(self, name: str) -> bytes:
        return self.files[name]

    def text(self, name: str) -> str:
        return self.files[name].decode("utf-8")

    def write_dir(self, root: str | Path) -> Path:
        root = Path(root)
        for name, data in self.files.items():
            target = root / name
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(data)
            if name == CLIENT_SCRIPT_NAME:
                target.chmod(0o755)
        return root

    def write_zip(self, path: str | Path) -> Path:
        path = Path(path)
        with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as archive:
            for name, data in self.files.items():
                info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
                mode = 0o755 if name == CLIENT_SCRIPT_NAME else 0o644
                info.external_attr = (0o100000 | mode) << 16
                archive.writestr(info, data)
        return path

    def to_bytes(self) -> bytes:
        buffer = io.BytesIO()
        with zipfile.ZipFile(buffer, "w", compression=zipfile.ZIP_STORED) as archive:
            for name, data in self.files.items():
                info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
                mode = 0o755 if name == CLIENT_SCRIPT_NAME else 0o644
                info.external_attr = (0o100000 | mode) << 16
                archive.writestr(info, data)
        return buffer.getvalue()


def _yaml_docs(*docs: dict) -> bytes:
    return yaml.safe_dump_all(
        docs, sort_keys=False, default_flow_style=False
    ).encode("utf-8")


def _check_node_ids(blueprint: Blueprint) -> None:
    for node in blueprint.nodes:
        if not _DNS_LABEL.match(node.id):
            raise ValueError(
                f"node id '{node.id}' is not a valid DNS label "
                "(lowercase alphanumerics and dashes)"
            )
        if node.id == ORCHESTRATOR_ID:
            raise ValueError(
                f"node id '{ORCHESTRATOR_ID}' is reserved for the orchestrator"
            )


def _initializers_for(blueprint: Blueprint, node_id: str) -> list[ModelInitializerNode]:
    found = []
    for link in blueprint.pseudo_links():
        source = blueprint.node(link.source.node)
        if isinstance(source, ModelInitializerNode) and link.target.node == node_id:
            found.append(source)
    return found


def _shared_for(blueprint: Blueprint, node_id: str) -> list[SharedFolderNode]:
    found = []
    for link in blueprint.pseudo_links():
        for end, other in ((link.source, link.target), (link.target, link.source)):
            node = blueprint.node(end.node)
            if isinstance(node, SharedFolderNode) and other.node == node_id:
                if node not in found:
                    found.append(node)
    return found


def _node_manifest(blueprint: Blueprint, node: ContainerNode) -> bytes:
    ports = [{"containerPort": GRPC_PORT, "name": "grpc"}]
    if node.web_ui:
        ports.append({"containerPort": WEB_UI_PORT, "name": "web"})

    volume_mounts: list[dict] = []
    volumes: list[dict] = []
    init_containers: list[dict] = []
    for initializer in _initializers_for(blueprint, node.id):
        volume_name = f"models-{initializer.id}"
        init_containers.append(
            {
                "name": f"init-{initializer.id}",
                "image": INIT_FETCH_IMAGE,
                "command": [
                    "sh",
                    "-c",
                    f"wget -O {MODEL_MOUNT_PATH}/{initializer.id} "
                    f"'{initializer.source_uri}'",
                ],
                "volumeMounts": [
                    {"name": volume_name, "mountPath": MODEL_MOUNT_PATH}
                ],
            }
        )
        volume_mounts.append({"name": volume_name, "mountPath": MODEL_MOUNT_PATH})
        volumes.append({"name": volume_name, "emptyDir": {}})
    for shared in _shared_for(blueprint, node.id):
        volume_name = f"shared-{shared.id}"
        volume_mounts.append({"name": volume_name, "mountPath": shared.mount_path})
        volumes.append(
            {
                "name": volume_name,
                "persistentVolumeClaim": {"claimName": volume_name},
            }
        )

    container: dict = {"name": node.id, "image": node.image, "ports": ports}
    if node.env:
        container["env"] = [{"name": k, "value": v} for k, v in node.env]
    if volume_mounts:
        container["volumeMounts"] = volume_mounts

    pod_spec: dict = {"containers": [container]}
    if init_containers:
        pod_spec["initContainers"] = init_containers
    if volumes:
        pod_spec["volumes"] = volumes

    labels = {"app": node.id, "solution": blueprint.name}
    deployment = {
        "apiVersion": "apps/v1",
        "kind": "Deployment",
        "metadata": {
            "name": node.id,
            "namespace": NAMESPACE_PARAM,
            "labels": labels,
        },
        "spec": {
            "replicas": 1,
            "selector": {"matchLabels": {"app": node.id}},
            "template": {"metadata": {"labels": labels}, "spec": pod_spec},
        },
    }
    service_ports = [{"name": "grpc", "port": GRPC_PORT, "targetPort": GRPC_PORT}]
    if node.web_ui:
        service_ports.append(
            {"name": "web", "port": WEB_UI_PORT, "targetPort": WEB_UI_PORT}
        )
    service = {
        "apiVersion": "v1",
        "kind": "Service",
        "metadata": {"name": node.id, "namespace": NAMESPACE_PARAM, "labels": labels},
        "spec": {"selector": {"app": node.id}, "ports": service_ports},
    }
    return _yaml_docs(deployment, service)


def _shared_manifest(blueprint: Blueprint, node: SharedFolderNode) -> bytes:
    claim = {
        "apiVersion": "v1",
        "kind": "PersistentVolumeClaim",
        "metadata": {
            "name": f"shared-{node.id}",
            "namespace": NAMESPACE_PARAM,
            "labels": {"solution": blueprint.name},
        },
        "spec": {
            "accessModes": ["ReadWriteMany"],
            "resources": {"requests": {"storage": node.size}},
        },
    }
    return _yaml_docs(claim)


def _initializer_manifest(blueprint: Blueprint, node: ModelInitializerNode) -> bytes:
    targets = sorted(
        link.target.node
        for link in blueprint.pseudo_links()
        if link.source.node == node.id
    )
    config = {
        "apiVersion": "v1",
        "kind": "ConfigMap",
        "metadata": {
            "name": f"init-{node.id}",
            "namespace": NAMESPACE_PARAM,
            "labels": {"solution": blueprint.name},
        },
        "data": {
            "source_uri": node.source_uri,
            "targets": ",".join(targets),
            "mount_path": MODEL_MOUNT_PATH,
        },
    }
    return _yaml_docs(config)


def _endpoint_map(blueprint: Blueprint) -> dict[str, str]:
    # services resolve by name inside the namespace, so no parameter needed
    return {node.id: f"{node.id}:{GRPC_PORT}" for node in blueprint.container_nodes()}


def _orchestrator_manifest(blueprint: Blueprint, image: str) -> bytes:
    blueprint_json = json.dumps(
        dump_blueprint(blueprint, inline_protos=True), indent=2, sort_keys=False
    )
    endpoints_json = json.dumps(_endpoint_map(blueprint), indent=2, sort_keys=True)
    labels = {"app": ORCHESTRATOR_ID, "solution": blueprint.name}
    config = {
        "apiVersion": "v1",
        "kind": "ConfigMap",
        "metadata": {
            "name": "orchestrator-config",
            "namespace": NAMESPACE_PARAM,
            "labels": labels,
        },
        "data": {
            "blueprint.json": blueprint_json,
            "endpoints.json": endpoints_json,
        },
    }
    deployment = {
        "apiVersion": "apps/v1",
        "kind": "Deployment",
        "metadata": {
            "name": ORCHESTRATOR_ID,
            "namespace": NAMESPACE_PARAM,
            "labels": labels,
        },
        "spec": {
            "replicas": 1,
            "selector": {"matchLabels": {"app": ORCHESTRATOR_ID}},
            "template": {
                "metadata": {"labels": labels},
                "spec": {
                    "containers": [
                        {
                            "name": ORCHESTRATOR_ID,
                            "image": image,
                            "command": [
                                "flowmesh",
                                "run",
                                "/etc/flowmesh/blueprint.json",
                                "--endpoints",
                                "/etc/flowmesh/endpoints.json",
                                "--control-port",
                                str(GRPC_PORT),
                                "--no-autostart",
                            ],
                            "ports": [{"containerPort": GRPC_PORT, "name": "grpc"}],
                            "volumeMounts": [
                                {"name": "config", "mountPath": "/etc/flowmesh"}
                            ],
                        }
                    ],
                    "volumes": [
                        {
                            "name": "config",
                            "configMap": {"name": "orchestrator-config"},
                        }
                    ],
                },
            },
        },
    }
    service = {
        "apiVersion": "v1",
        "kind": "Service",
        "metadata": {
            "name": ORCHESTRATOR_ID,
            "namespace": NAMESPACE_PARAM,
            "labels": labels,
        },
        "spec": {
            "selector": {"app": ORCHESTRATOR_ID},
            "ports": [{"name": "grpc", "port": GRPC_PORT, "targetPort": GRPC_PORT}],
        },
    }
    return _yaml_docs(config, deployment, service)


def render_client_script(blueprint: Blueprint) -> str:
    """POSIX shell client: deploy, wait ready, start, follow events."""
    deployments = [node.id for node in blueprint.container_nodes()] + [ORCHESTRATOR_ID]
    deploy_list = " ".join(deployments)
    return f"""#!/bin/sh
# Client for the '{blueprint.name}' solution bundle.
#
# usage: {CLIENT_SCRIPT_NAME} -n NAMESPACE [command]
#
# commands:
#   deploy   apply all manifests into NAMESPACE
#   ready    wait until every deployment is available
#   start    start the solution via the orchestrator control endpoint
#   stop     stop the solution
#   status   print orchestrator status
#   events   follow the orchestration event log (JSON lines)
#   run      deploy + ready + start + events   (default)

set -eu

NAMESPACE=""
COMMAND="run"
SCRIPT_DIR=$(CDPATH= cd -- "$(dirname -- "$0")" && pwd)

usage() {{
    sed -n '2,13p' "$0" | sed 's/^# \\{{0,1\\}}//'
}}

while [ $# -gt 0 ]; do
    case "$1" in
        -n)
            [ $# -ge 2 ] || {{ echo "error: -n needs a value" >&2; exit 2; }}
            NAMESPACE="$2"
            shift 2
            ;;
        -h|--help)
            usage
            exit 0
            ;;
        *)
            COMMAND="$1"
            shift
            ;;
    esac
done

if [ -z "$NAMESPACE" ]; then
    usage >&2
    echo "error: namespace required (-n NAMESPACE)" >&2
    exit 2
fi

DEPLOYMENTS="{deploy_list}"

deploy() {{
    for manifest in "$SCRIPT_DIR"/manifests/*.yaml; do
        sed "s/{{{{NAMESPACE}}}}/$NAMESPACE/g" "$manifest" | \\
            kubectl apply -f -
    done
}}

ready() {{
    for name in $DEPLOYMENTS; do
        kubectl -n "$NAMESPACE" rollout status "deploy/$name" --timeout=300s
    done
}}

control() {{
    kubectl -n "$NAMESPACE" exec -i deploy/{ORCHESTRATOR_ID} -- \\
        flowmesh "$@" --address "localhost:{GRPC_PORT}"
}}

case "$COMMAND" in
    deploy) deploy ;;
    ready) ready ;;
    start) control start ;;
    stop) control stop ;;
    status) control status ;;
    events) control events ;;
    run)
        deploy
        ready
        control start
        control events
        ;;
    *)
        echo "error: unknown command '$COMMAND'" >&2
        usage >&2
        exit 2
        ;;
esac
"""


def _runbook(blueprint: Blueprint) -> bytes:
    nodes = {}
    for node in blueprint.container_nodes():
        ports = [GRPC_PORT] + ([WEB_UI_PORT] if node.web_ui else [])
        nodes[node.id] = {
            "service": node.id,
            "image": node.image,
            "grpc_service": node.service,
            "ports": ports,
            "env": dict(node.env),
            "mounts": [s.mount_path for s in _shared_for(blueprint, node.id)]
            + ([MODEL_MOUNT_PATH] if _initializers_for(blueprint, node.id) else []),
        }
    pseudo = {}
    for node in blueprint.nodes:
        if isinstance(node, ModelInitializerNode):
            pseudo[node.id] = {"kind": node.kind, "source_uri": node.source_uri}
        elif isinstance(node, SharedFolderNode):
            pseudo[node.id] = {
                "kind": node.kind,
                "size": node.size,
                "mount_path": node.mount_path,
            }
    runbook = {
        "solution": blueprint.name,
        "version": blueprint.version,
        "namespace_parameter": NAMESPACE_PARAM,
        "control": {"node": ORCHESTRATOR_ID, "port": GRPC_PORT},
        "nodes": nodes,
        "pseudo_nodes": pseudo,
    }
    return (json.dumps(runbook, indent=2, sort_keys=False) + "\n").encode("utf-8")


def generate_bundle(blueprint: Blueprint, orchestrator_image: str) -> DeploymentBundle:
    """Produce the complete deployable file set for a validated blueprint."""
    report = validate(blueprint, strict=True)
    if not report.ok:
        raise ValidationRequired(report)
    _check_node_ids(blueprint)
    for node in blueprint.container_nodes():
        if not node.image:
            raise UnmappedImage(node.id)

    files: dict[str, bytes] = {}

    def add(name: str, data: bytes) -> None:
        if name in files:
            raise ValueError(f"manifest filename collision: {name}")
        files[name] = data

    add(
        "blueprint.json",
        (json.dumps(dump_blueprint(blueprint, inline_protos=True), indent=2) + "\n").encode(
            "utf-8"
        ),
    )
    for node in sorted(blueprint.container_nodes(), key=lambda n: n.id):
        add(f"manifests/{node.id}.yaml", _node_manifest(blueprint, node))
    for node in sorted(blueprint.nodes, key=lambda n: n.id):
        if isinstance(node, ModelInitializerNode):
            add(f"manifests/init-{node.id}.yaml", _initializer_manifest(blueprint, node))
        elif isinstance(node, SharedFolderNode):
            add(f"manifests/shared-{node.id}.yaml", _shared_manifest(blueprint, node))
    add("manifests/orchestrator.yaml", _orchestrator_manifest(blueprint, orchestrator_image))
    add(CLIENT_SCRIPT_NAME, render_client_script(blueprint).encode("utf-8"))
    add("runbook.json", _runbook(blueprint))
    return DeploymentBundle(solution=blueprint.name, files=files)
