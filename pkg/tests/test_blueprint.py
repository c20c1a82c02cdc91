"""Blueprint document loading, dumping, and model construction rules."""

import json

import pytest

from flowmesh.blueprint import (
    Blueprint,
    ContainerNode,
    Endpoint,
    Link,
    SchemaError,
    dump_blueprint,
    load_blueprint,
)
from flowmesh.proto3 import parse_proto

PROTO = """syntax = "proto3";
message Empty {}
message Ping { int32 n = 1; }
service Echo {
  rpc Send(Ping) returns (Ping);
  rpc Pull(Empty) returns (Ping);
}
"""


def doc(**overrides):
    base = {
        "name": "demo",
        "version": "3",
        "nodes": [
            {
                "id": "a",
                "kind": "container",
                "image": "registry/a:1",
                "proto_text": PROTO,
                "service": "Echo",
            },
            {
                "id": "b",
                "kind": "container",
                "image": "registry/b:1",
                "proto_text": PROTO,
                "service": "Echo",
            },
        ],
        "links": [
            {"from": {"node": "a", "rpc": "Pull"}, "to": {"node": "b", "rpc": "Send"}},
        ],
    }
    base.update(overrides)
    return base


def test_load_from_document():
    blueprint = load_blueprint(doc())
    assert blueprint.name == "demo"
    assert [n.id for n in blueprint.nodes] == ["a", "b"]
    link = blueprint.links[0]
    assert link.source == Endpoint("a", "Pull")
    assert link.target == Endpoint("b", "Send")
    assert link.mode == "fifo" and link.capacity == 64


def test_load_from_file_resolves_relative_protos(tmp_path):
    (tmp_path / "echo.proto").write_text(PROTO)
    document = doc()
    for node in document["nodes"]:
        del node["proto_text"]
        node["proto"] = "echo.proto"
    path = tmp_path / "bp.json"
    path.write_text(json.dumps(document))
    blueprint = load_blueprint(path)
    assert blueprint.node("a").find_rpc("Send") is not None
    assert blueprint.node("a").proto_ref == "echo.proto"


def test_pseudo_nodes_load():
    document = doc()
    document["nodes"] += [
        {"id": "weights", "kind": "model-initializer", "source_uri": "https://x/m.bin"},
        {"id": "scratch", "kind": "shared-folder", "size": "1Gi", "mount_path": "/data"},
    ]
    document["links"].append({"from": {"node": "weights"}, "to": {"node": "a"}})
    blueprint = load_blueprint(document)
    assert blueprint.node("weights").kind == "model-initializer"
    assert blueprint.node("scratch").mount_path == "/data"
    assert len(blueprint.pseudo_links()) == 1
    assert len(blueprint.rpc_links()) == 1


def test_dump_load_round_trip():
    blueprint = load_blueprint(doc())
    again = load_blueprint(dump_blueprint(blueprint, inline_protos=True))
    assert again.name == blueprint.name
    assert again.links == blueprint.links
    assert [n.id for n in again.nodes] == [n.id for n in blueprint.nodes]
    # interfaces survive the render/parse hop
    assert again.node("a").interface == blueprint.node("a").interface


@pytest.mark.parametrize(
    "mangle, path_prefix",
    [
        (lambda d: d.pop("name"), "$.name"),
        (lambda d: d.update(nodes="nope"), "$.nodes"),
        (lambda d: d.update(extra=1), "$.extra"),
        (lambda d: d["nodes"][0].pop("image"), "nodes[0].image"),
        (lambda d: d["nodes"][0].update(kind="pod"), "nodes[0].kind"),
        (lambda d: d["nodes"][0].update(service="Nope"), "nodes[0].service"),
        (lambda d: d["links"][0].pop("to"), "links[0].to"),
        (lambda d: d["links"][0]["from"].update(node="ghost"), "links[0].from.node"),
        (lambda d: d["links"][0].update(mode="stack"), "links[0].mode"),
        (lambda d: d["links"][0].update(capacity=0), "links[0].capacity"),
    ],
)
def test_schema_errors_name_the_offending_path(mangle, path_prefix):
    document = doc()
    mangle(document)
    with pytest.raises(SchemaError) as err:
        load_blueprint(document)
    assert err.value.path.startswith(path_prefix)


def test_duplicate_node_ids_rejected_at_load():
    document = doc()
    document["nodes"][1]["id"] = "a"
    with pytest.raises(SchemaError) as err:
        load_blueprint(document)
    assert "duplicate" in str(err.value)


def test_missing_blueprint_file():
    with pytest.raises(SchemaError):
        load_blueprint("/nonexistent/bp.json")


def test_invalid_json_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(SchemaError) as err:
        load_blueprint(path)
    assert "invalid JSON" in str(err.value)


# -- model construction rules ------------------------------------------------


def make_node(node_id="n", service="Echo"):
    return ContainerNode(
        id=node_id, image="img", interface=parse_proto(PROTO), service=service
    )


def test_container_service_must_exist_in_interface():
    with pytest.raises(ValueError):
        make_node(service="Ghost")


def test_blueprint_rejects_duplicate_ids():
    with pytest.raises(ValueError):
        Blueprint(name="x", version="1", nodes=(make_node("n"), make_node("n")))


def test_link_rejects_bad_capacity_and_mode():
    with pytest.raises(ValueError):
        Link(Endpoint("a", "r"), Endpoint("b", "r"), capacity=0)
    with pytest.raises(ValueError):
        Link(Endpoint("a", "r"), Endpoint("b", "r"), mode="random")


def test_link_id_is_readable():
    link = Link(Endpoint("a", "Pull"), Endpoint("b", "Send"))
    assert link.id == "a.Pull->b.Send"
    pseudo = Link(Endpoint("weights"), Endpoint("a"))
    assert pseudo.id == "weights->a"
    assert not pseudo.is_rpc_link
