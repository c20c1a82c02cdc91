"""Command-line entry point.

Exit codes are a stable contract:
  0  success
  1  domain findings (validation errors, halted run)
  2  input errors (unreadable blueprint, schema violation, missing endpoint)
  3  connectivity (control endpoint unreachable)

Machine-readable output (findings, events, summaries) goes to stdout as
JSON lines; human diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import sys
import threading
from pathlib import Path

import grpc

from .blueprint import NotValidated, SchemaError, classify, find_cycles, load_blueprint, validate
from .control import ControlClient, ControlServer, PortInUse
from .packager import ValidationRequired, generate_bundle
from .runtime import EndpointMap, MissingEndpoint, RuntimeConfig, build_runtime

ADDRESS_ENV = "FLOWMESH_ADDRESS"
DEFAULT_ADDRESS = "localhost:8061"

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_INPUT = 2
EXIT_UNREACHABLE = 3


def _err(message: str) -> None:
    print(message, file=sys.stderr)


def _load(path: str):
    try:
        return load_blueprint(Path(path))
    except FileNotFoundError:
        _err(f"error: blueprint not found: {path}")
        raise SystemExit(EXIT_INPUT)
    except SchemaError as exc:
        _err(f"error: {exc}")
        raise SystemExit(EXIT_INPUT)
    except (OSError, ValueError) as exc:
        _err(f"error: cannot load blueprint: {exc}")
        raise SystemExit(EXIT_INPUT)


def _print_findings(report) -> None:
    for finding in report.findings:
        print(finding.to_json())


# ---------------------------------------------------------------------------
# subcommands

def cmd_validate(args) -> int:
    blueprint = _load(args.blueprint)
    report = validate(blueprint, strict=not args.lenient)
    _print_findings(report)
    return EXIT_OK if report.ok else EXIT_FINDINGS


def cmd_graph(args) -> int:
    blueprint = _load(args.blueprint)
    report = validate(blueprint, strict=not args.lenient)
    if not report.ok:
        _print_findings(report)
        return EXIT_FINDINGS
    plan = classify(blueprint, strict=not args.lenient, report=report)
    print(f"solution: {blueprint.name} v{blueprint.version}")
    print("nodes:")
    for node in blueprint.nodes:
        if hasattr(node, "service"):
            print(f"  {node.id}  image={node.image}  service={node.service}")
        else:
            print(f"  {node.id}  [{node.kind}]")
    print("links:")
    for link in blueprint.links:
        print(f"  {link.id}  [{link.mode}/{link.capacity}]")
    sources = [p for p in plan.sources()]
    interiors = [p for p in plan.interiors()]
    unorched = [p for p in plan.rpcs if p.role.name == "UNORCHESTRATED"]
    print("sources:")
    for p in sources:
        print(f"  {p.node}.{p.rpc.name}")
    print("interior:")
    for p in interiors:
        print(f"  {p.node}.{p.rpc.name}")
    if unorched:
        print("unorchestrated:")
        for p in unorched:
            print(f"  {p.node}.{p.rpc.name}")
    cycles = find_cycles(blueprint)
    if not cycles:
        print("cycles: none")
    else:
        print(f"cycles: {len(cycles)}")
        for i, cycle in enumerate(cycles, start=1):
            hops = " -> ".join(link.source.label() for link in cycle)
            closing = cycle[0].source.label()
            print(f"  {i}) {hops} -> {closing}")
    if report.warnings:
        print(f"warnings: {len(report.warnings)} (run validate for details)")
    return EXIT_OK


def cmd_package(args) -> int:
    blueprint = _load(args.blueprint)
    try:
        bundle = generate_bundle(blueprint, args.orchestrator_image)
    except ValidationRequired as exc:
        _print_findings(exc.report)
        return EXIT_FINDINGS
    except ValueError as exc:
        _err(f"error: {exc}")
        return EXIT_INPUT
    out = Path(args.out or f"{blueprint.name}-bundle.zip")
    bundle.write_zip(out)
    print(json.dumps({"written": str(out), "files": len(bundle.files)}))
    return EXIT_OK


def _runtime_config(args) -> RuntimeConfig:
    if args.config:
        try:
            config = RuntimeConfig.from_file(args.config)
        except (OSError, ValueError) as exc:
            _err(f"error: bad config: {exc}")
            raise SystemExit(EXIT_INPUT)
    else:
        config = RuntimeConfig()
    overrides = {}
    if args.source_interval is not None:
        overrides["source_interval"] = args.source_interval
    if args.drain_timeout is not None:
        overrides["drain_timeout"] = args.drain_timeout
    if args.on_rpc_error is not None:
        overrides["on_rpc_error"] = args.on_rpc_error
    if args.capture_payloads:
        overrides["capture_payloads"] = True
    if overrides:
        try:
            config = config.replace(**overrides)
        except ValueError as exc:
            _err(f"error: bad config: {exc}")
            raise SystemExit(EXIT_INPUT)
    return config


def cmd_run(args) -> int:
    blueprint = _load(args.blueprint)
    report = validate(blueprint, strict=True)
    if not report.ok:
        _print_findings(report)
        return EXIT_FINDINGS
    plan = classify(blueprint, report=report)
    config = _runtime_config(args)

    local = None
    if args.local:
        from .refkit import LocalDeployment, UnknownLocalImage

        try:
            local = LocalDeployment(blueprint)
        except UnknownLocalImage as exc:
            _err(f"error: --local cannot provide image {exc.args[0]!r}")
            return EXIT_INPUT
        local.start()
        endpoints = EndpointMap(local.endpoints)
    elif args.endpoints:
        try:
            endpoints = EndpointMap.from_file(args.endpoints)
        except (OSError, ValueError) as exc:
            _err(f"error: bad endpoints file: {exc}")
            return EXIT_INPUT
    else:
        _err("error: run needs --endpoints FILE or --local")
        return EXIT_INPUT

    stop_requested = threading.Event()

    def on_signal(signum, frame) -> None:
        stop_requested.set()

    previous = {}
    for sig in (signal.SIGINT, signal.SIGTERM):
        previous[sig] = signal.signal(sig, on_signal)

    control = None
    code = EXIT_OK
    try:
        runtime = build_runtime(plan, endpoints, config)
        try:
            control = ControlServer(
                runtime, host=args.control_host, port=args.control_port
            ).start()
        except PortInUse as exc:
            _err(f"error: {exc}")
            return EXIT_INPUT
        _err(f"control listening on {control.address}")
        subscription = runtime.event_log.subscribe()
        autostart = not args.no_autostart
        if autostart:
            runtime.start()
        saw_run_stop = False
        while not stop_requested.is_set():
            event = subscription.next(timeout=0.2)
            if event is not None:
                print(event.to_json(), flush=True)
                if event.kind == "run-stopped":
                    saw_run_stop = True
            if runtime.halted.is_set():
                code = EXIT_FINDINGS
                break
            if autostart and saw_run_stop and runtime.state == "stopped":
                break  # stopped remotely; nothing left to serve
        was_running = runtime.state == "running"
        summary = runtime.stop()
        if was_running:
            # flush the tail (run-stopped and anything before it)
            while True:
                event = subscription.next(timeout=0.05)
                if event is None:
                    break
                print(event.to_json(), flush=True)
        print(json.dumps({"drain-summary": summary.to_dict()}), flush=True)
        runtime.event_log.unsubscribe(subscription)
        return code
    finally:
        if control is not None:
            control.stop()
        if local is not None:
            local.stop()
        for sig, handler in previous.items():
            signal.signal(sig, handler)


def _client(args) -> ControlClient:
    return ControlClient(args.address, timeout=args.timeout)


def _unreachable(exc: grpc.RpcError) -> int:
    code = exc.code() if hasattr(exc, "code") else None
    _err(f"error: control endpoint unreachable ({code})")
    return EXIT_UNREACHABLE


def cmd_start(args) -> int:
    try:
        with _client(args) as client:
            status = client.start()
    except grpc.RpcError as exc:
        return _unreachable(exc)
    print(json.dumps(status.__dict__))
    return EXIT_OK


def cmd_stop(args) -> int:
    try:
        with _client(args) as client:
            status = client.stop()
    except grpc.RpcError as exc:
        return _unreachable(exc)
    print(json.dumps(status.__dict__))
    return EXIT_OK


def cmd_status(args) -> int:
    try:
        with _client(args) as client:
            status = client.status()
    except grpc.RpcError as exc:
        return _unreachable(exc)
    print(json.dumps(status.__dict__))
    return EXIT_OK


def cmd_events(args) -> int:
    interrupted = threading.Event()
    try:
        with _client(args) as client:
            stream = client.events()

            def on_signal(signum, frame) -> None:
                interrupted.set()
                stream.cancel()

            previous = signal.signal(signal.SIGINT, on_signal)
            try:
                count = 0
                for event in stream:
                    print(event.to_json(), flush=True)
                    count += 1
                    if args.limit and count >= args.limit:
                        stream.cancel()
                        break
            finally:
                signal.signal(signal.SIGINT, previous)
    except grpc.RpcError as exc:
        return _unreachable(exc)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring

def _add_blueprint_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("blueprint", help="path to a blueprint JSON file")


def _add_address_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--address",
        default=os.environ.get(ADDRESS_ENV, DEFAULT_ADDRESS),
        help=f"control endpoint (default ${ADDRESS_ENV} or {DEFAULT_ADDRESS})",
    )
    parser.add_argument("--timeout", type=float, default=30.0, help="call timeout seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowmesh",
        description="Compose gRPC components into running solutions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a blueprint, print findings")
    _add_blueprint_arg(p)
    p.add_argument("--lenient", action="store_true",
                   help="structural type match suffices (ignore message names)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("graph", help="print topology, roles, and cycles")
    _add_blueprint_arg(p)
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("package", help="write the deployment bundle ZIP")
    _add_blueprint_arg(p)
    p.add_argument("--out", help="output path (default <name>-bundle.zip)")
    p.add_argument(
        "--orchestrator-image",
        default="flowmesh/orchestrator:latest",
        help="image for the orchestrator deployment",
    )
    p.set_defaults(func=cmd_package)

    p = sub.add_parser("run", help="orchestrate a solution with a control service")
    _add_blueprint_arg(p)
    p.add_argument("--endpoints", help="JSON file: node id -> host:port")
    p.add_argument("--local", action="store_true",
                   help="serve refkit:<name> images in-process on ephemeral ports")
    p.add_argument("--config", help="RuntimeConfig JSON file")
    p.add_argument("--control-host", default="127.0.0.1")
    p.add_argument("--control-port", type=int, default=8061)
    p.add_argument("--no-autostart", action="store_true",
                   help="serve control but wait for an explicit start")
    p.add_argument("--source-interval", type=float, default=None)
    p.add_argument("--drain-timeout", type=float, default=None)
    p.add_argument("--on-rpc-error", choices=("retry-with-backoff", "halt-solution"),
                   default=None)
    p.add_argument("--capture-payloads", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("start", help="start a solution via its control endpoint")
    _add_address_args(p)
    p.set_defaults(func=cmd_start)

    p = sub.add_parser("stop", help="stop a running solution")
    _add_address_args(p)
    p.set_defaults(func=cmd_stop)

    p = sub.add_parser("status", help="print orchestrator status")
    _add_address_args(p)
    p.set_defaults(func=cmd_status)

    p = sub.add_parser("events", help="follow the orchestration event stream")
    _add_address_args(p)
    p.add_argument("--limit", type=int, default=0, help="exit after N events")
    p.set_defaults(func=cmd_events)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except NotValidated as exc:
        _err(f"error: {exc}")
        return EXIT_FINDINGS
    except MissingEndpoint as exc:
        _err(f"error: no endpoint for node {exc.node!r}")
        return EXIT_INPUT
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
