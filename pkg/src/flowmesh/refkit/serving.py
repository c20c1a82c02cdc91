"""gRPC serving harness for the reference components.

Components register plain ``bytes -> bytes`` behaviors; the server mounts
them as generic handlers with no serializers, so the wire payloads pass
through untouched — the same opacity the orchestrator relies on.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Mapping, Protocol

import grpc


class AddressInUse(OSError):
    """The requested listen address could not be bound."""


def unary_unary(behavior) -> grpc.RpcMethodHandler:
    return grpc.unary_unary_rpc_method_handler(behavior)


def unary_stream(behavior) -> grpc.RpcMethodHandler:
    return grpc.unary_stream_rpc_method_handler(behavior)


def stream_unary(behavior) -> grpc.RpcMethodHandler:
    return grpc.stream_unary_rpc_method_handler(behavior)


def stream_stream(behavior) -> grpc.RpcMethodHandler:
    return grpc.stream_stream_rpc_method_handler(behavior)


class Component(Protocol):
    def grpc_services(self) -> Mapping[str, Mapping[str, grpc.RpcMethodHandler]]:
        """Fully qualified service name -> {rpc name -> handler}."""
        ...


class ComponentServer:
    """One listening server hosting one or more components."""

    def __init__(
        self,
        *components: Component,
        host: str = "127.0.0.1",
        port: int = 0,
        max_workers: int = 16,
    ) -> None:
        self.components = components
        self._server = grpc.server(ThreadPoolExecutor(max_workers=max_workers))
        handlers = []
        for component in components:
            for service_name, methods in component.grpc_services().items():
                handlers.append(
                    grpc.method_handlers_generic_handler(service_name, dict(methods))
                )
        self._server.add_generic_rpc_handlers(tuple(handlers))
        try:
            bound = self._server.add_insecure_port(f"{host}:{port}")
        except RuntimeError as exc:  # grpc >= 1.60 raises instead of returning 0
            raise AddressInUse(f"cannot bind {host}:{port}") from exc
        if bound == 0:
            raise AddressInUse(f"cannot bind {host}:{port}")
        self.port = bound
        self.address = f"{host}:{bound}"

    def start(self) -> "ComponentServer":
        self._server.start()
        return self

    def stop(self, grace: float | None = 0.2) -> None:
        self._server.stop(grace).wait()

    def __enter__(self) -> "ComponentServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
