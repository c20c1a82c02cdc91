"""Opaque-byte gRPC calling: all four arities, no message classes.

Components speak whatever protobuf types their interfaces declare; the
orchestrator never decodes them.  gRPC supports this directly — a call with
no request serializer and no response deserializer relays ``bytes``
verbatim.

Errors map onto a small hierarchy: ``Unreachable`` (endpoint down),
``DeadlineExceeded``, ``CallCancelled`` (local cancellation, e.g. at stop),
and ``CallFailed`` (any other status) carrying the gRPC status code.
"""

from __future__ import annotations

import threading
from typing import Callable, Iterable, Iterator

import grpc

EMPTY_PAYLOAD = b""  # the encoding of a zero-field message


class MissingEndpoint(KeyError):
    def __init__(self, node: str) -> None:
        super().__init__(node)
        self.node = node

    def __str__(self) -> str:
        return f"no endpoint address for node {self.node!r}"


class RelayError(Exception):
    """Base for failures while calling a component."""


class Unreachable(RelayError):
    pass


class DeadlineExceeded(RelayError):
    pass


class CallCancelled(RelayError):
    pass


class CallFailed(RelayError):
    def __init__(self, code: grpc.StatusCode, details: str = "") -> None:
        super().__init__(f"{code.name}: {details}" if details else code.name)
        self.code = code
        self.details = details


def classify_rpc_error(error: grpc.RpcError) -> RelayError:
    code = error.code() if hasattr(error, "code") else None
    details = error.details() if hasattr(error, "details") else str(error)
    if code == grpc.StatusCode.UNAVAILABLE:
        return Unreachable(details or "endpoint unavailable")
    if code == grpc.StatusCode.DEADLINE_EXCEEDED:
        return DeadlineExceeded(details or "deadline exceeded")
    if code == grpc.StatusCode.CANCELLED:
        return CallCancelled(details or "cancelled")
    return CallFailed(code if code is not None else grpc.StatusCode.UNKNOWN, details or "")


class EndpointMap:
    """node id -> "host:port" of that node's gRPC server."""

    def __init__(self, addresses: dict[str, str]) -> None:
        self._addresses = dict(addresses)

    @classmethod
    def from_file(cls, path) -> "EndpointMap":
        import json
        from pathlib import Path

        data = json.loads(Path(path).read_text())
        if not isinstance(data, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in data.items()
        ):
            raise ValueError("endpoint file must map node ids to host:port strings")
        return cls(data)

    def address(self, node: str) -> str:
        try:
            return self._addresses[node]
        except KeyError:
            raise MissingEndpoint(node) from None

    def missing_for(self, nodes: Iterable[str]) -> tuple[str, ...]:
        return tuple(sorted(n for n in set(nodes) if n not in self._addresses))

    def items(self):
        return self._addresses.items()


def open_channel(address: str) -> grpc.Channel:
    return grpc.insecure_channel(
        address,
        options=[
            ("grpc.max_send_message_length", 64 * 1024 * 1024),
            ("grpc.max_receive_message_length", 64 * 1024 * 1024),
        ],
    )


class RpcCaller:
    """Caller for one method path over an open channel, arity-aware."""

    def __init__(
        self,
        channel: grpc.Channel,
        method: str,
        *,
        input_streaming: bool,
        output_streaming: bool,
    ) -> None:
        self.method = method
        self.input_streaming = input_streaming
        self.output_streaming = output_streaming
        if input_streaming and output_streaming:
            self._callable = channel.stream_stream(method)
        elif input_streaming:
            self._callable = channel.stream_unary(method)
        elif output_streaming:
            self._callable = channel.unary_stream(method)
        else:
            self._callable = channel.unary_unary(method)

    # --- unary-response arities -------------------------------------------

    def call_unary(
        self,
        payload: bytes,
        *,
        deadline: float | None = None,
        cancel_event: threading.Event | None = None,
        poll: float = 0.05,
    ) -> bytes:
        """Blocking unary-unary call; cancellable via ``cancel_event``."""
        if self.input_streaming or self.output_streaming:
            raise TypeError(f"{self.method} is not unary-unary")
        return self._wait(self._callable.future(payload, timeout=deadline), cancel_event, poll)

    def call_client_stream(
        self,
        payloads: Iterable[bytes],
        *,
        deadline: float | None = None,
        cancel_event: threading.Event | None = None,
        poll: float = 0.05,
    ) -> bytes:
        """Stream requests in, wait for the single response."""
        if not self.input_streaming or self.output_streaming:
            raise TypeError(f"{self.method} is not client-streaming")
        return self._wait(
            self._callable.future(iter(payloads), timeout=deadline), cancel_event, poll
        )

    @staticmethod
    def _wait(future, cancel_event: threading.Event | None, poll: float) -> bytes:
        while True:
            try:
                return future.result(timeout=poll if cancel_event is not None else None)
            except grpc.FutureTimeoutError:
                if cancel_event is not None and cancel_event.is_set():
                    future.cancel()
                    raise CallCancelled("cancelled locally") from None
            except grpc.RpcError as exc:
                raise classify_rpc_error(exc) from exc

    # --- streaming-response arities ---------------------------------------

    def open_server_stream(self, payload: bytes):
        """Start a unary-in/stream-out call; returns the live call object."""
        if self.input_streaming or not self.output_streaming:
            raise TypeError(f"{self.method} is not server-streaming")
        return self._callable(payload)

    def open_bidi_stream(self, payloads: Iterable[bytes]):
        """Start a stream-in/stream-out call; returns the live call object."""
        if not (self.input_streaming and self.output_streaming):
            raise TypeError(f"{self.method} is not bidirectional")
        return self._callable(iter(payloads))


def iterate_stream(call) -> Iterator[bytes]:
    """Yield response payloads, translating gRPC errors; use with open_*_stream."""
    try:
        for payload in call:
            yield payload
    except grpc.RpcError as exc:
        raise classify_rpc_error(exc) from exc


def relay_call(
    channel: grpc.Channel,
    method: str,
    payloads: bytes | Iterable[bytes],
    *,
    input_streaming: bool = False,
    output_streaming: bool = False,
    deadline: float | None = None,
) -> bytes | list[bytes]:
    """One-shot convenience: perform the call in the matching arity.

    Streaming results are materialized into a list; the engine's workers use
    RpcCaller directly for incremental relay.
    """
    caller = RpcCaller(
        channel, method, input_streaming=input_streaming, output_streaming=output_streaming
    )
    if input_streaming and output_streaming:
        return list(iterate_stream(caller.open_bidi_stream(payloads)))
    if input_streaming:
        return caller.call_client_stream(payloads, deadline=deadline)
    if output_streaming:
        return list(iterate_stream(caller.open_server_stream(payloads)))
    return caller.call_unary(payloads, deadline=deadline)
