"""gRPC control surface: start/stop/status plus a live event stream.

The control endpoint is what the deployed client script talks to.  Its two
message shapes are hand-coded on the wire helpers (Event carries a fixed64
payload digest, so it is not expressible in the blueprint proto subset
anyway):

    service OrchestratorControl {
      rpc start(Empty) returns (Status);
      rpc stop(Empty) returns (Status);
      rpc status(Empty) returns (Status);
      rpc events(Empty) returns (stream Event);
    }
    message Status { string state = 1; uint64 run_id = 2; string detail = 3; }
    message Event  { uint64 seq = 1; string ts = 2; string kind = 3; string node = 4;
                     string rpc = 5; string link = 6; uint64 size = 7;
                     fixed64 hash = 8; string detail = 9; }
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import grpc

from .runtime.engine import Runtime
from .runtime.events import OrchestrationEvent
from .wire import (
    decode_message,
    encode_fixed64_field,
    encode_len_field,
    encode_varint_field,
)

CONTROL_SERVICE = "OrchestratorControl"
DEFAULT_CONTROL_PORT = 8061


@dataclass(frozen=True)
class ControlStatus:
    state: str
    run_id: int = 0
    detail: str = ""


class PortInUse(OSError):
    """The control port could not be bound."""


# ---------------------------------------------------------------------------
# codecs

def encode_status(status: ControlStatus) -> bytes:
    out = b""
    if status.state:
        out += encode_len_field(1, status.state.encode("utf-8"))
    if status.run_id:
        out += encode_varint_field(2, status.run_id)
    if status.detail:
        out += encode_len_field(3, status.detail.encode("utf-8"))
    return out


def decode_status(data: bytes) -> ControlStatus:
    fields = decode_message(data)

    def text(number: int) -> str:
        values = fields.get(number)
        return bytes(values[-1]).decode("utf-8") if values else ""

    run_id = fields.get(2)
    return ControlStatus(
        state=text(1),
        run_id=int(run_id[-1]) if run_id else 0,
        detail=text(3),
    )


def encode_event(event: OrchestrationEvent) -> bytes:
    out = b""
    if event.seq:
        out += encode_varint_field(1, event.seq)
    if event.ts:
        out += encode_len_field(2, event.ts.encode("utf-8"))
    if event.kind:
        out += encode_len_field(3, event.kind.encode("utf-8"))
    if event.node:
        out += encode_len_field(4, event.node.encode("utf-8"))
    if event.rpc:
        out += encode_len_field(5, event.rpc.encode("utf-8"))
    if event.link:
        out += encode_len_field(6, event.link.encode("utf-8"))
    if event.size:
        out += encode_varint_field(7, event.size)
    if event.hash:
        out += encode_fixed64_field(8, event.hash)
    if event.detail:
        out += encode_len_field(9, event.detail.encode("utf-8"))
    return out


def decode_event(data: bytes) -> OrchestrationEvent:
    fields = decode_message(data)

    def text(number: int) -> str:
        values = fields.get(number)
        return bytes(values[-1]).decode("utf-8") if values else ""

    def integer(number: int) -> int:
        values = fields.get(number)
        return int(values[-1]) if values else 0

    return OrchestrationEvent(
        seq=integer(1),
        ts=text(2),
        kind=text(3) or "rpc-error",
        node=text(4),
        rpc=text(5),
        link=text(6),
        size=integer(7),
        hash=integer(8),
        detail=text(9),
    )


# ---------------------------------------------------------------------------
# server

class ControlServer:
    """Serves OrchestratorControl for one Runtime."""

    def __init__(
        self,
        runtime: Runtime,
        host: str = "127.0.0.1",
        port: int = DEFAULT_CONTROL_PORT,
        max_workers: int = 8,
    ) -> None:
        self.runtime = runtime
        self._server = grpc.server(ThreadPoolExecutor(max_workers=max_workers))
        handlers = {
            "start": grpc.unary_unary_rpc_method_handler(self._start),
            "stop": grpc.unary_unary_rpc_method_handler(self._stop),
            "status": grpc.unary_unary_rpc_method_handler(self._status),
            "events": grpc.unary_stream_rpc_method_handler(self._events),
        }
        self._server.add_generic_rpc_handlers(
            (grpc.method_handlers_generic_handler(CONTROL_SERVICE, handlers),)
        )
        try:
            bound = self._server.add_insecure_port(f"{host}:{port}")
        except RuntimeError as exc:  # grpc >= 1.60 raises instead of returning 0
            raise PortInUse(f"cannot bind control port {host}:{port}") from exc
        if bound == 0:
            raise PortInUse(f"cannot bind control port {host}:{port}")
        self.port = bound
        self.address = f"{host}:{bound}"

    def _start(self, request: bytes, context) -> bytes:
        try:
            run_id = self.runtime.start()
        except RuntimeError:
            return encode_status(
                ControlStatus("running", self.runtime.run_id, "already-running")
            )
        return encode_status(ControlStatus("running", run_id))

    def _stop(self, request: bytes, context) -> bytes:
        was_running = self.runtime.state == "running"
        summary = self.runtime.stop()
        detail = "" if was_running else "idempotent-ok"
        return encode_status(ControlStatus("stopped", summary.run_id, detail))

    def _status(self, request: bytes, context) -> bytes:
        return encode_status(ControlStatus(self.runtime.state, self.runtime.run_id))

    def _events(self, request: bytes, context):
        subscription = self.runtime.event_log.subscribe()
        context.add_callback(subscription.close)
        try:
            for event in subscription:
                yield encode_event(event)
        finally:
            self.runtime.event_log.unsubscribe(subscription)

    def start(self) -> "ControlServer":
        self._server.start()
        return self

    def stop(self, grace: float | None = 0.5) -> None:
        self._server.stop(grace).wait()

    def __enter__(self) -> "ControlServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


# ---------------------------------------------------------------------------
# client

class EventStream:
    """Iterates decoded events from an open subscription; cancel() to stop."""

    def __init__(self, call) -> None:
        self._call = call

    def cancel(self) -> None:
        self._call.cancel()

    def __iter__(self) -> Iterator[OrchestrationEvent]:
        try:
            for raw in self._call:
                yield decode_event(raw)
        except grpc.RpcError as exc:
            if exc.code() == grpc.StatusCode.CANCELLED:  # type: ignore[attr-defined]
                return
            raise


class ControlClient:
    """Talks to a running ControlServer; thread-safe for independent calls."""

    def __init__(self, address: str, timeout: float = 30.0) -> None:
        self.address = address
        self._timeout = timeout
        self._channel = grpc.insecure_channel(address)
        path = f"/{CONTROL_SERVICE}/"
        self._start = self._channel.unary_unary(path + "start")
        self._stop = self._channel.unary_unary(path + "stop")
        self._status = self._channel.unary_unary(path + "status")
        self._events = self._channel.unary_stream(path + "events")

    def start(self) -> ControlStatus:
        return decode_status(self._start(b"", timeout=self._timeout))

    def stop(self, timeout: float | None = None) -> ControlStatus:
        # stopping waits for the drain, so allow extra time by default
        return decode_status(self._stop(b"", timeout=timeout or self._timeout * 2))

    def status(self) -> ControlStatus:
        return decode_status(self._status(b"", timeout=self._timeout))

    def events(self) -> EventStream:
        return EventStream(self._events(b""))

    def close(self) -> None:
        self._channel.close()

    def __enter__(self) -> "ControlClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
