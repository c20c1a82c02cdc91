"""Counter → doubler → recorder: the minimal linear solution.

The counter stands in for any polled source (a camera answering Get), the
recorder for any sink that visualizes what it receives.  The recorder keeps
payload hashes — and optionally the raw payloads — so tests can check
ordering and content without a side channel.
"""

from __future__ import annotations

import threading

from ..runtime.events import payload_hash
from . import codecs
from .serving import unary_unary


class CounterComponent:
    """Emits Number 1, 2, 3, … per Get call, padded to a configurable size."""

    def __init__(self, padding_size: int = 0) -> None:
        self._lock = threading.Lock()
        self._next = 1
        self._padding = b"\x00" * padding_size

    def _get(self, request: bytes, context) -> bytes:
        with self._lock:
            value = self._next
            self._next += 1
        return codecs.encode_number(codecs.Number(value=value, padding=self._padding))

    def grpc_services(self):
        return {"pipeline.Counter": {"Get": unary_unary(self._get)}}


class DoublerComponent:
    """apply(Number) -> Number with the value doubled, padding preserved."""

    def _apply(self, request: bytes, context) -> bytes:
        number = codecs.decode_number(request)
        return codecs.encode_number(
            codecs.Number(value=number.value * 2, padding=number.padding)
        )

    def grpc_services(self):
        return {"pipeline.Doubler": {"apply": unary_unary(self._apply)}}


class RecorderComponent:
    """Sink for any message type: records the hash of each payload it sees.

    dump lives on a second service so a blueprint node declared with service
    "Recorder" orchestrates only Visualize.
    """

    def __init__(self, keep_payloads: bool = False) -> None:
        self._lock = threading.Lock()
        self._arrived = threading.Condition(self._lock)
        self._hashes: list[int] = []
        self._payloads: list[bytes] = []
        self._keep = keep_payloads

    def _visualize(self, request: bytes, context) -> bytes:
        with self._lock:
            self._hashes.append(payload_hash(request))
            if self._keep:
                self._payloads.append(bytes(request))
            self._arrived.notify_all()
        return codecs.EMPTY

    def _dump(self, request: bytes, context) -> bytes:
        with self._lock:
            return codecs.encode_hashes(self._hashes)

    def grpc_services(self):
        return {
            "pipeline.Recorder": {"Visualize": unary_unary(self._visualize)},
            "pipeline.RecorderInspect": {"dump": unary_unary(self._dump)},
        }

    # python-side inspection (used by in-process tests and the local runner)

    def hashes(self) -> list[int]:
        with self._lock:
            return list(self._hashes)

    def payloads(self) -> list[bytes]:
        with self._lock:
            return list(self._payloads)

    def wait_count(self, count: int, timeout: float = 10.0) -> bool:
        """Block until at least `count` messages arrived; False on timeout."""
        deadline = threading.TIMEOUT_MAX if timeout is None else timeout

        def reached() -> bool:
            return len(self._hashes) >= count

        with self._arrived:
            return self._arrived.wait_for(reached, deadline)
