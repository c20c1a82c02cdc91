"""Run event log: bounded buffer, subscriptions, JSON-lines export.

Every noteworthy runtime occurrence (calls, stream lifecycle, message moves,
errors) becomes one immutable OrchestrationEvent with a globally increasing
sequence number.  The log keeps a bounded ring of the current run's events;
subscribers get an atomic replay of that buffer followed by the live feed, so
a late subscriber sees a consistent prefix and never a gap or a duplicate.
"""

from __future__ import annotations

import hashlib
import json
import queue as queue_mod
import threading
from collections import deque
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterator

EVENT_KINDS = (
    "run-started",
    "run-stopped",
    "call-start",
    "call-end",
    "msg-dispatched",
    "msg-consumed",
    "stream-opened",
    "stream-closed",
    "rpc-error",
)


def payload_hash(payload: bytes) -> int:
    """64-bit content digest used for byte-identity checks across links."""
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


@dataclass(frozen=True)
class OrchestrationEvent:
    seq: int
    ts: str
    kind: str
    node: str = ""
    rpc: str = ""
    link: str = ""
    size: int = 0
    hash: int = 0
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "ts": self.ts,
            "kind": self.kind,
            "node": self.node,
            "rpc": self.rpc,
            "link": self.link,
            "size": self.size,
            "hash": self.hash,
            "detail": self.detail,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "OrchestrationEvent":
        return cls(**data)


_CLOSE = object()


class EventSubscription:
    """One subscriber's view: buffered replay, then live events, in order."""

    def __init__(self) -> None:
        self._queue: queue_mod.SimpleQueue = queue_mod.SimpleQueue()
        self._closed = False

    def _push(self, event: OrchestrationEvent) -> None:
        self._queue.put(event)

    def next(self, timeout: float | None = None) -> OrchestrationEvent | None:
        """Next event, or None on timeout or once the subscription is closed."""
        if self._closed:
            return None
        try:
            item = self._queue.get(timeout=timeout)
        except queue_mod.Empty:
            return None
        if item is _CLOSE:
            self._closed = True
            return None
        return item

    def __iter__(self) -> Iterator[OrchestrationEvent]:
        while True:
            event = self.next()
            if event is None:
                return
            yield event

    def close(self) -> None:
        self._queue.put(_CLOSE)


class EventLog:
    """Multi-producer event sink with a per-run ring buffer.

    Sequence numbers increase globally (never reset), so any subscriber sees
    strictly increasing seq even across run boundaries; ``begin_run`` only
    clears the replay buffer.
    """

    def __init__(self, capacity: int = 100_000) -> None:
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._buffer: deque[OrchestrationEvent] = deque(maxlen=capacity)
        self._lock = threading.Lock()
        self._seq = 0
        self._subscribers: list[EventSubscription] = []

    def begin_run(self, run_id: int) -> None:
        with self._lock:
            self._buffer.clear()

    def emit(
        self,
        kind: str,
        *,
        node: str = "",
        rpc: str = "",
        link: str = "",
        size: int = 0,
        hash: int = 0,
        detail: str = "",
    ) -> OrchestrationEvent:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        with self._lock:
            self._seq += 1
            event = OrchestrationEvent(
                seq=self._seq,
                ts=datetime.now(timezone.utc).isoformat(timespec="milliseconds"),
                kind=kind,
                node=node,
                rpc=rpc,
                link=link,
                size=size,
                hash=hash,
                detail=detail,
            )
            self._buffer.append(event)
            for sub in self._subscribers:
                sub._push(event)
        return event

    def snapshot(self) -> tuple[OrchestrationEvent, ...]:
        with self._lock:
            return tuple(self._buffer)

    def subscribe(self) -> EventSubscription:
        sub = EventSubscription()
        with self._lock:
            for event in self._buffer:
                sub._push(event)
            self._subscribers.append(sub)
        return sub

    def unsubscribe(self, sub: EventSubscription) -> None:
        with self._lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)
        sub.close()

    def close(self) -> None:
        with self._lock:
            subs = list(self._subscribers)
            self._subscribers.clear()
        for sub in subs:
            sub.close()

    def export(self) -> str:
        """Current run's buffer as JSON lines, newline-terminated."""
        events = self.snapshot()
        if not events:
            return ""
        return "\n".join(e.to_json() for e in events) + "\n"
